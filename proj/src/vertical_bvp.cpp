#include "stwave/vertical_bvp.hpp"

#include <fmt/format.h>

#include <cmath>

#include "stwave/error.hpp"

namespace stwave {

VerticalData VerticalData::zero(int n, int m, int nv) {
    VerticalData d;
    d.g = VecC::Zero(nv);
    d.f.assign(n, VecC::Zero(nv));
    d.k.assign(m, VecC::Zero(n));
    return d;
}

VerticalSolution VerticalSolution::zero(int n, int nv) {
    VerticalSolution s;
    s.u.assign(n, VecC::Zero(nv));
    s.p = VecC::Zero(nv);
    s.t.assign(n, VecC::Zero(nv));
    return s;
}

double VerticalSolution::max_abs() const {
    double r = p.size() ? p.cwiseAbs().maxCoeff() : 0.0;
    for (const auto& c : u) r = std::max(r, c.cwiseAbs().maxCoeff());
    return r;
}

StokesBvp::StokesBvp(const PhysicalConfig& cfg, const LayerMesh& mesh, const Xi& xi, double gamma_eff,
                     double rcond_floor)
    : cfg_(cfg), mesh_(mesh), xi_(xi), gamma_(gamma_eff) {
    if (mesh.layers() != cfg.m()) throw InputError("mesh and configuration disagree on the layer count");
    const double r = norm(xi);
    K_ = 2.0 * pi * r;
    if (r > 0.0) {
        es_ = {xi[0] / r, xi[1] / r};
        ep_ = {-es_[1], es_[0]};
    }
    const int m = cfg.m();
    std::vector<MatC> cm(m), cp(m);
    for (int l = 0; l < m; ++l) {
        const double mu = cfg.mu[l];
        const cplx W = gamma_ * cfg.rho[l] * 2.0 * pi * I * xi[0];
        const cplx iK = I * K_;
        MatC A = MatC::Zero(4, 4);  // (u_s, u_n, t_s, t_n)
        A(0, 1) = -iK;
        A(0, 2) = -1.0 / mu;
        A(1, 0) = -iK;
        A(2, 0) = W - 4.0 * mu * K_ * K_;
        A(2, 3) = -iK;
        A(3, 1) = W;
        A(3, 2) = -iK;
        cm[l] = A;
        MatC B = MatC::Zero(2, 2);  // (u_perp, t_perp)
        B(0, 1) = -1.0 / mu;
        B(1, 0) = W - mu * K_ * K_;
        cp[l] = B;
    }
    assemble(main_, 4, cm);
    rcond_ = main_.lu.rcond();
    if (cfg.n == 3) {
        assemble(perp_, 2, cp);
        rcond_ = std::min(rcond_, perp_.lu.rcond());
    }
    if (!(rcond_ >= rcond_floor))
        throw SolverError(fmt::format("ill-conditioned vertical system at xi = ({:.6g}, {:.6g}): rcond = {:.3e}",
                                      xi[0], xi[1], rcond_));
}

void StokesBvp::assemble(Block& b, int q, const std::vector<MatC>& coeff) {
    const int m = mesh_.layers();
    const int size = q * mesh_.total();
    MatC S = MatC::Zero(size, size);
    auto idx = [&](int l, int c, int j) { return q * mesh_.offset(l) + c * mesh_.count(l) + j; };
    const int half = q / 2;
    for (int l = 0; l < m; ++l) {
        const int d = mesh_.degree(l);
        const MatR& D = mesh_.diff(l);
        for (int c = 0; c < q; ++c) {
            for (int j = 0; j < d; ++j) {
                const int row = idx(l, c, j);
                for (int jj = 0; jj <= d; ++jj) S(row, idx(l, c, jj)) += D(j, jj);
                for (int c2 = 0; c2 < q; ++c2)
                    if (coeff[l](c, c2) != cplx(0.0)) S(row, idx(l, c2, j)) -= coeff[l](c, c2);
            }
            const int row = idx(l, c, d);
            if (c < half) {
                S(row, idx(l, c, 0)) = 1.0;
                if (l > 0) S(row, idx(l - 1, c, mesh_.degree(l - 1))) = -1.0;
            } else if (l + 1 < m) {
                S(row, idx(l + 1, c, 0)) = 1.0;
                S(row, idx(l, c, d)) = -1.0;
            } else {
                S(row, idx(l, c, d)) = -1.0;
            }
        }
    }
    b.q = q;
    b.lu.compute(S);
}

VecC StokesBvp::block_solve(const Block& b, const std::vector<VecC>& rhs, const std::vector<VecC>& jumps) const {
    const int q = b.q, half = q / 2;
    VecC x = VecC::Zero(q * mesh_.total());
    for (int l = 0; l < mesh_.layers(); ++l) {
        const int o = mesh_.offset(l), n = mesh_.count(l), d = mesh_.degree(l);
        for (int c = 0; c < q; ++c) {
            const int base = q * o + c * n;
            for (int j = 0; j < d; ++j) x(base + j) = rhs[c](o + j);
            x(base + d) = c < half ? cplx(0.0) : jumps[l](c - half);
        }
    }
    return b.lu.solve(x);
}

VerticalSolution StokesBvp::solve(const VerticalData& data) const {
    const int n = cfg_.n, m = cfg_.m(), NV = mesh_.total();
    const cplx iK = I * K_;

    // Rotate horizontal components onto (e_s, e_perp).
    auto along = [&](const std::vector<VecC>& v, const std::array<double, 2>& e) -> VecC {
        VecC r = e[0] * v[0];
        if (n == 3) r += e[1] * v[1];
        return r;
    };
    auto along_k = [&](const VecC& v, const std::array<double, 2>& e) -> cplx {
        return n == 3 ? e[0] * v(0) + e[1] * v(1) : e[0] * v(0);
    };

    std::vector<VecC> rhs(4, VecC::Zero(NV));
    VecC fs = along(data.f, es_);
    for (int l = 0; l < m; ++l) {
        const double mu = cfg_.mu[l];
        for (int j = mesh_.offset(l); j < mesh_.offset(l) + mesh_.count(l); ++j) {
            rhs[1](j) = data.g(j);
            rhs[2](j) = fs(j) - 2.0 * iK * mu * data.g(j);
            rhs[3](j) = data.f[n - 1](j);
        }
    }
    std::vector<VecC> jumps(m, VecC::Zero(2));
    for (int l = 0; l < m; ++l) {
        jumps[l](0) = along_k(data.k[l], es_);
        jumps[l](1) = data.k[l](n - 1);
    }
    VecC x = block_solve(main_, rhs, jumps);

    VerticalSolution s = VerticalSolution::zero(n, NV);
    VecC us(NV), ts(NV);
    for (int l = 0; l < m; ++l) {
        const int o = mesh_.offset(l), c = mesh_.count(l);
        for (int j = 0; j < c; ++j) {
            us(o + j) = x(4 * o + j);
            s.u[n - 1](o + j) = x(4 * o + c + j);
            ts(o + j) = x(4 * o + 2 * c + j);
            s.t[n - 1](o + j) = x(4 * o + 3 * c + j);
        }
    }
    // p = t_n + 2 mu d_y u_n. Differentiating u_n instead of using g keeps the
    // pressure independent of the (unenforced) top-node divergence data.
    VecC dun = dy(mesh_, s.u[n - 1]);
    for (int l = 0; l < m; ++l)
        for (int j = mesh_.offset(l); j < mesh_.offset(l) + mesh_.count(l); ++j)
            s.p(j) = s.t[n - 1](j) + 2.0 * cfg_.mu[l] * dun(j);

    VecC up = VecC::Zero(NV), tp = VecC::Zero(NV);
    if (n == 3) {
        std::vector<VecC> r2(2, VecC::Zero(NV));
        r2[1] = along(data.f, ep_);
        std::vector<VecC> j2(m, VecC::Zero(1));
        for (int l = 0; l < m; ++l) j2[l](0) = along_k(data.k[l], ep_);
        VecC y = block_solve(perp_, r2, j2);
        for (int l = 0; l < m; ++l) {
            const int o = mesh_.offset(l), c = mesh_.count(l);
            for (int j = 0; j < c; ++j) {
                up(o + j) = y(2 * o + j);
                tp(o + j) = y(2 * o + c + j);
            }
        }
    }
    for (int i = 0; i < n - 1; ++i) {
        s.u[i] = es_[i] * us + ep_[i] * up;
        s.t[i] = es_[i] * ts + ep_[i] * tp;
    }
    return s;
}

VerticalSolution StokesBvp::solve_normal_stress(const VecC& psi) const {
    const int n = cfg_.n, m = cfg_.m();
    VerticalData d = VerticalData::zero(n, m, mesh_.total());
    for (int l = 0; l < m; ++l) d.k[l](n - 1) = psi(l);
    return solve(d);
}

std::size_t StokesBvp::bytes() const {
    auto sz = [](const Block& b) {
        return std::size_t(b.lu.matrixLU().size()) * sizeof(cplx) + b.lu.permutationP().size() * sizeof(int);
    };
    return sizeof(*this) + sz(main_) + (cfg_.n == 3 ? sz(perp_) : 0);
}

// ---------------------------------------------------------------- helpers

VecC dy(const LayerMesh& mesh, const VecC& v) {
    VecC out(v.size());
    for (int l = 0; l < mesh.layers(); ++l) {
        const int o = mesh.offset(l), c = mesh.count(l);
        out.segment(o, c) = mesh.diff(l).cast<cplx>() * v.segment(o, c);
    }
    return out;
}

cplx integrate(const LayerMesh& mesh, const VecC& v, int upto_layer) {
    if (upto_layer < 0) upto_layer = mesh.layers() - 1;
    cplx s = 0.0;
    for (int l = 0; l <= upto_layer; ++l)
        s += mesh.weights(l).cast<cplx>().dot(v.segment(mesh.offset(l), mesh.count(l)));
    return s;
}

VecC antiderivative(const LayerMesh& mesh, const VecC& v) {
    VecC out(v.size());
    cplx base = 0.0;
    for (int l = 0; l < mesh.layers(); ++l) {
        const int o = mesh.offset(l), c = mesh.count(l);
        out.segment(o, c) = mesh.antideriv(l).cast<cplx>() * v.segment(o, c);
        out.segment(o, c).array() += base;
        base = out(o + c - 1);
    }
    return out;
}

namespace {

// Velocity gradient G(i, j) = d_j u_i at every node.
std::vector<std::vector<VecC>> gradient(const LayerMesh& mesh, const Xi& xi, const std::vector<VecC>& u) {
    const int n = static_cast<int>(u.size());
    std::vector<std::vector<VecC>> G(n, std::vector<VecC>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n - 1; ++j) G[i][j] = 2.0 * pi * I * xi[j] * u[i];
        G[i][n - 1] = dy(mesh, u[i]);
    }
    return G;
}

VecC layer_values(const LayerMesh& mesh, const std::vector<double>& per_layer) {
    VecC v(mesh.total());
    for (int l = 0; l < mesh.layers(); ++l) v.segment(mesh.offset(l), mesh.count(l)).setConstant(per_layer[l]);
    return v;
}

}  // namespace

std::vector<VecC> traction(const PhysicalConfig& cfg, const LayerMesh& mesh, const Xi& xi,
                           const VerticalSolution& s) {
    const int n = cfg.n;
    auto G = gradient(mesh, xi, s.u);
    VecC mu = layer_values(mesh, cfg.mu);
    std::vector<VecC> t(n);
    for (int i = 0; i < n; ++i) {
        t[i] = -mu.cwiseProduct(G[i][n - 1] + G[n - 1][i]);
        if (i == n - 1) t[i] += s.p;
    }
    return t;
}

VerticalData apply_stokes(const PhysicalConfig& cfg, const LayerMesh& mesh, const Xi& xi, double gamma_eff,
                          const VerticalSolution& s, bool use_traction) {
    const int n = cfg.n, m = cfg.m();
    auto G = gradient(mesh, xi, s.u);
    VecC mu = layer_values(mesh, cfg.mu);
    VecC rho = layer_values(mesh, cfg.rho);
    VerticalData d = VerticalData::zero(n, m, mesh.total());
    for (int i = 0; i < n; ++i) d.g += G[i][i];
    for (int i = 0; i < n; ++i) {
        VecC acc = VecC::Zero(mesh.total());
        for (int j = 0; j < n; ++j) {
            VecC Sij;
            if (use_traction && j == n - 1) {
                Sij = s.t[i];
            } else {
                Sij = -mu.cwiseProduct(G[i][j] + G[j][i]);
                if (i == j) Sij += s.p;
            }
            if (j < n - 1)
                acc += 2.0 * pi * I * xi[j] * Sij;
            else
                acc += dy(mesh, Sij);
        }
        d.f[i] = acc - gamma_eff * 2.0 * pi * I * xi[0] * rho.cwiseProduct(s.u[i]);
    }
    auto t = use_traction ? s.t : traction(cfg, mesh, xi, s);
    for (int l = 0; l < m; ++l)
        for (int i = 0; i < n; ++i) {
            cplx below = t[i](mesh.top_node(l));
            cplx above = l + 1 < m ? t[i](mesh.bottom_node(l + 1)) : cplx(0.0);
            d.k[l](i) = above - below;
        }
    return d;
}

cplx energy_form(const PhysicalConfig& cfg, const LayerMesh& mesh, const Xi& xi, double gamma,
                 const std::vector<VecC>& w, const std::vector<VecC>& v) {
    const int n = cfg.n;
    auto Gw = gradient(mesh, xi, w);
    auto Gv = gradient(mesh, xi, v);
    VecC mu = layer_values(mesh, cfg.mu);
    VecC rho = layer_values(mesh, cfg.rho);
    VecC density = VecC::Zero(mesh.total());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            VecC Dw = Gw[i][j] + Gw[j][i];
            VecC Dv = Gv[i][j] + Gv[j][i];
            density += 0.5 * mu.cwiseProduct(Dw.cwiseProduct(Dv.conjugate()));
        }
    const cplx d1 = 2.0 * pi * I * xi[0];
    for (int i = 0; i < n; ++i) density -= gamma * d1 * rho.cwiseProduct(w[i].cwiseProduct(v[i].conjugate()));
    return integrate(mesh, density);
}

double sym_grad_sq(const PhysicalConfig& cfg, const LayerMesh& mesh, const Xi& xi, const std::vector<VecC>& u) {
    const int n = cfg.n;
    auto G = gradient(mesh, xi, u);
    VecC density = VecC::Zero(mesh.total());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) density += (G[i][j] + G[j][i]).cwiseAbs2().cast<cplx>();
    return integrate(mesh, density).real();
}

}  // namespace stwave

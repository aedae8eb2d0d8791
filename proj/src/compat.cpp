#include "stwave/compat.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "stwave/error.hpp"
#include "stwave/parallel.hpp"
#include "stwave/vertical_bvp.hpp"

namespace stwave {

DualCache::DualCache(const Discretization& disc, int threads) : disc_(disc), entries_(disc.modes()) {
    const PhysicalConfig& cfg = disc.config();
    const TorusGrid& grid = disc.grid();
    const int m = cfg.m(), n = cfg.n;
    std::vector<int> todo;
    for (int k = 0; k < grid.modes(); ++k)
        if (grid.canonical(k) && !grid.nyquist(k)) todo.push_back(k);
    parallel_for(todo.size(), threads, [&](std::size_t i) {
        const int k = todo[i];
        StokesBvp bvp(cfg, disc.mesh(), grid.xi(k), -cfg.gamma);
        auto e = std::make_unique<DualEntry>();
        e->n_gamma = MatC::Zero(m, m);
        for (int j = 0; j < m; ++j) {
            VecC psi = VecC::Zero(m);
            psi(j) = 1.0;
            VerticalSolution s = bvp.solve_normal_stress(psi);
            for (int l = 0; l < m; ++l) e->n_gamma(l, j) = s.u[n - 1](disc.mesh().top_node(l));
            e->v.push_back(std::move(s.u));
            e->q.push_back(std::move(s.p));
        }
        entries_[k] = std::move(e);
    });
}

const DualEntry* DualCache::entry(int k, bool& conjugated) const {
    const TorusGrid& grid = disc_.grid();
    if (grid.nyquist(k)) return nullptr;
    conjugated = !grid.canonical(k);
    return entries_[conjugated ? grid.negate(k) : k].get();
}

std::size_t DualCache::bytes() const {
    std::size_t b = 0;
    for (const auto& e : entries_) {
        if (!e) continue;
        for (std::size_t k = 0; k < e->q.size(); ++k) {
            b += sizeof(cplx) * e->q[k].size();
            for (const VecC& c : e->v[k]) b += sizeof(cplx) * c.size();
        }
    }
    return b;
}

Field zero_mode_defect(const DataTuple& d, const Discretization& disc) {
    const int m = disc.m();
    Field out(1, m, disc.modes());
    for (int k = 0; k < disc.modes(); ++k) {
        VecC g = column(d.g, 0, k);
        for (int l = 0; l < m; ++l) out(0, l, k) = d.h(0, l, k) - integrate(disc.mesh(), g, l);
    }
    return out;
}

double data_norm(const DataTuple& d, const Discretization& disc) {
    const TorusGrid& grid = disc.grid();
    const LayerMesh& mesh = disc.mesh();
    const double s = d.s;
    double sq = std::pow(norms::hs_bulk(d.g, mesh, grid, 1.0 + s), 2) + std::pow(norms::hs_bulk(d.f, mesh, grid, s), 2) +
                std::pow(norms::hs_surface(d.k, grid, 0.5 + s), 2) + std::pow(norms::hs_surface(d.h, grid, 1.5 + s), 2);
    sq += std::pow(norms::hdot(zero_mode_defect(d, disc), grid, -1.0), 2);
    return std::sqrt(sq);
}

CompatMeasurement measure(const DataTuple& d, const DualCache& duals, double zero_tol, double reference_norm) {
    const Discretization& disc = duals.disc();
    const LayerMesh& mesh = disc.mesh();
    const TorusGrid& grid = disc.grid();
    const int n = disc.n(), m = disc.m(), M = disc.modes();
    CompatMeasurement out;
    out.phi = Field(1, m, M);
    VecC w(mesh.total());
    for (int l = 0; l < m; ++l) w.segment(mesh.offset(l), mesh.count(l)) = mesh.weights(l).cast<cplx>();

    for (int j = 0; j < M; ++j) {
        bool conj = false;
        const DualEntry* e = duals.entry(j, conj);
        if (!e) continue;
        // conj(V(xi)) is the stored profile when it belongs to -xi.
        auto cv = [&](const VecC& v) -> VecC { return conj ? v : VecC(v.conjugate()); };
        for (int k = 0; k < m; ++k) {
            cplx phi = 0.0;
            for (int i = 0; i < n; ++i) {
                VecC vi = cv(e->v[k][i]);
                for (int r = 0; r < mesh.total(); ++r) phi += w(r) * d.f(i, r, j) * vi(r);
                for (int l = 0; l < m; ++l) phi += d.k(i, l, j) * vi(mesh.top_node(l));
            }
            VecC qk = cv(e->q[k]);
            for (int r = 0; r < mesh.total(); ++r) phi -= w(r) * d.g(0, r, j) * qk(r);
            out.phi(0, k, j) = phi - d.h(0, k, j);
        }
    }

    out.data_norm = data_norm(d, disc);
    const int k0 = grid.index(0, 0);
    for (int k = 0; k < m; ++k) out.zero_mode = std::max(out.zero_mode, std::abs(out.phi(0, k, k0)));
    if (out.zero_mode > zero_tol * std::max(out.data_norm, reference_norm))
        throw InputError(fmt::format("{}: |phi(0)| = {:.3e} against data norm {:.3e}", msg::incompatible_zero_mode,
                                     out.zero_mode, out.data_norm));
    out.hdot_minus1 = norms::hdot(out.phi, grid, -1.0);
    out.h_three_halves = norms::hs_surface(out.phi, grid, 1.5 + d.s);
    return out;
}

double bilinear_form(const DataTuple& d, const Field& psi, const Discretization& disc) {
    const PhysicalConfig& cfg = disc.config();
    const LayerMesh& mesh = disc.mesh();
    const TorusGrid& grid = disc.grid();
    const int n = disc.n(), m = disc.m(), NV = disc.nodes(), M = disc.modes();

    Field q(1, NV, M), v(n, NV, M);
    for (int k = 0; k < M; ++k) {
        if (grid.nyquist(k)) continue;
        VecC ps = column(psi, 0, k);
        if (ps.cwiseAbs().maxCoeff() == 0.0) continue;
        StokesBvp bvp(cfg, mesh, grid.xi(k), -cfg.gamma);
        VerticalSolution s = bvp.solve_normal_stress(ps);
        set_column(q, 0, k, s.p);
        for (int i = 0; i < n; ++i) set_column(v, i, k, s.u[i]);
    }
    Field vtrace(n, m, M);
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < m; ++l)
            for (int k = 0; k < M; ++k) vtrace(i, l, k) = v(i, mesh.top_node(l), k);

    Fourier fft(grid);
    const int Np = fft.padded();
    const int P = fft.samples(Np);
    auto phys = [&](const Field& f) { return fft.to_physical(f, Np); };
    std::vector<double> wv(NV);
    for (int l = 0; l < m; ++l)
        for (int i = 0; i < mesh.count(l); ++i) wv[mesh.offset(l) + i] = mesh.weights(l)(i);

    // sum over components, rows and points of weight(row) * a * b
    auto bulk = [&](const std::vector<double>& a, const std::vector<double>& b, int nc) {
        double s = 0.0;
        for (int c = 0; c < nc; ++c)
            for (int r = 0; r < NV; ++r)
                for (int p = 0; p < P; ++p) {
                    const std::size_t i = (std::size_t(c) * NV + r) * P + p;
                    s += wv[r] * a[i] * b[i];
                }
        return s;
    };
    auto surf = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    double total = bulk(phys(d.f), phys(v), n) + surf(phys(d.k), phys(vtrace)) - bulk(phys(d.g), phys(q), 1) -
                   surf(phys(psi), phys(d.h));
    return total * grid.volume() / P;
}

}  // namespace stwave

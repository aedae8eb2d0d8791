#include "stwave/wave.hpp"

#include <fmt/format.h>

#include <cmath>

#include "stwave/vertical_bvp.hpp"

namespace stwave {

// ---------------------------------------------------------------- forcing

ForcingSpec ForcingSpec::zero(const Discretization& disc) {
    ForcingSpec s;
    s.f = Field(disc.n(), disc.nodes(), disc.modes());
    s.T = Field(disc.n() * disc.n(), disc.m(), disc.modes());
    return s;
}

namespace {

// T_m = -phi I for a real surface profile phi given by its samples.
ForcingSpec top_pressure(const Discretization& disc, double amplitude, const std::vector<double>& samples) {
    const TorusGrid& grid = disc.grid();
    Fourier F(grid);
    Field phi = F.transform(samples, 1, 1);
    zero_nyquist(phi, grid);
    ForcingSpec s = ForcingSpec::zero(disc);
    s.amplitude = amplitude;
    const int n = disc.n(), top = disc.m() - 1;
    for (int k = 0; k < disc.modes(); ++k)
        for (int i = 0; i < n; ++i) s.T(i * n + i, top, k) = -phi(0, 0, k);
    return s;
}

// Sample point p of an N-point (per direction) grid.
std::array<double, 2> grid_point(const TorusGrid& grid, int p, int N) {
    if (grid.n() == 2) return {grid.coordinate(p, N), 0.0};
    return {grid.coordinate(p / N, N), grid.coordinate(p % N, N)};
}

// Periodic distance along one direction.
double wrap(double d, double L) { return d - L * std::round(d / L); }

}  // namespace

ForcingSpec ForcingSpec::gaussian_bump(const Discretization& disc, double amplitude, double width) {
    const double c = disc.grid().period() / 2;
    return gaussian_bump(disc, amplitude, width, {c, disc.n() == 3 ? c : 0.0});
}

ForcingSpec ForcingSpec::gaussian_bump(const Discretization& disc, double amplitude, double width, const Xi& center) {
    if (!(width > 0.0)) throw InputError("Gaussian width must be positive");
    const TorusGrid& grid = disc.grid();
    const int N = grid.size(), P = Fourier(grid).samples(N);
    std::vector<double> s(P);
    for (int p = 0; p < P; ++p) {
        auto x = grid_point(grid, p, N);
        double r2 = std::pow(wrap(x[0] - center[0], grid.period()), 2);
        if (disc.n() == 3) r2 += std::pow(wrap(x[1] - center[1], grid.period()), 2);
        s[p] = std::exp(-r2 / (width * width));
    }
    return top_pressure(disc, amplitude, s);
}

ForcingSpec ForcingSpec::cosine_mode(const Discretization& disc, double amplitude, std::array<int, 2> k) {
    const TorusGrid& grid = disc.grid();
    const int N = grid.size(), P = Fourier(grid).samples(N);
    std::vector<double> s(P);
    for (int p = 0; p < P; ++p) {
        auto x = grid_point(grid, p, N);
        s[p] = std::cos(2.0 * pi * (k[0] * x[0] + k[1] * x[1]) / grid.period());
    }
    return top_pressure(disc, amplitude, s);
}

// ---------------------------------------------------------------- residual

DataTuple residual(const LinearSystem& sys, const ForcingSpec& forcing, const FlatState& x) {
    const Discretization& disc = sys.disc();
    const PhysicalConfig& cfg = disc.config();
    const TorusGrid& grid = disc.grid();
    const LayerMesh& mesh = disc.mesh();
    const int n = cfg.n, m = cfg.m(), NV = mesh.total(), M = grid.modes();
    Fourier F(grid);
    const int Np = F.padded(), S = F.samples(Np);

    if (!quarter_gap(cfg, F, x.eta, Np)) throw BoundViolation(msg::left_trust_region);
    const GeometryFields geo = geometry_fields(cfg, mesh, F, x.eta, Np);

    Field du(n * n, NV, M);  // component i * n + k: d_k u_i
    for (int i = 0; i < n; ++i) {
        Field ui = x.u.component(i);
        for (int k = 0; k < n - 1; ++k) du.set_component(i * n + k, derivative(ui, grid, k));
        du.set_component(i * n + n - 1, vertical_derivative(ui, mesh));
    }
    const auto u = F.to_physical(x.u, Np);
    const auto dup = F.to_physical(du, Np);
    const auto p = F.to_physical(x.p, Np);

    auto at = [S](int c, int row, int nrows, int pt) { return (std::size_t(c) * nrows + row) * S + pt; };
    std::vector<double> divflux(std::size_t(n) * NV * S), momflux(std::size_t(n) * n * NV * S),
        adv(std::size_t(n) * NV * S), stress(std::size_t(n) * n * NV * S);
    for (int node = 0; node < NV; ++node) {
        const int l = mesh.layer_of_node(node);
        const double mu = cfg.mu[l], rho = cfg.rho[l];
        for (int pt = 0; pt < S; ++pt) {
            double A[3][3], G[3][3], Sg[3][3], uv[3];
            const double J = geo.Jat(node, pt);
            for (int i = 0; i < n; ++i) {
                uv[i] = u[at(i, node, NV, pt)];
                for (int k = 0; k < n; ++k) A[i][k] = geo.Aat(i, k, node, pt);
            }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double s = 0.0;
                    for (int k = 0; k < n; ++k) s += A[j][k] * dup[at(i * n + k, node, NV, pt)];
                    G[i][j] = s;
                }
            const double pv = p[at(0, node, NV, pt)];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) Sg[i][j] = (i == j ? pv : 0.0) - mu * (G[i][j] + G[j][i]);
            for (int k = 0; k < n; ++k) {
                double s = 0.0;
                for (int j = 0; j < n; ++j) s += A[j][k] * uv[j];
                divflux[at(k, node, NV, pt)] = J * s;
            }
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < n; ++k) {
                    double s = 0.0;
                    for (int j = 0; j < n; ++j) s += A[j][k] * Sg[i][j];
                    momflux[at(i * n + k, node, NV, pt)] = J * s;
                }
                double a = 0.0;
                for (int j = 0; j < n; ++j) a += (uv[j] - (j == 0 ? cfg.gamma : 0.0)) * G[i][j];
                adv[at(i, node, NV, pt)] = rho * a;
                for (int j = 0; j < n; ++j) stress[at(i * n + j, node, NV, pt)] = Sg[i][j];
            }
        }
    }

    // Flux divergence: sum_k d_k of component k (or i * n + k) of a spectral field.
    auto flux_div = [&](const Field& flux, int base) {
        Field out(1, NV, M);
        for (int k = 0; k < n - 1; ++k) out += derivative(flux.component(base + k), grid, k);
        out += vertical_derivative(flux.component(base + n - 1), mesh);
        return out;
    };

    DataTuple r = DataTuple::zero(disc);
    r.g = flux_div(F.from_physical(divflux, n, NV, Np), 0);

    const Field mflux = F.from_physical(momflux, n * n, NV, Np);
    Field mdiv(n, NV, M);
    for (int i = 0; i < n; ++i) mdiv.set_component(i, flux_div(mflux, i * n));
    auto mphys = F.to_physical(mdiv, Np);
    for (int i = 0; i < n; ++i)
        for (int node = 0; node < NV; ++node)
            for (int pt = 0; pt < S; ++pt) {
                const std::size_t q = at(i, node, NV, pt);
                mphys[q] = mphys[q] / geo.Jat(node, pt) + adv[q];
            }
    r.f = F.from_physical(mphys, n, NV, Np);
    r.f.axpy(-forcing.amplitude, forcing.f);

    // Interface rows.
    const auto eta = F.to_physical(x.eta, Np);
    const auto H = F.to_physical(mean_curvature(x.eta, F, Np), Np);
    Field Tscaled = forcing.T;
    Tscaled *= forcing.amplitude;
    const auto T = F.to_physical(Tscaled, Np);
    std::vector<double> jump(std::size_t(n) * m * S), kin(std::size_t(m) * S);
    for (int l = 0; l < m; ++l) {
        const int below = mesh.top_node(l), above = l + 1 < m ? mesh.bottom_node(l + 1) : -1;
        const double load = cfg.gravity * cfg.density_jump(l);
        for (int pt = 0; pt < S; ++pt) {
            double N[3];
            for (int c = 0; c < n; ++c) N[c] = geo.Nat(c, l, pt);
            const double e = eta[at(0, l, m, pt)], h = H[at(0, l, m, pt)];
            for (int i = 0; i < n; ++i) {
                double s = 0.0;
                for (int j = 0; j < n; ++j) {
                    double sa = above >= 0 ? stress[at(i * n + j, above, NV, pt)] : 0.0;
                    s += (sa - stress[at(i * n + j, below, NV, pt)]) * N[j];
                    s -= T[at(i * n + j, l, m, pt)] * N[j];
                }
                s -= (load * e + cfg.sigma[l] * h) * N[i];
                jump[at(i, l, m, pt)] = s;
            }
            double un = 0.0;
            for (int c = 0; c < n; ++c) un += u[at(c, below, NV, pt)] * N[c];
            kin[at(0, l, m, pt)] = un;
        }
    }
    r.k = F.from_physical(jump, n, m, Np);
    r.h = F.from_physical(kin, 1, m, Np);
    r.h.axpy(cfg.gamma, derivative(x.eta, grid, 0));

    for (Field* fld : {&r.g, &r.f, &r.k, &r.h}) zero_nyquist(*fld, grid);
    sys.project(r);
    return r;
}

// ---------------------------------------------------------------- Picard

WaveResult solve_wave(const LinearSystem& sys, const ForcingSpec& forcing, const WaveOptions& options) {
    const Discretization& disc = sys.disc();
    const PhysicalConfig& cfg = disc.config();
    Fourier F(disc.grid());
    double bound = 1e300;
    for (int l = 0; l < cfg.m(); ++l) bound = std::min(bound, cfg.thickness(l));
    bound /= 4.0;

    WaveResult out;
    IterationReport& rep = out.report;
    FlatState& x = out.state;
    x = FlatState::zero(disc, sys.mode());

    auto fail = [&](ExitCode code, const std::string& why) {
        rep.verdict = why;
        throw WaveFailure(code, why, rep);
    };
    auto eval = [&](DataTuple& r) {
        try {
            r = residual(sys, forcing, x);
        } catch (const BoundViolation&) {
            fail(ExitCode::bound, msg::left_trust_region);
        }
        r.s = options.s;
    };

    DataTuple r;
    eval(r);
    rep.forcing_norm = data_norm(r, disc);
    const double target = options.rtol * rep.forcing_norm + options.atol;
    int growth = 0;
    for (int it = 0;; ++it) {
        IterationRecord rec;
        rec.residual = data_norm(r, disc);
        rec.state_norm = sys.state_norm(x, options.s);
        rec.max_surface = max_surface(F, x.eta, F.padded());
        rec.margin = bound - rec.max_surface;
        rec.zero_mode = 0.0;
        const Field defect = zero_mode_defect(r, disc);
        const int k0 = disc.grid().index(0, 0);
        for (int l = 0; l < cfg.m(); ++l) rec.zero_mode = std::max(rec.zero_mode, std::abs(defect(0, l, k0)));
        if (!rep.iterations.empty()) {
            const double prev = rep.iterations.back().residual;
            const double ratio = prev > 0.0 ? rec.residual / prev : 0.0;
            rep.max_ratio = std::max(rep.max_ratio, ratio);
            if (ratio >= 1.0) {
                rep.monotone = false;
                ++growth;
            } else {
                growth = 0;
            }
        }
        rep.iterations.push_back(rec);
        if (rec.residual <= target) {
            if (rec.margin < 0.0) fail(ExitCode::bound, msg::left_trust_region);
            rep.converged = true;
            rep.verdict = fmt::format("converged in {} iterations", it);
            return out;
        }
        if (growth >= 3) fail(ExitCode::nonconvergence, "Picard iteration diverged");
        if (it >= options.max_iterations)
            fail(ExitCode::nonconvergence,
                 fmt::format("no convergence within {} iterations (residual {:.3e}, target {:.3e})",
                             options.max_iterations, rec.residual, target));
        InverseResult step;
        try {
            step = sys.inverse(r, 1e-8, rep.forcing_norm);
        } catch (const BoundViolation& e) {
            fail(ExitCode::bound, e.what());
        }
        x -= step.state;
        eval(r);
    }
}

// ---------------------------------------------------------------- Eulerian view

EulerianView::EulerianView(const Discretization& disc, const FlatState& x, const Field* force)
    : disc_(disc), x_(x), force_(force) {}

int EulerianView::layer(const Point& X) const {
    return locate_layer(disc_.config().a, x_.eta, disc_.grid(), X);
}

double EulerianView::surface(int l, const Point& X) const {
    return disc_.config().a[l] + surface_value(x_.eta, disc_.grid(), l, X);
}

std::vector<double> EulerianView::sample(const Field& f, int c0, int nc, const Point& X, int layer) const {
    const TorusGrid& grid = disc_.grid();
    const LayerMesh& mesh = disc_.mesh();
    const Point P = unflatten_map(disc_.config().a, x_.eta, grid, layer, X);
    const VecR row = mesh.interp_row(layer, P[2]);
    VecC phase(grid.modes());
    for (int k = 0; k < grid.modes(); ++k) {
        const Xi xi = grid.xi(k);
        phase(k) = std::exp(2.0 * pi * I * (xi[0] * P[0] + xi[1] * P[1]));
    }
    std::vector<double> out(nc, 0.0);
    const int o = mesh.offset(layer);
    for (int c = 0; c < nc; ++c)
        for (int j = 0; j < mesh.count(layer); ++j) {
            cplx v = 0.0;
            for (int k = 0; k < grid.modes(); ++k) v += f(c0 + c, o + j, k) * phase(k);
            out[c] += row(j) * v.real();
        }
    return out;
}

std::vector<double> EulerianView::velocity(const Point& X, int layer) const {
    return sample(x_.u, 0, disc_.n(), X, layer);
}

double EulerianView::pressure(const Point& X, int layer) const { return sample(x_.p, 0, 1, X, layer)[0]; }

std::vector<double> EulerianView::force(const Point& X, int layer) const {
    if (!force_) return std::vector<double>(disc_.n(), 0.0);
    return sample(*force_, 0, disc_.n(), X, layer);
}

EulerianBundle unflatten(const Discretization& disc, const FlatState& x, const std::vector<Point>& points) {
    EulerianView view(disc, x);
    EulerianBundle b;
    b.points = points;
    for (const Point& X : points) {
        const int l = view.layer(X);
        if (l < 0)
            throw InputError(fmt::format("evaluation point ({:.6g}, {:.6g}, {:.6g}) lies outside the deformed slab", X[0],
                                         X[1], X[2]));
        b.layers.push_back(l);
        b.velocity.push_back(view.velocity(X, l));
        b.pressure.push_back(view.pressure(X, l));
    }
    b.surfaces = x.eta;
    const int k0 = disc.grid().index(0, 0);
    for (int l = 0; l < disc.m(); ++l) b.surfaces(0, l, k0) += disc.config().a[l];
    return b;
}

double eulerian_momentum_residual(const EulerianView& view, const PhysicalConfig& cfg, const Point& X, double h,
                                  double* divergence) {
    const int n = cfg.n;
    const int l = view.layer(X);
    if (l < 0) throw InputError("finite-difference point lies outside the deformed slab");
    // Coordinate index of direction d in a Point: horizontal 0..n-2, vertical 2.
    auto axis = [n](int d) { return d == n - 1 ? 2 : d; };
    auto shifted = [&](int d1, double s1, int d2, double s2) {
        Point Y = X;
        if (d1 >= 0) Y[axis(d1)] += s1;
        if (d2 >= 0) Y[axis(d2)] += s2;
        if (view.layer(Y) != l) throw InputError("finite-difference stencil crosses an interface");
        return Y;
    };
    const auto v0 = view.velocity(X, l);
    std::vector<std::vector<double>> vp(n), vm(n);
    std::vector<double> qp(n), qm(n);
    for (int d = 0; d < n; ++d) {
        vp[d] = view.velocity(shifted(d, h, -1, 0), l);
        vm[d] = view.velocity(shifted(d, -h, -1, 0), l);
        qp[d] = view.pressure(shifted(d, h, -1, 0), l);
        qm[d] = view.pressure(shifted(d, -h, -1, 0), l);
    }
    // Second derivatives d_d d_e v_i.
    std::vector<std::vector<std::vector<double>>> dd(n, std::vector<std::vector<double>>(n, std::vector<double>(n)));
    for (int d = 0; d < n; ++d)
        for (int e = d; e < n; ++e) {
            if (d == e) {
                for (int i = 0; i < n; ++i) dd[d][d][i] = (vp[d][i] - 2.0 * v0[i] + vm[d][i]) / (h * h);
                continue;
            }
            auto pp = view.velocity(shifted(d, h, e, h), l), pm = view.velocity(shifted(d, h, e, -h), l);
            auto mp = view.velocity(shifted(d, -h, e, h), l), mm = view.velocity(shifted(d, -h, e, -h), l);
            for (int i = 0; i < n; ++i) dd[d][e][i] = dd[e][d][i] = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h);
        }
    auto grad = [&](int d, int i) { return (vp[d][i] - vm[d][i]) / (2.0 * h); };
    const double mu = cfg.mu[l], rho = cfg.rho[l];
    const auto F = view.force(X, l);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        double r = (qp[i] - qm[i]) / (2.0 * h) - F[i];
        for (int j = 0; j < n; ++j) {
            r += rho * (v0[j] - (j == 0 ? cfg.gamma : 0.0)) * grad(j, i);
            r -= mu * (dd[j][j][i] + dd[j][i][j]);
        }
        worst = std::max(worst, std::abs(r));
    }
    if (divergence) {
        double dv = 0.0;
        for (int d = 0; d < n; ++d) dv += grad(d, d);
        *divergence = dv;
    }
    return worst;
}

}  // namespace stwave

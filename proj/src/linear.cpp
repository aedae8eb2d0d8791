#include "stwave/linear.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>

#include "stwave/error.hpp"
#include "stwave/geometry.hpp"
#include "stwave/parallel.hpp"
#include "stwave/symbols.hpp"

namespace stwave {

VecC gravity_shift(const Discretization& disc, const Field& eta, int k) {
    const PhysicalConfig& cfg = disc.config();
    const LayerMesh& mesh = disc.mesh();
    VecC out = VecC::Zero(mesh.total());
    for (int r = 0; r < mesh.total(); ++r)
        for (int l = mesh.layer_of_node(r); l < cfg.m(); ++l)
            out(r) += cfg.gravity * cfg.density_jump(l) * eta(0, l, k);
    return out;
}

LinearSystem::LinearSystem(const Discretization& disc, Mode mode, int threads, std::size_t cache_bytes)
    : disc_(disc), mode_(mode), threads_(std::max(1, threads)), entries_(disc.modes()) {
    const PhysicalConfig& cfg = disc.config();
    const TorusGrid& grid = disc.grid();
    const LayerMesh& mesh = disc.mesh();
    if (cfg.gamma == 0.0) throw InputError("the linear inverse needs a nonzero wave speed gamma");
    cfg.validate(true);
    cfg.validate_mode(mode);

    for (int l = 0; l < mesh.layers(); ++l) {
        const VecR& y = mesh.nodes(l);
        const int d = mesh.degree(l);
        VecR w(d);
        for (int j = 0; j < d; ++j) {
            long double p = 1.0L;
            for (int i = 0; i < d; ++i)
                if (i != j) p *= (static_cast<long double>(y(d)) - y(i)) / (static_cast<long double>(y(j)) - y(i));
            w(j) = static_cast<double>(p);
        }
        extrap_.push_back(w);
    }

    duals_ = std::make_unique<DualCache>(disc, threads_);

    std::vector<int> todo;
    for (int k = 0; k < grid.modes(); ++k)
        if (grid.canonical(k) && !grid.nyquist(k)) todo.push_back(k);
    std::atomic<std::size_t> used{0};
    const int m = cfg.m(), n = cfg.n;
    parallel_for(todo.size(), threads_, [&](std::size_t i) {
        const int k = todo[i];
        const Xi xi = grid.xi(k);
        auto e = std::make_unique<Entry>();
        e->bvp = std::make_unique<StokesBvp>(cfg, mesh, xi, cfg.gamma);
        e->p_inv = MatC::Zero(m, m);
        if (norm(xi) > 0.0) {
            MatC n_minus(m, m);
            for (int j = 0; j < m; ++j) {
                VecC psi = VecC::Zero(m);
                psi(j) = 1.0;
                VerticalSolution s = e->bvp->solve_normal_stress(psi);
                for (int l = 0; l < m; ++l) n_minus(l, j) = s.u[n - 1](mesh.top_node(l));
            }
            PSymbol p = assemble_p(cfg, xi, mode, n_minus);
            e->p_inv = p.p_inv;
        }
        const std::size_t b = e->bvp->bytes();
        if (used.fetch_add(b) + b > cache_bytes) {
            used.fetch_sub(b);
            e->bvp.reset();
        }
        entries_[k] = std::move(e);
    });
    cached_ = used.load();
}

const LinearSystem::Entry* LinearSystem::entry(int k, bool& conjugated) const {
    const TorusGrid& grid = disc_.grid();
    if (grid.nyquist(k)) return nullptr;
    conjugated = !grid.canonical(k);
    return entries_[conjugated ? grid.negate(k) : k].get();
}

MatC LinearSystem::p_inv(int k) const {
    bool conj = false;
    const Entry* e = entry(k, conj);
    const int m = disc_.m();
    if (!e) return MatC::Zero(m, m);
    return conj ? MatC(e->p_inv.conjugate()) : e->p_inv;
}

void LinearSystem::extrapolate_top(VecC& v) const {
    const LayerMesh& mesh = disc_.mesh();
    for (int l = 0; l < mesh.layers(); ++l) {
        const int o = mesh.offset(l), d = mesh.degree(l);
        v(o + d) = extrap_[l].cast<cplx>().dot(v.segment(o, d));
    }
}

void LinearSystem::project(DataTuple& d) const {
    for (int k = 0; k < disc_.modes(); ++k) {
        VecC g = column(d.g, 0, k);
        extrapolate_top(g);
        set_column(d.g, 0, k, g);
        for (int i = 0; i < d.f.nc; ++i) {
            VecC f = column(d.f, i, k);
            extrapolate_top(f);
            set_column(d.f, i, k, f);
        }
    }
}

DataTuple LinearSystem::forward(const FlatState& x) const {
    const PhysicalConfig& cfg = disc_.config();
    const TorusGrid& grid = disc_.grid();
    const LayerMesh& mesh = disc_.mesh();
    const int n = cfg.n, m = cfg.m();
    DataTuple d = DataTuple::zero(disc_);
    parallel_for(grid.modes(), threads_, [&](std::size_t kk) {
        const int k = static_cast<int>(kk);
        if (grid.nyquist(k)) return;
        const Xi xi = grid.xi(k);
        VerticalSolution s = VerticalSolution::zero(n, mesh.total());
        for (int i = 0; i < n; ++i) s.u[i] = column(x.u, i, k);
        s.p = column(x.p, 0, k);
        VerticalData v = apply_stokes(cfg, mesh, xi, cfg.gamma, s);
        extrapolate_top(v.g);
        set_column(d.g, 0, k, v.g);
        for (int i = 0; i < n; ++i) {
            extrapolate_top(v.f[i]);
            set_column(d.f, i, k, v.f[i]);
        }
        MatC o = capillary_matrix(cfg, xi, mode_);
        const cplx d1 = 2.0 * pi * I * xi[0];
        for (int l = 0; l < m; ++l) {
            for (int i = 0; i < n; ++i) d.k(i, l, k) = v.k[l](i);
            d.k(n - 1, l, k) += o(l, l) * x.eta(0, l, k);
            d.h(0, l, k) = s.u[n - 1](mesh.top_node(l)) + cfg.gamma * d1 * x.eta(0, l, k);
        }
    });
    return d;
}

InverseResult LinearSystem::inverse(const DataTuple& d, double consistency_tol, double reference_norm) const {
    const PhysicalConfig& cfg = disc_.config();
    const TorusGrid& grid = disc_.grid();
    const LayerMesh& mesh = disc_.mesh();
    const int n = cfg.n, m = cfg.m(), NV = mesh.total();

    InverseResult out;
    out.report.measurement = measure(d, *duals_, 1e-9, reference_norm);
    const Field& phi = out.report.measurement.phi;
    FlatState& x = out.state;
    x = FlatState::zero(disc_, mode_);
    Field residual(1, m, grid.modes());

    parallel_for(grid.modes(), threads_, [&](std::size_t kk) {
        const int k = static_cast<int>(kk);
        bool conj = false;
        const Entry* e = entry(k, conj);
        if (!e) return;
        const Xi xi = grid.xi(k);
        const cplx d1 = 2.0 * pi * I * xi[0];

        // Surfaces from the compatibility measurement.
        VecC eta = p_inv(k) * column(phi, 0, k);
        for (int l = 0; l < m; ++l) x.eta(0, l, k) = eta(l);

        // Modified data.
        VerticalData v = VerticalData::zero(n, m, NV);
        v.g = column(d.g, 0, k);
        for (int i = 0; i < n; ++i) v.f[i] = column(d.f, i, k);
        for (int l = 0; l < m; ++l)
            for (int i = 0; i < n; ++i) v.k[l](i) = d.k(i, l, k);
        VecC shift = gravity_shift(disc_, x.eta, k);
        const double lap = -4.0 * pi * pi * std::pow(norm(xi), 2);
        if (mode_ == Mode::surface_tension) {
            for (int i = 0; i < n - 1; ++i) v.f[i] += 2.0 * pi * I * xi[i] * shift;
            for (int l = 0; l < m; ++l) v.k[l](n - 1) += cfg.sigma[l] * lap * eta(l);
        } else {
            for (int l = 0; l < m; ++l) v.k[l](n - 1) += cfg.gravity * cfg.density_jump(l) * eta(l);
        }

        // Stress-data solve; -xi reuses the solver of xi through conjugation.
        auto flip = [&](VerticalData& a) {
            a.g = a.g.conjugate();
            for (auto& c : a.f) c = c.conjugate();
            for (auto& c : a.k) c = c.conjugate();
        };
        if (conj) flip(v);
        std::unique_ptr<StokesBvp> local;
        const StokesBvp* bvp = e->bvp.get();
        if (!bvp) {
            const Xi xc = grid.xi(conj ? grid.negate(k) : k);
            local = std::make_unique<StokesBvp>(cfg, mesh, xc, cfg.gamma);
            bvp = local.get();
        }
        VerticalSolution s = bvp->solve(v);
        if (conj) {
            s.p = s.p.conjugate();
            for (auto& c : s.u) c = c.conjugate();
        }
        if (mode_ == Mode::surface_tension) s.p -= shift;
        set_column(x.p, 0, k, s.p);
        for (int i = 0; i < n; ++i) set_column(x.u, i, k, s.u[i]);

        // Overdetermined check: normal traces against the modified kinematic data.
        for (int l = 0; l < m; ++l)
            residual(0, l, k) = s.u[n - 1](mesh.top_node(l)) - (d.h(0, l, k) - cfg.gamma * d1 * eta(l));
    });

    InverseReport& r = out.report;
    const double scale = std::max(r.measurement.data_norm, reference_norm);
    r.consistency = norms::hs_surface(residual, grid, 1.5 + d.s);
    r.relative = scale > 0.0 ? r.consistency / scale : r.consistency;
    Fourier F(grid);
    r.max_surface = max_surface(F, x.eta, F.padded());
    r.admissible = quarter_gap(cfg, F, x.eta, F.padded());
    if (!(r.relative <= consistency_tol))
        throw BoundViolation(fmt::format("overdetermined consistency check failed: residual {:.3e} relative to data",
                                         r.relative));
    return out;
}

double LinearSystem::state_norm(const FlatState& x, double s) const {
    const TorusGrid& grid = disc_.grid();
    const LayerMesh& mesh = disc_.mesh();
    Field q = x.p;
    for (int k = 0; k < grid.modes(); ++k) {
        VecC c = column(q, 0, k) + gravity_shift(disc_, x.eta, k);
        set_column(q, 0, k, c);
    }
    double sq = std::pow(norms::hs_bulk(x.u, mesh, grid, 2.0 + s), 2) + std::pow(norms::hs_bulk(q, mesh, grid, 1.0 + s), 2) +
                std::pow(norms::anisotropic(x.eta, grid, 2.5 + s), 2);
    return std::sqrt(sq);
}

}  // namespace stwave

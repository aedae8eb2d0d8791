#include "stwave/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "stwave/vertical_bvp.hpp"

namespace stwave::sampling {

namespace {

cplx chebyshev_sum(const std::vector<cplx>& c, double x) {
    const double t = std::acos(std::clamp(x, -1.0, 1.0));
    cplx s = 0.0;
    for (std::size_t p = 0; p < c.size(); ++p) s += c[p] * std::cos(double(p) * t);
    return s;
}

std::vector<cplx> coefficients(int degree, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    std::vector<cplx> c(degree + 1);
    for (int p = 0; p <= degree; ++p) c[p] = scale * std::pow(0.7, p) * cplx(nd(rng), nd(rng));
    return c;
}

}  // namespace

Field bulk(const Discretization& disc, int nc, std::mt19937_64& rng, int degree) {
    const TorusGrid& g = disc.grid();
    const LayerMesh& mesh = disc.mesh();
    Field f(nc, mesh.total(), g.modes());
    for (int k = 0; k < g.modes(); ++k) {
        if (g.nyquist(k)) continue;
        const double decay = std::exp(-norm(g.xi(k)));
        for (int c = 0; c < nc; ++c)
            for (int l = 0; l < mesh.layers(); ++l) {
                auto coef = coefficients(degree, decay, rng);
                for (int j = 0; j < mesh.count(l); ++j) {
                    double x = 2.0 * (mesh.nodes(l)(j) - mesh.bottom(l)) / (mesh.top(l) - mesh.bottom(l)) - 1.0;
                    f(c, mesh.offset(l) + j, k) = chebyshev_sum(coef, x);
                }
            }
    }
    symmetrize(f, g);
    return f;
}

Field continuous(const Discretization& disc, int nc, std::mt19937_64& rng, int degree) {
    const TorusGrid& g = disc.grid();
    const LayerMesh& mesh = disc.mesh();
    const double H = mesh.top(mesh.layers() - 1);
    Field f(nc, mesh.total(), g.modes());
    for (int k = 0; k < g.modes(); ++k) {
        if (g.nyquist(k)) continue;
        const double decay = std::exp(-norm(g.xi(k)));
        for (int c = 0; c < nc; ++c) {
            auto coef = coefficients(degree, decay, rng);
            const cplx base = chebyshev_sum(coef, -1.0);
            for (int l = 0; l < mesh.layers(); ++l)
                for (int j = 0; j < mesh.count(l); ++j)
                    f(c, mesh.offset(l) + j, k) = chebyshev_sum(coef, 2.0 * mesh.nodes(l)(j) / H - 1.0) - base;
        }
    }
    symmetrize(f, g);
    return f;
}

Field interfaces(const Discretization& disc, int nc, std::mt19937_64& rng, bool zero_mean) {
    const TorusGrid& g = disc.grid();
    std::normal_distribution<double> nd;
    Field h(nc, disc.m(), g.modes());
    for (int k = 0; k < g.modes(); ++k) {
        if (g.nyquist(k)) continue;
        const double decay = std::exp(-norm(g.xi(k)));
        for (int c = 0; c < nc; ++c)
            for (int l = 0; l < disc.m(); ++l) h(c, l, k) = decay * cplx(nd(rng), nd(rng));
    }
    if (zero_mean)
        for (int c = 0; c < nc; ++c)
            for (int l = 0; l < disc.m(); ++l) h(c, l, g.index(0, 0)) = 0.0;
    symmetrize(h, g);
    return h;
}

DataTuple data(const Discretization& disc, std::mt19937_64& rng) {
    DataTuple d = DataTuple::zero(disc);
    d.g = bulk(disc, 1, rng);
    d.f = bulk(disc, disc.n(), rng);
    d.k = interfaces(disc, disc.n(), rng);
    d.h = interfaces(disc, 1, rng);
    const int k0 = disc.grid().index(0, 0);
    VecC g0 = column(d.g, 0, k0);
    for (int l = 0; l < disc.m(); ++l) d.h(0, l, k0) = integrate(disc.mesh(), g0, l).real();
    return d;
}

FlatState state(const Discretization& disc, Mode mode, std::mt19937_64& rng) {
    FlatState x = FlatState::zero(disc, mode);
    x.p = bulk(disc, 1, rng);
    x.u = continuous(disc, disc.n(), rng);
    x.eta = interfaces(disc, 1, rng, true);
    return x;
}

}  // namespace stwave::sampling

#include "stwave/geometry.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "stwave/error.hpp"

namespace stwave {

namespace {

void check_layer(const std::vector<double>& a, int layer) {
    if (layer < 0 || layer >= static_cast<int>(a.size()))
        throw InputError(fmt::format("layer index {} out of range", layer));
}

double base(const std::vector<double>& a, int layer) { return layer == 0 ? 0.0 : a[layer - 1]; }

}  // namespace

double flatten_height(const std::vector<double>& a, int layer, double eta_below, double eta_above, double y) {
    check_layer(a, layer);
    const double lo = base(a, layer), hi = a[layer], h = hi - lo;
    const double tol = 1e-14 * hi;
    if (y < lo - tol || y > hi + tol)
        throw InputError(fmt::format("height {} lies outside layer {} = [{}, {}]", y, layer, lo, hi));
    if (layer == 0) eta_below = 0.0;
    const double theta = (y - lo) / h;
    return (1.0 - theta) * (lo + eta_below) + theta * (hi + eta_above);
}

double unflatten_height(const std::vector<double>& a, int layer, double eta_below, double eta_above, double Y) {
    check_layer(a, layer);
    const double lo = base(a, layer), hi = a[layer], h = hi - lo;
    if (layer == 0) eta_below = 0.0;
    const double bot = lo + eta_below, top = hi + eta_above;
    const double span = top - bot;
    if (!(span > 1e-8 * h)) throw InputError(fmt::format("degenerate layer {}: deformed thickness {}", layer, span));
    const double tol = 1e-12 * hi;
    if (Y < bot - tol || Y > top + tol)
        throw InputError(fmt::format("height {} lies outside deformed layer {} = [{}, {}]", Y, layer, bot, top));
    return lo + h * (Y - bot) / span;
}

double surface_value(const Field& eta, const TorusGrid& grid, int l, const Point& x) {
    cplx s = 0.0;
    for (int k = 0; k < grid.modes(); ++k) {
        cplx c = eta(0, l, k);
        if (c == cplx(0.0)) continue;
        Xi xi = grid.xi(k);
        s += c * std::exp(2.0 * pi * I * (xi[0] * x[0] + xi[1] * x[1]));
    }
    return s.real();
}

std::array<double, 2> surface_gradient(const Field& eta, const TorusGrid& grid, int l, const Point& x) {
    cplx g0 = 0.0, g1 = 0.0;
    for (int k = 0; k < grid.modes(); ++k) {
        cplx c = eta(0, l, k);
        if (c == cplx(0.0) || grid.nyquist(k)) continue;
        Xi xi = grid.xi(k);
        cplx e = c * std::exp(2.0 * pi * I * (xi[0] * x[0] + xi[1] * x[1])) * 2.0 * pi * I;
        g0 += xi[0] * e;
        g1 += xi[1] * e;
    }
    return {g0.real(), g1.real()};
}

Point flatten_map(const std::vector<double>& a, const Field& eta, const TorusGrid& grid, int layer, const Point& p) {
    check_layer(a, layer);
    double below = layer > 0 ? surface_value(eta, grid, layer - 1, p) : 0.0;
    double above = surface_value(eta, grid, layer, p);
    return {p[0], p[1], flatten_height(a, layer, below, above, p[2])};
}

Point unflatten_map(const std::vector<double>& a, const Field& eta, const TorusGrid& grid, int layer, const Point& p) {
    check_layer(a, layer);
    double below = layer > 0 ? surface_value(eta, grid, layer - 1, p) : 0.0;
    double above = surface_value(eta, grid, layer, p);
    return {p[0], p[1], unflatten_height(a, layer, below, above, p[2])};
}

int locate_layer(const std::vector<double>& a, const Field& eta, const TorusGrid& grid, const Point& p) {
    if (p[2] < 0.0) return -1;
    for (int l = 0; l < static_cast<int>(a.size()); ++l)
        if (p[2] <= a[l] + surface_value(eta, grid, l, p)) return l;
    return -1;
}

GeometryFields geometry_fields(const PhysicalConfig& cfg, const LayerMesh& mesh, const Fourier& F, const Field& eta,
                               int Np) {
    const TorusGrid& grid = F.grid();
    const int n = cfg.n, m = cfg.m(), S = F.samples(Np), nv = mesh.total();
    auto e = F.to_physical(eta, Np);
    std::vector<std::vector<double>> ge;
    for (int d = 0; d < n - 1; ++d) ge.push_back(F.to_physical(derivative(eta, grid, d), Np));
    auto at = [&](const std::vector<double>& v, int l, int pt) { return l < 0 ? 0.0 : v[std::size_t(l) * S + pt]; };

    GeometryFields g;
    g.n = n;
    g.m = m;
    g.nv = nv;
    g.S = S;
    g.J.assign(std::size_t(nv) * S, 0.0);
    g.A.assign(std::size_t(n) * n * nv * S, 0.0);
    g.normal.assign(std::size_t(n) * m * S, 0.0);
    for (int l = 0; l < m; ++l) {
        const double lo = cfg.bottom(l), h = cfg.thickness(l);
        for (int j = 0; j < mesh.count(l); ++j) {
            const int node = mesh.offset(l) + j;
            const double theta = (mesh.nodes(l)(j) - lo) / h;
            for (int pt = 0; pt < S; ++pt) {
                double J = (h + at(e, l, pt) - at(e, l - 1, pt)) / h;
                g.J[std::size_t(node) * S + pt] = J;
                auto A = [&](int i, int k) -> double& { return g.A[(std::size_t(i * n + k) * nv + node) * S + pt]; };
                for (int i = 0; i < n - 1; ++i) {
                    A(i, i) = 1.0;
                    double b = (1.0 - theta) * at(ge[i], l - 1, pt) + theta * at(ge[i], l, pt);
                    A(i, n - 1) = -b / J;
                }
                A(n - 1, n - 1) = 1.0 / J;
            }
        }
        for (int pt = 0; pt < S; ++pt) {
            for (int i = 0; i < n - 1; ++i) g.normal[(std::size_t(i) * m + l) * S + pt] = -at(ge[i], l, pt);
            g.normal[(std::size_t(n - 1) * m + l) * S + pt] = 1.0;
        }
    }
    return g;
}

Field mean_curvature(const Field& eta, const Fourier& F, int Np) {
    const TorusGrid& grid = F.grid();
    const int n = grid.n();
    std::vector<std::vector<double>> g;
    for (int d = 0; d < n - 1; ++d) g.push_back(F.to_physical(derivative(eta, grid, d), Np));
    const std::size_t total = g[0].size();
    std::vector<double> scale(total);
    for (std::size_t i = 0; i < total; ++i) {
        double s = 1.0;
        for (int d = 0; d < n - 1; ++d) s += g[d][i] * g[d][i];
        scale[i] = 1.0 / std::sqrt(s);
    }
    Field out(eta.nc, eta.nv, eta.M);
    for (int d = 0; d < n - 1; ++d) {
        for (std::size_t i = 0; i < total; ++i) g[d][i] *= scale[i];
        out += derivative(F.from_physical(g[d], eta.nc, eta.nv, Np), grid, d);
    }
    return out;
}

double min_gap(const PhysicalConfig& cfg, const Fourier& F, const Field& eta, int Np) {
    auto e = F.to_physical(eta, Np);
    const int S = F.samples(Np);
    double gap = 1e300;
    for (int l = 0; l < cfg.m(); ++l)
        for (int pt = 0; pt < S; ++pt) {
            double below = l > 0 ? e[std::size_t(l - 1) * S + pt] : 0.0;
            gap = std::min(gap, cfg.thickness(l) + e[std::size_t(l) * S + pt] - below);
        }
    return gap;
}

double max_surface(const Fourier& F, const Field& eta, int Np) {
    double r = 0.0;
    for (double v : F.to_physical(eta, Np)) r = std::max(r, std::abs(v));
    return r;
}

bool quarter_gap(const PhysicalConfig& cfg, const Fourier& F, const Field& eta, int Np) {
    return max_surface(F, eta, Np) <= 0.25 * cfg.min_thickness();
}

double evaluate_bulk(const Field& f, int c, const TorusGrid& grid, const LayerMesh& mesh, int l, const Point& p) {
    VecR row = mesh.interp_row(l, p[2]);
    const int o = mesh.offset(l);
    double s = 0.0;
    for (int j = 0; j < mesh.count(l); ++j) {
        if (row(j) == 0.0) continue;
        cplx v = 0.0;
        for (int k = 0; k < grid.modes(); ++k) {
            cplx z = f(c, o + j, k);
            if (z == cplx(0.0)) continue;
            Xi xi = grid.xi(k);
            v += z * std::exp(2.0 * pi * I * (xi[0] * p[0] + xi[1] * p[1]));
        }
        s += row(j) * v.real();
    }
    return s;
}

}  // namespace stwave

#include "stwave/divtools.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "stwave/error.hpp"
#include "stwave/vertical_bvp.hpp"

namespace stwave::divtools {

namespace {

Profile zeros(int n, int size) { return Profile(n, VecC::Zero(size)); }

// Extension of a unit trace on a slab of thickness b, at heights t above the
// slab bottom. With s = |xi| the profiles are
//   w = (cosh ts - 1)/(cosh bs - 1),   v = i xi sinh ts / (2 pi s (cosh bs - 1)),
// rewritten as products of expm1 ratios to avoid the cosh - 1 cancellation.
Profile extension_on(const VecR& t, double b, int n, const Xi& xi) {
    Profile out = zeros(n, static_cast<int>(t.size()));
    const double s = norm(xi);
    if (s == 0.0) return out;
    const double den = std::expm1(-b * s);
    for (int j = 0; j < t.size(); ++j) {
        const double tj = t(j);
        const double lift = std::exp(0.5 * (tj - b) * s);
        const double r = lift * std::expm1(-tj * s) / den;
        const double q = r * lift * (1.0 + std::exp(-tj * s)) / (-den);
        out[n - 1](j) = r * r;
        for (int d = 0; d < n - 1; ++d) out[d](j) = I * xi[d] / (2.0 * pi * s) * q;
    }
    return out;
}

// Drops the top Chebyshev coefficient of nodal values on layer l while
// keeping both endpoint values.
void lower_degree(const LayerMesh& mesh, int l, VecC& v) {
    const int d = mesh.degree(l);
    const cplx top = (mesh.to_coeffs(l).cast<cplx>().row(d) * v)(0);
    const double lo = mesh.bottom(l), h = mesh.top(l) - lo;
    const double sign = d % 2 == 0 ? 1.0 : -1.0;
    for (int j = 0; j <= d; ++j) {
        const double x = std::clamp(2.0 * (mesh.nodes(l)(j) - lo) / h - 1.0, -1.0, 1.0);
        const double Td = std::cos(d * std::acos(x));
        const double lin = 0.5 * (1.0 + x) + 0.5 * (1.0 - x) * sign;
        v(j) -= top * (Td - lin);
    }
}

// Reflected values of the layers below k at the nodes of layer k.
VecC reflect_below(const LayerMesh& mesh, int k, const VecC& v) {
    const double a = mesh.bottom(k), b = mesh.top(k);
    return reflect_profile(mesh, v, mesh.nodes(k), a, b);
}

}  // namespace

Profile right_inverse_profile(const LayerMesh& mesh, int n, const VecC& f) {
    Profile out = zeros(n, mesh.total());
    out[n - 1] = antiderivative(mesh, f);
    return out;
}

Profile extension_profile(const LayerMesh& mesh, int n, const Xi& xi, cplx g) {
    const double lo = mesh.bottom(0), b = mesh.top(mesh.layers() - 1) - lo;
    VecR t(mesh.total());
    for (int l = 0; l < mesh.layers(); ++l) t.segment(mesh.offset(l), mesh.count(l)) = mesh.nodes(l).array() - lo;
    Profile out = extension_on(t, b, n, xi);
    for (auto& c : out) c *= g;
    return out;
}

VecC reflect_profile(const LayerMesh& lower, const VecC& v, const VecR& y, double a, double b) {
    if (!(b > a)) throw InputError(fmt::format("reflection needs b > a, got a = {}, b = {}", a, b));
    VecC out(y.size());
    for (int j = 0; j < y.size(); ++j) {
        const double z = std::clamp(a - a * (y(j) - a) / (b - a), 0.0, a);
        int l = 0;
        while (l + 1 < lower.layers() && z > lower.top(l)) ++l;
        out(j) = lower.interp_row(l, z).cast<cplx>().dot(v.segment(lower.offset(l), lower.count(l)));
    }
    return out;
}

VecC divergence_profile(const LayerMesh& mesh, const Xi& xi, const Profile& u) {
    const int n = static_cast<int>(u.size());
    VecC out = dy(mesh, u[n - 1]);
    for (int d = 0; d < n - 1; ++d) out += 2.0 * pi * I * xi[d] * u[d];
    return out;
}

// Induction over layers: the solution on the first k layers is reflected into
// layer k, its divergence defect there is removed by the right inverse, and
// the remaining top trace is lifted by the solenoidal extension. The reflected
// field is lowered one Chebyshev degree so the right inverse stays exact.
Profile trace_solve_profile(const LayerMesh& mesh, int n, const Xi& xi, const VecC& f, const VecC& g) {
    Profile u = zeros(n, mesh.total());
    const bool zero_mode = norm(xi) == 0.0;
    for (int k = 0; k < mesh.layers(); ++k) {
        const int o = mesh.offset(k), c = mesh.count(k);
        Profile E = zeros(n, c);
        if (k > 0)
            for (int d = 0; d < n; ++d) {
                E[d] = reflect_below(mesh, k, u[d]);
                lower_degree(mesh, k, E[d]);
            }
        VecC r = f.segment(o, c) - mesh.diff(k).cast<cplx>() * E[n - 1];
        for (int d = 0; d < n - 1; ++d) r -= 2.0 * pi * I * xi[d] * E[d];
        VecC lift = mesh.antideriv(k).cast<cplx>() * r;
        const cplx rest = g(k) - E[n - 1](c - 1) - lift(c - 1);
        Profile P = zeros(n, c);
        if (!zero_mode) {
            VecR t = mesh.nodes(k).array() - mesh.bottom(k);
            P = extension_on(t, mesh.top(k) - mesh.bottom(k), n, xi);
        }
        for (int d = 0; d < n; ++d) u[d].segment(o, c) = E[d] + rest * P[d];
        u[n - 1].segment(o, c) += lift;
    }
    return u;
}

namespace {

Profile bulk_profile(const Field& u, int k) {
    Profile p(u.nc, VecC(u.nv));
    for (int c = 0; c < u.nc; ++c)
        for (int j = 0; j < u.nv; ++j) p[c](j) = u(c, j, k);
    return p;
}

void store(Field& u, int k, const Profile& p) {
    for (int c = 0; c < u.nc; ++c)
        for (int j = 0; j < u.nv; ++j) u(c, j, k) = p[c](j);
}

VecC row_profile(const Field& f, int c, int k) {
    VecC p(f.nv);
    for (int j = 0; j < f.nv; ++j) p(j) = f(c, j, k);
    return p;
}

}  // namespace

Field div_right_inverse(const Field& f, const LayerMesh& mesh, int n) {
    Field u(n, mesh.total(), f.M);
    for (int k = 0; k < f.M; ++k) store(u, k, right_inverse_profile(mesh, n, row_profile(f, 0, k)));
    return u;
}

Field solenoidal_extension(const Field& g, const TorusGrid& grid, const LayerMesh& mesh, int n, double zero_tol) {
    const int top = g.nv - 1;
    if (std::abs(g(0, top, 0)) > zero_tol)
        throw InputError(fmt::format("{}: solenoidal extension needs a mean-free trace, got {}",
                                     msg::incompatible_zero_mode, std::abs(g(0, top, 0))));
    Field u(n, mesh.total(), g.M);
    for (int k = 0; k < g.M; ++k) {
        if (k == 0 || g(0, top, k) == cplx(0.0)) continue;
        store(u, k, extension_profile(mesh, n, grid.xi(k), g(0, top, k)));
    }
    return u;
}

Field reflection_extension(const Field& u, const LayerMesh& lower, const LayerMesh& full) {
    const int k = full.layers() - 1;
    if (lower.layers() != k || u.nv != lower.total())
        throw InputError("reflection extension: mesh shapes do not match");
    Field out(u.nc, full.total(), u.M);
    for (int c = 0; c < u.nc; ++c)
        for (int m = 0; m < u.M; ++m) {
            VecC v = row_profile(u.component(c), 0, m);
            for (int j = 0; j < u.nv; ++j) out(c, j, m) = v(j);
            VecC r = reflect_profile(lower, v, full.nodes(k), full.bottom(k), full.top(k));
            for (int j = 0; j < full.count(k); ++j) out(c, full.offset(k) + j, m) = r(j);
        }
    return out;
}

Field trace_defect(const TraceDivergenceData& data, const LayerMesh& mesh) {
    Field out(1, mesh.layers(), data.f.M);
    for (int k = 0; k < data.f.M; ++k) {
        VecC f = row_profile(data.f, 0, k);
        for (int l = 0; l < mesh.layers(); ++l) out(0, l, k) = data.g(0, l, k) - integrate(mesh, f, l);
    }
    return out;
}

Field multi_trace_solve(const TraceDivergenceData& data, const TorusGrid& grid, const LayerMesh& mesh, int n,
                        double zero_tol) {
    const int m = mesh.layers();
    if (data.f.nv != mesh.total() || data.g.nv != m || data.f.M != grid.modes() || data.g.M != grid.modes())
        throw InputError("trace-divergence data does not match the mesh");
    Field defect = trace_defect(data, mesh);
    double scale = data.g.max_abs();
    for (int l = 0; l < m; ++l) scale = std::max(scale, std::abs(data.g(0, l, 0) - defect(0, l, 0)));
    for (int l = 0; l < m; ++l)
        if (std::abs(defect(0, l, 0)) > zero_tol * std::max(scale, 1.0))
            throw InputError(fmt::format("{}: g_{} - int f = {:.3e} at xi = 0", msg::incompatible_zero_mode, l,
                                         std::abs(defect(0, l, 0))));
    Field u(n, mesh.total(), grid.modes());
    for (int k = 0; k < grid.modes(); ++k) {
        VecC g(m);
        for (int l = 0; l < m; ++l) g(l) = data.g(0, l, k);
        store(u, k, trace_solve_profile(mesh, n, grid.xi(k), row_profile(data.f, 0, k), g));
    }
    return u;
}

Field divergence(const Field& u, const TorusGrid& grid, const LayerMesh& mesh) {
    Field out(1, mesh.total(), u.M);
    for (int k = 0; k < u.M; ++k) {
        VecC d = divergence_profile(mesh, grid.xi(k), bulk_profile(u, k));
        for (int j = 0; j < mesh.total(); ++j) out(0, j, k) = d(j);
    }
    return out;
}

Field normal_traces(const Field& u, const LayerMesh& mesh) {
    Field out(1, mesh.layers(), u.M);
    for (int l = 0; l < mesh.layers(); ++l)
        for (int k = 0; k < u.M; ++k) out(0, l, k) = u(u.nc - 1, mesh.top_node(l), k);
    return out;
}

Estimate compatibility_estimate(const TraceDivergenceData& data, const Field& u, const TorusGrid& grid,
                                const LayerMesh& mesh) {
    Field defect = trace_defect(data, mesh);
    Estimate e;
    double roots = 0.0;
    for (int l = 0; l < mesh.layers(); ++l) {
        Field row(1, 1, defect.M);
        for (int k = 1; k < defect.M; ++k) row(0, 0, k) = defect(0, l, k);
        e.lhs += norms::hdot_minus1(row, grid);
        roots += std::sqrt(mesh.top(l));
    }
    e.rhs = 2.0 * pi * roots * norms::l2_bulk(u, mesh, grid);
    return e;
}

}  // namespace stwave::divtools

#pragma once

#include <vector>

#include "stwave/grid.hpp"

// Divergence toolbox: right inverse of the divergence, solenoidal extension of
// a top normal trace, reflection extension across a layer, and the inductive
// solver for prescribed divergence plus normal traces on every interface.
//
// Bulk fields are Field(n, nv, M) with the vertical component last; scalar
// bulk data is Field(1, nv, M) and interface data Field(1, m, M).

namespace stwave::divtools {

using Profile = std::vector<VecC>;  // n components on the nodes of a mesh

// Per-frequency building blocks.
Profile right_inverse_profile(const LayerMesh& mesh, int n, const VecC& f);
// Extension of the unit trace on the slab (bottom(0), top(last)); t is
// measured from the slab bottom.
Profile extension_profile(const LayerMesh& mesh, int n, const Xi& xi, cplx g);
// Values of v (on `lower`, covering (0,a)) reflected onto the nodes y of (a,b).
VecC reflect_profile(const LayerMesh& lower, const VecC& v, const VecR& y, double a, double b);
Profile trace_solve_profile(const LayerMesh& mesh, int n, const Xi& xi, const VecC& f, const VecC& g);

// div u = 2 pi i xi . u_par + d_y u_n, layer by layer on the nodes.
VecC divergence_profile(const LayerMesh& mesh, const Xi& xi, const Profile& u);

struct TraceDivergenceData {
    Field f;  // (1, nv, M)
    Field g;  // (1, m, M)
};

Field div_right_inverse(const Field& f, const LayerMesh& mesh, int n);
// Throws InputError if g has a zero mode above zero_tol.
Field solenoidal_extension(const Field& g, const TorusGrid& grid, const LayerMesh& mesh, int n,
                           double zero_tol = 1e-12);
// u lives on `lower` (0,a); `full` adds one layer (a,b) on top. The result
// agrees with u below a and holds the reflection above.
Field reflection_extension(const Field& u, const LayerMesh& lower, const LayerMesh& full);
Field multi_trace_solve(const TraceDivergenceData& data, const TorusGrid& grid, const LayerMesh& mesh, int n,
                        double zero_tol = 1e-10);

Field divergence(const Field& u, const TorusGrid& grid, const LayerMesh& mesh);
// Normal trace of u on every interface, taken from the layer below.
Field normal_traces(const Field& u, const LayerMesh& mesh);
// Interface-wise g_l - int_0^{a_l} f, the quantity bounded by the
// compatibility estimate.
Field trace_defect(const TraceDivergenceData& data, const LayerMesh& mesh);
// Left and right sides of sum_l [g_l - int f]_{H^-1} <= 2 pi (sum_l sqrt(a_l)) |u|_{L2}.
struct Estimate {
    double lhs = 0.0, rhs = 0.0;
    bool holds() const { return lhs <= rhs; }
};
Estimate compatibility_estimate(const TraceDivergenceData& data, const Field& u, const TorusGrid& grid,
                                const LayerMesh& mesh);

}  // namespace stwave::divtools

#pragma once

#include <array>
#include <vector>

#include "stwave/config.hpp"
#include "stwave/grid.hpp"

namespace stwave {

using Point = std::array<double, 3>;  // (x1, x2, y); x2 unused when n = 2

// Layer-wise affine flattening. Layer l of the equilibrium slab
// [a_{l-1}, a_l] is sent onto [a_{l-1} + eta_{l-1}, a_l + eta_l], with
// eta_{-1} = 0 on the rigid bottom. The surfaces are passed as values at the
// horizontal point of interest.
double flatten_height(const std::vector<double>& a, int layer, double eta_below, double eta_above, double y);
double unflatten_height(const std::vector<double>& a, int layer, double eta_below, double eta_above, double Y);

// Spectral evaluation of surface l (and its gradient) at an arbitrary point.
double surface_value(const Field& eta, const TorusGrid& grid, int l, const Point& x);
std::array<double, 2> surface_gradient(const Field& eta, const TorusGrid& grid, int l, const Point& x);

Point flatten_map(const std::vector<double>& a, const Field& eta, const TorusGrid& grid, int layer, const Point& p);
Point unflatten_map(const std::vector<double>& a, const Field& eta, const TorusGrid& grid, int layer, const Point& p);

// Layer containing the Eulerian point, or -1 outside the deformed slab.
int locate_layer(const std::vector<double>& a, const Field& eta, const TorusGrid& grid, const Point& p);

// Geometry on a physical grid with Np points per direction, at every mesh
// node. Layouts: J (node, point); A (i * n + j, node, point) with
// A = (grad F)^{-T}; normal (component, interface, point) with
// N_l = (-grad eta_l, 1).
struct GeometryFields {
    int n = 2, m = 0, nv = 0, S = 0;
    std::vector<double> J, A, normal;

    double Jat(int node, int pt) const { return J[std::size_t(node) * S + pt]; }
    double Aat(int i, int j, int node, int pt) const { return A[(std::size_t(i * n + j) * nv + node) * S + pt]; }
    double Nat(int c, int l, int pt) const { return normal[(std::size_t(c) * m + l) * S + pt]; }
};

GeometryFields geometry_fields(const PhysicalConfig& cfg, const LayerMesh& mesh, const Fourier& F, const Field& eta,
                               int Np);

// Mean curvature div(grad eta / sqrt(1 + |grad eta|^2)) of one surface, with
// the quotient formed on a grid of Np points per direction.
Field mean_curvature(const Field& eta, const Fourier& F, int Np);

// Smallest layer thickness of the deformed slab on the sample grid.
double min_gap(const PhysicalConfig& cfg, const Fourier& F, const Field& eta, int Np);
double max_surface(const Fourier& F, const Field& eta, int Np);
bool quarter_gap(const PhysicalConfig& cfg, const Fourier& F, const Field& eta, int Np);

// Value of component c of a bulk field at a flattened point of layer l.
double evaluate_bulk(const Field& f, int c, const TorusGrid& grid, const LayerMesh& mesh, int l, const Point& p);

}  // namespace stwave

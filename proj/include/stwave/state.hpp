#pragma once

#include "stwave/config.hpp"
#include "stwave/grid.hpp"

namespace stwave {

// Configuration, horizontal lattice and one vertical mesh shared by every
// frequency. Solvers keep references into it, so it is neither copied nor moved.
class Discretization {
public:
    Discretization(const PhysicalConfig& cfg, const TorusGrid& grid, const DegreePolicy& policy = {});
    Discretization(const Discretization&) = delete;
    Discretization& operator=(const Discretization&) = delete;

    const PhysicalConfig& config() const { return cfg_; }
    const TorusGrid& grid() const { return grid_; }
    const LayerMesh& mesh() const { return mesh_; }
    int n() const { return cfg_.n; }
    int m() const { return cfg_.m(); }
    int nodes() const { return mesh_.total(); }
    int modes() const { return grid_.modes(); }

private:
    PhysicalConfig cfg_;
    TorusGrid grid_;
    LayerMesh mesh_;
};

// Data of the linearized problem: divergence g, bulk force f, interface
// stress jumps k and kinematic data h.
struct DataTuple {
    Field g, f, k, h;
    double s = 0.0;  // regularity index used by the norms

    static DataTuple zero(const Discretization& disc);
    DataTuple& operator+=(const DataTuple& o);
    DataTuple& operator-=(const DataTuple& o);
    DataTuple& operator*=(double a);
    void symmetrize(const TorusGrid& grid);
    double max_abs() const;
};

// Flattened unknowns: pressure, velocity (last component vertical) and the
// interface displacements.
struct FlatState {
    Field p, u, eta;
    Mode mode = Mode::surface_tension;

    static FlatState zero(const Discretization& disc, Mode mode);
    FlatState& operator+=(const FlatState& o);
    FlatState& operator-=(const FlatState& o);
    FlatState& operator*=(double a);
    void symmetrize(const TorusGrid& grid);
    double max_abs() const;
};

DataTuple operator-(DataTuple a, const DataTuple& b);
FlatState operator-(FlatState a, const FlatState& b);

// Indicator of (0, a_l) at a mesh node. Interface points are stored once per
// adjacent layer, and each copy takes the value of its own layer.
bool below_interface(const LayerMesh& mesh, int node, int interface);

// Vertical profile of component c at lattice mode k, and its inverse.
VecC column(const Field& f, int c, int k);
void set_column(Field& f, int c, int k, const VecC& v);

}  // namespace stwave

#include "stwave/state.hpp"

#include <algorithm>

#include "stwave/error.hpp"

namespace stwave {

Discretization::Discretization(const PhysicalConfig& cfg, const TorusGrid& grid, const DegreePolicy& policy)
    : cfg_(cfg), grid_(grid), mesh_(make_mesh(cfg, policy, grid.abs_xi_max())) {
    if (grid.n() != cfg.n) throw InputError("grid and configuration disagree on the dimension");
}

DataTuple DataTuple::zero(const Discretization& disc) {
    const int n = disc.n(), m = disc.m(), nv = disc.nodes(), M = disc.modes();
    DataTuple d;
    d.g = Field(1, nv, M);
    d.f = Field(n, nv, M);
    d.k = Field(n, m, M);
    d.h = Field(1, m, M);
    return d;
}

DataTuple& DataTuple::operator+=(const DataTuple& o) {
    g += o.g;
    f += o.f;
    k += o.k;
    h += o.h;
    return *this;
}

DataTuple& DataTuple::operator-=(const DataTuple& o) {
    g -= o.g;
    f -= o.f;
    k -= o.k;
    h -= o.h;
    return *this;
}

DataTuple& DataTuple::operator*=(double a) {
    g *= a;
    f *= a;
    k *= a;
    h *= a;
    return *this;
}

void DataTuple::symmetrize(const TorusGrid& grid) {
    for (Field* x : {&g, &f, &k, &h}) stwave::symmetrize(*x, grid);
}

double DataTuple::max_abs() const {
    return std::max({g.max_abs(), f.max_abs(), k.max_abs(), h.max_abs()});
}

FlatState FlatState::zero(const Discretization& disc, Mode mode) {
    FlatState x;
    x.p = Field(1, disc.nodes(), disc.modes());
    x.u = Field(disc.n(), disc.nodes(), disc.modes());
    x.eta = Field(1, disc.m(), disc.modes());
    x.mode = mode;
    return x;
}

FlatState& FlatState::operator+=(const FlatState& o) {
    p += o.p;
    u += o.u;
    eta += o.eta;
    return *this;
}

FlatState& FlatState::operator-=(const FlatState& o) {
    p -= o.p;
    u -= o.u;
    eta -= o.eta;
    return *this;
}

FlatState& FlatState::operator*=(double a) {
    p *= a;
    u *= a;
    eta *= a;
    return *this;
}

void FlatState::symmetrize(const TorusGrid& grid) {
    for (Field* x : {&p, &u, &eta}) stwave::symmetrize(*x, grid);
}

double FlatState::max_abs() const { return std::max({p.max_abs(), u.max_abs(), eta.max_abs()}); }

DataTuple operator-(DataTuple a, const DataTuple& b) { return a -= b; }
FlatState operator-(FlatState a, const FlatState& b) { return a -= b; }

bool below_interface(const LayerMesh& mesh, int node, int interface) {
    return mesh.layer_of_node(node) <= interface;
}

VecC column(const Field& f, int c, int k) {
    VecC v(f.nv);
    for (int j = 0; j < f.nv; ++j) v(j) = f(c, j, k);
    return v;
}

void set_column(Field& f, int c, int k, const VecC& v) {
    for (int j = 0; j < f.nv; ++j) f(c, j, k) = v(j);
}

}  // namespace stwave

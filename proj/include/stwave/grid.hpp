#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "stwave/config.hpp"

namespace stwave {

using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using VecR = Eigen::VectorXd;
using MatR = Eigen::MatrixXd;
using Xi = std::array<double, 2>;  // horizontal frequency; second entry is 0 when n = 2

inline double norm(const Xi& xi) { return std::hypot(xi[0], xi[1]); }

// Periodic horizontal lattice. Modes are stored in FFT order along each
// direction; for n = 3 the linear index is i1 * N + i2.
class TorusGrid {
public:
    TorusGrid(int n, double L, int N);

    int n() const { return n_; }
    double period() const { return L_; }
    int size() const { return N_; }
    int modes() const { return n_ == 2 ? N_ : N_ * N_; }
    double volume() const { return n_ == 2 ? L_ : L_ * L_; }

    std::array<int, 2> wavenumber(int k) const;
    int index(int k1, int k2) const;
    Xi xi(int k) const;
    int negate(int k) const;
    bool nyquist(int k) const;
    // True for exactly one member of each {xi, -xi} pair (and for self-paired modes).
    bool canonical(int k) const;
    double abs_xi_max() const;  // largest |xi| among non-Nyquist modes

    double coordinate(int j, int Np) const { return L_ * j / Np; }

private:
    int n_;
    double L_;
    int N_;
};

// Per-layer Chebyshev–Gauss–Lobatto collocation, nodes ascending in y.
class LayerMesh {
public:
    LayerMesh(const std::vector<double>& depths, const std::vector<int>& degrees);

    int layers() const { return static_cast<int>(deg_.size()); }
    int degree(int l) const { return deg_[l]; }
    int count(int l) const { return deg_[l] + 1; }
    int offset(int l) const { return off_[l]; }
    int total() const { return off_.back(); }
    int bottom_node(int l) const { return off_[l]; }
    int top_node(int l) const { return off_[l] + deg_[l]; }
    double bottom(int l) const { return lo_[l]; }
    double top(int l) const { return hi_[l]; }
    int layer_of_node(int j) const;

    const VecR& nodes(int l) const { return nodes_[l]; }
    const MatR& diff(int l) const { return diff_[l]; }
    const VecR& weights(int l) const { return weights_[l]; }
    // Antiderivative from the layer bottom, acting on nodal values.
    const MatR& antideriv(int l) const { return anti_[l]; }
    // Nodal values to Chebyshev coefficients.
    const MatR& to_coeffs(int l) const { return coef_[l]; }
    // Barycentric interpolation row for a point inside layer l.
    VecR interp_row(int l, double y) const;

    std::vector<double> depths() const { return hi_; }
    std::vector<int> degrees() const { return deg_; }

private:
    std::vector<int> deg_, off_;
    std::vector<double> lo_, hi_;
    std::vector<VecR> nodes_, weights_;
    std::vector<MatR> diff_, anti_, coef_;
};

struct DegreePolicy {
    int min_degree = 24;
    double factor = 1.5;
    int cap = 200;

    // Raw requested degree; may exceed the cap (callers check).
    int requested(double abs_xi, double thickness) const;
    int degree(double abs_xi, double thickness) const;
    // Largest |xi| whose requested degree fits under the cap for every layer.
    double cutoff(const PhysicalConfig& cfg) const;
};

LayerMesh make_mesh(const PhysicalConfig& cfg, const DegreePolicy& policy, double abs_xi);
LayerMesh make_mesh(const PhysicalConfig& cfg, int degree);

// Coefficient array indexed by (component, vertical row, mode). Bulk fields
// use one row per mesh node; interface fields use one row per interface.
struct Field {
    int nc = 0, nv = 0, M = 0;
    std::vector<cplx> v;

    Field() = default;
    Field(int ncomp, int nrows, int modes) : nc(ncomp), nv(nrows), M(modes), v(std::size_t(ncomp) * nrows * modes) {}

    cplx& operator()(int c, int j, int k) { return v[(std::size_t(c) * nv + j) * M + k]; }
    const cplx& operator()(int c, int j, int k) const { return v[(std::size_t(c) * nv + j) * M + k]; }

    bool same_shape(const Field& o) const { return nc == o.nc && nv == o.nv && M == o.M; }
    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double s);
    void axpy(cplx s, const Field& o);
    void set_zero();
    double max_abs() const;
    Field component(int c) const;
    void set_component(int c, const Field& src);
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

// Spectral <-> physical transforms with optional zero padding.
class Fourier {
public:
    explicit Fourier(const TorusGrid& grid) : grid_(grid) {}

    const TorusGrid& grid() const { return grid_; }
    int padded() const { return 3 * grid_.size() / 2; }
    int samples(int Np) const { return grid_.n() == 2 ? Np : Np * Np; }

    // Real parts of the synthesized samples, layout (c, row, point).
    std::vector<double> to_physical(const Field& f, int Np) const;
    Field from_physical(const std::vector<double>& s, int nc, int nv, int Np) const;

    std::vector<double> inverse(const Field& f) const { return to_physical(f, grid_.size()); }
    Field transform(const std::vector<double>& s, int nc, int nv) const {
        return from_physical(s, nc, nv, grid_.size());
    }

private:
    const TorusGrid& grid_;
};

// Coefficient-wise multiplication by a scalar symbol. When `real` is set the
// symbol must satisfy w(-xi) = conj(w(xi)) on the lattice.
void apply_multiplier(Field& f, const TorusGrid& grid, const std::function<cplx(const Xi&)>& w, bool real = true);
Field derivative(const Field& f, const TorusGrid& grid, int dir);
Field vertical_derivative(const Field& f, const LayerMesh& mesh);
void zero_nyquist(Field& f, const TorusGrid& grid);
// Projects onto real-valued fields: c(-xi) = conj(c(xi)).
void symmetrize(Field& f, const TorusGrid& grid);
double reality_defect(const Field& f, const TorusGrid& grid);

// Norm evaluators. Weights use |xi| without 2*pi factors.
namespace norms {
double l2_bulk(const Field& f, const LayerMesh& mesh, const TorusGrid& grid);
// Integer-order vertical/horizontal Sobolev norm, linearly interpolated in s^2 between integers.
double hs_bulk(const Field& f, const LayerMesh& mesh, const TorusGrid& grid, double s);
double hs_surface(const Field& f, const TorusGrid& grid, double s);
// Homogeneous seminorm with weight |xi|^{2s}; the zero mode is dropped.
double hdot(const Field& f, const TorusGrid& grid, double s);
// Throws InputError when a zero-mode coefficient exceeds zero_tol.
double hdot_minus1(const Field& f, const TorusGrid& grid, double zero_tol = 1e-12);
double anisotropic(const Field& f, const TorusGrid& grid, double s);
}  // namespace norms

// Pairing int_torus f * conj(g) summed over components and rows, via Plancherel.
cplx surface_pairing(const Field& f, const Field& g, const TorusGrid& grid);

}  // namespace stwave

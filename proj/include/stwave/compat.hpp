#pragma once

#include <memory>
#include <vector>

#include "stwave/state.hpp"

namespace stwave {

// Solutions (Q_k, V_k) of the normal-stress problem (drift sign -gamma in the
// momentum row) with unit normal stress at interface k, on the shared mesh.
struct DualEntry {
    std::vector<std::vector<VecC>> v;  // v[k][i]: velocity component i
    std::vector<VecC> q;
    MatC n_gamma;  // n_gamma(j, k) = V_k . e_n at interface j
};

// Dual profiles for every lattice frequency, stored for canonical modes only.
class DualCache {
public:
    explicit DualCache(const Discretization& disc, int threads = 1);

    const Discretization& disc() const { return disc_; }
    // Entry for mode k; `conjugated` is set when the stored profiles belong to
    // -xi and must be conjugated. Returns nullptr for Nyquist modes.
    const DualEntry* entry(int k, bool& conjugated) const;
    std::size_t bytes() const;

private:
    const Discretization& disc_;
    std::vector<std::unique_ptr<DualEntry>> entries_;
};

struct CompatMeasurement {
    Field phi;  // Field(1, m, M)
    double zero_mode = 0.0;
    double hdot_minus1 = 0.0;
    double h_three_halves = 0.0;  // H^{3/2+s} norm
    double data_norm = 0.0;
};

// Data-space norm
//   |g|_{H^{1+s}}^2 + |f|_{H^s}^2 + sum |k_l|_{H^{1/2+s}}^2 + |h_l|_{H^{3/2+s}}^2
//   + [h_l - int_0^{a_l} g]_{Hdot^{-1}}^2,
// where the zero mode of the last term is left out.
double data_norm(const DataTuple& d, const Discretization& disc);
// Per interface l, h_l - int_0^{a_l} g at every mode.
Field zero_mode_defect(const DataTuple& d, const Discretization& disc);

// Compatibility measurement: at each frequency and interface k,
//   phi_k = int f . conj(V_k) + sum_l k_l . conj(V_k(a_l)) - int g conj(Q_k) - h_k,
// which equals u_n(a_k) - h_k for the solution u of the stress-data problem.
// Throws InputError("incompatible zero mode") when |phi(0)| exceeds zero_tol
// times the larger of the data norm and reference_norm.
CompatMeasurement measure(const DataTuple& d, const DualCache& duals, double zero_tol = 1e-9,
                          double reference_norm = 0.0);

// Physical-space quadrature of
//   <f, v> + sum_l <k_l, v(a_l)> - <g, q> - sum_l <psi_l, h_l>
// with (q, v) the normal-stress solution driven by psi. Solves every mode
// afresh and evaluates the products on a padded grid; meant as an independent
// oracle for measure.
double bilinear_form(const DataTuple& d, const Field& psi, const Discretization& disc);

}  // namespace stwave

#pragma once

#include <memory>
#include <vector>

#include "stwave/compat.hpp"
#include "stwave/state.hpp"
#include "stwave/vertical_bvp.hpp"

namespace stwave {

struct InverseReport {
    CompatMeasurement measurement;
    double consistency = 0.0;  // H^{3/2+s} norm of u.e_n - h after modification
    double relative = 0.0;     // consistency / data norm
    double max_surface = 0.0;
    bool admissible = true;  // quarter-gap bound on the returned surfaces
};

struct InverseResult {
    FlatState state;
    InverseReport report;
};

// Linearized gravity-capillary operator about the flat state, with rows
//   div u,  div S(p,u) - gamma rho d1 u,
//   [S e_n]_l - (g [rho]_l + sigma_l Lap) eta_l e_n,  u_n(a_l) + gamma d1 eta_l,
// and its inverse. Per-frequency solvers and symbols are built once.
class LinearSystem {
public:
    LinearSystem(const Discretization& disc, Mode mode, int threads = 1,
                 std::size_t cache_bytes = std::size_t(1) << 30);

    const Discretization& disc() const { return disc_; }
    Mode mode() const { return mode_; }
    const DualCache& duals() const { return *duals_; }
    int threads() const { return threads_; }

    // The bulk rows are collocated away from each layer's top node, where the
    // scheme imposes interface conditions instead; the top-node values of g and
    // f are returned as the polynomial extrapolation from the other nodes.
    DataTuple forward(const FlatState& x) const;
    // Throws BoundViolation when the consistency residual exceeds
    // consistency_tol relative to the larger of the data norm and
    // reference_norm (the zero-mode check uses the same scale).
    InverseResult inverse(const DataTuple& d, double consistency_tol = 1e-8, double reference_norm = 0.0) const;

    // Replaces the top-node values of g and f in every layer by the
    // extrapolation from the other nodes, as forward() does.
    void project(DataTuple& d) const;

    // p_gamma^{-1} at lattice mode k (zero at xi = 0 and Nyquist modes).
    MatC p_inv(int k) const;
    double state_norm(const FlatState& x, double s) const;
    std::size_t cached_bytes() const { return cached_; }

private:
    struct Entry {
        std::unique_ptr<StokesBvp> bvp;  // may be dropped to respect the cache budget
        MatC p_inv;
    };
    const Entry* entry(int k, bool& conjugated) const;
    void extrapolate_top(VecC& v) const;

    const Discretization& disc_;
    Mode mode_;
    int threads_;
    std::unique_ptr<DualCache> duals_;
    std::vector<std::unique_ptr<Entry>> entries_;
    std::vector<VecR> extrap_;  // per layer: weights of nodes 0..d-1 at the top node
    std::size_t cached_ = 0;
};

// Pressure shift g sum_l [rho]_l eta_l 1_{(0,a_l)} at mode k.
VecC gravity_shift(const Discretization& disc, const Field& eta, int k);

}  // namespace stwave

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <vector>

#include "stwave/config.hpp"
#include "stwave/grid.hpp"
#include "stwave/vertical_bvp.hpp"

namespace stwave {

// Normal-stress to normal-Dirichlet symbol n_gamma on a given mesh: column k
// holds the interface normal velocities produced by unit normal stress at
// interface k. No tail model.
MatC normal_symbol_on(const PhysicalConfig& cfg, const LayerMesh& mesh, const Xi& xi, double gamma);

// n_gamma with the degree policy; beyond the policy cutoff the symbol is
// C(xi/|xi|) / |xi| with C fitted on the last trusted decade.
MatC compute_n(const PhysicalConfig& cfg, const Xi& xi, double gamma, const DegreePolicy& policy = {});

// Tail coefficient along a unit direction, fitted by relative least squares over
// log-spaced samples of the decade below the cutoff.
MatC tail_coefficient(const PhysicalConfig& cfg, const Xi& direction, double gamma, const DegreePolicy& policy = {});

// Capillary matrix o = diag(-g [rho]_l + 4 pi^2 |xi|^2 sigma_l); the
// zero-surface-tension mode drops the capillary term.
MatC capillary_matrix(const PhysicalConfig& cfg, const Xi& xi, Mode mode);

struct PSymbol {
    MatC p, p_inv;
    bool invertible = false;
    double cond = 0.0;
};

// p_gamma = n_{-gamma} o - 2 pi i gamma xi_1 I, from a supplied n_{-gamma}.
PSymbol assemble_p(const PhysicalConfig& cfg, const Xi& xi, Mode mode, const MatC& n_minus);
PSymbol compute_p(const PhysicalConfig& cfg, const Xi& xi, Mode mode, const DegreePolicy& policy = {});

// Smallest eigenvalue of the Hermitian part of a square matrix.
double hermitian_floor(const MatC& a);
double spectral_norm(const MatC& a);

struct SymbolEntry {
    Xi xi{0.0, 0.0};
    MatC n_gamma, n_minus, o, p, p_inv;
    bool invertible = false;
    bool extrapolated = false;
    double cond_p = 0.0;
    double coercivity = 0.0;  // Hermitian floor of n_gamma
};

// Lazily built per-lattice-frequency symbols. Reads of built entries may run
// concurrently; builds serialize on the insert.
class SymbolTable {
public:
    SymbolTable(const PhysicalConfig& cfg, const TorusGrid& grid, Mode mode, DegreePolicy policy = {});

    const SymbolEntry& at(int k);
    void build_all(int threads = 1);
    std::uint64_t hash() const { return hash_; }
    const PhysicalConfig& config() const { return cfg_; }
    const TorusGrid& grid() const { return grid_; }
    Mode mode() const { return mode_; }

    // One row per built frequency: xi components, Re/Im of every entry of
    // n_gamma, n_{-gamma}, o, p_gamma, then cond(p_gamma) and coercivity.
    void write_csv(std::ostream& os);

private:
    SymbolEntry build(int k);
    const MatC& tail(const Xi& direction, double gamma);

    PhysicalConfig cfg_;
    const TorusGrid& grid_;
    Mode mode_;
    DegreePolicy policy_;
    std::uint64_t hash_;
    std::mutex mu_;
    std::vector<std::unique_ptr<SymbolEntry>> entries_;
    std::map<std::array<double, 3>, MatC> tails_;
};

struct Sweep {
    double low_lo = 1e-3, low_hi = 1e-2;
    double high_lo = 1e1, high_hi = 1e2;
    int points = 9;  // per band
    Xi direction{1.0, 0.0};
    double slope_tol = 0.1;
};

struct AsymptoticSample {
    double abs_xi = 0.0;
    double norm = 0.0;
    double coercivity = 0.0;     // Hermitian floor / min(|xi|^2, |xi|^-1)
    double inverse_bound = 0.0;  // |n^-1| min(|xi|^2, |xi|^-1)
    bool extrapolated = false;
};

struct AsymptoticsReport {
    std::vector<AsymptoticSample> samples;
    double low_slope = 0.0, high_slope = 0.0;
    double min_coercivity = 0.0, max_inverse_bound = 0.0;
    double cutoff = 0.0;
    int extrapolated = 0;
    bool low_ok = false, high_ok = false, coercive = false;
    bool pass() const { return low_ok && high_ok && coercive; }
};

// Throws InputError when the sweep leaves the trusted range: below 1e-5 or
// more than one decade past the collocation cutoff.
AsymptoticsReport verify_asymptotics(const PhysicalConfig& cfg, const Sweep& sweep, const DegreePolicy& policy = {});

// Ratio |u|_{H^1}^2 / sum min(|xi|^2, |xi|^-1) |psi|^2 for the velocity
// driven by normal stress psi (Field(1, m, M)).
double energy_ratio(const PhysicalConfig& cfg, const TorusGrid& grid, const Field& psi,
                    const DegreePolicy& policy = {});
// Ratio |q + sum psi_l 1_{(0,a_l)}|_{L2}^2 / sum |xi|^2 |psi|^2 for the
// pressure q of the same problem.
double pressure_ratio(const PhysicalConfig& cfg, const TorusGrid& grid, const Field& psi,
                      const DegreePolicy& policy = {});

}  // namespace stwave

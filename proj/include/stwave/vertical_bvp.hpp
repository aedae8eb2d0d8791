#pragma once

#include <Eigen/LU>
#include <vector>

#include "stwave/config.hpp"
#include "stwave/grid.hpp"

namespace stwave {

// Data of the per-frequency stress problem: bulk divergence target g, bulk
// force f (n components) and the stress jump k_l across every interface.
struct VerticalData {
    VecC g;
    std::vector<VecC> f;
    std::vector<VecC> k;

    static VerticalData zero(int n, int m, int nv);
};

struct VerticalSolution {
    std::vector<VecC> u;  // velocity components, last one vertical
    VecC p;
    std::vector<VecC> t;  // traction S e_n

    static VerticalSolution zero(int n, int nv);
    double max_abs() const;
};

// Multilayer traveling Stokes problem at one horizontal frequency:
//   div S(p,u) - c rho d1 u = f,  div u = g,  [S e_n]_l = k_l,  [u] = 0,  u(0) = 0,
// where c = gamma_eff. The stress-data problem uses c = gamma, the normal
// stress problem c = -gamma.
//
// Internally the velocity and traction (S e_n) form a first-order system in y,
// collocated per layer on Chebyshev–Lobatto nodes. The ODE row at each layer's
// top node is replaced by a boundary or interface row. For n = 3 the horizontal
// components are rotated onto xi/|xi| and its normal, which decouples the
// transverse pair.
class StokesBvp {
public:
    StokesBvp(const PhysicalConfig& cfg, const LayerMesh& mesh, const Xi& xi, double gamma_eff,
              double rcond_floor = 1e-12);

    VerticalSolution solve(const VerticalData& data) const;
    VerticalSolution solve_normal_stress(const VecC& psi) const;

    double rcond() const { return rcond_; }
    const Xi& xi() const { return xi_; }
    std::size_t bytes() const;

private:
    struct Block {
        int q = 0;  // components per node: half velocity, half traction
        Eigen::PartialPivLU<MatC> lu;
    };

    void assemble(Block& b, int q, const std::vector<MatC>& coeff);
    // rhs[c] holds the ODE right-hand side of component c at every node;
    // jumps[l] the traction jumps (q/2 entries) at interface l.
    VecC block_solve(const Block& b, const std::vector<VecC>& rhs, const std::vector<VecC>& jumps) const;

    const PhysicalConfig& cfg_;
    const LayerMesh& mesh_;
    Xi xi_;
    double gamma_;
    double K_;
    std::array<double, 2> es_{1.0, 0.0}, ep_{0.0, 1.0};
    Block main_, perp_;
    double rcond_ = 1.0;
};

// Applies the operator to (p, u) by spectral differentiation: returns
// g = div u, f = div S - c rho d1 u, and the stress jumps. With `use_traction`
// the column S e_n is taken from s.t instead of being rebuilt from u, so only
// one derivative acts on the solver output.
VerticalData apply_stokes(const PhysicalConfig& cfg, const LayerMesh& mesh, const Xi& xi, double gamma_eff,
                          const VerticalSolution& s, bool use_traction = false);

// Traction S(p,u) e_n from velocity and pressure at every node.
std::vector<VecC> traction(const PhysicalConfig& cfg, const LayerMesh& mesh, const Xi& xi,
                           const VerticalSolution& s);

// Per-frequency energy form
//   B(w,v) = sum_l int (mu_l/2) Dw : conj(Dv) - gamma rho_l d1 w . conj(v) dy.
cplx energy_form(const PhysicalConfig& cfg, const LayerMesh& mesh, const Xi& xi, double gamma,
                 const std::vector<VecC>& w, const std::vector<VecC>& v);

// Sum over layers of int |D u|^2 dy with D the symmetrized gradient.
double sym_grad_sq(const PhysicalConfig& cfg, const LayerMesh& mesh, const Xi& xi, const std::vector<VecC>& u);

// Layer-wise spectral derivative and integral helpers on a single profile.
VecC dy(const LayerMesh& mesh, const VecC& v);
cplx integrate(const LayerMesh& mesh, const VecC& v, int upto_layer = -1);
VecC antiderivative(const LayerMesh& mesh, const VecC& v);

}  // namespace stwave

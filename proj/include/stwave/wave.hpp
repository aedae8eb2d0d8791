#pragma once

#include <string>
#include <vector>

#include "stwave/error.hpp"
#include "stwave/geometry.hpp"
#include "stwave/linear.hpp"

namespace stwave {

// Bulk force f (n components on the mesh, flattened coordinates) and
// interface stresses T_l (component i * n + j), both scaled by `amplitude`.
struct ForcingSpec {
    Field f, T;
    double amplitude = 1.0;

    static ForcingSpec zero(const Discretization& disc);
    // T_m = -phi I with phi(x) = exp(-|x - center|^2 / width^2), a pressure bump
    // on the top surface. The default center is the middle of the torus.
    static ForcingSpec gaussian_bump(const Discretization& disc, double amplitude, double width);
    static ForcingSpec gaussian_bump(const Discretization& disc, double amplitude, double width, const Xi& center);
    // T_m = -cos(2 pi k.x / L) I.
    static ForcingSpec cosine_mode(const Discretization& disc, double amplitude, std::array<int, 2> k);
};

// Nonlinear residual of the flattened traveling-wave system, rows
//   J (A grad) . u,
//   rho [(u - gamma e1) . A grad] u + (A grad) . S_A(p, u) - f,
//   [S_A]_l N_l - (g [rho]_l eta_l + sigma_l H(eta_l)) N_l - T_l N_l,
//   gamma d1 eta_l + u . N_l,
// with S_A = p I - mu (grad u A^t + A grad u^t) and N_l = (-grad eta_l, 1).
// Products are formed on the 3/2-padded grid. The divergence and momentum
// rows use the flux form, so h_l(0) = int_0^{a_l} g(0) holds exactly. Top-node
// bulk rows are projected as in LinearSystem::forward.
// Throws BoundViolation("left trust region") when the quarter-gap bound fails.
DataTuple residual(const LinearSystem& sys, const ForcingSpec& forcing, const FlatState& x);

struct WaveOptions {
    double rtol = 1e-9, atol = 1e-13;
    int max_iterations = 50;
    // Regularity index of the reported norms. Larger values take more
    // vertical derivatives of the residual and lift its roundoff floor.
    double s = 0.0;
};

struct IterationRecord {
    double residual = 0.0;     // Y^s norm
    double state_norm = 0.0;   // X^s norm
    double max_surface = 0.0;  // max |eta_l|
    double margin = 0.0;       // quarter-gap bound minus max |eta_l|
    double zero_mode = 0.0;    // divergence zero-mode defect of the residual
};

struct IterationReport {
    std::vector<IterationRecord> iterations;
    double forcing_norm = 0.0;
    double max_ratio = 0.0;  // largest residual ratio between consecutive iterations
    bool monotone = true;
    bool converged = false;
    std::string verdict;
};

struct WaveResult {
    FlatState state;
    IterationReport report;
};

class WaveFailure : public Error {
public:
    WaveFailure(ExitCode code, const std::string& what, IterationReport report)
        : Error(code, what), report_(std::move(report)) {}
    const IterationReport& report() const { return report_; }

private:
    IterationReport report_;
};

// Frozen-linearization Picard iteration x <- x - Y^{-1}(residual(x)), with Y
// the linear operator of `sys`. Throws WaveFailure on divergence (growth over
// three consecutive iterations), on the iteration limit, or when an iterate
// leaves the quarter-gap trust region.
WaveResult solve_wave(const LinearSystem& sys, const ForcingSpec& forcing, const WaveOptions& options = {});

// Point evaluation of a flattened state in Eulerian coordinates.
class EulerianView {
public:
    EulerianView(const Discretization& disc, const FlatState& x, const Field* force = nullptr);

    // Layer containing the Eulerian point, -1 outside the deformed slab.
    int layer(const Point& X) const;
    // Values of v = u o F^{-1}, q = p o F^{-1} and the force, taking the
    // flattened point from `layer` (so interface points can be read from
    // either side).
    std::vector<double> velocity(const Point& X, int layer) const;
    double pressure(const Point& X, int layer) const;
    std::vector<double> force(const Point& X, int layer) const;
    double surface(int l, const Point& X) const;

private:
    std::vector<double> sample(const Field& f, int c0, int nc, const Point& X, int layer) const;

    const Discretization& disc_;
    const FlatState& x_;
    const Field* force_;
};

struct EulerianBundle {
    std::vector<Point> points;
    std::vector<int> layers;
    std::vector<std::vector<double>> velocity;
    std::vector<double> pressure;
    Field surfaces;  // a_l + eta_l
};

// Throws InputError when a point lies outside the deformed slab.
EulerianBundle unflatten(const Discretization& disc, const FlatState& x, const std::vector<Point>& points);

// Largest component of rho [(v - gamma e1) . grad] v + div S(q, v) - F at an
// interior Eulerian point, by centered differences with step h. Also returns
// the divergence of v through `divergence` when given.
double eulerian_momentum_residual(const EulerianView& view, const PhysicalConfig& cfg, const Point& X, double h,
                                  double* divergence = nullptr);

}  // namespace stwave

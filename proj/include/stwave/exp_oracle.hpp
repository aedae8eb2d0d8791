#pragma once

#include "stwave/config.hpp"
#include "stwave/grid.hpp"

namespace stwave {

// Cross-check for the collocation solver. Eliminates the pressure and the
// horizontal velocity, leaving (D^2 - K^2)(D^2 - lambda^2) w = 0 for the
// vertical velocity w in each layer, with K = 2 pi |xi| and
// lambda^2 = K^2 - 2 pi i gamma_eff rho xi_1 / mu. The four solutions are
// built from exponentials decaying away from the layer ends; the pair tied to
// lambda uses divided differences so the resonant case lambda = K reduces to
// the y e^{Ky} branch without cancellation.
//
// Returns the m x m matrix whose column k holds w at every interface for a
// unit normal stress at interface k. Requires xi != 0.
MatC exponential_normal_traces(const PhysicalConfig& cfg, const Xi& xi, double gamma_eff);

}  // namespace stwave

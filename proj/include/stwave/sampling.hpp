#pragma once

#include <random>

#include "stwave/state.hpp"

namespace stwave {

// Seeded random fields for the verification suites. All fields are real
// (conjugate-symmetric), free of Nyquist content and decay like exp(-|xi|).
namespace sampling {

// Independent polynomial of degree <= degree in every layer.
Field bulk(const Discretization& disc, int nc, std::mt19937_64& rng, int degree = 10);
// One polynomial in y over the whole slab, vanishing at y = 0.
Field continuous(const Discretization& disc, int nc, std::mt19937_64& rng, int degree = 10);
Field interfaces(const Discretization& disc, int nc, std::mt19937_64& rng, bool zero_mean = false);

// Data satisfying the zero-mode identities h_l(0) = int_0^{a_l} g(0).
DataTuple data(const Discretization& disc, std::mt19937_64& rng);
// State with continuous velocity vanishing at the bottom and zero-mean surfaces.
FlatState state(const Discretization& disc, Mode mode, std::mt19937_64& rng);

}  // namespace sampling
}  // namespace stwave

#include <doctest.h>

#include <cmath>
#include <random>

#include "stwave/compat.hpp"
#include "stwave/error.hpp"
#include "stwave/linear.hpp"
#include "stwave/sampling.hpp"

using namespace stwave;

namespace {

PhysicalConfig three_d_config() {
    PhysicalConfig c = reference_config();
    c.n = 3;
    return c;
}

double rel_diff(const Field& a, const Field& b) { return (a - b).max_abs() / std::max(a.max_abs(), 1e-300); }

DataTuple range_data(const LinearSystem& sys, std::mt19937_64& rng) {
    FlatState x = sampling::state(sys.disc(), sys.mode(), rng);
    x.eta.set_zero();
    return sys.forward(x);
}

}  // namespace

TEST_CASE("measure vanishes on zero data and the form on zero psi") {
    Discretization disc(reference_config(), TorusGrid(2, 16.0, 16));
    DualCache duals(disc);
    DataTuple zero = DataTuple::zero(disc);
    CHECK(measure(zero, duals).phi.max_abs() == 0.0);
    std::mt19937_64 rng(1);
    DataTuple d = sampling::data(disc, rng);
    CHECK(bilinear_form(d, Field(1, disc.m(), disc.modes()), disc) == 0.0);
}

TEST_CASE("data in the range of the stress map has zero measurement") {
    for (const PhysicalConfig& cfg : {reference_config(), three_d_config()}) {
        const int N = cfg.n == 2 ? 32 : 8;
        Discretization disc(cfg, TorusGrid(cfg.n, 16.0, N));
        LinearSystem sys(disc, Mode::surface_tension);
        std::mt19937_64 rng(2);
        for (int t = 0; t < 3; ++t) {
            DataTuple d = range_data(sys, rng);
            CompatMeasurement r = measure(d, sys.duals());
            CHECK(norms::hs_surface(r.phi, disc.grid(), 1.5) <= 1e-8 * r.data_norm);
        }
        // A generic perturbation of the kinematic row leaves the kernel.
        DataTuple d = range_data(sys, rng);
        Field bump = sampling::interfaces(disc, 1, rng, true);
        d.h += bump;
        CompatMeasurement r = measure(d, sys.duals());
        CHECK(norms::hs_surface(r.phi, disc.grid(), 1.5) > 1e-3 * r.data_norm);
        CHECK(rel_diff(r.phi, -1.0 * bump) < 1e-10);
    }
}

TEST_CASE("measure agrees with the physical-space bilinear form") {
    for (const PhysicalConfig& cfg : {reference_config(), three_d_config()}) {
        const int N = cfg.n == 2 ? 32 : 8;
        Discretization disc(cfg, TorusGrid(cfg.n, 16.0, N));
        DualCache duals(disc);
        std::mt19937_64 rng(3);
        DataTuple d = sampling::data(disc, rng);
        CompatMeasurement r = measure(d, duals);
        const int samples = cfg.n == 2 ? 20 : 4;
        for (int t = 0; t < samples; ++t) {
            Field psi = sampling::interfaces(disc, 1, rng);
            const double oracle = bilinear_form(d, psi, disc);
            const cplx pairing = surface_pairing(psi, r.phi, disc.grid());
            const double scale = std::sqrt(surface_pairing(psi, psi, disc.grid()).real()) * r.data_norm;
            CHECK(std::abs(pairing.imag()) <= 1e-12 * scale);
            CHECK(std::abs(pairing.real() - oracle) <= 1e-9 * scale);
        }
    }
}

TEST_CASE("bilinear form is linear in each slot") {
    Discretization disc(reference_config(), TorusGrid(2, 16.0, 16));
    std::mt19937_64 rng(4);
    DataTuple d1 = sampling::data(disc, rng), d2 = sampling::data(disc, rng);
    Field p1 = sampling::interfaces(disc, 1, rng), p2 = sampling::interfaces(disc, 1, rng);
    DataTuple d12 = d1;
    d12 *= 2.0;
    d12 -= d2;
    const double a = bilinear_form(d12, p1, disc);
    const double b = 2.0 * bilinear_form(d1, p1, disc) - bilinear_form(d2, p1, disc);
    CHECK(std::abs(a - b) <= 1e-11 * (std::abs(a) + std::abs(b)));
    const double c = bilinear_form(d1, p1 - 3.0 * p2, disc);
    const double e = bilinear_form(d1, p1, disc) - 3.0 * bilinear_form(d1, p2, disc);
    CHECK(std::abs(c - e) <= 1e-11 * (std::abs(c) + std::abs(e)));
}

TEST_CASE("measure is linear, real and commutes with tangential multipliers") {
    Discretization disc(reference_config(), TorusGrid(2, 16.0, 32));
    DualCache duals(disc);
    std::mt19937_64 rng(5);
    DataTuple d1 = sampling::data(disc, rng), d2 = sampling::data(disc, rng);
    Field phi1 = measure(d1, duals).phi, phi2 = measure(d2, duals).phi;
    CHECK(reality_defect(phi1, disc.grid()) <= 1e-12 * phi1.max_abs());

    DataTuple comb = d1;
    comb *= -0.5;
    comb += d2;
    Field expect = phi2 - 0.5 * phi1;
    CHECK(rel_diff(expect, measure(comb, duals).phi) <= 1e-10);

    auto omega = [](const Xi& xi) { return cplx(1.0 / (1.0 + xi[0] * xi[0]) + std::cos(xi[0]), 0.0); };
    DataTuple md = d1;
    for (Field* f : {&md.g, &md.f, &md.k, &md.h}) apply_multiplier(*f, disc.grid(), omega);
    Field mphi = phi1;
    apply_multiplier(mphi, disc.grid(), omega);
    CHECK(rel_diff(mphi, measure(md, duals).phi) <= 1e-10);
}

TEST_CASE("measure rejects an incompatible zero mode") {
    Discretization disc(reference_config(), TorusGrid(2, 16.0, 16));
    DualCache duals(disc);
    std::mt19937_64 rng(6);
    DataTuple d = sampling::data(disc, rng);
    d.h(0, 1, disc.grid().index(0, 0)) += 1e-3;
    CHECK_THROWS_WITH_AS(measure(d, duals), doctest::Contains(msg::incompatible_zero_mode), InputError);
}

TEST_CASE("measure norms stay proportional to the data norm across resolutions") {
    // Same band-limited data represented on two lattices.
    std::vector<double> low, reg;
    for (int N : {32, 64}) {
        Discretization disc(reference_config(), TorusGrid(2, 16.0, N));
        DualCache duals(disc);
        double lo = 0.0, hi = 0.0;
        for (int seed = 0; seed < 4; ++seed) {
            DataTuple d = DataTuple::zero(disc);
            for (int k = 0; k < disc.modes(); ++k) {
                auto w = disc.grid().wavenumber(k);
                if (std::abs(w[0]) > 12 || disc.grid().nyquist(k) || !disc.grid().canonical(k)) continue;
                std::mt19937_64 r(1000 * seed + 50 + w[0]);
                std::normal_distribution<double> nd;
                const double decay = std::exp(-norm(disc.grid().xi(k)));
                for (int l = 0; l < disc.m(); ++l) {
                    d.h(0, l, k) = decay * cplx(nd(r), nd(r));
                    d.k(1, l, k) = decay * cplx(nd(r), nd(r));
                }
                if (w[0] == 0) {
                    for (int l = 0; l < disc.m(); ++l) d.h(0, l, k) = 0.0;
                    d.k(1, 0, k) = d.k(1, 0, k).real();
                    d.k(1, 1, k) = d.k(1, 1, k).real();
                }
            }
            d.symmetrize(disc.grid());
            CompatMeasurement r = measure(d, duals);
            lo = std::max(lo, r.hdot_minus1 / r.data_norm);
            hi = std::max(hi, r.h_three_halves / r.data_norm);
        }
        low.push_back(lo);
        reg.push_back(hi);
    }
    CHECK(std::abs(low[1] / low[0] - 1.0) < 0.2);
    CHECK(std::abs(reg[1] / reg[0] - 1.0) < 0.2);
}

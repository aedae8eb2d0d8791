#include <doctest.h>

#include <cmath>
#include <random>

#include "stwave/error.hpp"
#include "stwave/linear.hpp"
#include "stwave/sampling.hpp"

using namespace stwave;

namespace {

PhysicalConfig config_for(Mode mode, int n = 2) {
    PhysicalConfig c = reference_config();
    c.n = n;
    if (mode == Mode::zero_surface_tension) c.sigma = {0.0, 0.0};
    return c;
}

double rel(const DataTuple& a, const DataTuple& b) { return (a - b).max_abs() / a.max_abs(); }
double rel(const FlatState& a, const FlatState& b) { return (a - b).max_abs() / a.max_abs(); }

// Gaussian normal load on the top interface: k_m = -phi e_n.
DataTuple gaussian_load(const Discretization& disc, double width) {
    const TorusGrid& g = disc.grid();
    Fourier F(g);
    const int N = g.size(), P = F.samples(N);
    std::vector<double> s(P);
    const double c = g.period() / 2;
    for (int p = 0; p < P; ++p) {
        double x1 = g.coordinate(disc.n() == 2 ? p : p / N, N) - c;
        double x2 = disc.n() == 2 ? 0.0 : g.coordinate(p % N, N) - c;
        s[p] = std::exp(-(x1 * x1 + x2 * x2) / (width * width));
    }
    Field phi = F.transform(s, 1, 1);
    zero_nyquist(phi, g);
    DataTuple d = DataTuple::zero(disc);
    for (int k = 0; k < disc.modes(); ++k) d.k(disc.n() - 1, disc.m() - 1, k) = -phi(0, 0, k);
    return d;
}

}  // namespace

TEST_CASE("zero maps to zero both ways") {
    for (Mode mode : {Mode::surface_tension, Mode::zero_surface_tension}) {
        Discretization disc(config_for(mode), TorusGrid(2, 16.0, 16));
        LinearSystem sys(disc, mode);
        CHECK(sys.forward(FlatState::zero(disc, mode)).max_abs() == 0.0);
        InverseResult r = sys.inverse(DataTuple::zero(disc));
        CHECK(r.state.max_abs() == 0.0);
        CHECK(r.report.consistency == 0.0);
    }
}

TEST_CASE("a pure surface state produces only the jump and kinematic rows") {
    for (Mode mode : {Mode::surface_tension, Mode::zero_surface_tension}) {
        PhysicalConfig cfg = config_for(mode);
        Discretization disc(cfg, TorusGrid(2, 16.0, 32));
        LinearSystem sys(disc, mode);
        std::mt19937_64 rng(11);
        FlatState x = FlatState::zero(disc, mode);
        x.eta = sampling::interfaces(disc, 1, rng, true);
        DataTuple d = sys.forward(x);
        CHECK(d.g.max_abs() == 0.0);
        CHECK(d.f.max_abs() == 0.0);
        CHECK(d.k.component(0).max_abs() == 0.0);
        double err = 0.0;
        for (int k = 0; k < disc.modes(); ++k) {
            const Xi xi = disc.grid().xi(k);
            const double lap = -4.0 * pi * pi * (xi[0] * xi[0]);
            for (int l = 0; l < disc.m(); ++l) {
                const double sigma = mode == Mode::surface_tension ? cfg.sigma[l] : 0.0;
                cplx kn = -(cfg.gravity * cfg.density_jump(l) + sigma * lap) * x.eta(0, l, k);
                cplx h = cfg.gamma * 2.0 * pi * I * xi[0] * x.eta(0, l, k);
                err = std::max({err, std::abs(d.k(1, l, k) - kn), std::abs(d.h(0, l, k) - h)});
            }
        }
        CHECK(err <= 1e-12 * x.eta.max_abs());
    }
}

TEST_CASE("round trips are the identity") {
    struct Case {
        Mode mode;
        int n, N;
    };
    for (Case c : {Case{Mode::surface_tension, 2, 32}, Case{Mode::zero_surface_tension, 2, 32},
                   Case{Mode::surface_tension, 3, 8}}) {
        Discretization disc(config_for(c.mode, c.n), TorusGrid(c.n, 16.0, c.N));
        LinearSystem sys(disc, c.mode);
        std::mt19937_64 rng(12);
        for (int t = 0; t < 3; ++t) {
            DataTuple d = sampling::data(disc, rng);
            InverseResult r = sys.inverse(d);
            CHECK(r.report.relative <= 1e-8);
            CHECK(rel(d, sys.forward(r.state)) <= 1e-8);
            CHECK(reality_defect(r.state.u, disc.grid()) <= 1e-12 * r.state.u.max_abs());
            CHECK(reality_defect(r.state.eta, disc.grid()) <= 1e-12 * r.state.eta.max_abs());

            FlatState x = sampling::state(disc, c.mode, rng);
            CHECK(rel(x, sys.inverse(sys.forward(x)).state) <= 1e-8);
        }
    }
}

TEST_CASE("a localized normal load passes the consistency check") {
    for (int n : {2, 3}) {
        Discretization disc(config_for(Mode::surface_tension, n), TorusGrid(n, 16.0, n == 2 ? 64 : 16));
        LinearSystem sys(disc, Mode::surface_tension);
        DataTuple d = gaussian_load(disc, 1.0);
        d *= 1e-2;
        // The load has a nonzero mean, balanced by a hydrostatic pressure.
        InverseResult r = sys.inverse(d);
        CHECK(r.report.relative <= 1e-8);
        CHECK(r.report.admissible);
        DataTuple back = sys.forward(r.state);
        CHECK((back.h - d.h).max_abs() <= 1e-8 * d.max_abs());
        CHECK(rel(d, back) <= 1e-8);
    }
}

TEST_CASE("solution norm tracks the data norm under refinement") {
    std::vector<double> ratio;
    for (int N : {32, 64}) {
        Discretization disc(config_for(Mode::surface_tension), TorusGrid(2, 16.0, N));
        LinearSystem sys(disc, Mode::surface_tension);
        DataTuple d = gaussian_load(disc, 1.0);
        InverseResult r = sys.inverse(d);
        ratio.push_back(sys.state_norm(r.state, 0.0) / data_norm(d, disc));
    }
    CHECK(std::abs(ratio[1] / ratio[0] - 1.0) < 0.2);
}

TEST_CASE("invalid problems are rejected") {
    PhysicalConfig cfg = reference_config();
    cfg.gamma = 0.0;
    {
        Discretization disc(cfg, TorusGrid(2, 16.0, 8));
        CHECK_THROWS_AS(LinearSystem(disc, Mode::surface_tension), InputError);
    }
    {
        Discretization disc(reference_config(), TorusGrid(2, 16.0, 8));
        CHECK_THROWS_AS(LinearSystem(disc, Mode::zero_surface_tension), InputError);
    }
    {
        Discretization disc(config_for(Mode::zero_surface_tension, 3), TorusGrid(3, 16.0, 4));
        CHECK_THROWS_AS(LinearSystem(disc, Mode::zero_surface_tension), InputError);
    }
    {
        PhysicalConfig bad = reference_config();
        bad.rho = {1.0, 2.0};
        Discretization disc(bad, TorusGrid(2, 16.0, 8));
        CHECK_THROWS_WITH_AS(LinearSystem(disc, Mode::surface_tension), doctest::Contains(msg::rayleigh_taylor),
                             InputError);
    }
    Discretization disc(reference_config(), TorusGrid(2, 16.0, 16));
    LinearSystem sys(disc, Mode::surface_tension);
    std::mt19937_64 rng(13);
    DataTuple d = sampling::data(disc, rng);
    d.h(0, 0, disc.grid().index(0, 0)) += 0.1;
    CHECK_THROWS_WITH_AS(sys.inverse(d), doctest::Contains(msg::incompatible_zero_mode), InputError);
}

TEST_CASE("solvers beyond the cache budget are rebuilt on demand") {
    Discretization disc(reference_config(), TorusGrid(2, 16.0, 16));
    LinearSystem cached(disc, Mode::surface_tension);
    LinearSystem lean(disc, Mode::surface_tension, 2, 0);
    CHECK(lean.cached_bytes() == 0);
    CHECK(cached.cached_bytes() > 0);
    std::mt19937_64 rng(14);
    DataTuple d = sampling::data(disc, rng);
    CHECK((cached.inverse(d).state - lean.inverse(d).state).max_abs() == doctest::Approx(0.0));
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "stwave/error.hpp"
#include "stwave/grid.hpp"

using namespace stwave;

namespace {

Field random_real_surface(const TorusGrid& g, int nc, std::mt19937_64& rng, double decay = 1.0) {
    std::normal_distribution<double> nd;
    Field f(nc, 1, g.modes());
    for (int c = 0; c < nc; ++c)
        for (int k = 0; k < g.modes(); ++k) {
            double w = std::exp(-decay * norm(g.xi(k)));
            f(c, 0, k) = w * cplx(nd(rng), nd(rng));
        }
    symmetrize(f, g);
    zero_nyquist(f, g);
    return f;
}

}  // namespace

TEST_CASE("transform of a constant and of a cosine") {
    TorusGrid g(2, 1.0, 16);
    Fourier F(g);
    std::vector<double> one(16, 1.0);
    Field c = F.transform(one, 1, 1);
    CHECK(std::abs(c(0, 0, 0) - 1.0) < 1e-15);
    for (int k = 1; k < 16; ++k) CHECK(std::abs(c(0, 0, k)) < 1e-15);

    std::vector<double> cs(16);
    for (int j = 0; j < 16; ++j) cs[j] = std::cos(2.0 * pi * g.coordinate(j, 16));
    Field f = F.transform(cs, 1, 1);
    CHECK(std::abs(f(0, 0, g.index(1, 0)) - 0.5) < 1e-15);
    CHECK(std::abs(f(0, 0, g.index(-1, 0)) - 0.5) < 1e-15);
    CHECK(std::abs(norms::hs_surface(f, g, 0.0) - std::sqrt(0.5)) < 1e-14);
    CHECK(std::abs(norms::hdot_minus1(f, g) - std::sqrt(0.5)) < 1e-14);
}

TEST_CASE("round trip and Plancherel for random real fields") {
    std::mt19937_64 rng(7);
    for (int n : {2, 3}) {
        TorusGrid g(n, 3.0, n == 2 ? 32 : 16);
        Fourier F(g);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const int S = F.samples(g.size());
        std::vector<double> s(S);
        for (auto& x : s) x = u(rng);
        Field f = F.transform(s, 1, 1);
        auto back = F.inverse(f);
        double err = 0.0, l2 = 0.0;
        for (int i = 0; i < S; ++i) {
            err = std::max(err, std::abs(back[i] - s[i]));
            l2 += s[i] * s[i];
        }
        CHECK(err < 1e-13);
        l2 *= g.volume() / S;
        double spec = std::pow(norms::hs_surface(f, g, 0.0), 2);
        CHECK(std::abs(spec - l2) <= 1e-12 * l2);
        CHECK(reality_defect(f, g) < 1e-14);
    }
}

TEST_CASE("padded transforms are exact for band-limited fields") {
    std::mt19937_64 rng(3);
    for (int n : {2, 3}) {
        TorusGrid g(n, 2.0, n == 2 ? 16 : 8);
        Fourier F(g);
        Field f = random_real_surface(g, 2, rng);
        Field back = F.from_physical(F.to_physical(f, F.padded()), 2, 1, F.padded());
        CHECK((back - f).max_abs() < 1e-14);
    }
}

TEST_CASE("multiplier examples") {
    TorusGrid g(2, 2.0, 32);
    Fourier F(g);
    std::vector<double> s(32);
    for (int j = 0; j < 32; ++j) s[j] = std::sin(2.0 * pi * g.coordinate(j, 32) / 2.0);
    Field f = F.transform(s, 1, 1);
    Field df = derivative(f, g, 0);
    auto phys = F.inverse(df);
    double err = 0.0;
    for (int j = 0; j < 32; ++j)
        err = std::max(err, std::abs(phys[j] - (2.0 * pi / 2.0) * std::cos(2.0 * pi * g.coordinate(j, 32) / 2.0)));
    CHECK(err < 1e-12);

    std::mt19937_64 rng(11);
    Field r = random_real_surface(g, 1, rng, 0.1);
    Field id = r;
    apply_multiplier(id, g, [](const Xi&) { return cplx(1.0); });
    CHECK((id - r).max_abs() == 0.0);
    Field lo = r, hi = r;
    apply_multiplier(lo, g, [](const Xi& xi) { return cplx(norm(xi) <= 3.0 ? 1.0 : 0.0); });
    apply_multiplier(hi, g, [](const Xi& xi) { return cplx(norm(xi) <= 3.0 ? 0.0 : 1.0); });
    CHECK((lo + hi - r).max_abs() < 1e-15);

    CHECK_THROWS_AS(apply_multiplier(id, g, [](const Xi& xi) { return cplx(xi[0], 0.0); }), InputError);
}

TEST_CASE("homogeneous seminorm demands a vanishing zero mode") {
    TorusGrid g(2, 1.0, 8);
    Field f(1, 1, g.modes());
    f(0, 0, 0) = 1.0;
    CHECK_THROWS_WITH(norms::hdot_minus1(f, g), "zero mode obstructs homogeneous seminorm");
    Field z(1, 1, g.modes());
    CHECK(norms::hdot_minus1(z, g) == 0.0);
    CHECK(norms::anisotropic(z, g, 1.0) == 0.0);
    CHECK(norms::hs_surface(z, g, 2.0) == 0.0);
}

TEST_CASE("anisotropic norm matches the homogeneous norm above unit frequency") {
    TorusGrid g(3, 2.0, 16);
    std::mt19937_64 rng(5);
    Field f = random_real_surface(g, 1, rng, 0.2);
    apply_multiplier(f, g, [](const Xi& xi) { return cplx(norm(xi) > 1.0 ? 1.0 : 0.0); });
    for (double s : {0.5, 1.5, 2.5}) {
        double a = norms::anisotropic(f, g, s), b = norms::hdot(f, g, s);
        CHECK(std::abs(a - b) <= 1e-12 * b);
        // Against the inhomogeneous weight the two differ by at most 2^{s/2}.
        double h = norms::hs_surface(f, g, s);
        CHECK(a <= h);
        CHECK(h <= std::pow(2.0, s / 2.0) * a * (1 + 1e-12));
    }
}

TEST_CASE("anisotropic and Sobolev norms are equivalent for n = 2 within the lattice weight bounds") {
    TorusGrid g(2, 8.0, 64);
    const double s = 1.5;
    double wmin = 1e300, wmax = 0.0;
    for (int k = 0; k < g.modes(); ++k) {
        double r = norm(g.xi(k));
        if (r == 0.0 || g.nyquist(k)) continue;
        Xi xi = g.xi(k);
        double wa = r <= 1.0 ? (xi[0] * xi[0] + r * r * r * r) / (r * r) : std::pow(r, 2 * s);
        double ratio = wa / std::pow(1 + r * r, s);
        wmin = std::min(wmin, ratio);
        wmax = std::max(wmax, ratio);
    }
    std::mt19937_64 rng(9);
    for (int t = 0; t < 10; ++t) {
        Field f = random_real_surface(g, 1, rng, 0.05);
        f(0, 0, 0) = 0.0;
        double q = std::pow(norms::anisotropic(f, g, s) / norms::hs_surface(f, g, s), 2);
        CHECK(q >= wmin * (1 - 1e-12));
        CHECK(q <= wmax * (1 + 1e-12));
    }
}

TEST_CASE("Chebyshev layer operators") {
    LayerMesh mesh({1.0, 2.5}, {12, 16});
    CHECK(mesh.total() == 13 + 17);
    for (int l = 0; l < 2; ++l) {
        const VecR& y = mesh.nodes(l);
        VecR f = y.array().cube() - 2.0 * y.array();
        VecR df = mesh.diff(l) * f;
        VecR exact = 3.0 * y.array().square() - 2.0;
        CHECK((df - exact).cwiseAbs().maxCoeff() < 1e-11);
        double lo = mesh.bottom(l), hi = mesh.top(l);
        double integral = mesh.weights(l).dot(f);
        double ex = (std::pow(hi, 4) - std::pow(lo, 4)) / 4 - (hi * hi - lo * lo);
        CHECK(std::abs(integral - ex) < 1e-12);
        VecR F = mesh.antideriv(l) * f;
        VecR Fex = (y.array().pow(4) - std::pow(lo, 4)) / 4 - (y.array().square() - lo * lo);
        CHECK((F - Fex).cwiseAbs().maxCoeff() < 1e-12);
        double yq = 0.37 * lo + 0.63 * hi;
        CHECK(std::abs(mesh.interp_row(l, yq).dot(f) - (yq * yq * yq - 2 * yq)) < 1e-12);
    }
    CHECK_THROWS_AS(LayerMesh({1.0}, {4}), InputError);
}

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "stwave/error.hpp"
#include "stwave/geometry.hpp"

using namespace stwave;

namespace {

Field smooth_surfaces(const TorusGrid& g, int m, double amp, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Field eta(1, m, g.modes());
    for (int l = 0; l < m; ++l)
        for (int k = 0; k < g.modes(); ++k) {
            if (k == 0 || g.nyquist(k)) continue;
            double r = norm(g.xi(k));
            eta(0, l, k) = amp * std::exp(-2.0 * r) * cplx(nd(rng), nd(rng));
        }
    symmetrize(eta, g);
    return eta;
}

}  // namespace

TEST_CASE("flattening examples") {
    std::vector<double> a{1.0, 2.0};
    CHECK(flatten_height(a, 1, 0.1, -0.05, 1.5) == doctest::Approx(1.525).epsilon(1e-15));
    CHECK(unflatten_height(a, 1, 0.1, -0.05, 1.525) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(flatten_height(a, 0, 0.0, 0.0, 0.3) == 0.3);
    CHECK(flatten_height(a, 1, 0.1, -0.05, 2.0) == doctest::Approx(1.95));
    CHECK_THROWS_AS(flatten_height(a, 2, 0.0, 0.0, 1.0), InputError);
    CHECK_THROWS_AS(flatten_height(a, 0, 0.0, 0.0, 1.5), InputError);
    CHECK_THROWS_AS(unflatten_height(a, 1, 0.5, -0.5, 1.5), InputError);
}

TEST_CASE("flatten and unflatten are mutually inverse and continuous across interfaces") {
    std::mt19937_64 rng(12);
    for (int n : {2, 3}) {
        TorusGrid g(n, 4.0, 16);
        std::vector<double> a{1.0, 1.8, 3.0};
        Field eta = smooth_surfaces(g, 3, 0.1, rng);
        std::uniform_real_distribution<double> ux(0.0, 4.0), ut(0.0, 1.0);
        std::uniform_int_distribution<int> ul(0, 2);
        double err = 0.0;
        for (int t = 0; t < 1000; ++t) {
            int l = ul(rng);
            double lo = l == 0 ? 0.0 : a[l - 1];
            Point p{ux(rng), n == 3 ? ux(rng) : 0.0, lo + ut(rng) * (a[l] - lo)};
            Point q = unflatten_map(a, eta, g, l, flatten_map(a, eta, g, l, p));
            err = std::max(err, std::abs(q[2] - p[2]) / a.back());
        }
        CHECK(err <= 1e-12);
        for (int l = 0; l < 2; ++l) {
            Point p{1.3, 0.7, a[l]};
            CHECK(flatten_map(a, eta, g, l, p)[2] == flatten_map(a, eta, g, l + 1, p)[2]);
        }
        Field zero(1, 3, g.modes());
        Point p{0.4, 0.2, 1.2};
        CHECK(flatten_map(a, zero, g, 1, p)[2] == p[2]);
    }
}

TEST_CASE("geometry fields") {
    SUBCASE("flat surfaces") {
        auto cfg = reference_config();
        TorusGrid g(2, 4.0, 8);
        Fourier F(g);
        auto mesh = make_mesh(cfg, 8);
        Field eta(1, 2, g.modes());
        auto G = geometry_fields(cfg, mesh, F, eta, 8);
        for (int node = 0; node < mesh.total(); ++node)
            for (int pt = 0; pt < G.S; ++pt) {
                CHECK(G.Jat(node, pt) == 1.0);
                CHECK(G.Aat(0, 0, node, pt) == 1.0);
                CHECK(G.Aat(0, 1, node, pt) == 0.0);
                CHECK(G.Aat(1, 0, node, pt) == 0.0);
                CHECK(G.Aat(1, 1, node, pt) == 1.0);
            }
        CHECK(G.Nat(1, 1, 3) == 1.0);
        CHECK(G.Nat(0, 1, 3) == 0.0);
    }
    SUBCASE("constant lift of a single layer") {
        PhysicalConfig c;
        c.n = 3;
        c.a = {1.0};
        c.rho = {1.0};
        c.mu = {1.0};
        c.sigma = {1.0};
        TorusGrid g(3, 1.0, 4);
        Fourier F(g);
        auto mesh = make_mesh(c, 8);
        Field eta(1, 1, g.modes());
        eta(0, 0, 0) = 0.1;
        auto G = geometry_fields(c, mesh, F, eta, 4);
        for (int node = 0; node < mesh.total(); ++node) {
            CHECK(G.Jat(node, 5) == doctest::Approx(1.1).epsilon(1e-15));
            CHECK(G.Aat(2, 2, node, 5) == doctest::Approx(1.0 / 1.1).epsilon(1e-15));
            CHECK(G.Aat(0, 0, node, 5) == 1.0);
            CHECK(G.Aat(1, 1, node, 5) == 1.0);
        }
    }
    SUBCASE("A is the inverse transpose of the flattening Jacobian") {
        std::mt19937_64 rng(2);
        PhysicalConfig cfg = reference_config();
        cfg.n = 3;
        TorusGrid g(3, 3.0, 8);
        Fourier F(g);
        auto mesh = make_mesh(cfg, 8);
        Field eta = smooth_surfaces(g, 2, 0.1, rng);
        auto G = geometry_fields(cfg, mesh, F, eta, 8);
        double err = 0.0;
        for (int l = 0; l < 2; ++l)
            for (int j = 0; j < mesh.count(l); ++j) {
                int node = mesh.offset(l) + j;
                double y = mesh.nodes(l)(j);
                for (int pt = 0; pt < G.S; pt += 7) {
                    Point x{3.0 * (pt / 8) / 8.0, 3.0 * (pt % 8) / 8.0, y};
                    // Analytic Jacobian of (x, Y(x, y)).
                    double lo = cfg.bottom(l), h = cfg.thickness(l), th = (y - lo) / h;
                    auto gb = l > 0 ? surface_gradient(eta, g, l - 1, x) : std::array<double, 2>{0.0, 0.0};
                    auto gt = surface_gradient(eta, g, l, x);
                    double eb = l > 0 ? surface_value(eta, g, l - 1, x) : 0.0, et = surface_value(eta, g, l, x);
                    Eigen::Matrix3d DF = Eigen::Matrix3d::Identity();
                    DF(2, 0) = (1 - th) * gb[0] + th * gt[0];
                    DF(2, 1) = (1 - th) * gb[1] + th * gt[1];
                    DF(2, 2) = (h + et - eb) / h;
                    Eigen::Matrix3d inv = DF.inverse().transpose();
                    Eigen::Matrix3d A;
                    for (int i = 0; i < 3; ++i)
                        for (int k = 0; k < 3; ++k) A(i, k) = G.Aat(i, k, node, pt);
                    err = std::max(err, (A - inv).cwiseAbs().maxCoeff());
                    CHECK(std::abs(DF.determinant() * A.determinant() - 1.0) < 1e-12);
                }
            }
        CHECK(err < 1e-12);
    }
}

TEST_CASE("mean curvature") {
    SUBCASE("constant surface has zero curvature") {
        TorusGrid g(3, 2.0, 8);
        Fourier F(g);
        Field eta(1, 1, g.modes());
        eta(0, 0, 0) = 0.3;
        CHECK(mean_curvature(eta, F, F.padded()).max_abs() < 1e-15);
    }
    SUBCASE("linearization is the Laplacian") {
        std::mt19937_64 rng(6);
        TorusGrid g(3, 4.0, 16);
        Fourier F(g);
        Field eta = smooth_surfaces(g, 1, 1.0, rng);
        const double eps = 1e-5;
        Field H = mean_curvature(eps * eta, F, F.padded());
        H *= 1.0 / eps;
        Field lap = eta;
        apply_multiplier(lap, g, [](const Xi& xi) { return cplx(-4.0 * pi * pi * (xi[0] * xi[0] + xi[1] * xi[1])); });
        CHECK((H - lap).max_abs() <= 1e-6 * lap.max_abs());
    }
    SUBCASE("one-dimensional closed form") {
        const double L = 4.0;
        TorusGrid g(2, L, 128);
        Fourier F(g);
        Field eta(1, 1, g.modes());
        eta(0, 0, g.index(1, 0)) = cplx(0.0, -0.5);
        eta(0, 0, g.index(-1, 0)) = cplx(0.0, 0.5);
        auto H = F.inverse(mean_curvature(eta, F, F.padded()));
        double err = 0.0, scale = 0.0;
        for (int j = 0; j < 128; ++j) {
            double x = g.coordinate(j, 128), k = 2 * pi / L;
            double d1 = k * std::cos(k * x), d2 = -k * k * std::sin(k * x);
            double ex = d2 / std::pow(1 + d1 * d1, 1.5);
            err = std::max(err, std::abs(H[j] - ex));
            scale = std::max(scale, std::abs(ex));
        }
        CHECK(err <= 1e-10 * scale);
    }
    SUBCASE("translation by shared grid steps commutes with curvature") {
        std::mt19937_64 rng(13);
        TorusGrid g(2, 3.0, 32);
        Fourier F(g);
        Field eta = smooth_surfaces(g, 1, 0.5, rng);
        auto shift = [&](Field f) {
            apply_multiplier(f, g, [](const Xi& xi) { return std::exp(-2.0 * pi * I * xi[0] * (2 * 3.0 / 32)); });
            return f;
        };
        Field a = mean_curvature(shift(eta), F, F.padded());
        Field b = shift(mean_curvature(eta, F, F.padded()));
        CHECK((a - b).max_abs() < 1e-12 * b.max_abs());
    }
}

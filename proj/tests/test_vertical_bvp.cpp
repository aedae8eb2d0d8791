#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "stwave/exp_oracle.hpp"
#include "stwave/vertical_bvp.hpp"

using namespace stwave;

namespace {

PhysicalConfig three_layer(int n) {
    PhysicalConfig c;
    c.n = n;
    c.a = {0.7, 1.5, 2.2};
    c.rho = {3.0, 2.0, 1.0};
    c.mu = {1.0, 0.4, 2.0};
    c.sigma = {0.3, 0.2, 0.5};
    c.gravity = 1.3;
    c.gamma = 0.8;
    return c;
}

// Second-order jets (value, first, second derivative) of analytic profiles.
struct Jet {
    std::function<cplx(double)> v, d1, d2;
};

// Manufactured solution: smooth in y across interfaces, u(0) = 0, pressure
// with a different offset in every layer.
struct Manufactured {
    std::vector<Jet> u;
    std::vector<Jet> p;  // one per layer

    // `w` adds an oscillation sin(w y) that is hard to resolve at low degree.
    explicit Manufactured(int n, int m, double w = 0.0) {
        for (int i = 0; i < n; ++i) {
            double b = 0.4 + 0.3 * i;
            cplx a(1.0 + 0.2 * i, 0.5 - 0.3 * i);
            u.push_back({[=](double y) { return a * (std::exp(b * y) - 1.0) + std::sin(w * y); },
                         [=](double y) { return a * b * std::exp(b * y) + w * std::cos(w * y); },
                         [=](double y) { return a * b * b * std::exp(b * y) - w * w * std::sin(w * y); }});
        }
        for (int l = 0; l < m; ++l) {
            double c0 = 0.3 * l - 0.1;
            p.push_back({[=](double y) { return cplx(c0 + std::sin(2.0 * y), 0.2 * std::cos(y)); },
                         [=](double y) { return cplx(2.0 * std::cos(2.0 * y), -0.2 * std::sin(y)); },
                         [=](double y) { return cplx(-4.0 * std::sin(2.0 * y), -0.2 * std::cos(y)); }});
        }
    }

    VerticalSolution sample(const LayerMesh& mesh, int n) const {
        VerticalSolution s = VerticalSolution::zero(n, mesh.total());
        for (int l = 0; l < mesh.layers(); ++l)
            for (int j = 0; j < mesh.count(l); ++j) {
                double y = mesh.nodes(l)(j);
                int g = mesh.offset(l) + j;
                for (int i = 0; i < n; ++i) s.u[i](g) = u[i].v(y);
                s.p(g) = p[l].v(y);
            }
        return s;
    }

    // Data from applying the operator with exact derivatives.
    VerticalData data(const PhysicalConfig& cfg, const LayerMesh& mesh, const Xi& xi, double ge) const {
        const int n = cfg.n, m = cfg.m();
        VerticalData d = VerticalData::zero(n, m, mesh.total());
        auto stress = [&](int l, double y, int i, int j) {
            // S_ij = p delta_ij - mu (d_j u_i + d_i u_j)
            auto der = [&](int comp, int dir) {
                return dir < n - 1 ? 2.0 * pi * I * xi[dir] * u[comp].v(y) : u[comp].d1(y);
            };
            cplx s = -cfg.mu[l] * (der(i, j) + der(j, i));
            if (i == j) s += p[l].v(y);
            return s;
        };
        for (int l = 0; l < m; ++l)
            for (int jn = 0; jn < mesh.count(l); ++jn) {
                double y = mesh.nodes(l)(jn);
                int g = mesh.offset(l) + jn;
                cplx div = u[n - 1].d1(y);
                for (int j = 0; j < n - 1; ++j) div += 2.0 * pi * I * xi[j] * u[j].v(y);
                d.g(g) = div;
                for (int i = 0; i < n; ++i) {
                    cplx acc = 0.0;
                    for (int j = 0; j < n - 1; ++j) acc += 2.0 * pi * I * xi[j] * stress(l, y, i, j);
                    // d_y S_in = p' delta_in - mu (u_i'' + d_i u_n')
                    cplx dS = -cfg.mu[l] * (u[i].d2(y) + (i < n - 1 ? 2.0 * pi * I * xi[i] * u[n - 1].d1(y)
                                                                     : u[n - 1].d2(y)));
                    if (i == n - 1) dS += p[l].d1(y);
                    acc += dS;
                    d.f[i](g) = acc - ge * cfg.rho[l] * 2.0 * pi * I * xi[0] * u[i].v(y);
                }
            }
        for (int l = 0; l < m; ++l) {
            double y = cfg.top(l);
            for (int i = 0; i < n; ++i) {
                cplx below = stress(l, y, i, n - 1);
                cplx above = l + 1 < m ? stress(l + 1, y, i, n - 1) : cplx(0.0);
                d.k[l](i) = above - below;
            }
        }
        return d;
    }
};

double rel_error(const VerticalSolution& a, const VerticalSolution& b) {
    double e = (a.p - b.p).cwiseAbs().maxCoeff();
    for (std::size_t i = 0; i < a.u.size(); ++i) e = std::max(e, (a.u[i] - b.u[i]).cwiseAbs().maxCoeff());
    return e / b.max_abs();
}

VerticalData random_profiles(int n, int m, const LayerMesh& mesh, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    auto rc = [&] { return cplx(nd(rng), nd(rng)); };
    VerticalData d = VerticalData::zero(n, m, mesh.total());
    // Smooth profiles: low-degree polynomials in y.
    cplx c[4];
    for (auto& x : c) x = rc();
    for (int j = 0; j < mesh.total(); ++j) {
        int l = mesh.layer_of_node(j);
        double y = mesh.nodes(l)(j - mesh.offset(l));
        d.g(j) = c[0] + c[1] * y;
        for (int i = 0; i < n; ++i) d.f[i](j) = c[2] * double(i + 1) + c[3] * y * y;
    }
    for (int l = 0; l < m; ++l)
        for (int i = 0; i < n; ++i) d.k[l](i) = rc();
    return d;
}

}  // namespace

TEST_CASE("zero data gives the zero solution") {
    auto cfg = three_layer(3);
    auto mesh = make_mesh(cfg, 20);
    StokesBvp bvp(cfg, mesh, {0.4, -0.3}, cfg.gamma);
    auto s = bvp.solve(VerticalData::zero(3, 3, mesh.total()));
    CHECK(s.max_abs() == 0.0);
    auto t = bvp.solve_normal_stress(VecC::Zero(3));
    CHECK(t.max_abs() == 0.0);
}

TEST_CASE("zero frequency with divergence data integrates the vertical velocity") {
    auto cfg = reference_config();
    auto mesh = make_mesh(cfg, 24);
    StokesBvp bvp(cfg, mesh, {0.0, 0.0}, cfg.gamma);
    VerticalData d = VerticalData::zero(2, 2, mesh.total());
    for (int j = 0; j < mesh.total(); ++j) {
        int l = mesh.layer_of_node(j);
        double y = mesh.nodes(l)(j - mesh.offset(l));
        d.g(j) = std::cos(y);
    }
    auto s = bvp.solve(d);
    for (int j = 0; j < mesh.total(); ++j) {
        int l = mesh.layer_of_node(j);
        double y = mesh.nodes(l)(j - mesh.offset(l));
        CHECK(std::abs(s.u[1](j) - std::sin(y)) < 1e-12);
        CHECK(std::abs(s.u[0](j)) < 1e-12);
    }
}

TEST_CASE("normal stress at zero frequency leaves the vertical velocity at zero") {
    auto cfg = reference_config();
    auto mesh = make_mesh(cfg, 16);
    StokesBvp bvp(cfg, mesh, {0.0, 0.0}, -cfg.gamma);
    VecC psi(2);
    psi << cplx(1.0, 2.0), cplx(-0.5, 0.3);
    auto s = bvp.solve_normal_stress(psi);
    CHECK(s.u[1].cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("manufactured solution residuals and accuracy") {
    for (int n : {2, 3}) {
        auto cfg = three_layer(n);
        Manufactured ms(n, cfg.m());
        for (Xi xi : {Xi{0.3, n == 3 ? -0.2 : 0.0}, Xi{-1.1, n == 3 ? 0.7 : 0.0}, Xi{0.0, n == 3 ? 0.5 : 0.0}}) {
            for (double ge : {cfg.gamma, -cfg.gamma}) {
                auto mesh = make_mesh(cfg, 32);
                auto data = ms.data(cfg, mesh, xi, ge);
                StokesBvp bvp(cfg, mesh, xi, ge);
                auto s = bvp.solve(data);
                auto exact = ms.sample(mesh, n);
                CHECK(rel_error(s, exact) <= 1e-8);

                // Residuals at the nodes, with the computed traction as the flux.
                auto r = apply_stokes(cfg, mesh, xi, ge, s, true);
                double scale = data.g.cwiseAbs().maxCoeff();
                for (int i = 0; i < n; ++i) scale = std::max(scale, data.f[i].cwiseAbs().maxCoeff());
                double res = (r.g - data.g).cwiseAbs().maxCoeff();
                for (int i = 0; i < n; ++i) res = std::max(res, (r.f[i] - data.f[i]).cwiseAbs().maxCoeff());
                for (int l = 0; l < cfg.m(); ++l) res = std::max(res, (r.k[l] - data.k[l]).cwiseAbs().maxCoeff());
                CHECK(res <= 1e-10 * scale);
                // Rebuilding the traction from u costs a second derivative.
                auto r2 = apply_stokes(cfg, mesh, xi, ge, s);
                double res2 = 0.0;
                for (int i = 0; i < n; ++i) res2 = std::max(res2, (r2.f[i] - data.f[i]).cwiseAbs().maxCoeff());
                CHECK(res2 <= 1e-8 * scale);
                const double us = s.max_abs();
                for (int i = 0; i < n; ++i) {
                    CHECK(std::abs(s.u[i](0)) < 1e-12 * us);
                    for (int l = 0; l + 1 < cfg.m(); ++l)
                        CHECK(std::abs(s.u[i](mesh.top_node(l)) - s.u[i](mesh.bottom_node(l + 1))) < 1e-12 * us);
                }
            }
        }
    }
}

TEST_CASE("manufactured solution converges spectrally in the degree") {
    auto cfg = three_layer(2);
    Manufactured ms(2, cfg.m(), 25.0);
    Xi xi{0.6, 0.0};
    auto err = [&](int d) {
        auto mesh = make_mesh(cfg, d);
        StokesBvp bvp(cfg, mesh, xi, cfg.gamma);
        return rel_error(bvp.solve(ms.data(cfg, mesh, xi, cfg.gamma)), ms.sample(mesh, 2));
    };
    double e16 = err(16), e24 = err(24);
    CHECK(e24 / e16 <= 1e-2);
    CHECK(err(40) < 1e-10);
}

TEST_CASE("linearity and conjugation symmetry") {
    std::mt19937_64 rng(21);
    auto cfg = three_layer(3);
    auto mesh = make_mesh(cfg, 24);
    Xi xi{0.35, -0.8};
    StokesBvp bvp(cfg, mesh, xi, cfg.gamma);
    auto d1 = random_profiles(3, 3, mesh, rng), d2 = random_profiles(3, 3, mesh, rng);
    cplx a(0.3, -1.2), b(2.0, 0.1);
    VerticalData mix = VerticalData::zero(3, 3, mesh.total());
    mix.g = a * d1.g + b * d2.g;
    for (int i = 0; i < 3; ++i) mix.f[i] = a * d1.f[i] + b * d2.f[i];
    for (int l = 0; l < 3; ++l) mix.k[l] = a * d1.k[l] + b * d2.k[l];
    auto s1 = bvp.solve(d1), s2 = bvp.solve(d2), sm = bvp.solve(mix);
    VerticalSolution comb = VerticalSolution::zero(3, mesh.total());
    comb.p = a * s1.p + b * s2.p;
    for (int i = 0; i < 3; ++i) comb.u[i] = a * s1.u[i] + b * s2.u[i];
    CHECK(rel_error(sm, comb) < 1e-11);

    StokesBvp neg(cfg, mesh, {-xi[0], -xi[1]}, cfg.gamma);
    VerticalData cd = d1;
    cd.g = d1.g.conjugate();
    for (auto& f : cd.f) f = f.conjugate();
    for (auto& k : cd.k) k = k.conjugate();
    auto sc = neg.solve(cd);
    VerticalSolution cs = s1;
    cs.p = s1.p.conjugate();
    for (auto& u : cs.u) u = u.conjugate();
    CHECK(rel_error(sc, cs) < 1e-11);
}

TEST_CASE("divergence compatibility of computed normal traces") {
    std::mt19937_64 rng(4);
    auto cfg = three_layer(3);
    auto mesh = make_mesh(cfg, 24);
    Xi xi{-0.45, 0.25};
    StokesBvp bvp(cfg, mesh, xi, cfg.gamma);
    auto d = random_profiles(3, 3, mesh, rng);
    auto s = bvp.solve(d);
    for (int l = 0; l < 3; ++l) {
        cplx h = s.u[2](mesh.top_node(l));
        cplx lhs = h - integrate(mesh, d.g, l);
        cplx rhs = 0.0;
        for (int j = 0; j < 2; ++j) rhs -= 2.0 * pi * I * xi[j] * integrate(mesh, s.u[j], l);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(h)));
    }
}

TEST_CASE("normal-stress solutions are divergence free") {
    auto cfg = three_layer(3);
    auto mesh = make_mesh(cfg, 24);
    Xi xi{0.9, 0.4};
    StokesBvp bvp(cfg, mesh, xi, -cfg.gamma);
    VecC psi(3);
    psi << 1.0, cplx(0.0, -2.0), 0.5;
    auto s = bvp.solve_normal_stress(psi);
    auto r = apply_stokes(cfg, mesh, xi, -cfg.gamma, s);
    CHECK(r.g.cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("single layer without speed matches the exponential-basis oracle") {
    PhysicalConfig c;
    c.n = 2;
    c.a = {1.3};
    c.rho = {1.0};
    c.mu = {0.7};
    c.sigma = {0.0};
    c.gamma = 0.0;
    for (double x : {0.05, 0.4, 1.7, 4.0}) {
        Xi xi{x, 0.0};
        auto mesh = make_mesh(c, DegreePolicy{}, x);
        StokesBvp bvp(c, mesh, xi, 0.0);
        VecC psi = VecC::Ones(1);
        auto s = bvp.solve_normal_stress(psi);
        cplx col = s.u[1](mesh.top_node(0));
        cplx ora = exponential_normal_traces(c, xi, 0.0)(0, 0);
        CHECK(std::abs(col - ora) <= 1e-9 * std::abs(ora));
    }
}

TEST_CASE("multilayer traveling problem matches the exponential-basis oracle") {
    for (int n : {2, 3}) {
        auto cfg = three_layer(n);
        for (Xi xi : {Xi{0.2, n == 3 ? 0.1 : 0.0}, Xi{-1.5, n == 3 ? 0.6 : 0.0}, Xi{0.0, n == 3 ? 0.9 : 0.0}}) {
            if (norm(xi) == 0.0) continue;
            auto mesh = make_mesh(cfg, DegreePolicy{}, norm(xi));
            StokesBvp bvp(cfg, mesh, xi, -cfg.gamma);
            MatC col(3, 3);
            for (int k = 0; k < 3; ++k) {
                auto s = bvp.solve_normal_stress(VecC::Unit(3, k));
                for (int l = 0; l < 3; ++l) col(l, k) = s.u[n - 1](mesh.top_node(l));
            }
            MatC ora = exponential_normal_traces(cfg, xi, -cfg.gamma);
            CHECK((col - ora).norm() <= 1e-9 * ora.norm());
        }
    }
}

TEST_CASE("energy form identities") {
    std::mt19937_64 rng(8);
    auto cfg = three_layer(3);
    auto mesh = make_mesh(cfg, 24);
    Xi xi{0.7, -0.2};
    StokesBvp bvp(cfg, mesh, xi, cfg.gamma);
    auto w = bvp.solve(random_profiles(3, 3, mesh, rng)).u;
    auto v = bvp.solve(random_profiles(3, 3, mesh, rng)).u;

    cplx bww = energy_form(cfg, mesh, xi, cfg.gamma, w, w);
    double sym = 0.0;
    {
        // sum_l (mu_l / 2) |D w|^2 layer by layer
        for (int l = 0; l < 3; ++l) {
            PhysicalConfig one = cfg;
            std::vector<VecC> wl = w;
            for (auto& c : wl)
                for (int j = 0; j < mesh.total(); ++j)
                    if (mesh.layer_of_node(j) != l) c(j) = 0.0;
            sym += 0.5 * cfg.mu[l] * sym_grad_sq(one, mesh, xi, wl);
        }
    }
    CHECK(std::abs(bww.real() - sym) <= 1e-11 * sym);

    std::vector<VecC> zero(3, VecC::Zero(mesh.total()));
    CHECK(energy_form(cfg, mesh, xi, cfg.gamma, zero, v) == cplx(0.0));

    // Weak form of the normal-stress problem: B_{-gamma}(v, v) = sum psi_l conj(v_n(a_l)).
    StokesBvp dual(cfg, mesh, xi, -cfg.gamma);
    VecC psi(3);
    psi << cplx(0.4, 1.0), -0.7, cplx(0.0, 0.3);
    auto s = dual.solve_normal_stress(psi);
    cplx lhs = energy_form(cfg, mesh, xi, -cfg.gamma, s.u, s.u);
    cplx rhs = 0.0;
    for (int l = 0; l < 3; ++l) rhs += psi(l) * std::conj(s.u[2](mesh.top_node(l)));
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(rhs));
}

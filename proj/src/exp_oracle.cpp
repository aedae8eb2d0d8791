#include "stwave/exp_oracle.hpp"

#include <cmath>

#include "stwave/error.hpp"

namespace stwave {

namespace {

// (e^z - 1) / z
cplx expm1c(cplx z) {
    if (std::abs(z) < 0.5) {
        cplx term = 1.0, sum = 1.0;
        for (int n = 2; n < 24; ++n) {
            term *= z / double(n);
            sum += term;
        }
        return sum;
    }
    return (std::exp(z) - 1.0) / z;
}

// j-th derivative in s of (e^{a s} - e^{b s}) / (a - b).
cplx divided(cplx a, cplx b, double s, int j) {
    cplx d = a - b;
    cplx poly = 0.0;
    for (int i = 0; i < j; ++i) poly += std::pow(a, i) * std::pow(b, j - 1 - i);
    return std::exp(b * s) * (poly * std::exp(d * s) + std::pow(b, j) * s * expm1c(d * s));
}

// Derivatives 0..3 of the four basis functions of one layer at height y.
std::array<std::array<cplx, 4>, 4> basis(double K, cplx lam, double bot, double top, double y) {
    std::array<std::array<cplx, 4>, 4> B{};
    const double st = y - top, sb = y - bot;
    for (int j = 0; j < 4; ++j) {
        B[0][j] = std::pow(K, j) * std::exp(K * st);
        B[1][j] = std::pow(-K, j) * std::exp(-K * sb);
        B[2][j] = divided(lam, K, st, j);
        B[3][j] = divided(-lam, cplx(-K), sb, j);
    }
    return B;
}

}  // namespace

MatC exponential_normal_traces(const PhysicalConfig& cfg, const Xi& xi, double gamma_eff) {
    const double r = norm(xi);
    if (!(r > 0.0)) throw InputError("exponential oracle requires a nonzero frequency");
    const int m = cfg.m();
    const double K = 2.0 * pi * r;
    std::vector<cplx> lam(m), W(m);
    for (int l = 0; l < m; ++l) {
        W[l] = gamma_eff * cfg.rho[l] * 2.0 * pi * I * xi[0];
        lam[l] = std::sqrt(K * K - W[l] / cfg.mu[l]);
    }

    // Rows of (w, w', t_s, t_n) evaluated from the coefficients of layer l at y.
    auto rows = [&](int l, double y) {
        auto B = basis(K, lam[l], cfg.bottom(l), cfg.top(l), y);
        const double mu = cfg.mu[l];
        Eigen::Matrix<cplx, 4, 4> R;
        for (int b = 0; b < 4; ++b) {
            const auto& w = B[b];
            cplx p = (mu * (w[3] - K * K * w[1]) + W[l] * w[1]) / (K * K);
            R(0, b) = w[0];
            R(1, b) = w[1];
            R(2, b) = -mu * (I * w[2] / K + I * K * w[0]);
            R(3, b) = p - 2.0 * mu * w[1];
        }
        return R;
    };

    MatC S = MatC::Zero(4 * m, 4 * m);
    int row = 0;
    {
        auto R = rows(0, 0.0);
        S.block(row, 0, 2, 4) = R.topRows(2);
        row += 2;
    }
    for (int l = 0; l < m; ++l) {
        auto below = rows(l, cfg.top(l));
        if (l + 1 < m) {
            auto above = rows(l + 1, cfg.top(l));
            S.block(row, 4 * (l + 1), 4, 4) = above;
            S.block(row, 4 * l, 4, 4) = -below;
            row += 4;
        } else {
            S.block(row, 4 * l, 2, 4) = -below.bottomRows(2);
            row += 2;
        }
    }

    Eigen::PartialPivLU<MatC> lu(S);
    MatC out(m, m);
    for (int k = 0; k < m; ++k) {
        VecC rhs = VecC::Zero(4 * m);
        // Rows: 2 bottom, then 4 per interior interface (w, w', t_s, t_n), then 2 top.
        rhs(k + 1 < m ? 2 + 4 * k + 3 : 2 + 4 * (m - 1) + 1) = 1.0;
        VecC c = lu.solve(rhs);
        for (int l = 0; l < m; ++l) {
            auto R = rows(l, cfg.top(l));
            out(l, k) = (R.row(0) * c.segment(4 * l, 4))(0);
        }
    }
    return out;
}

}  // namespace stwave

#include "stwave/symbols.hpp"

#include <fmt/format.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "stwave/error.hpp"
#include "stwave/parallel.hpp"

namespace stwave {

MatC normal_symbol_on(const PhysicalConfig& cfg, const LayerMesh& mesh, const Xi& xi, double gamma) {
    const int m = cfg.m(), n = cfg.n;
    MatC out = MatC::Zero(m, m);
    if (norm(xi) == 0.0) return out;
    StokesBvp bvp(cfg, mesh, xi, -gamma);
    for (int k = 0; k < m; ++k) {
        VecC psi = VecC::Zero(m);
        psi(k) = 1.0;
        auto s = bvp.solve_normal_stress(psi);
        for (int l = 0; l < m; ++l) out(l, k) = s.u[n - 1](mesh.top_node(l));
    }
    return out;
}

MatC tail_coefficient(const PhysicalConfig& cfg, const Xi& direction, double gamma, const DegreePolicy& policy) {
    // Relative least squares over the decade: minimizes sum |n(r_j) r_j - C|^2.
    const double cut = policy.cutoff(cfg) * (1.0 - 1e-9);
    const int samples = 6;
    MatC c = MatC::Zero(cfg.m(), cfg.m());
    for (int j = 0; j < samples; ++j) {
        const double r = cut * std::pow(10.0, -double(j) / (samples - 1));
        Xi xi{r * direction[0], r * direction[1]};
        c += r * normal_symbol_on(cfg, make_mesh(cfg, policy, r), xi, gamma);
    }
    return c / double(samples);
}

MatC compute_n(const PhysicalConfig& cfg, const Xi& xi, double gamma, const DegreePolicy& policy) {
    const double r = norm(xi);
    if (r > policy.cutoff(cfg)) {
        Xi dir{xi[0] / r, xi[1] / r};
        return tail_coefficient(cfg, dir, gamma, policy) / r;
    }
    auto mesh = make_mesh(cfg, policy, r);
    return normal_symbol_on(cfg, mesh, xi, gamma);
}

MatC capillary_matrix(const PhysicalConfig& cfg, const Xi& xi, Mode mode) {
    const int m = cfg.m();
    const double r2 = xi[0] * xi[0] + xi[1] * xi[1];
    MatC o = MatC::Zero(m, m);
    for (int l = 0; l < m; ++l) {
        double v = -cfg.gravity * cfg.density_jump(l);
        if (mode == Mode::surface_tension) v += 4.0 * pi * pi * r2 * cfg.sigma[l];
        o(l, l) = v;
    }
    return o;
}

double spectral_norm(const MatC& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<MatC> svd(a);
    return svd.singularValues()(0);
}

double hermitian_floor(const MatC& a) {
    MatC h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<MatC> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

PSymbol assemble_p(const PhysicalConfig& cfg, const Xi& xi, Mode mode, const MatC& n_minus) {
    const int m = cfg.m();
    PSymbol s;
    s.p = n_minus * capillary_matrix(cfg, xi, mode) - 2.0 * pi * I * cfg.gamma * xi[0] * MatC::Identity(m, m);
    if (norm(xi) == 0.0) return s;
    Eigen::JacobiSVD<MatC> svd(s.p);
    const auto& sv = svd.singularValues();
    s.cond = sv(m - 1) > 0.0 ? sv(0) / sv(m - 1) : INFINITY;
    if (!(s.cond < 1e12))
        throw SolverError(fmt::format("p_gamma is numerically singular at xi = ({}, {}), cond = {:.3e}", xi[0], xi[1],
                                      s.cond));
    s.p_inv = s.p.inverse();
    s.invertible = true;
    return s;
}

PSymbol compute_p(const PhysicalConfig& cfg, const Xi& xi, Mode mode, const DegreePolicy& policy) {
    cfg.validate(true);
    cfg.validate_mode(mode);
    return assemble_p(cfg, xi, mode, compute_n(cfg, xi, -cfg.gamma, policy));
}

SymbolTable::SymbolTable(const PhysicalConfig& cfg, const TorusGrid& grid, Mode mode, DegreePolicy policy)
    : cfg_(cfg), grid_(grid), mode_(mode), policy_(policy), entries_(grid.modes()) {
    cfg_.validate(true);
    cfg_.validate_mode(mode);
    if (cfg_.n != grid.n()) throw InputError("symbol table: config and grid dimensions differ");
    hash_ = cfg_.hash();
    auto mix = [&](std::uint64_t v) { hash_ ^= v + 0x9e3779b97f4a7c15ULL + (hash_ << 6) + (hash_ >> 2); };
    mix(static_cast<std::uint64_t>(mode));
    mix(static_cast<std::uint64_t>(policy.min_degree));
    mix(static_cast<std::uint64_t>(policy.cap));
    mix(static_cast<std::uint64_t>(policy.factor * 1e6));
    mix(static_cast<std::uint64_t>(grid.size()));
    mix(static_cast<std::uint64_t>(grid.period() * 1e9));
}

const MatC& SymbolTable::tail(const Xi& direction, double gamma) {
    std::array<double, 3> key{direction[0], direction[1], gamma};
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = tails_.find(key);
        if (it != tails_.end()) return it->second;
    }
    MatC c = tail_coefficient(cfg_, direction, gamma, policy_);
    std::lock_guard<std::mutex> lock(mu_);
    return tails_.emplace(key, std::move(c)).first->second;
}

SymbolEntry SymbolTable::build(int k) {
    SymbolEntry e;
    e.xi = grid_.xi(k);
    const double r = norm(e.xi);
    const int m = cfg_.m();
    if (r == 0.0) {
        e.n_gamma = e.n_minus = MatC::Zero(m, m);
    } else if (r > policy_.cutoff(cfg_)) {
        Xi dir{e.xi[0] / r, e.xi[1] / r};
        e.n_gamma = tail(dir, cfg_.gamma) / r;
        e.n_minus = tail(dir, -cfg_.gamma) / r;
        e.extrapolated = true;
    } else {
        auto mesh = make_mesh(cfg_, policy_, r);
        e.n_gamma = normal_symbol_on(cfg_, mesh, e.xi, cfg_.gamma);
        e.n_minus = normal_symbol_on(cfg_, mesh, e.xi, -cfg_.gamma);
    }
    e.o = capillary_matrix(cfg_, e.xi, mode_);
    PSymbol p = assemble_p(cfg_, e.xi, mode_, e.n_minus);
    e.p = p.p;
    e.p_inv = p.p_inv;
    e.invertible = p.invertible;
    e.cond_p = p.cond;
    e.coercivity = r == 0.0 ? 0.0 : hermitian_floor(e.n_gamma);
    return e;
}

const SymbolEntry& SymbolTable::at(int k) {
    {
        std::lock_guard<std::mutex> lock(mu_);
        if (entries_[k]) return *entries_[k];
    }
    // Conjugate partners share one build: n(-xi) = conj(n(xi)).
    const int c = grid_.canonical(k) ? k : grid_.negate(k);
    SymbolEntry e;
    bool have = false;
    {
        std::lock_guard<std::mutex> lock(mu_);
        if (entries_[c]) {
            e = *entries_[c];
            have = true;
        }
    }
    if (!have) e = build(c);
    std::lock_guard<std::mutex> lock(mu_);
    if (!entries_[c]) entries_[c] = std::make_unique<SymbolEntry>(e);
    if (c != k && !entries_[k]) {
        SymbolEntry s = e;
        s.xi = grid_.xi(k);
        for (MatC* mat : {&s.n_gamma, &s.n_minus, &s.o, &s.p, &s.p_inv}) *mat = mat->conjugate();
        entries_[k] = std::make_unique<SymbolEntry>(std::move(s));
    }
    return *entries_[k];
}

void SymbolTable::build_all(int threads) {
    std::vector<int> todo;
    for (int k = 0; k < grid_.modes(); ++k)
        if (grid_.canonical(k)) todo.push_back(k);
    parallel_for(todo.size(), threads, [&](std::size_t i) { at(todo[i]); });
    for (int k = 0; k < grid_.modes(); ++k) at(k);
}

void SymbolTable::write_csv(std::ostream& os) {
    const int m = cfg_.m();
    std::string header = "xi1,xi2";
    for (const char* name : {"n_gamma", "n_minus_gamma", "o", "p_gamma"})
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) header += fmt::format(",re_{0}_{1}{2},im_{0}_{1}{2}", name, i + 1, j + 1);
    os << header << ",cond_p,coercivity,extrapolated\n";
    for (int k = 0; k < grid_.modes(); ++k) {
        bool built;
        {
            std::lock_guard<std::mutex> lock(mu_);
            built = entries_[k] != nullptr;
        }
        if (!built) continue;
        const SymbolEntry& e = at(k);
        std::string row = fmt::format("{:.17g},{:.17g}", e.xi[0], e.xi[1]);
        for (const MatC* mat : {&e.n_gamma, &e.n_minus, &e.o, &e.p})
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) row += fmt::format(",{:.17g},{:.17g}", (*mat)(i, j).real(), (*mat)(i, j).imag());
        os << row << fmt::format(",{:.17g},{:.17g},{}\n", e.cond_p, e.coercivity, e.extrapolated ? 1 : 0);
    }
}

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

double weight(double r) { return std::min(r * r, 1.0 / r); }

}  // namespace

AsymptoticsReport verify_asymptotics(const PhysicalConfig& cfg, const Sweep& sweep, const DegreePolicy& policy) {
    cfg.validate(false);
    AsymptoticsReport rep;
    rep.cutoff = policy.cutoff(cfg);
    const double lo = std::min(sweep.low_lo, sweep.high_lo), hi = std::max(sweep.low_hi, sweep.high_hi);
    if (lo < 1e-5 || hi > 10.0 * rep.cutoff || sweep.points < 2)
        throw InputError(fmt::format("frequency sweep [{}, {}] exits the trusted range [1e-5, {:.4g}]", lo, hi,
                                     10.0 * rep.cutoff));
    const double dn = norm(sweep.direction);
    if (dn == 0.0) throw InputError("sweep direction must be nonzero");
    const Xi dir{sweep.direction[0] / dn, sweep.direction[1] / dn};

    MatC tail;
    rep.min_coercivity = INFINITY;
    auto band = [&](double a, double b) {
        std::vector<double> xs, ys;
        for (int i = 0; i < sweep.points; ++i) {
            const double r = a * std::pow(b / a, double(i) / (sweep.points - 1));
            Xi xi{r * dir[0], r * dir[1]};
            AsymptoticSample s;
            s.abs_xi = r;
            MatC nm;
            if (r > rep.cutoff) {
                if (tail.size() == 0) tail = tail_coefficient(cfg, dir, cfg.gamma, policy);
                nm = tail / r;
                s.extrapolated = true;
                ++rep.extrapolated;
            } else {
                nm = normal_symbol_on(cfg, make_mesh(cfg, policy, r), xi, cfg.gamma);
            }
            s.norm = spectral_norm(nm);
            s.coercivity = hermitian_floor(nm) / weight(r);
            s.inverse_bound = spectral_norm(nm.inverse()) * weight(r);
            rep.min_coercivity = std::min(rep.min_coercivity, s.coercivity);
            rep.max_inverse_bound = std::max(rep.max_inverse_bound, s.inverse_bound);
            rep.samples.push_back(s);
            xs.push_back(r);
            ys.push_back(s.norm);
        }
        return fit_slope(xs, ys);
    };
    rep.low_slope = band(sweep.low_lo, sweep.low_hi);
    rep.high_slope = band(sweep.high_lo, sweep.high_hi);
    rep.low_ok = std::abs(rep.low_slope - 2.0) <= sweep.slope_tol;
    rep.high_ok = std::abs(rep.high_slope + 1.0) <= sweep.slope_tol;
    rep.coercive = rep.min_coercivity > 0.0;
    return rep;
}

namespace {

template <class F>
double sum_over_modes(const PhysicalConfig& cfg, const TorusGrid& grid, const Field& psi, const DegreePolicy& policy,
                      F&& per_mode) {
    double total = 0.0;
    const int m = cfg.m();
    for (int k = 0; k < grid.modes(); ++k) {
        const Xi xi = grid.xi(k);
        if (norm(xi) == 0.0 || grid.nyquist(k)) continue;
        VecC p(m);
        for (int l = 0; l < m; ++l) p(l) = psi(0, l, k);
        if (p.norm() == 0.0) continue;
        auto mesh = make_mesh(cfg, policy, norm(xi));
        StokesBvp bvp(cfg, mesh, xi, -cfg.gamma);
        total += per_mode(mesh, xi, p, bvp.solve_normal_stress(p));
    }
    return grid.volume() * total;
}

double psi_weighted(const TorusGrid& grid, const Field& psi, double (*w)(double)) {
    double s = 0.0;
    for (int k = 0; k < grid.modes(); ++k) {
        const double r = norm(grid.xi(k));
        if (r == 0.0 || grid.nyquist(k)) continue;
        for (int l = 0; l < psi.nv; ++l) s += w(r) * std::norm(psi(0, l, k));
    }
    return grid.volume() * s;
}

double square(double r) { return r * r; }

}  // namespace

double energy_ratio(const PhysicalConfig& cfg, const TorusGrid& grid, const Field& psi, const DegreePolicy& policy) {
    double num = sum_over_modes(cfg, grid, psi, policy, [&](const LayerMesh& mesh, const Xi& xi, const VecC&,
                                                            const VerticalSolution& s) {
        const double r2 = xi[0] * xi[0] + xi[1] * xi[1];
        double e = 0.0;
        for (const auto& c : s.u) {
            VecC d = dy(mesh, c);
            for (int l = 0; l < mesh.layers(); ++l)
                for (int j = 0; j < mesh.count(l); ++j) {
                    const int i = mesh.offset(l) + j;
                    e += mesh.weights(l)(j) * ((1.0 + r2) * std::norm(c(i)) + std::norm(d(i)));
                }
        }
        return e;
    });
    return num / psi_weighted(grid, psi, weight);
}

double pressure_ratio(const PhysicalConfig& cfg, const TorusGrid& grid, const Field& psi, const DegreePolicy& policy) {
    double num = sum_over_modes(cfg, grid, psi, policy, [&](const LayerMesh& mesh, const Xi&, const VecC& p,
                                                            const VerticalSolution& s) {
        double e = 0.0;
        for (int l = 0; l < mesh.layers(); ++l) {
            cplx shift = p.tail(mesh.layers() - l).sum();
            for (int j = 0; j < mesh.count(l); ++j)
                e += mesh.weights(l)(j) * std::norm(s.p(mesh.offset(l) + j) + shift);
        }
        return e;
    });
    return num / psi_weighted(grid, psi, square);
}

}  // namespace stwave

#include "stwave/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "stwave/error.hpp"

namespace stwave {

// ---------------------------------------------------------------- TorusGrid

TorusGrid::TorusGrid(int n, double L, int N) : n_(n), L_(L), N_(N) {
    if (n != 2 && n != 3) throw InputError("dimension n must be 2 or 3");
    if (N < 4 || N % 2 != 0) throw InputError("horizontal resolution N must be even and at least 4");
    if (!(L > 0.0)) throw InputError("period L must be positive");
}

static int signed_wavenumber(int i, int N) { return i <= N / 2 ? i : i - N; }

std::array<int, 2> TorusGrid::wavenumber(int k) const {
    if (n_ == 2) return {signed_wavenumber(k, N_), 0};
    return {signed_wavenumber(k / N_, N_), signed_wavenumber(k % N_, N_)};
}

int TorusGrid::index(int k1, int k2) const {
    auto wrap = [&](int k) { return ((k % N_) + N_) % N_; };
    return n_ == 2 ? wrap(k1) : wrap(k1) * N_ + wrap(k2);
}

Xi TorusGrid::xi(int k) const {
    auto w = wavenumber(k);
    return {w[0] / L_, w[1] / L_};
}

int TorusGrid::negate(int k) const {
    auto w = wavenumber(k);
    return index(-w[0], -w[1]);
}

bool TorusGrid::nyquist(int k) const {
    auto w = wavenumber(k);
    return w[0] == N_ / 2 || w[1] == N_ / 2;
}

bool TorusGrid::canonical(int k) const {
    auto w = wavenumber(k);
    auto nw = wavenumber(negate(k));
    return w[0] > nw[0] || (w[0] == nw[0] && w[1] >= nw[1]);
}

double TorusGrid::abs_xi_max() const {
    double r = 0.0;
    for (int k = 0; k < modes(); ++k)
        if (!nyquist(k)) r = std::max(r, norm(xi(k)));
    return r;
}

// ---------------------------------------------------------------- LayerMesh

namespace {

struct Reference {
    VecR x, w, bary;
    MatR D, C, A;
};

// Reference operators on [-1, 1] for a given degree, shared across meshes.
const Reference& reference(int d) {
    static std::mutex mtx;
    static std::map<int, Reference> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(d);
    if (it != cache.end()) return it->second;

    Reference r;
    const int n = d + 1;
    r.x.resize(n);
    r.bary.resize(n);
    for (int j = 0; j < n; ++j) {
        r.x(j) = -std::cos(pi * j / d);
        r.bary(j) = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == d) ? 0.5 : 1.0);
    }
    r.x(0) = -1.0;
    r.x(d) = 1.0;
    if (d % 2 == 0) r.x(d / 2) = 0.0;

    r.D = MatR::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            r.D(i, j) = (r.bary(j) / r.bary(i)) / (r.x(i) - r.x(j));
            s += r.D(i, j);
        }
        r.D(i, i) = -s;
    }

    // Clenshaw–Curtis weights.
    r.w.resize(n);
    for (int j = 0; j < n; ++j) {
        double theta = pi * j / d;
        double s = 1.0;
        for (int k = 1; k <= d / 2; ++k) {
            double b = (2 * k == d) ? 1.0 : 2.0;
            s -= b * std::cos(2.0 * k * theta) / (4.0 * k * k - 1.0);
        }
        r.w(j) = ((j == 0 || j == d) ? 1.0 : 2.0) * s / d;
    }

    // Values -> coefficients via the discrete cosine sum.
    r.C = MatR::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        double ek = (k == 0 || k == d) ? 2.0 : 1.0;
        for (int j = 0; j < n; ++j) {
            double half = (j == 0 || j == d) ? 0.5 : 1.0;
            double Tkj = std::cos(k * (pi - pi * j / d));
            r.C(k, j) = 2.0 / (d * ek) * half * Tkj;
        }
    }

    // Antiderivative from x = -1, evaluated back at the nodes.
    MatR Int = MatR::Zero(n + 1, n);  // integral coefficients (degree d+1) from value coefficients
    for (int k = 0; k < n; ++k) {
        // integral of T_k
        if (k == 0) {
            Int(1, 0) += 1.0;
        } else if (k == 1) {
            Int(2, 1) += 0.25;
        } else {
            Int(k + 1, k) += 1.0 / (2.0 * (k + 1));
            Int(k - 1, k) -= 1.0 / (2.0 * (k - 1));
        }
    }
    MatR IntC = Int * r.C;
    // Fix the constant so the antiderivative vanishes at x = -1.
    for (int col = 0; col < n; ++col) {
        double v = 0.0;
        for (int k = 0; k <= n; ++k) v += IntC(k, col) * ((k % 2 == 0) ? 1.0 : -1.0);
        IntC(0, col) -= v;
    }
    MatR E(n, n + 1);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k <= n; ++k) E(j, k) = std::cos(k * (pi - pi * j / d));
    r.A = E * IntC;

    return cache.emplace(d, std::move(r)).first->second;
}

}  // namespace

LayerMesh::LayerMesh(const std::vector<double>& depths, const std::vector<int>& degrees) : deg_(degrees) {
    if (depths.size() != degrees.size() || depths.empty()) throw InputError("mesh needs one degree per layer");
    off_.push_back(0);
    double lo = 0.0;
    for (std::size_t l = 0; l < depths.size(); ++l) {
        int d = degrees[l];
        if (d < 8) throw InputError("vertical degree must be at least 8");
        double hi = depths[l];
        if (!(hi > lo)) throw InputError("depths must be strictly increasing");
        const Reference& r = reference(d);
        double half = 0.5 * (hi - lo);
        VecR y = VecR::Constant(d + 1, 0.5 * (hi + lo)) + half * r.x;
        y(0) = lo;
        y(d) = hi;
        nodes_.push_back(y);
        weights_.push_back(half * r.w);
        diff_.push_back(r.D / half);
        anti_.push_back(half * r.A);
        coef_.push_back(r.C);
        lo_.push_back(lo);
        hi_.push_back(hi);
        off_.push_back(off_.back() + d + 1);
        lo = hi;
    }
}

int LayerMesh::layer_of_node(int j) const {
    for (int l = 0; l < layers(); ++l)
        if (j < off_[l + 1]) return l;
    throw InputError("node index out of range");
}

VecR LayerMesh::interp_row(int l, double y) const {
    const Reference& r = reference(deg_[l]);
    const VecR& x = nodes_[l];
    const int n = count(l);
    VecR row = VecR::Zero(n);
    for (int j = 0; j < n; ++j) {
        if (y == x(j)) {
            row(j) = 1.0;
            return row;
        }
    }
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
        row(j) = r.bary(j) / (y - x(j));
        s += row(j);
    }
    return row / s;
}

int DegreePolicy::requested(double abs_xi, double thickness) const {
    return std::max(min_degree, static_cast<int>(std::ceil(factor * 2.0 * pi * abs_xi * thickness)));
}

int DegreePolicy::degree(double abs_xi, double thickness) const {
    return std::min(cap, requested(abs_xi, thickness));
}

double DegreePolicy::cutoff(const PhysicalConfig& cfg) const {
    double hmax = 0.0;
    for (int l = 0; l < cfg.m(); ++l) hmax = std::max(hmax, cfg.thickness(l));
    return cap / (factor * 2.0 * pi * hmax);
}

LayerMesh make_mesh(const PhysicalConfig& cfg, const DegreePolicy& policy, double abs_xi) {
    std::vector<int> deg;
    for (int l = 0; l < cfg.m(); ++l) deg.push_back(policy.degree(abs_xi, cfg.thickness(l)));
    return LayerMesh(cfg.a, deg);
}

LayerMesh make_mesh(const PhysicalConfig& cfg, int degree) {
    return LayerMesh(cfg.a, std::vector<int>(cfg.m(), degree));
}

// ---------------------------------------------------------------- Field

Field& Field::operator+=(const Field& o) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
    return *this;
}

Field& Field::operator*=(double s) {
    for (auto& x : v) x *= s;
    return *this;
}

void Field::axpy(cplx s, const Field& o) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += s * o.v[i];
}

void Field::set_zero() { std::fill(v.begin(), v.end(), cplx(0.0)); }

double Field::max_abs() const {
    double r = 0.0;
    for (const auto& x : v) r = std::max(r, std::abs(x));
    return r;
}

Field Field::component(int c) const {
    Field out(1, nv, M);
    std::copy(v.begin() + std::size_t(c) * nv * M, v.begin() + std::size_t(c + 1) * nv * M, out.v.begin());
    return out;
}

void Field::set_component(int c, const Field& src) {
    std::copy(src.v.begin(), src.v.begin() + std::size_t(nv) * M, v.begin() + std::size_t(c) * nv * M);
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

// ---------------------------------------------------------------- Fourier

namespace {

struct PlanKey {
    int n, Np, sign;
    bool operator<(const PlanKey& o) const { return std::tie(n, Np, sign) < std::tie(o.n, o.Np, o.sign); }
};

fftw_plan plan_for(int n, int Np, int sign) {
    static std::mutex mtx;
    static std::map<PlanKey, fftw_plan> plans;
    std::lock_guard<std::mutex> lock(mtx);
    PlanKey key{n, Np, sign};
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    int S = n == 2 ? Np : Np * Np;
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * S));
    fftw_plan p = n == 2 ? fftw_plan_dft_1d(Np, buf, buf, sign, FFTW_ESTIMATE)
                         : fftw_plan_dft_2d(Np, Np, buf, buf, sign, FFTW_ESTIMATE);
    fftw_free(buf);
    plans.emplace(key, p);
    return p;
}

// Positions of lattice mode k inside a padded array; Nyquist entries split in two.
struct Slot {
    int pos;
    double weight;
};

std::vector<std::vector<Slot>> slots(const TorusGrid& g, int Np) {
    std::vector<std::vector<Slot>> out(g.modes());
    const int N = g.size();
    auto wrap = [&](int k) { return ((k % Np) + Np) % Np; };
    for (int k = 0; k < g.modes(); ++k) {
        auto w = g.wavenumber(k);
        if (Np == N) {
            out[k].push_back({g.index(w[0], w[1]), 1.0});
            continue;
        }
        std::vector<std::pair<int, double>> d1, d2;
        auto options = [&](int kk, std::vector<std::pair<int, double>>& o) {
            if (std::abs(kk) == N / 2)
                o = {{wrap(N / 2), 0.5}, {wrap(-N / 2), 0.5}};
            else
                o = {{wrap(kk), 1.0}};
        };
        options(w[0], d1);
        if (g.n() == 2) {
            for (auto& a : d1) out[k].push_back({a.first, a.second});
        } else {
            options(w[1], d2);
            for (auto& a : d1)
                for (auto& b : d2) out[k].push_back({a.first * Np + b.first, a.second * b.second});
        }
    }
    return out;
}

}  // namespace

std::vector<double> Fourier::to_physical(const Field& f, int Np) const {
    if (f.M != grid_.modes()) throw InputError("field does not match the grid");
    const int S = samples(Np);
    const auto sl = slots(grid_, Np);
    fftw_plan p = plan_for(grid_.n(), Np, FFTW_BACKWARD);
    std::vector<double> out(std::size_t(f.nc) * f.nv * S);
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * S));
    for (int c = 0; c < f.nc; ++c)
        for (int j = 0; j < f.nv; ++j) {
            std::fill(reinterpret_cast<double*>(buf), reinterpret_cast<double*>(buf) + 2 * S, 0.0);
            for (int k = 0; k < f.M; ++k) {
                cplx z = f(c, j, k);
                if (z == cplx(0.0)) continue;
                for (const auto& s : sl[k]) {
                    buf[s.pos][0] += s.weight * z.real();
                    buf[s.pos][1] += s.weight * z.imag();
                }
            }
            fftw_execute_dft(p, buf, buf);
            double* dst = out.data() + (std::size_t(c) * f.nv + j) * S;
            for (int i = 0; i < S; ++i) dst[i] = buf[i][0];
        }
    fftw_free(buf);
    return out;
}

Field Fourier::from_physical(const std::vector<double>& s, int nc, int nv, int Np) const {
    const int S = samples(Np);
    if (s.size() != std::size_t(nc) * nv * S) throw InputError("sample array has the wrong shape");
    const auto sl = slots(grid_, Np);
    fftw_plan p = plan_for(grid_.n(), Np, FFTW_FORWARD);
    Field out(nc, nv, grid_.modes());
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * S));
    const double scale = 1.0 / S;
    for (int c = 0; c < nc; ++c)
        for (int j = 0; j < nv; ++j) {
            const double* src = s.data() + (std::size_t(c) * nv + j) * S;
            for (int i = 0; i < S; ++i) {
                buf[i][0] = src[i];
                buf[i][1] = 0.0;
            }
            fftw_execute_dft(p, buf, buf);
            for (int k = 0; k < out.M; ++k) {
                cplx z = 0.0;
                for (const auto& q : sl[k]) z += cplx(buf[q.pos][0], buf[q.pos][1]);
                out(c, j, k) = z * scale;
            }
        }
    fftw_free(buf);
    return out;
}

// ---------------------------------------------------------------- multipliers

void apply_multiplier(Field& f, const TorusGrid& grid, const std::function<cplx(const Xi&)>& w, bool real) {
    const int N = grid.size();
    std::vector<cplx> sym(grid.modes());
    for (int k = 0; k < grid.modes(); ++k) {
        Xi xi = grid.xi(k);
        if (real && grid.nyquist(k)) {
            // Cosine-only Nyquist: average over the aliased sign choices.
            auto wn = grid.wavenumber(k);
            Xi alt = xi;
            if (wn[0] == N / 2) alt[0] = -alt[0];
            if (grid.n() == 3 && wn[1] == N / 2) alt[1] = -alt[1];
            sym[k] = 0.5 * (w(xi) + w(alt));
        } else {
            sym[k] = w(xi);
        }
    }
    if (real) {
        for (int k = 0; k < grid.modes(); ++k) {
            if (grid.nyquist(k)) continue;
            cplx a = sym[k], b = std::conj(sym[grid.negate(k)]);
            if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a)))
                throw InputError("multiplier violates the reality symmetry w(-xi) = conj(w(xi))");
        }
    }
    for (int c = 0; c < f.nc; ++c)
        for (int j = 0; j < f.nv; ++j)
            for (int k = 0; k < f.M; ++k) f(c, j, k) *= sym[k];
}

Field derivative(const Field& f, const TorusGrid& grid, int dir) {
    Field out = f;
    apply_multiplier(out, grid, [dir](const Xi& xi) { return 2.0 * pi * I * xi[dir]; });
    return out;
}

Field vertical_derivative(const Field& f, const LayerMesh& mesh) {
    Field out(f.nc, f.nv, f.M);
    for (int c = 0; c < f.nc; ++c)
        for (int l = 0; l < mesh.layers(); ++l) {
            const MatR& D = mesh.diff(l);
            const int o = mesh.offset(l), n = mesh.count(l);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double dij = D(i, j);
                    const cplx* src = &f(c, o + j, 0);
                    cplx* dst = &out(c, o + i, 0);
                    for (int k = 0; k < f.M; ++k) dst[k] += dij * src[k];
                }
        }
    return out;
}

void zero_nyquist(Field& f, const TorusGrid& grid) {
    for (int k = 0; k < f.M; ++k)
        if (grid.nyquist(k))
            for (int c = 0; c < f.nc; ++c)
                for (int j = 0; j < f.nv; ++j) f(c, j, k) = 0.0;
}

void symmetrize(Field& f, const TorusGrid& grid) {
    for (int k = 0; k < f.M; ++k) {
        int nk = grid.negate(k);
        if (nk < k) continue;
        for (int c = 0; c < f.nc; ++c)
            for (int j = 0; j < f.nv; ++j) {
                cplx a = f(c, j, k), b = f(c, j, nk);
                cplx s = 0.5 * (a + std::conj(b));
                f(c, j, k) = s;
                f(c, j, nk) = std::conj(s);
            }
    }
}

double reality_defect(const Field& f, const TorusGrid& grid) {
    double r = 0.0;
    for (int k = 0; k < f.M; ++k) {
        int nk = grid.negate(k);
        for (int c = 0; c < f.nc; ++c)
            for (int j = 0; j < f.nv; ++j) r = std::max(r, std::abs(f(c, j, k) - std::conj(f(c, j, nk))));
    }
    return r;
}

// ---------------------------------------------------------------- norms

namespace norms {

double l2_bulk(const Field& f, const LayerMesh& mesh, const TorusGrid& grid) {
    double s = 0.0;
    for (int c = 0; c < f.nc; ++c)
        for (int l = 0; l < mesh.layers(); ++l) {
            const VecR& w = mesh.weights(l);
            for (int j = 0; j < mesh.count(l); ++j)
                for (int k = 0; k < f.M; ++k) s += w(j) * std::norm(f(c, mesh.offset(l) + j, k));
        }
    return std::sqrt(grid.volume() * s);
}

static double hs_bulk_sq_integer(const Field& f, const LayerMesh& mesh, const TorusGrid& grid, int s) {
    std::vector<double> xw(f.M);
    for (int k = 0; k < f.M; ++k) xw[k] = 1.0 + std::pow(norm(grid.xi(k)), 2);
    double total = 0.0;
    Field d = f;
    for (int j = 0; j <= s; ++j) {
        for (int c = 0; c < f.nc; ++c)
            for (int l = 0; l < mesh.layers(); ++l) {
                const VecR& w = mesh.weights(l);
                for (int i = 0; i < mesh.count(l); ++i)
                    for (int k = 0; k < f.M; ++k)
                        total += w(i) * std::pow(xw[k], s - j) * std::norm(d(c, mesh.offset(l) + i, k));
            }
        if (j < s) d = vertical_derivative(d, mesh);
    }
    return grid.volume() * total;
}

double hs_bulk(const Field& f, const LayerMesh& mesh, const TorusGrid& grid, double s) {
    if (s < 0.0) throw InputError("bulk Sobolev order must be nonnegative");
    int lo = static_cast<int>(std::floor(s));
    double theta = s - lo;
    double sq = hs_bulk_sq_integer(f, mesh, grid, lo);
    if (theta > 0.0) sq = (1.0 - theta) * sq + theta * hs_bulk_sq_integer(f, mesh, grid, lo + 1);
    return std::sqrt(sq);
}

template <class W>
static double weighted(const Field& f, const TorusGrid& grid, W weight) {
    double s = 0.0;
    for (int k = 0; k < f.M; ++k) {
        double w = weight(k);
        if (w == 0.0) continue;
        for (int c = 0; c < f.nc; ++c)
            for (int j = 0; j < f.nv; ++j) s += w * std::norm(f(c, j, k));
    }
    return std::sqrt(grid.volume() * s);
}

static void require_zero_mode(const Field& f, const TorusGrid& grid, double tol) {
    int k0 = grid.index(0, 0);
    for (int c = 0; c < f.nc; ++c)
        for (int j = 0; j < f.nv; ++j)
            if (std::abs(f(c, j, k0)) > tol) throw InputError(msg::zero_mode_seminorm);
}

double hs_surface(const Field& f, const TorusGrid& grid, double s) {
    return weighted(f, grid, [&](int k) { return std::pow(1.0 + std::pow(norm(grid.xi(k)), 2), s); });
}

double hdot(const Field& f, const TorusGrid& grid, double s) {
    return weighted(f, grid, [&](int k) {
        double r = norm(grid.xi(k));
        return r > 0.0 ? std::pow(r, 2.0 * s) : 0.0;
    });
}

double hdot_minus1(const Field& f, const TorusGrid& grid, double zero_tol) {
    require_zero_mode(f, grid, zero_tol);
    return weighted(f, grid, [&](int k) {
        double r = norm(grid.xi(k));
        return r > 0.0 ? 1.0 / (r * r) : 0.0;
    });
}

double anisotropic(const Field& f, const TorusGrid& grid, double s) {
    require_zero_mode(f, grid, 1e-12 * (1.0 + f.max_abs()));
    return weighted(f, grid, [&](int k) {
        Xi xi = grid.xi(k);
        double r = norm(xi);
        if (r == 0.0) return 0.0;
        if (r <= 1.0) return (xi[0] * xi[0] + r * r * r * r) / (r * r);
        return std::pow(r, 2.0 * s);
    });
}

}  // namespace norms

cplx surface_pairing(const Field& f, const Field& g, const TorusGrid& grid) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < f.v.size(); ++i) s += f.v[i] * std::conj(g.v[i]);
    return grid.volume() * s;
}

}  // namespace stwave

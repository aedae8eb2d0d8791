#include "stwave/io.hpp"

#include <Eigen/Core>
#include <fftw3.h>
#include <fmt/format.h>

#define TOML_EXCEPTIONS 1
#include <tomlplusplus/toml.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "stwave/error.hpp"

namespace stwave::io {

namespace {

// Reads typed values out of one TOML table and remembers which keys were used,
// so leftovers can be reported as unknown.
class Section {
public:
    Section(const toml::table* t, std::string name) : t_(t), name_(std::move(name)) {}

    template <class T>
    void get(const char* key, T& out) {
        const toml::node* node = find(key);
        if (!node) return;
        if constexpr (std::is_same_v<T, std::string>) {
            auto v = node->value<std::string>();
            if (!v) bad(key, "a string");
            out = *v;
        } else if constexpr (std::is_same_v<T, bool>) {
            auto v = node->value<bool>();
            if (!v) bad(key, "a boolean");
            out = *v;
        } else if constexpr (std::is_integral_v<T>) {
            auto v = node->value<std::int64_t>();
            if (!v || (!node->is_integer())) bad(key, "an integer");
            if (*v < 0 && std::is_unsigned_v<T>) bad(key, "a nonnegative integer");
            out = static_cast<T>(*v);
        } else {
            auto v = node->value<double>();
            if (!v) bad(key, "a number");
            out = *v;
        }
    }

    void get(const char* key, std::vector<double>& out) {
        const toml::node* node = find(key);
        if (!node) return;
        const toml::array* arr = node->as_array();
        if (!arr) bad(key, "an array of numbers");
        out.clear();
        for (const toml::node& e : *arr) {
            auto v = e.value<double>();
            if (!v) bad(key, "an array of numbers");
            out.push_back(*v);
        }
    }

    void done() const {
        if (!t_) return;
        for (const auto& [k, v] : *t_)
            if (!used_.count(std::string(k.str())))
                throw InputError(fmt::format("unknown key '{}' in [{}]", k.str(), name_));
    }

    const toml::node* find(const char* key) {
        if (!t_) return nullptr;
        used_.insert(key);
        return t_->get(key);
    }

    [[noreturn]] void bad(const char* key, const char* what) const {
        throw InputError(fmt::format("[{}] {} must be {}", name_, key, what));
    }

private:
    const toml::table* t_;
    std::string name_;
    std::set<std::string> used_;
};

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

template <class T>
void put(std::ostream& os, T v) {
    static_assert(std::endian::native == std::endian::little, "the container writer assumes a little-endian host");
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(std::istream& is) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw InputError("truncated STWV container");
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

// ---------------------------------------------------------------- config

RunConfig parse_config(const std::string& toml_text, const std::filesystem::path& base) {
    toml::table root;
    try {
        root = toml::parse(toml_text);
    } catch (const toml::parse_error& e) {
        throw InputError(fmt::format("config: {} (line {})", e.description(), e.source().begin.line));
    }
    static const std::set<std::string> sections{"physical", "grid",   "forcing", "solver", "sweep",
                                                "linear",   "verify", "output",  "run"};
    for (const auto& [k, v] : root) {
        if (!sections.count(std::string(k.str()))) throw InputError(fmt::format("unknown config section [{}]", k.str()));
        if (!v.is_table()) throw InputError(fmt::format("config entry '{}' must be a table", k.str()));
    }
    auto section = [&](const char* name) { return Section(root[name].as_table(), name); };

    RunConfig c;
    PhysicalConfig& p = c.physical;
    {
        Section s = section("physical");
        std::string mode = to_string(c.mode);
        s.get("n", p.n);
        s.get("a", p.a);
        s.get("rho", p.rho);
        s.get("mu", p.mu);
        s.get("sigma", p.sigma);
        s.get("gravity", p.gravity);
        s.get("gamma", p.gamma);
        s.get("mode", mode);
        s.done();
        c.mode = mode_from_string(mode);
    }
    {
        Section s = section("grid");
        s.get("period", c.period);
        s.get("resolution", c.resolution);
        s.get("min_degree", c.policy.min_degree);
        s.get("degree_factor", c.policy.factor);
        s.get("degree_cap", c.policy.cap);
        s.done();
    }
    {
        Section s = section("forcing");
        std::vector<double> k;
        s.get("kind", c.forcing.kind);
        s.get("amplitude", c.forcing.amplitude);
        s.get("width", c.forcing.width);
        s.get("center", c.forcing.center);
        s.get("k", k);
        s.done();
        if (c.forcing.kind != "gaussian" && c.forcing.kind != "mode" && c.forcing.kind != "none")
            throw InputError(fmt::format("unknown forcing kind '{}' (gaussian, mode or none)", c.forcing.kind));
        if (!k.empty()) {
            if (k.size() > 2) throw InputError("[forcing] k takes at most two wavenumbers");
            for (std::size_t i = 0; i < k.size(); ++i) {
                if (k[i] != std::round(k[i])) throw InputError("[forcing] k must hold integers");
                c.forcing.k[i] = static_cast<int>(k[i]);
            }
        }
        if (c.forcing.center.size() > 2) throw InputError("[forcing] center takes at most two coordinates");
    }
    {
        Section s = section("solver");
        s.get("rtol", c.wave.rtol);
        s.get("atol", c.wave.atol);
        s.get("max_iterations", c.wave.max_iterations);
        s.get("norm_index", c.wave.s);
        s.get("consistency_tol", c.consistency_tol);
        s.done();
    }
    {
        Section s = section("sweep");
        std::vector<double> low, high, dir;
        s.get("low", low);
        s.get("high", high);
        s.get("points", c.sweep.points);
        s.get("direction", dir);
        s.get("slope_tol", c.sweep.slope_tol);
        s.done();
        auto band = [](const std::vector<double>& v, double& lo, double& hi, const char* name) {
            if (v.empty()) return;
            if (v.size() != 2 || !(0.0 < v[0] && v[0] < v[1]))
                throw InputError(fmt::format("[sweep] {} must be [lo, hi] with 0 < lo < hi", name));
            lo = v[0];
            hi = v[1];
        };
        band(low, c.sweep.low_lo, c.sweep.low_hi, "low");
        band(high, c.sweep.high_lo, c.sweep.high_hi, "high");
        if (!dir.empty()) {
            if (dir.size() != 2) throw InputError("[sweep] direction must have two components");
            c.sweep.direction = {dir[0], dir[1]};
        }
        if (c.sweep.points < 2) throw InputError("[sweep] points must be at least 2");
    }
    {
        Section s = section("linear");
        s.get("data", c.data);
        s.done();
        if (!c.data.empty() && !base.empty() && std::filesystem::path(c.data).is_relative())
            c.data = (base / c.data).string();
    }
    {
        Section s = section("verify");
        s.get("suite", c.suite);
        s.done();
    }
    {
        Section s = section("output");
        s.get("dir", c.out);
        s.get("slice_points", c.slice_points);
        if (const toml::node* node = s.find("points")) {
            const toml::array* arr = node->as_array();
            if (!arr) s.bad("points", "an array of [x1, x2, y] triples");
            for (const toml::node& e : *arr) {
                const toml::array* t = e.as_array();
                if (!t || t->size() != 3) s.bad("points", "an array of [x1, x2, y] triples");
                Point q{};
                for (int i = 0; i < 3; ++i) {
                    auto v = (*t)[i].value<double>();
                    if (!v) s.bad("points", "an array of [x1, x2, y] triples");
                    q[i] = *v;
                }
                c.eulerian_points.push_back(q);
            }
        }
        s.done();
        if (c.slice_points < 0) throw InputError("[output] slice_points must be nonnegative");
    }
    {
        Section s = section("run");
        s.get("seed", c.seed);
        s.get("threads", c.threads);
        s.done();
    }

    p.validate(true);
    p.validate_mode(c.mode);
    (void)c.grid();
    if (c.threads < 1) throw InputError("threads must be at least 1");
    if (!(c.wave.rtol > 0.0) || !(c.wave.atol >= 0.0) || c.wave.max_iterations < 1)
        throw InputError("[solver] needs rtol > 0, atol >= 0 and max_iterations >= 1");
    if (!(c.consistency_tol > 0.0)) throw InputError("[solver] consistency_tol must be positive");
    if (!(c.forcing.width > 0.0)) throw InputError("[forcing] width must be positive");
    if (c.policy.min_degree < 2 || !(c.policy.factor > 0.0) || c.policy.cap < c.policy.min_degree)
        throw InputError("[grid] needs min_degree >= 2, degree_factor > 0 and degree_cap >= min_degree");
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open config file {}", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

json to_json(const RunConfig& c) {
    const PhysicalConfig& p = c.physical;
    json points = json::array();
    for (const Point& q : c.eulerian_points) points.push_back({q[0], q[1], q[2]});
    return {
        {"physical",
         {{"n", p.n},
          {"a", p.a},
          {"rho", p.rho},
          {"mu", p.mu},
          {"sigma", p.sigma},
          {"gravity", p.gravity},
          {"gamma", p.gamma},
          {"mode", to_string(c.mode)}}},
        {"grid",
         {{"period", c.period},
          {"resolution", c.resolution},
          {"min_degree", c.policy.min_degree},
          {"degree_factor", c.policy.factor},
          {"degree_cap", c.policy.cap}}},
        {"forcing",
         {{"kind", c.forcing.kind},
          {"amplitude", c.forcing.amplitude},
          {"width", c.forcing.width},
          {"center", c.forcing.center},
          {"k", c.forcing.k}}},
        {"solver",
         {{"rtol", c.wave.rtol},
          {"atol", c.wave.atol},
          {"max_iterations", c.wave.max_iterations},
          {"norm_index", c.wave.s},
          {"consistency_tol", c.consistency_tol}}},
        {"sweep",
         {{"low", {c.sweep.low_lo, c.sweep.low_hi}},
          {"high", {c.sweep.high_lo, c.sweep.high_hi}},
          {"points", c.sweep.points},
          {"direction", c.sweep.direction},
          {"slope_tol", c.sweep.slope_tol}}},
        {"linear", {{"data", c.data}}},
        {"verify", {{"suite", c.suite}}},
        {"output", {{"dir", c.out}, {"slice_points", c.slice_points}, {"points", points}}},
        {"run", {{"seed", c.seed}, {"threads", c.threads}}},
    };
}

std::uint64_t RunConfig::hash() const {
    json j = to_json(*this);
    // Neither changes any numeric output.
    j["output"].erase("dir");
    j["run"].erase("threads");
    return fnv1a(j.dump());
}

ForcingSpec make_forcing(const RunConfig& cfg, const Discretization& disc) {
    const ForcingConfig& f = cfg.forcing;
    if (f.kind == "none") return ForcingSpec::zero(disc);
    if (f.kind == "mode") return ForcingSpec::cosine_mode(disc, f.amplitude, f.k);
    if (f.center.empty()) return ForcingSpec::gaussian_bump(disc, f.amplitude, f.width);
    Xi center{f.center[0], f.center.size() > 1 ? f.center[1] : 0.0};
    return ForcingSpec::gaussian_bump(disc, f.amplitude, f.width, center);
}

// ---------------------------------------------------------------- CSV

std::string num(double v) { return fmt::format("{:.17g}", v); }

void write_coefficients(std::ostream& os, const std::vector<std::pair<std::string, const Field*>>& fields,
                        const TorusGrid& grid) {
    os << "field,component,row,k1,k2,re,im\n";
    for (const auto& [name, f] : fields)
        for (int c = 0; c < f->nc; ++c)
            for (int r = 0; r < f->nv; ++r)
                for (int k = 0; k < f->M; ++k) {
                    const cplx z = (*f)(c, r, k);
                    if (z == 0.0) continue;
                    const auto w = grid.wavenumber(k);
                    os << name << ',' << c << ',' << r << ',' << w[0] << ',' << w[1] << ',' << num(z.real()) << ','
                       << num(z.imag()) << '\n';
                }
}

void write_data(std::ostream& os, const DataTuple& d, const TorusGrid& grid) {
    write_coefficients(os, {{"g", &d.g}, {"f", &d.f}, {"k", &d.k}, {"h", &d.h}}, grid);
}

void write_state(std::ostream& os, const FlatState& x, const TorusGrid& grid) {
    write_coefficients(os, {{"p", &x.p}, {"u", &x.u}, {"eta", &x.eta}}, grid);
}

DataTuple read_data(std::istream& is, const Discretization& disc) {
    const TorusGrid& grid = disc.grid();
    DataTuple d = DataTuple::zero(disc);
    std::map<std::string, Field*> fields{{"g", &d.g}, {"f", &d.f}, {"k", &d.k}, {"h", &d.h}};
    std::string line;
    if (!std::getline(is, line) || split(line) != std::vector<std::string>{"field", "component", "row", "k1", "k2", "re", "im"})
        throw InputError("data file must start with the header field,component,row,k1,k2,re,im");
    const int half = grid.size() / 2;
    for (int lineno = 2; std::getline(is, line); ++lineno) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split(line);
        auto fail = [&](const std::string& why) {
            throw InputError(fmt::format("data file line {}: {}", lineno, why));
        };
        if (cells.size() != 7) fail("expected 7 columns");
        auto it = fields.find(cells[0]);
        if (it == fields.end()) fail(fmt::format("unknown field '{}' (g, f, k or h)", cells[0]));
        int c = 0, r = 0, k1 = 0, k2 = 0;
        double re = 0.0, im = 0.0;
        try {
            std::size_t pos = 0;
            auto integer = [&](const std::string& s) {
                int v = std::stoi(s, &pos);
                if (pos != s.size()) throw std::invalid_argument(s);
                return v;
            };
            auto real = [&](const std::string& s) {
                double v = std::stod(s, &pos);
                if (pos != s.size()) throw std::invalid_argument(s);
                return v;
            };
            c = integer(cells[1]);
            r = integer(cells[2]);
            k1 = integer(cells[3]);
            k2 = integer(cells[4]);
            re = real(cells[5]);
            im = real(cells[6]);
        } catch (const std::exception&) {
            fail("malformed number");
        }
        Field& f = *it->second;
        if (c < 0 || c >= f.nc) fail(fmt::format("component {} out of range for '{}'", c, cells[0]));
        if (r < 0 || r >= f.nv) fail(fmt::format("row {} out of range for '{}'", r, cells[0]));
        if (std::abs(k1) > half || std::abs(k2) > half || (grid.n() == 2 && k2 != 0))
            fail(fmt::format("wavenumber ({}, {}) outside the grid", k1, k2));
        if (!std::isfinite(re) || !std::isfinite(im)) fail("non-finite value");
        f(c, r, grid.index(k1, k2)) = cplx(re, im);
    }
    for (auto& [name, f] : fields) {
        zero_nyquist(*f, grid);
        const double scale = f->max_abs();
        if (reality_defect(*f, grid) > 1e-12 * std::max(scale, 1e-300))
            throw InputError(fmt::format("data field '{}' is not conjugate symmetric (real in physical space)", name));
    }
    return d;
}

void write_surfaces(std::ostream& os, const Discretization& disc, const Field& eta) {
    const TorusGrid& grid = disc.grid();
    const int N = grid.size(), m = disc.m();
    Fourier F(grid);
    const auto v = F.to_physical(eta, N);
    const int S = F.samples(N);
    os << (grid.n() == 2 ? "x" : "x1,x2");
    for (int l = 0; l < m; ++l) os << ",eta_" << l + 1;
    os << '\n';
    for (int p = 0; p < S; ++p) {
        if (grid.n() == 2)
            os << num(grid.coordinate(p, N));
        else
            os << num(grid.coordinate(p / N, N)) << ',' << num(grid.coordinate(p % N, N));
        for (int l = 0; l < m; ++l) os << ',' << num(disc.config().a[l] + v[std::size_t(l) * S + p]);
        os << '\n';
    }
}

// ---------------------------------------------------------------- container

void write_container(std::ostream& os, const Container& c) {
    os.write("STWV", 4);
    put<std::uint32_t>(os, container_version);
    put<std::uint32_t>(os, c.n);
    put<std::uint32_t>(os, c.N);
    put<double>(os, c.L);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(c.blocks.size()));
    for (const Block& b : c.blocks) {
        if (b.name.size() > 8) throw InputError(fmt::format("block name '{}' exceeds 8 bytes", b.name));
        char name[8] = {};
        std::memcpy(name, b.name.data(), b.name.size());
        os.write(name, 8);
        put<std::uint32_t>(os, b.field.nc);
        put<std::uint32_t>(os, b.field.nv);
        put<std::uint32_t>(os, b.field.M);
        for (const cplx& z : b.field.v) {
            put<float>(os, static_cast<float>(z.real()));
            put<float>(os, static_cast<float>(z.imag()));
        }
    }
    if (!os) throw SolverError("failed to write STWV container");
}

Container read_container(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "STWV", 4) != 0) throw InputError("not an STWV container");
    const auto version = take<std::uint32_t>(is);
    if (version != container_version) throw InputError(fmt::format("unsupported STWV version {}", version));
    Container c;
    c.n = static_cast<int>(take<std::uint32_t>(is));
    c.N = static_cast<int>(take<std::uint32_t>(is));
    c.L = take<double>(is);
    const auto count = take<std::uint32_t>(is);
    for (std::uint32_t i = 0; i < count; ++i) {
        char name[9] = {};
        if (!is.read(name, 8)) throw InputError("truncated STWV container");
        const auto nc = take<std::uint32_t>(is), nv = take<std::uint32_t>(is), M = take<std::uint32_t>(is);
        if (std::uint64_t(nc) * nv * M > (std::uint64_t(1) << 32)) throw InputError("implausible STWV block size");
        Block b{name, Field(nc, nv, M)};
        for (cplx& z : b.field.v) {
            const float re = take<float>(is), im = take<float>(is);
            z = cplx(re, im);
        }
        c.blocks.push_back(std::move(b));
    }
    return c;
}

Container state_container(const FlatState& x, const TorusGrid& grid) {
    return Container{grid.n(), grid.size(), grid.period(), {{"p", x.p}, {"u", x.u}, {"eta", x.eta}}};
}

// ---------------------------------------------------------------- JSON

json manifest(const RunConfig& cfg, const std::string& command) {
    return {
        {"command", command},
        {"config_hash", fmt::format("{:016x}", cfg.hash())},
        {"physical_hash", fmt::format("{:016x}", cfg.physical.hash())},
        {"seed", cfg.seed},
        {"threads", cfg.threads},
        {"versions",
         {{"stwave", "1.0.0"},
          {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
          {"fftw", std::string(fftw_version)},
          {"fmt", FMT_VERSION},
          {"nlohmann_json",
           fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                       NLOHMANN_JSON_VERSION_PATCH)},
          {"toml++", fmt::format("{}.{}.{}", TOML_LIB_MAJOR, TOML_LIB_MINOR, TOML_LIB_PATCH)}}},
        {"config", to_json(cfg)},
    };
}

json to_json(const AsymptoticsReport& r) {
    json samples = json::array();
    for (const AsymptoticSample& s : r.samples)
        samples.push_back({{"abs_xi", s.abs_xi},
                           {"norm", s.norm},
                           {"coercivity", s.coercivity},
                           {"inverse_bound", s.inverse_bound},
                           {"extrapolated", s.extrapolated}});
    return {{"low_slope", r.low_slope},
            {"high_slope", r.high_slope},
            {"low_ok", r.low_ok},
            {"high_ok", r.high_ok},
            {"min_coercivity", r.min_coercivity},
            {"coercive", r.coercive},
            {"max_inverse_bound", r.max_inverse_bound},
            {"cutoff", r.cutoff},
            {"extrapolated", r.extrapolated},
            {"pass", r.pass()},
            {"samples", samples}};
}

json to_json(const InverseReport& r) {
    return {{"consistency", r.consistency},
            {"consistency_relative", r.relative},
            {"data_norm", r.measurement.data_norm},
            {"zero_mode", r.measurement.zero_mode},
            {"max_surface", r.max_surface},
            {"admissible", r.admissible}};
}

json to_json(const IterationReport& r, double trust_bound) {
    json its = json::array();
    for (const IterationRecord& i : r.iterations)
        its.push_back({{"residual", i.residual},
                       {"state_norm", i.state_norm},
                       {"max_surface", i.max_surface},
                       {"margin", i.margin},
                       {"zero_mode", i.zero_mode}});
    const double last = r.iterations.empty() ? 0.0 : r.iterations.back().max_surface;
    return {{"converged", r.converged},
            {"verdict", r.verdict},
            {"forcing_norm", r.forcing_norm},
            {"max_ratio", r.max_ratio},
            {"monotone", r.monotone},
            {"quarter_gap",
             {{"bound", trust_bound}, {"max_surface", last}, {"margin", trust_bound - last}, {"holds", last <= trust_bound}}},
            {"iterations", its}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw SolverError(fmt::format("cannot write {}", path.string()));
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace stwave::io

// Command-line front end: symbol, solve-linear, solve-wave and verify.
#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stwave/error.hpp"
#include "stwave/exp_oracle.hpp"
#include "stwave/io.hpp"
#include "stwave/verify.hpp"

using namespace stwave;
namespace fs = std::filesystem;
using io::json;

namespace {

struct Flags {
    std::string config, out, suite;
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

io::RunConfig load(const Flags& f) {
    io::RunConfig cfg = f.config.empty() ? io::RunConfig{} : io::load_config(f.config);
    if (!f.out.empty()) cfg.out = f.out;
    if (f.threads > 0) cfg.threads = f.threads;
    if (f.seed_set) cfg.seed = f.seed;
    if (!f.suite.empty()) cfg.suite = f.suite;
    fs::create_directories(cfg.out);
    return cfg;
}

void write_manifest(const io::RunConfig& cfg, const std::string& command) {
    io::write_json(fs::path(cfg.out) / "manifest.json", io::manifest(cfg, command));
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw SolverError(fmt::format("cannot write {}", path.string()));
    fn(os);
}

int cmd_symbol(const io::RunConfig& cfg) {
    write_manifest(cfg, "symbol");
    const PhysicalConfig& p = cfg.physical;
    const int m = p.m();
    AsymptoticsReport rep = verify_asymptotics(p, cfg.sweep, cfg.policy);

    // Sweep table, with the exponential-basis oracle alongside the collocation
    // values wherever the sample is not extrapolated.
    double oracle_err = 0.0;
    write_file(fs::path(cfg.out) / "symbol_sweep.csv", [&](std::ostream& os) {
        const double dn = norm(cfg.sweep.direction);
        os << "xi1,xi2";
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) os << fmt::format(",re_n{}{},im_n{}{}", i + 1, j + 1, i + 1, j + 1);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) os << fmt::format(",re_oracle{}{},im_oracle{}{}", i + 1, j + 1, i + 1, j + 1);
        os << ",norm,coercivity,inverse_bound,extrapolated,oracle_rel_err\n";
        for (const AsymptoticSample& s : rep.samples) {
            const Xi xi{s.abs_xi * cfg.sweep.direction[0] / dn, s.abs_xi * cfg.sweep.direction[1] / dn};
            const MatC n = compute_n(p, xi, p.gamma, cfg.policy);
            MatC oracle = MatC::Constant(m, m, cplx(NAN, NAN));
            double err = NAN;
            if (!s.extrapolated) {
                oracle = exponential_normal_traces(p, xi, -p.gamma);  // n_gamma solves with drift -gamma
                err = (n - oracle).norm() / oracle.norm();
                oracle_err = std::max(oracle_err, err);
            }
            os << io::num(xi[0]) << ',' << io::num(xi[1]);
            for (const MatC* a : {&n, static_cast<const MatC*>(&oracle)})
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j) os << ',' << io::num((*a)(i, j).real()) << ',' << io::num((*a)(i, j).imag());
            os << ',' << io::num(s.norm) << ',' << io::num(s.coercivity) << ',' << io::num(s.inverse_bound) << ','
               << int(s.extrapolated) << ',' << io::num(err) << '\n';
        }
    });

    // Lattice table of the configured grid.
    const TorusGrid grid = cfg.grid();
    SymbolTable table(p, grid, cfg.mode, cfg.policy);
    table.build_all(cfg.threads);
    write_file(fs::path(cfg.out) / "symbol_table.csv", [&](std::ostream& os) { table.write_csv(os); });

    json j = io::to_json(rep);
    j["oracle_max_rel_err"] = oracle_err;
    io::write_json(fs::path(cfg.out) / "symbol_report.json", j);
    fmt::print("low slope {:.4f}, high slope {:.4f}, coercivity margin {:.3e}, oracle agreement {:.2e}: {}\n",
               rep.low_slope, rep.high_slope, rep.min_coercivity, oracle_err, rep.pass() ? "pass" : "FAIL");
    return rep.pass() ? 0 : static_cast<int>(ExitCode::bound);
}

void write_state_outputs(const io::RunConfig& cfg, const Discretization& disc, const FlatState& x) {
    const fs::path out(cfg.out);
    write_file(out / "state.csv", [&](std::ostream& os) { io::write_state(os, x, disc.grid()); });
    write_file(out / "state.stwv", [&](std::ostream& os) { io::write_container(os, io::state_container(x, disc.grid())); });
    write_file(out / "surfaces.csv", [&](std::ostream& os) { io::write_surfaces(os, disc, x.eta); });
}

int cmd_solve_linear(const io::RunConfig& cfg) {
    write_manifest(cfg, "solve-linear");
    if (cfg.data.empty()) throw InputError("solve-linear needs [linear] data = \"<csv file>\" in the config");
    Discretization disc(cfg.physical, cfg.grid(), cfg.policy);
    std::ifstream in(cfg.data);
    if (!in) throw InputError(fmt::format("cannot open data file {}", cfg.data));
    DataTuple d = io::read_data(in, disc);
    LinearSystem sys(disc, cfg.mode, cfg.threads);
    // The tolerance is applied here so the report is written either way.
    InverseResult r = sys.inverse(d, INFINITY);
    write_state_outputs(cfg, disc, r.state);
    json j = io::to_json(r.report);
    j["consistency_tol"] = cfg.consistency_tol;
    const bool ok = r.report.relative <= cfg.consistency_tol;
    j["consistency_ok"] = ok;
    io::write_json(fs::path(cfg.out) / "linear_report.json", j);
    fmt::print("consistency residual {:.3e} relative to data ({}), max |eta| {:.3e}\n", r.report.relative,
               ok ? "ok" : "FAILED", r.report.max_surface);
    return ok ? 0 : static_cast<int>(ExitCode::bound);
}

// Eulerian values on vertical lines through every sample column (x2 = 0 when
// n = 3), P points per layer including both bounding surfaces.
void write_slices(std::ostream& os, const Discretization& disc, const FlatState& x, int P) {
    const int n = disc.n(), m = disc.m(), N = disc.grid().size();
    EulerianView view(disc, x);
    os << "x1,x2,y,layer";
    for (int i = 0; i < n; ++i) os << ",v" << i + 1;
    os << ",q\n";
    for (int i = 0; i < N; ++i)
        for (int l = 0; l < m; ++l) {
            Point X{disc.grid().coordinate(i, N), 0.0, 0.0};
            const double lo = l == 0 ? 0.0 : view.surface(l - 1, X), hi = view.surface(l, X);
            for (int j = 0; j < P; ++j) {
                X[2] = lo + (hi - lo) * j / (P - 1);
                os << io::num(X[0]) << ',' << io::num(X[1]) << ',' << io::num(X[2]) << ',' << l + 1;
                for (double v : view.velocity(X, l)) os << ',' << io::num(v);
                os << ',' << io::num(view.pressure(X, l)) << '\n';
            }
        }
}

int cmd_solve_wave(const io::RunConfig& cfg) {
    write_manifest(cfg, "solve-wave");
    const fs::path out(cfg.out);
    Discretization disc(cfg.physical, cfg.grid(), cfg.policy);
    LinearSystem sys(disc, cfg.mode, cfg.threads);
    const ForcingSpec forcing = io::make_forcing(cfg, disc);
    const double bound = cfg.physical.min_thickness() / 4.0;

    WaveResult w;
    try {
        w = solve_wave(sys, forcing, cfg.wave);
    } catch (const WaveFailure& e) {
        io::write_json(out / "iteration_report.json", io::to_json(e.report(), bound));
        fmt::print(stderr, "error: {}\n", e.what());
        return static_cast<int>(e.code());
    }
    io::write_json(out / "iteration_report.json", io::to_json(w.report, bound));
    write_state_outputs(cfg, disc, w.state);
    write_file(out / "eulerian_slices.csv", [&](std::ostream& os) {
        write_slices(os, disc, w.state, cfg.slice_points > 0 ? std::max(cfg.slice_points, 2) : disc.grid().size());
    });
    if (!cfg.eulerian_points.empty()) {
        EulerianBundle b = unflatten(disc, w.state, cfg.eulerian_points);
        write_file(out / "eulerian_points.csv", [&](std::ostream& os) {
            os << "x1,x2,y,layer";
            for (int i = 0; i < disc.n(); ++i) os << ",v" << i + 1;
            os << ",q\n";
            for (std::size_t i = 0; i < b.points.size(); ++i) {
                os << io::num(b.points[i][0]) << ',' << io::num(b.points[i][1]) << ',' << io::num(b.points[i][2]) << ','
                   << b.layers[i] + 1;
                for (double v : b.velocity[i]) os << ',' << io::num(v);
                os << ',' << io::num(b.pressure[i]) << '\n';
            }
        });
    }
    const IterationRecord& last = w.report.iterations.back();
    fmt::print("{}; residual {:.3e}, max |eta| {:.3e} (quarter-gap bound {:.3e}), largest ratio {:.3e}\n",
               w.report.verdict, last.residual, last.max_surface, bound, w.report.max_ratio);
    return 0;
}

int cmd_verify(const io::RunConfig& cfg) {
    write_manifest(cfg, "verify");
    std::vector<std::string> names;
    if (cfg.suite == "all")
        names = verify::suite_names();
    else
        names = {cfg.suite};
    verify::Options o;
    o.config = cfg.physical;
    o.seed = cfg.seed;
    o.threads = cfg.threads;
    // Validate every selector before running anything.
    for (const auto& s : names)
        if (std::find(verify::suite_names().begin(), verify::suite_names().end(), s) == verify::suite_names().end())
            throw InputError(fmt::format("unknown suite '{}' (geometry, divtools, symbols, compat, linear, wave or all)", s));

    json matrix = json::object();
    bool all = true;
    for (const auto& name : names) {
        json checks = json::array();
        bool ok = true;
        for (const verify::SuiteResult& r : verify::run_suite(name, o)) {
            for (const verify::Check& c : r.checks) {
                checks.push_back({{"group", r.suite}, {"check", c.name}, {"value", c.value}, {"limit", c.limit}, {"pass", c.pass}});
                ok = ok && c.pass;
            }
            fmt::print("{:<10} {:<40} {} ({:.1f} s)\n", name, r.suite, r.pass() ? "pass" : "FAIL", r.seconds);
        }
        matrix[name] = {{"pass", ok}, {"checks", checks}};
        all = all && ok;
    }
    // Timings stay out of the file so reruns are byte-identical.
    io::write_json(fs::path(cfg.out) / "verify.json", {{"seed", cfg.seed}, {"pass", all}, {"suites", matrix}});
    return all ? 0 : static_cast<int>(ExitCode::bound);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral solver for multilayer viscous traveling-wave free-boundary Stokes flow"};
    app.require_subcommand(1);
    Flags flags;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config, "TOML run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", flags.out, "output directory (overrides [output] dir)");
        sub->add_option("--threads", flags.threads, "worker threads over frequencies")->check(CLI::PositiveNumber);
        sub->add_option_function<std::uint64_t>(
            "--seed",
            [&](const std::uint64_t& s) {
                flags.seed = s;
                flags.seed_set = true;
            },
            "RNG seed for generated test data");
    };
    CLI::App* symbol = app.add_subcommand("symbol", "symbol sweep, lattice table and asymptotics report");
    CLI::App* linear = app.add_subcommand("solve-linear", "invert the linearized operator on data read from CSV");
    CLI::App* wave = app.add_subcommand("solve-wave", "Picard solve for a forced traveling wave");
    CLI::App* ver = app.add_subcommand("verify", "run property suites and write a pass/fail matrix");
    for (CLI::App* s : {symbol, linear, wave, ver}) common(s);
    ver->add_option("--suite", flags.suite, "geometry, divtools, symbols, compat, linear, wave or all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::input);
    }

    try {
        const io::RunConfig cfg = load(flags);
        if (symbol->parsed()) return cmd_symbol(cfg);
        if (linear->parsed()) return cmd_solve_linear(cfg);
        if (wave->parsed()) return cmd_solve_wave(cfg);
        return cmd_verify(cfg);
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return static_cast<int>(ExitCode::input);
    }
}

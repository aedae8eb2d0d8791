#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "stwave/compat.hpp"
#include "stwave/config.hpp"
#include "stwave/grid.hpp"
#include "stwave/linear.hpp"
#include "stwave/symbols.hpp"
#include "stwave/wave.hpp"

namespace stwave::io {

using json = nlohmann::json;

struct ForcingConfig {
    std::string kind = "gaussian";  // gaussian, mode or none
    double amplitude = 1e-2;
    double width = 1.0;
    std::vector<double> center;  // default: middle of the torus
    std::array<int, 2> k{1, 0};
};

// Everything a CLI run reads from its TOML file. Missing keys keep the
// reference two-layer setup on a 16-periodic torus with N = 64.
struct RunConfig {
    PhysicalConfig physical = reference_config();
    double period = 16.0;
    int resolution = 64;
    DegreePolicy policy;
    Mode mode = Mode::surface_tension;
    ForcingConfig forcing;
    WaveOptions wave;
    double consistency_tol = 1e-8;
    Sweep sweep;
    std::string data;  // solve-linear input, relative to the config file
    std::string suite = "all";
    std::vector<Point> eulerian_points;  // extra evaluation points for solve-wave
    int slice_points = 0;                // per layer and direction; 0 picks N
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out = "out";

    TorusGrid grid() const { return TorusGrid(physical.n, period, resolution); }
    std::uint64_t hash() const;
};

// Throws InputError on unknown keys, type mismatches and invalid parameters.
RunConfig parse_config(const std::string& toml_text, const std::filesystem::path& base = {});
RunConfig load_config(const std::filesystem::path& path);
json to_json(const RunConfig& cfg);

ForcingSpec make_forcing(const RunConfig& cfg, const Discretization& disc);

// 17 significant digits, the shortest width that round-trips a double.
std::string num(double v);

// Spectral coefficient tables, one row per nonzero coefficient:
//   field,component,row,k1,k2,re,im
// k1, k2 are signed wavenumbers (k2 = 0 when n = 2); rows index mesh nodes for
// bulk fields and interfaces for surface fields.
void write_coefficients(std::ostream& os, const std::vector<std::pair<std::string, const Field*>>& fields,
                        const TorusGrid& grid);
DataTuple read_data(std::istream& is, const Discretization& disc);
void write_data(std::ostream& os, const DataTuple& d, const TorusGrid& grid);
void write_state(std::ostream& os, const FlatState& x, const TorusGrid& grid);

// Surface heights a_l + eta_l on the N-point sample grid: x1[,x2],eta_1..eta_m.
void write_surfaces(std::ostream& os, const Discretization& disc, const Field& eta);

// Little-endian container: "STWV", u32 version, u32 n, u32 N, f64 L,
// u32 block count; then per block an 8-byte zero-padded name, u32 components,
// u32 rows, u32 modes and components * rows * modes complex64 values
// (float32 real, float32 imaginary) in (component, row, mode) order.
struct Block {
    std::string name;
    Field field;
};
struct Container {
    int n = 2, N = 0;
    double L = 0.0;
    std::vector<Block> blocks;
};
inline constexpr std::uint32_t container_version = 1;
void write_container(std::ostream& os, const Container& c);
Container read_container(std::istream& is);
Container state_container(const FlatState& x, const TorusGrid& grid);

// Config hash, library versions, seed and command; contains nothing that
// changes between identical reruns.
json manifest(const RunConfig& cfg, const std::string& command);

json to_json(const AsymptoticsReport& r);
json to_json(const InverseReport& r);
json to_json(const IterationReport& r, double trust_bound);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& j);

}  // namespace stwave::io

#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace stwave {

using cplx = std::complex<double>;
inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx I{0.0, 1.0};

enum class Mode { surface_tension, zero_surface_tension };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& s);

// Physical parameters of the layered slab. Layer l (1-based in the math,
// 0-based here) occupies a[l-1] < y < a[l] with a[-1] = 0.
struct PhysicalConfig {
    int n = 2;
    std::vector<double> a;
    std::vector<double> rho;
    std::vector<double> mu;
    std::vector<double> sigma;
    double gravity = 1.0;
    double gamma = 1.0;

    int m() const { return static_cast<int>(a.size()); }
    double bottom(int l) const { return l == 0 ? 0.0 : a[l - 1]; }
    double top(int l) const { return a[l]; }
    double thickness(int l) const { return a[l] - bottom(l); }
    double min_thickness() const;

    // Density jump across interface l: rho above minus rho below, with
    // vacuum above the top interface.
    double density_jump(int l) const;

    // Throws InputError on invalid parameters. Rayleigh–Taylor ordering is
    // only demanded when the caller needs the gravity-capillary symbols.
    void validate(bool require_rayleigh_taylor = true) const;
    void validate_mode(Mode mode) const;

    std::uint64_t hash() const;
};

// Two-layer setup used throughout the acceptance suite.
PhysicalConfig reference_config();

}  // namespace stwave

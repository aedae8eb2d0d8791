#include "stwave/config.hpp"

#include <algorithm>
#include <cstring>

#include "stwave/error.hpp"

namespace stwave {

std::string to_string(Mode mode) {
    return mode == Mode::surface_tension ? "surface_tension" : "zero_surface_tension";
}

Mode mode_from_string(const std::string& s) {
    if (s == "surface_tension") return Mode::surface_tension;
    if (s == "zero_surface_tension") return Mode::zero_surface_tension;
    throw InputError("unknown mode '" + s + "'");
}

double PhysicalConfig::min_thickness() const {
    double h = a.at(0);
    for (int l = 1; l < m(); ++l) h = std::min(h, thickness(l));
    return h;
}

double PhysicalConfig::density_jump(int l) const {
    return (l + 1 < m() ? rho[l + 1] : 0.0) - rho[l];
}

void PhysicalConfig::validate(bool require_rayleigh_taylor) const {
    if (n != 2 && n != 3) throw InputError("dimension n must be 2 or 3");
    if (m() < 1) throw InputError("at least one layer is required");
    auto sized = [&](const std::vector<double>& v, const char* name) {
        if (static_cast<int>(v.size()) != m())
            throw InputError(std::string("parameter '") + name + "' must have one entry per layer");
    };
    sized(rho, "rho");
    sized(mu, "mu");
    sized(sigma, "sigma");
    double prev = 0.0;
    for (int l = 0; l < m(); ++l) {
        if (!(a[l] > prev)) throw InputError("depths must be positive and strictly increasing");
        prev = a[l];
        if (!(mu[l] > 0.0)) throw InputError("viscosities must be positive");
        if (!(rho[l] > 0.0)) throw InputError(msg::rayleigh_taylor);
        if (sigma[l] < 0.0) throw InputError("surface tensions must be nonnegative");
    }
    if (require_rayleigh_taylor) {
        for (int l = 0; l + 1 < m(); ++l)
            if (!(rho[l] > rho[l + 1])) throw InputError(msg::rayleigh_taylor);
        if (!(gravity > 0.0)) throw InputError("gravity must be positive");
    }
}

void PhysicalConfig::validate_mode(Mode mode) const {
    if (mode == Mode::surface_tension) {
        for (double s : sigma)
            if (!(s > 0.0)) throw InputError("surface_tension mode requires every sigma > 0");
    } else {
        if (n != 2) throw InputError("zero_surface_tension mode is only available for n = 2");
        for (double s : sigma)
            if (s != 0.0) throw InputError("zero_surface_tension mode requires sigma = 0");
    }
}

std::uint64_t PhysicalConfig::hash() const {
    // FNV-1a over the raw parameter bytes.
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const void* p, std::size_t len) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    mix(&n, sizeof n);
    for (const auto* v : {&a, &rho, &mu, &sigma}) mix(v->data(), v->size() * sizeof(double));
    mix(&gravity, sizeof gravity);
    mix(&gamma, sizeof gamma);
    return h;
}

PhysicalConfig reference_config() {
    PhysicalConfig c;
    c.n = 2;
    c.a = {1.0, 2.0};
    c.rho = {2.0, 1.0};
    c.mu = {1.0, 0.5};
    c.sigma = {0.5, 0.5};
    c.gravity = 1.0;
    c.gamma = 1.0;
    return c;
}

}  // namespace stwave

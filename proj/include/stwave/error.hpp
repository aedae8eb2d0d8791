#pragma once

#include <stdexcept>
#include <string>

namespace stwave {

// Exit codes double as the CLI process status.
enum class ExitCode : int { ok = 0, input = 1, bound = 2, nonconvergence = 3 };

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const { return code_; }

private:
    ExitCode code_;
};

struct InputError : Error {
    explicit InputError(const std::string& what) : Error(ExitCode::input, what) {}
};

struct SolverError : Error {
    explicit SolverError(const std::string& what) : Error(ExitCode::input, what) {}
};

struct BoundViolation : Error {
    explicit BoundViolation(const std::string& what) : Error(ExitCode::bound, what) {}
};

struct NonConvergence : Error {
    explicit NonConvergence(const std::string& what) : Error(ExitCode::nonconvergence, what) {}
};

namespace msg {
inline constexpr const char* rayleigh_taylor = "Rayleigh–Taylor ordering violated";
inline constexpr const char* incompatible_zero_mode = "incompatible zero mode";
inline constexpr const char* zero_mode_seminorm = "zero mode obstructs homogeneous seminorm";
inline constexpr const char* left_trust_region = "left trust region";
}  // namespace msg

}  // namespace stwave

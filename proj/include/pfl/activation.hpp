#pragma once

#include <pfl/error.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pfl {

/// Format (alpha, beta, ell) of a Pfaffian function: chain degree, degree of
/// the function as a polynomial over the chain, and chain length.
struct PfaffianFormat
{
    std::uint64_t alpha = 0;
    std::uint64_t beta = 0;
    std::uint64_t ell = 0;

    friend bool operator==(PfaffianFormat const&, PfaffianFormat const&) = default;

    /// A non-empty chain needs alpha >= 1 and beta >= 1.
    bool is_valid_chain() const { return ell == 0 || (alpha >= 1 && beta >= 1); }
};

/// Whether the chain polynomials P_i reference the raw argument directly.
enum class DependenceCase { Case1, Case2 };

struct ActivationSpec
{
    std::string name;
    PfaffianFormat format;
    DependenceCase dependence_case = DependenceCase::Case1;
    double (*eval)(double) = nullptr;
    double (*deriv)(double) = nullptr;

    bool is_logsig() const { return name == "logsig"; }
};

namespace activations {

inline double tanh_eval(double x) { return std::tanh(x); }
inline double tanh_deriv(double x)
{
    double const t = std::tanh(x);
    return 1.0 - t * t;
}

inline double logsig_eval(double x)
{
    // Split on sign so exp never overflows.
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    double const e = std::exp(x);
    return e / (1.0 + e);
}
inline double logsig_deriv(double x)
{
    double const s = logsig_eval(x);
    return s * (1.0 - s);
}

inline double arctan_eval(double x) { return std::atan(x); }
inline double arctan_deriv(double x) { return 1.0 / (1.0 + x * x); }

/// tanh' = 1 - tanh^2: single-function chain, no explicit x.
inline ActivationSpec tanh()
{
    return {"tanh", {2, 1, 1}, DependenceCase::Case1, &tanh_eval, &tanh_deriv};
}

/// logsig' = s(1 - s): single-function chain, no explicit x.
inline ActivationSpec logsig()
{
    return {"logsig", {2, 1, 1}, DependenceCase::Case1, &logsig_eval, &logsig_deriv};
}

/// Chain (f1, f2) = ((1+x^2)^-1, arctan x) with f1' = -2x f1^2 and f2' = f1,
/// so alpha = 3 and the chain depends on x directly.
inline ActivationSpec arctan()
{
    return {"arctan", {3, 1, 2}, DependenceCase::Case2, &arctan_eval, &arctan_deriv};
}

} // namespace activations

inline std::vector<std::string> activation_names() { return {"tanh", "logsig", "arctan"}; }

inline std::optional<ActivationSpec> find_activation(std::string_view name)
{
    if (name == "tanh")
        return activations::tanh();
    if (name == "logsig" || name == "sigmoid")
        return activations::logsig();
    if (name == "arctan")
        return activations::arctan();
    return std::nullopt;
}

inline ActivationSpec activation_by_name(std::string_view name)
{
    if (auto a = find_activation(name))
        return *a;
    throw ConfigError("unknown activation '" + std::string(name) +
                      "' (expected tanh, logsig or arctan)");
}

} // namespace pfl

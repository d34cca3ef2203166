#pragma once

#include <pfl/activation.hpp>
#include <pfl/error.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pfl {

/// Shape of a single-output feedforward network. Layer L is the output
/// layer (width 1); hidden_widths holds n_1 .. n_{L-1}.
struct Architecture
{
    std::size_t n0 = 1;
    std::vector<std::size_t> hidden_widths;
    /// nullopt means a linear output layer.
    std::optional<ActivationSpec> last_layer;
    bool skip_connections = false;

    std::size_t layers() const { return hidden_widths.size() + 1; }

    /// Width of layer l in 0..L.
    std::size_t width(std::size_t l) const
    {
        if (l == 0)
            return n0;
        if (l == layers())
            return 1;
        return hidden_widths.at(l - 1);
    }

    std::uint64_t hidden_width_sum() const
    {
        std::uint64_t s = 0;
        for (auto w : hidden_widths)
            s = detail::checked_add(s, w);
        return s;
    }

    /// Uniform hidden width, if all hidden layers agree.
    std::optional<std::size_t> uniform_width() const
    {
        if (hidden_widths.empty())
            return std::nullopt;
        for (auto w : hidden_widths)
            if (w != hidden_widths.front())
                return std::nullopt;
        return hidden_widths.front();
    }

    void validate() const
    {
        if (n0 == 0)
            throw ConfigError("architecture: n0 must be positive");
        if (hidden_widths.empty())
            throw ConfigError("architecture: need at least one hidden layer (L >= 2)");
        for (auto w : hidden_widths)
            if (w == 0)
                throw ConfigError("architecture: hidden widths must be positive");
    }
};

/// Convenience for the uniform-width family used throughout the bounds.
inline Architecture uniform_architecture(std::size_t n0, std::size_t h, std::size_t L,
                                         std::optional<ActivationSpec> last = std::nullopt,
                                         bool skip = false)
{
    if (L < 2)
        throw ConfigError("uniform_architecture: L must be >= 2");
    return Architecture{n0, std::vector<std::size_t>(L - 1, h), std::move(last), skip};
}

enum class LossKind { MSE, BCE };

inline std::string to_string(LossKind k) { return k == LossKind::MSE ? "mse" : "bce"; }

struct LossSpec
{
    LossKind kind = LossKind::MSE;
    double l2_lambda = 0.0;
};

/// Parameter count sum_l n_l (n_{l-1} + 1).
inline std::uint64_t total_params(Architecture const& arch)
{
    arch.validate();
    std::uint64_t n = 0;
    for (std::size_t l = 1; l <= arch.layers(); ++l)
        n = detail::checked_add(n, detail::checked_mul(arch.width(l), arch.width(l - 1) + 1));
    return n;
}

/// Closed form h^2 (L-2) + h (n0 + L) + 1 for uniform width h.
inline std::uint64_t total_params_uniform(std::uint64_t n0, std::uint64_t h, std::uint64_t L)
{
    using detail::checked_add;
    using detail::checked_mul;
    if (L < 2 || h == 0 || n0 == 0)
        throw ConfigError("total_params_uniform: need L >= 2, h >= 1, n0 >= 1");
    return checked_add(checked_add(checked_mul(checked_mul(h, h), L - 2),
                                   checked_mul(h, checked_add(n0, L))),
                       1);
}

} // namespace pfl

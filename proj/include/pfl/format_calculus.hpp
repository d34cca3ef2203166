#pragma once

// Pfaffian format calculus for MSE/BCE losses of single-output feedforward
// networks. Only degrees and chain lengths are tracked; the chain
// polynomials themselves are never materialized.

#include <pfl/activation.hpp>
#include <pfl/architecture.hpp>
#include <pfl/error.hpp>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pfl {

using detail::checked_add;
using detail::checked_mul;

/// Degree of sigma' as a polynomial over sigma's chain:
///   Case1: beta + alpha - 1
///   Case2: beta + alpha - 1 + alpha (beta + 1)
inline std::uint64_t derivative_degree(PfaffianFormat const& f, DependenceCase c)
{
    if (f.ell == 0)
        throw std::invalid_argument("derivative_degree: empty chain (ell = 0) has no derivative degree");
    if (f.alpha < 1 || f.beta < 1)
        throw std::invalid_argument("derivative_degree: need alpha >= 1 and beta >= 1");
    std::uint64_t d = checked_add(f.beta, f.alpha) - 1;
    if (c == DependenceCase::Case2)
        d = checked_add(d, checked_mul(f.alpha, checked_add(f.beta, 1)));
    return d;
}

namespace detail {

// (d' + 1)(L - 2) + d', the degree of d sigma(a^{L-1}) / d w^1.
inline std::uint64_t hidden_chain_degree(std::uint64_t dsigma, std::uint64_t L)
{
    return checked_add(checked_mul(dsigma + 1, L - 2), dsigma);
}

inline void require_theorem_arch(Architecture const& arch, std::uint64_t m, char const* who)
{
    arch.validate();
    if (arch.layers() < 2)
        throw std::invalid_argument(std::string(who) + ": need L >= 2");
    if (m < 1)
        throw std::invalid_argument(std::string(who) + ": need m >= 1 samples");
}

} // namespace detail

/// Format of the MSE loss over m samples.
inline PfaffianFormat loss_format_mse(Architecture const& arch, ActivationSpec const& sigma,
                                      std::uint64_t m)
{
    detail::require_theorem_arch(arch, m, "loss_format_mse");
    std::uint64_t const L = arch.layers();
    std::uint64_t const ds = derivative_degree(sigma.format, sigma.dependence_case);
    std::uint64_t const hidden_ell = checked_mul(sigma.format.ell, arch.hidden_width_sum());
    std::uint64_t const base_alpha = detail::hidden_chain_degree(ds, L);

    if (!arch.last_layer) {
        return {base_alpha, checked_mul(2, sigma.format.beta + 1), checked_mul(m, hidden_ell)};
    }
    ActivationSpec const& g = *arch.last_layer;
    std::uint64_t const dg = derivative_degree(g.format, g.dependence_case);
    return {checked_add(checked_add(base_alpha, dg), 1), checked_mul(2, g.format.beta),
            checked_mul(m, checked_add(hidden_ell, g.format.ell))};
}

/// Format of the BCE loss over m samples; the output layer must be activated.
/// A logsig output uses the tighter chain that contains the loss itself.
inline PfaffianFormat loss_format_bce(Architecture const& arch, ActivationSpec const& sigma,
                                      std::uint64_t m)
{
    detail::require_theorem_arch(arch, m, "loss_format_bce");
    if (!arch.last_layer)
        throw std::invalid_argument("loss_format_bce: BCE requires an activated last layer");
    std::uint64_t const L = arch.layers();
    std::uint64_t const ds = derivative_degree(sigma.format, sigma.dependence_case);
    std::uint64_t const hidden_ell = checked_mul(sigma.format.ell, arch.hidden_width_sum());
    std::uint64_t const base_alpha = detail::hidden_chain_degree(ds, L);
    ActivationSpec const& g = *arch.last_layer;

    if (g.is_logsig()) {
        return {checked_add(base_alpha, 3), 1,
                checked_add(checked_mul(m, checked_add(hidden_ell, 1)), 1)};
    }
    std::uint64_t const dg = derivative_degree(g.format, g.dependence_case);
    return {checked_add(checked_add(base_alpha, dg), 3), 1,
            checked_mul(m, checked_add(checked_add(hidden_ell, g.format.ell), 4))};
}

inline PfaffianFormat loss_format(Architecture const& arch, ActivationSpec const& sigma,
                                  LossKind kind, std::uint64_t m)
{
    return kind == LossKind::MSE ? loss_format_mse(arch, sigma, m)
                                 : loss_format_bce(arch, sigma, m);
}

/// Output-layer kind in the uniform-width tanh/logsig setting.
enum class LastKind { Linear, Logsig, Tanh };

inline std::string to_string(LastKind k)
{
    switch (k) {
    case LastKind::Linear: return "linear";
    case LastKind::Logsig: return "logsig";
    case LastKind::Tanh: return "tanh";
    }
    return "?";
}

inline LastKind last_kind_of(Architecture const& arch)
{
    if (!arch.last_layer)
        return LastKind::Linear;
    if (arch.last_layer->name == "logsig")
        return LastKind::Logsig;
    if (arch.last_layer->name == "tanh")
        return LastKind::Tanh;
    throw std::invalid_argument("last layer '" + arch.last_layer->name +
                                "' has no published uniform-width format");
}

/// The uniform-width tuples exactly as published, including the MSE/linear
/// alpha = 3(L-2), which is 2 less than what loss_format_mse gives.
inline PfaffianFormat corollary_published_format(LossKind loss, LastKind last, std::uint64_t L,
                                                 std::uint64_t h, std::uint64_t m)
{
    if (L < 2 || h < 1 || m < 1)
        throw std::invalid_argument("corollary_published_format: need L >= 2, h >= 1, m >= 1");
    std::uint64_t const a = checked_mul(3, L - 2);
    std::uint64_t const hl = checked_mul(h, L - 1);
    if (loss == LossKind::MSE) {
        if (last == LastKind::Linear)
            return {a, 4, checked_mul(m, hl)};
        if (last == LastKind::Logsig)
            return {a + 5, 2, checked_mul(m, hl + 1)};
        throw std::invalid_argument("corollary_published_format: MSE with tanh output is not published");
    }
    if (last == LastKind::Logsig)
        return {a + 5, 1, checked_add(checked_mul(m, hl + 1), 1)};
    if (last == LastKind::Tanh)
        return {a + 7, 1, checked_mul(m, hl + 5)};
    throw std::invalid_argument("corollary_published_format: BCE requires an activated output");
}

/// Corollary mode for an architecture: uniform width and tanh/logsig hidden
/// activation required.
inline PfaffianFormat corollary_published_format(Architecture const& arch,
                                                 ActivationSpec const& sigma, LossKind loss,
                                                 std::uint64_t m)
{
    arch.validate();
    auto h = arch.uniform_width();
    if (!h)
        throw std::invalid_argument("corollary mode requires a uniform hidden width");
    if (sigma.name != "tanh" && sigma.name != "logsig")
        throw std::invalid_argument("corollary mode requires tanh or logsig hidden activation");
    return corollary_published_format(loss, last_kind_of(arch), arch.layers(), *h, m);
}

/// The l2 term is a degree-2 monomial in the parameters: beta -> max(beta, 2).
inline PfaffianFormat apply_l2(PfaffianFormat f)
{
    f.beta = std::max<std::uint64_t>(f.beta, 2);
    return f;
}

/// Additive skips keep derivative degrees and chain length unchanged.
inline PfaffianFormat apply_skip_connections(PfaffianFormat f) { return f; }

} // namespace pfl

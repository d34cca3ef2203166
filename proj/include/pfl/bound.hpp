#pragma once

// Zell's bound on the sum of Betti numbers of a semi-Pfaffian set,
//   B(S) <= s^{n'} 2^{ell(ell-1)/2} O((n beta + min(n, ell) alpha)^{n + ell}),
// instantiated with s = 1 and O-constant 1, plus the closed-form appendix
// expressions for the uniform-width tanh/logsig family.

#include <pfl/architecture.hpp>
#include <pfl/error.hpp>
#include <pfl/format_calculus.hpp>

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfl {

inline constexpr std::uint64_t default_exact_bit_cap = 10'000'000;

struct BoundAssumptions
{
    std::uint64_t s = 1;
    std::uint64_t n_prime = 0; ///< taken as the parameter count
    std::uint64_t big_o_constant = 1;

    friend bool operator==(BoundAssumptions const&, BoundAssumptions const&) = default;
};

/// The three integers that determine 2^two_power_exponent * base^exponent.
struct BoundTerms
{
    std::uint64_t two_power_exponent = 0;
    std::uint64_t base = 0;
    std::uint64_t exponent = 0;

    friend bool operator==(BoundTerms const&, BoundTerms const&) = default;
};

struct BoundResult
{
    std::optional<mpz_class> exact;
    /// log2 of the bound; -infinity when the bound is 0.
    double log2_value = 0.0;
    std::uint64_t base = 0;
    std::uint64_t exponent = 0;
    std::uint64_t two_power_exponent = 0;
    BoundAssumptions assumptions;
    /// True when the value exceeded the bit cap and only log2 is available.
    bool exact_suppressed = false;

    BoundTerms terms() const { return {two_power_exponent, base, exponent}; }

    std::optional<std::string> exact_decimal() const
    {
        if (!exact)
            return std::nullopt;
        return exact->get_str(10);
    }

    /// Same integer value, whether or not it was materialized.
    bool same_value(BoundResult const& o) const
    {
        if (base == 0 || o.base == 0)
            return base == o.base;
        if (exact && o.exact)
            return *exact == *o.exact;
        // 2^t b^e is unique once b is reduced to an odd part; compare the
        // canonical factorization.
        auto canon = [](BoundResult const& r) {
            std::uint64_t b = r.base;
            std::uint64_t twos = 0;
            while ((b & 1u) == 0) {
                b >>= 1;
                ++twos;
            }
            return std::pair{r.two_power_exponent + twos * r.exponent,
                             b == 1 ? std::pair<std::uint64_t, std::uint64_t>{1, 0}
                                    : std::pair<std::uint64_t, std::uint64_t>{b, r.exponent}};
        };
        auto const a = canon(*this);
        auto const c = canon(o);
        if (a.first != c.first)
            return false;
        if (a.second == c.second)
            return true;
        // Different odd bases can still give the same power (e.g. 9^2 vs 3^4).
        auto const& [b1, e1] = a.second;
        auto const& [b2, e2] = c.second;
        if (e1 == 0 || e2 == 0)
            return false;
        if (std::abs(e1 * std::log2(double(b1)) - e2 * std::log2(double(b2))) > 1e-6)
            return false;
        mpz_class x, y;
        mpz_ui_pow_ui(x.get_mpz_t(), b1, e1);
        mpz_ui_pow_ui(y.get_mpz_t(), b2, e2);
        return x == y;
    }
};

/// Materializes 2^t * base^e from its terms, honouring the bit cap.
inline BoundResult evaluate_bound_terms(BoundTerms const& t, std::uint64_t n_prime,
                                        std::uint64_t exact_bit_cap)
{
    BoundResult r;
    r.base = t.base;
    r.exponent = t.exponent;
    r.two_power_exponent = t.two_power_exponent;
    r.assumptions.n_prime = n_prime;

    if (t.base == 0) {
        r.exact = mpz_class(0);
        r.log2_value = -std::numeric_limits<double>::infinity();
        return r;
    }

    r.log2_value = static_cast<double>(t.two_power_exponent) +
                   static_cast<double>(t.exponent) * std::log2(static_cast<double>(t.base));

    // Bit length is floor(log2) + 1; leave a little slack for rounding and
    // re-check on the materialized value.
    if (r.log2_value + 1.0 > static_cast<double>(exact_bit_cap) + 1.0) {
        r.exact_suppressed = true;
        return r;
    }
    mpz_class v;
    mpz_ui_pow_ui(v.get_mpz_t(), t.base, t.exponent);
    mpz_mul_2exp(v.get_mpz_t(), v.get_mpz_t(), t.two_power_exponent);
    if (mpz_sizeinbase(v.get_mpz_t(), 2) > exact_bit_cap) {
        r.exact_suppressed = true;
        return r;
    }
    r.exact = std::move(v);
    return r;
}

inline BoundTerms zell_terms(PfaffianFormat const& f, std::uint64_t n_params)
{
    using detail::checked_add;
    using detail::checked_mul;
    BoundTerms t;
    t.base = checked_add(checked_mul(n_params, f.beta),
                         checked_mul(std::min(n_params, f.ell), f.alpha));
    t.exponent = checked_add(n_params, f.ell);
    t.two_power_exponent = f.ell == 0 ? 0 : checked_mul(f.ell, f.ell - 1) / 2;
    return t;
}

/// Betti-sum bound for a loss of format f in n_params variables.
inline BoundResult zell_bound(PfaffianFormat const& f, std::uint64_t n_params,
                              std::uint64_t exact_bit_cap = default_exact_bit_cap)
{
    if (n_params < 1)
        throw std::invalid_argument("zell_bound: n_params must be >= 1");
    return evaluate_bound_terms(zell_terms(f, n_params), n_params, exact_bit_cap);
}

/// Closed-form appendix expressions in (n0, h, L, m). The (MSE, logsig)
/// pair uses the form consistent with zell_bound; appendix_printed_terms
/// keeps the printed variant.
inline BoundTerms appendix_terms(LossKind loss, LastKind last, std::uint64_t n0,
                                 std::uint64_t h, std::uint64_t L, std::uint64_t m)
{
    using detail::checked_add;
    using detail::checked_mul;
    if (m < 1)
        throw std::invalid_argument("appendix_explicit_bound: m must be >= 1");
    if (L < 2 || h < 1 || n0 < 1)
        throw std::invalid_argument("appendix_explicit_bound: need L >= 2, h >= 1, n0 >= 1");

    auto tri = [](std::uint64_t a, std::uint64_t b) { return checked_mul(a, b) / 2; };
    std::uint64_t const N = total_params_uniform(n0, h, L);
    BoundTerms t;

    if (loss == LossKind::MSE && last == LastKind::Linear) {
        std::uint64_t const q = checked_mul(m, checked_mul(L - 1, h)); // m(L-1)h
        if (L == 2) {
            // 2^{mh(mh-1)/2} (4h(2+n0)+4)^{h(2+n0+m)+1}
            std::uint64_t const mh = checked_mul(m, h);
            t.two_power_exponent = tri(mh, mh - 1);
            t.base = checked_add(checked_mul(4, checked_mul(h, 2 + n0)), 4);
            t.exponent = checked_add(checked_mul(h, checked_add(2 + n0, m)), 1);
            return t;
        }
        t.two_power_exponent = tri(q, q - 1);
        t.base = checked_add(checked_mul(4, N), checked_mul(checked_mul(3, L - 2), std::min(N, q)));
        t.exponent = checked_add(
            checked_add(checked_mul(checked_mul(h, h), L - 2),
                        checked_mul(h, checked_add(checked_add(L, n0), checked_mul(m, L - 1)))),
            1);
        return t;
    }

    if (loss == LossKind::MSE && last == LastKind::Logsig) {
        std::uint64_t const q = checked_mul(m, checked_add(checked_mul(h, L - 1), 1)); // m(h(L-1)+1)
        t.two_power_exponent = tri(q, q - 1);
        t.base = checked_add(checked_mul(2, N),
                             checked_mul(checked_add(checked_mul(3, L - 2), 5), std::min(N, q)));
        t.exponent = checked_add(
            checked_add(checked_mul(checked_mul(h, h), L - 2),
                        checked_mul(h, checked_add(checked_add(L, n0), checked_mul(m, L - 1)))),
            checked_add(1, m));
        return t;
    }

    if (loss == LossKind::BCE && last == LastKind::Logsig) {
        if (L == 2) {
            // 2^{(m(h+1)+1)(m(h+1))/2} g^{h(m+n0+2)+m+2},
            // g = h(n0+2)+1 + 5 min(h(n0+2)+1, m(h+1)+1)
            std::uint64_t const q = checked_mul(m, h + 1);
            std::uint64_t const n = checked_add(checked_mul(h, n0 + 2), 1);
            t.two_power_exponent = tri(q + 1, q);
            t.base = checked_add(n, checked_mul(5, std::min(n, q + 1)));
            t.exponent = checked_add(checked_mul(h, checked_add(m, n0 + 2)), m + 2);
            return t;
        }
        std::uint64_t const q = checked_mul(m, checked_add(checked_mul(L - 1, h), 1)); // m((L-1)h+1)
        t.two_power_exponent = tri(q + 1, q);
        t.base = checked_add(N, checked_mul(checked_add(checked_mul(3, L - 2), 5),
                                            std::min(N, q + 1)));
        // h(m(L-1) + n0 + 2 + (h+1)(L-2)) + m + 2
        t.exponent = checked_add(
            checked_mul(h, checked_add(checked_add(checked_mul(m, L - 1), n0 + 2),
                                       checked_mul(h + 1, L - 2))),
            m + 2);
        return t;
    }

    throw std::invalid_argument("appendix_explicit_bound: no closed form for (" + to_string(loss) +
                                ", " + to_string(last) + ")");
}

inline BoundResult appendix_explicit_bound(LossKind loss, LastKind last, std::uint64_t n0,
                                           std::uint64_t h, std::uint64_t L, std::uint64_t m,
                                           std::uint64_t exact_bit_cap = default_exact_bit_cap)
{
    BoundTerms const t = appendix_terms(loss, last, n0, h, L, m);
    return evaluate_bound_terms(t, total_params_uniform(n0, h, L), exact_bit_cap);
}

/// Terms of the MSE/logsig-output bound exactly as printed. These differ
/// from the Zell evaluation of the published format: the deep form uses
/// ell(ell+1)/2 and a "+2" exponent tail, the shallow form assumes
/// ell = 2mh and base 9(h(2+n0)+1).
inline BoundTerms appendix_printed_terms_mse_nonlinear(std::uint64_t n0, std::uint64_t h,
                                                       std::uint64_t L, std::uint64_t m)
{
    using detail::checked_add;
    using detail::checked_mul;
    if (m < 1 || L < 2 || h < 1 || n0 < 1)
        throw std::invalid_argument("appendix_printed_terms: need m, h, n0 >= 1 and L >= 2");
    BoundTerms t;
    if (L == 2) {
        std::uint64_t const q = checked_mul(2, checked_mul(m, h));
        t.two_power_exponent = checked_mul(q, q - 1) / 2;
        t.base = checked_add(checked_mul(9, checked_mul(h, 2 + n0)), 9);
        t.exponent = checked_add(checked_mul(h, checked_add(2 + n0, checked_mul(2, m))), 1);
        return t;
    }
    std::uint64_t const N = total_params_uniform(n0, h, L);
    std::uint64_t const q = checked_mul(m, checked_add(checked_mul(h, L - 1), 1));
    t.two_power_exponent = checked_mul(q, q + 1) / 2;
    t.base = checked_add(checked_mul(2, N),
                         checked_mul(checked_add(checked_mul(3, L - 2), 5), std::min(N, q)));
    t.exponent = checked_add(
        checked_add(checked_mul(checked_mul(h, h), L - 2),
                    checked_mul(h, checked_add(checked_add(L, n0), checked_mul(m, L - 1)))),
        2);
    return t;
}

enum class RegimeVariable { m, h, L };
enum class DepthClass { Deep, Shallow };

inline std::string to_string(RegimeVariable v)
{
    switch (v) {
    case RegimeVariable::m: return "m";
    case RegimeVariable::h: return "h";
    case RegimeVariable::L: return "L";
    }
    return "?";
}

inline std::string to_string(DepthClass d) { return d == DepthClass::Deep ? "deep" : "shallow"; }

struct RegimeLabel
{
    RegimeVariable variable;
    DepthClass depth_class;
    std::string asymptotic_class;

    friend bool operator==(RegimeLabel const&, RegimeLabel const&) = default;
};

/// Asymptotic growth classes of the bound in each size variable. Depth
/// only has a label for deep networks.
inline std::vector<RegimeLabel> regime_summary(std::uint64_t h, std::uint64_t L, std::uint64_t m)
{
    if (L < 2)
        throw std::invalid_argument("regime_summary: need L >= 2");
    (void)h;
    (void)m;
    if (L >= 3) {
        return {{RegimeVariable::m, DepthClass::Deep, "κ^{O(m²)}"},
                {RegimeVariable::h, DepthClass::Deep, "O(h²)^{O(h²)}"},
                {RegimeVariable::L, DepthClass::Deep, "2^{O(L²)}O(L²)^{O(L)}"}};
    }
    return {{RegimeVariable::m, DepthClass::Shallow, "κ^{O(m²)}"},
            {RegimeVariable::h, DepthClass::Shallow, "O(h)^{O(h)}"}};
}

} // namespace pfl

#include <pfl/format_calculus.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace pfl;

namespace {

Architecture arch(std::size_t n0, std::vector<std::size_t> hidden,
                  std::optional<ActivationSpec> last = std::nullopt)
{
    return Architecture{n0, std::move(hidden), std::move(last), false};
}

} // namespace

TEST(DerivativeDegree, Case1AndCase2)
{
    EXPECT_EQ(derivative_degree({2, 1, 1}, DependenceCase::Case1), 2u);
    EXPECT_EQ(derivative_degree({2, 1, 1}, DependenceCase::Case2), 6u);
    EXPECT_EQ(derivative_degree({1, 1, 1}, DependenceCase::Case1), 1u);
}

TEST(DerivativeDegree, RejectsDegenerateChain)
{
    EXPECT_THROW(derivative_degree({2, 1, 0}, DependenceCase::Case1), std::invalid_argument);
    EXPECT_THROW(derivative_degree({0, 1, 1}, DependenceCase::Case1), std::invalid_argument);
    EXPECT_THROW(derivative_degree({1, 0, 1}, DependenceCase::Case2), std::invalid_argument);
}

TEST(Catalog, TanhAndLogsigShareFormat)
{
    for (auto const* name : {"tanh", "logsig"}) {
        auto a = activation_by_name(name);
        EXPECT_EQ(a.format, (PfaffianFormat{2, 1, 1})) << name;
        EXPECT_EQ(a.dependence_case, DependenceCase::Case1) << name;
    }
    auto at = activation_by_name("arctan");
    EXPECT_EQ(at.dependence_case, DependenceCase::Case2);
    EXPECT_EQ(at.format.ell, 2u);
    EXPECT_THROW(activation_by_name("relu"), ConfigError);
}

TEST(Catalog, DerivativesMatchCentralDifferences)
{
    double const probes[] = {-3.0, -1.2, -0.3, 0.0, 0.4, 1.1, 2.5};
    for (auto const& name : activation_names()) {
        auto a = activation_by_name(name);
        for (double x : probes) {
            double const h = 1e-5;
            double const fd = (a.eval(x + h) - a.eval(x - h)) / (2 * h);
            double const d = a.deriv(x);
            EXPECT_LE(std::abs(fd - d), 1e-6 * std::max(1.0, std::abs(d))) << name << " at " << x;
        }
    }
}

TEST(Catalog, FormatsAreValidChains)
{
    for (auto const& name : activation_names())
        EXPECT_TRUE(activation_by_name(name).format.is_valid_chain());
}

TEST(LossFormatMse, PublishedSubstitutions)
{
    auto const tanh = activations::tanh();
    EXPECT_EQ(loss_format_mse(arch(1, {2, 2}), tanh, 5), (PfaffianFormat{5, 4, 20}));
    EXPECT_EQ(loss_format_mse(arch(1, {2, 2}, activations::logsig()), tanh, 5),
              (PfaffianFormat{8, 2, 25}));
    EXPECT_EQ(loss_format_mse(arch(1, {3}), tanh, 1), (PfaffianFormat{2, 4, 3}));
}

TEST(LossFormatMse, NonUniformWidthsUseTheSum)
{
    // (d'+1)(L-2)+d' = 3*2+2, ell = m * (2+3+1)
    EXPECT_EQ(loss_format_mse(arch(2, {2, 3, 1}), activations::tanh(), 2),
              (PfaffianFormat{8, 4, 12}));
}

TEST(LossFormatMse, Preconditions)
{
    EXPECT_THROW(loss_format_mse(arch(1, {2}), activations::tanh(), 0), std::invalid_argument);
    EXPECT_THROW(loss_format_mse(arch(1, {}), activations::tanh(), 1), ConfigError);
}

TEST(LossFormatBce, PublishedSubstitutions)
{
    auto const tanh = activations::tanh();
    auto const sig = activations::logsig();
    EXPECT_EQ(loss_format_bce(arch(1, {2, 2}, sig), tanh, 5), (PfaffianFormat{8, 1, 26}));
    EXPECT_EQ(loss_format_bce(arch(1, {2, 2}, tanh), tanh, 5), (PfaffianFormat{10, 1, 45}));
    EXPECT_EQ(loss_format_bce(arch(1, {1}, sig), sig, 1), (PfaffianFormat{5, 1, 3}));
}

TEST(LossFormatBce, LinearLastLayerRejected)
{
    EXPECT_THROW(loss_format_bce(arch(1, {2, 2}), activations::tanh(), 5), std::invalid_argument);
}

TEST(LossFormatBce, Case2HiddenActivation)
{
    // arctan: (3,1,2) Case2, d' = 1+3-1 + 3*2 = 9. Linear MSE at L=2, n1=2:
    // (9, 4, m*2*2).
    EXPECT_EQ(loss_format_mse(arch(1, {2}), activations::arctan(), 3), (PfaffianFormat{9, 4, 12}));
}

TEST(Corollary, PublishedTuples)
{
    EXPECT_EQ(corollary_published_format(LossKind::MSE, LastKind::Linear, 3, 2, 5),
              (PfaffianFormat{3, 4, 20}));
    EXPECT_EQ(corollary_published_format(LossKind::BCE, LastKind::Logsig, 3, 2, 5),
              (PfaffianFormat{8, 1, 26}));
    EXPECT_EQ(corollary_published_format(LossKind::MSE, LastKind::Logsig, 2, 3, 2),
              (PfaffianFormat{5, 2, 8}));
    EXPECT_EQ(corollary_published_format(LossKind::BCE, LastKind::Tanh, 3, 2, 5),
              (PfaffianFormat{10, 1, 45}));
}

TEST(Corollary, UnsupportedCombinations)
{
    EXPECT_THROW(corollary_published_format(LossKind::MSE, LastKind::Tanh, 3, 2, 5),
                 std::invalid_argument);
    EXPECT_THROW(corollary_published_format(LossKind::BCE, LastKind::Linear, 3, 2, 5),
                 std::invalid_argument);
    EXPECT_THROW(corollary_published_format(arch(1, {2, 3}), activations::tanh(), LossKind::MSE, 1),
                 std::invalid_argument);
    EXPECT_THROW(corollary_published_format(arch(1, {2, 2}), activations::arctan(), LossKind::MSE, 1),
                 std::invalid_argument);
}

TEST(Corollary, MatchesTheoremOnNonlinearBranches)
{
    for (auto const* hidden : {"tanh", "logsig"}) {
        auto const sigma = activation_by_name(hidden);
        for (std::size_t L = 2; L <= 8; ++L)
            for (std::size_t h = 1; h <= 8; ++h)
                for (std::uint64_t m = 1; m <= 20; ++m) {
                    auto const sig = uniform_architecture(1, h, L, activations::logsig());
                    auto const th = uniform_architecture(1, h, L, activations::tanh());
                    EXPECT_EQ(loss_format_mse(sig, sigma, m),
                              corollary_published_format(LossKind::MSE, LastKind::Logsig, L, h, m));
                    EXPECT_EQ(loss_format_bce(sig, sigma, m),
                              corollary_published_format(LossKind::BCE, LastKind::Logsig, L, h, m));
                    EXPECT_EQ(loss_format_bce(th, sigma, m),
                              corollary_published_format(LossKind::BCE, LastKind::Tanh, L, h, m));
                }
    }
}

TEST(Corollary, LinearBranchDiffersByTwoInAlpha)
{
    for (std::size_t L = 2; L <= 8; ++L)
        for (std::size_t h = 1; h <= 8; ++h)
            for (std::uint64_t m = 1; m <= 20; ++m) {
                auto const thm = loss_format_mse(uniform_architecture(1, h, L), activations::tanh(), m);
                auto const pub = corollary_published_format(LossKind::MSE, LastKind::Linear, L, h, m);
                EXPECT_EQ(thm.alpha, 3 * (L - 2) + 2);
                EXPECT_EQ(thm.alpha, pub.alpha + 2);
                EXPECT_EQ(thm.beta, pub.beta);
                EXPECT_EQ(thm.ell, pub.ell);
            }
}

TEST(Transforms, L2)
{
    EXPECT_EQ(apply_l2({5, 4, 20}), (PfaffianFormat{5, 4, 20}));
    EXPECT_EQ(apply_l2({8, 1, 26}), (PfaffianFormat{8, 2, 26}));
    EXPECT_EQ(apply_l2({3, 2, 7}), (PfaffianFormat{3, 2, 7}));
}

TEST(Transforms, SkipIsIdentity)
{
    EXPECT_EQ(apply_skip_connections({5, 4, 20}), (PfaffianFormat{5, 4, 20}));
    EXPECT_EQ(apply_skip_connections({8, 1, 26}), (PfaffianFormat{8, 1, 26}));
    EXPECT_EQ(apply_skip_connections({1, 1, 0}), (PfaffianFormat{1, 1, 0}));
}

TEST(Transforms, L2IdempotentAndSkipIdentityOverRange)
{
    for (std::uint64_t a = 0; a < 6; ++a)
        for (std::uint64_t b = 0; b < 6; ++b)
            for (std::uint64_t l = 0; l < 6; ++l) {
                PfaffianFormat const f{a, b, l};
                EXPECT_EQ(apply_l2(apply_l2(f)), apply_l2(f));
                EXPECT_EQ(apply_skip_connections(f), f);
                EXPECT_EQ(apply_l2(f).alpha, a);
                EXPECT_EQ(apply_l2(f).ell, l);
            }
}

TEST(TotalParams, Examples)
{
    EXPECT_EQ(total_params(uniform_architecture(1, 2, 3)), 13u);
    EXPECT_EQ(total_params(uniform_architecture(1, 1, 2)), 4u);
    EXPECT_EQ(total_params(uniform_architecture(2, 3, 4)), 37u);
    EXPECT_EQ(total_params_uniform(2, 3, 4), 37u);
}

TEST(TotalParams, SumMatchesClosedForm)
{
    for (std::size_t L = 2; L <= 10; ++L)
        for (std::size_t h = 1; h <= 10; ++h)
            for (std::size_t n0 = 1; n0 <= 10; ++n0)
                EXPECT_EQ(total_params(uniform_architecture(n0, h, L)), total_params_uniform(n0, h, L));
}

TEST(FormatMonotonicity, WeaklyIncreasingInMHL)
{
    auto const sigma = activations::tanh();
    auto fmt = [&](int kind, std::size_t L, std::size_t h, std::uint64_t m) {
        switch (kind) {
        case 0: return loss_format_mse(uniform_architecture(1, h, L), sigma, m);
        case 1: return loss_format_mse(uniform_architecture(1, h, L, activations::logsig()), sigma, m);
        case 2: return loss_format_bce(uniform_architecture(1, h, L, activations::logsig()), sigma, m);
        default: return loss_format_bce(uniform_architecture(1, h, L, activations::tanh()), sigma, m);
        }
    };
    auto le = [](PfaffianFormat const& a, PfaffianFormat const& b) {
        return a.alpha <= b.alpha && a.beta <= b.beta && a.ell <= b.ell;
    };
    for (int kind = 0; kind < 4; ++kind)
        for (std::size_t L = 2; L <= 6; ++L)
            for (std::size_t h = 1; h <= 5; ++h)
                for (std::uint64_t m = 1; m <= 6; ++m) {
                    auto const f = fmt(kind, L, h, m);
                    EXPECT_TRUE(le(f, fmt(kind, L, h, m + 1)));
                    EXPECT_TRUE(le(f, fmt(kind, L, h + 1, m)));
                    EXPECT_TRUE(le(f, fmt(kind, L + 1, h, m)));
                }
}

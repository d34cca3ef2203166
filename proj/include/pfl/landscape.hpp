#pragma once

#include <pfl/error.hpp>
#include <pfl/field.hpp>
#include <pfl/network.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace pfl {

/// Frozen coordinates drawn uniformly from [-0.5, 0.5). The mapping from
/// the 64-bit engine output is spelled out so values do not depend on the
/// standard library's distribution implementation.
inline std::vector<double> random_base_point(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<double> p(n);
    for (auto& v : p)
        v = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    return p;
}

/// Loss restricted to the slice grid. Nodes are split into contiguous
/// blocks across workers; each value depends only on its node.
inline ScalarField sample_field(Network const& net, Dataset const& data, LossSpec const& loss,
                                ParameterSlice const& slice, unsigned threads = 1)
{
    net.validate();
    slice.validate();
    if (slice.base_point.size() != net.param_count())
        throw ConfigError("slice: base_point has " + std::to_string(slice.base_point.size()) +
                          " entries, network has " + std::to_string(net.param_count()) +
                          " parameters");
    ScalarField f;
    f.slice = slice;
    std::size_t const n = slice.node_count();
    f.values.assign(n, 0.0);

    auto fill = [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            double const v = loss_eval(net, slice.point(p), data, loss);
            if (!std::isfinite(v)) {
                std::string where;
                for (auto i : slice.node_index(p))
                    where += (where.empty() ? "" : ",") + std::to_string(i);
                throw ComputeError("sample_field: non-finite loss at node (" + where + ")");
            }
            f.values[p] = v;
        }
    };

    threads = std::max(1u, threads);
    if (threads == 1 || n < 2 * threads) {
        fill(0, n);
        return f;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        std::size_t const chunk = (n + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            std::size_t const b = std::min(n, t * chunk);
            std::size_t const e = std::min(n, b + chunk);
            pool.emplace_back([&, t, b, e] {
                try {
                    fill(b, e);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
    }
    for (auto const& e : errors)
        if (e)
            std::rethrow_exception(e);
    return f;
}

} // namespace pfl

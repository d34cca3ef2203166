#pragma once

// Small dense feedforward networks with augmented weight matrices
// W^l = [b^l, W~^l], flattened row-major, layer 1 first.

#include <pfl/activation.hpp>
#include <pfl/architecture.hpp>
#include <pfl/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfl {

using ParameterVector = std::vector<double>;

/// Architecture together with the hidden-layer activation.
struct Network
{
    Architecture arch;
    ActivationSpec hidden = activations::tanh();

    std::size_t param_count() const { return static_cast<std::size_t>(total_params(arch)); }

    /// Offset of W^l inside the flat parameter vector.
    std::size_t layer_offset(std::size_t l) const
    {
        std::size_t off = 0;
        for (std::size_t k = 1; k < l; ++k)
            off += arch.width(k) * (arch.width(k - 1) + 1);
        return off;
    }

    /// Index of entry (row j, column i) of W^l; column 0 is the bias.
    std::size_t param_index(std::size_t l, std::size_t j, std::size_t i) const
    {
        return layer_offset(l) + j * (arch.width(l - 1) + 1) + i;
    }

    void validate() const
    {
        arch.validate();
        if (!hidden.eval || !hidden.deriv)
            throw ConfigError("network: hidden activation has no evaluator");
        if (arch.skip_connections) {
            for (std::size_t l = 2; l < arch.layers(); ++l)
                if (arch.width(l) != arch.width(l - 1))
                    throw ConfigError("network: skip connection between hidden layers of widths " +
                                      std::to_string(arch.width(l - 1)) + " and " +
                                      std::to_string(arch.width(l)));
        }
    }

    /// Layer l (2 <= l <= L-1) adds its input to its output.
    bool has_skip(std::size_t l) const
    {
        return arch.skip_connections && l >= 2 && l + 1 <= arch.layers();
    }
};

struct Sample
{
    std::vector<double> x;
    double y = 0.0;
};

using Dataset = std::vector<Sample>;

struct ForwardTrace
{
    /// a[l] for l = 1..L (a[0] unused).
    std::vector<std::vector<double>> a;
    /// z[l] = [1; h^l] for l = 0..L-1.
    std::vector<std::vector<double>> z;
    double output = 0.0;
};

inline ForwardTrace forward(Network const& net, std::span<double const> params,
                            std::span<double const> x)
{
    net.validate();
    auto const& arch = net.arch;
    std::size_t const L = arch.layers();
    if (params.size() != net.param_count())
        throw ComputeError("forward: expected " + std::to_string(net.param_count()) +
                           " parameters, got " + std::to_string(params.size()));
    if (x.size() != arch.n0)
        throw ComputeError("forward: expected input of length " + std::to_string(arch.n0) +
                           ", got " + std::to_string(x.size()));

    ForwardTrace t;
    t.a.resize(L + 1);
    t.z.resize(L);
    t.z[0].reserve(arch.n0 + 1);
    t.z[0].push_back(1.0);
    t.z[0].insert(t.z[0].end(), x.begin(), x.end());

    std::size_t off = 0;
    for (std::size_t l = 1; l <= L; ++l) {
        std::size_t const rows = arch.width(l);
        std::size_t const cols = arch.width(l - 1) + 1;
        auto const& zin = t.z[l - 1];
        auto& a = t.a[l];
        a.assign(rows, 0.0);
        for (std::size_t j = 0; j < rows; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < cols; ++i)
                s += params[off + j * cols + i] * zin[i];
            a[j] = s;
        }
        off += rows * cols;
        if (l == L)
            break;
        auto& z = t.z[l];
        z.assign(rows + 1, 1.0);
        for (std::size_t j = 0; j < rows; ++j) {
            z[j + 1] = net.hidden.eval(a[j]);
            if (net.has_skip(l))
                z[j + 1] += zin[j + 1];
        }
    }
    double const aL = t.a[L][0];
    t.output = arch.last_layer ? arch.last_layer->eval(aL) : aL;
    return t;
}

inline constexpr double bce_clamp = 1e-12;

namespace detail {

inline void check_dataset(Network const& net, Dataset const& data, LossSpec const& loss)
{
    if (data.empty())
        throw ComputeError("loss: dataset is empty");
    for (auto const& s : data)
        if (s.x.size() != net.arch.n0)
            throw ComputeError("loss: sample input width does not match n0");
    if (loss.kind == LossKind::BCE) {
        if (!net.arch.last_layer)
            throw ConfigError("BCE loss requires an activated last layer");
        for (auto const& s : data)
            if (s.y != 0.0 && s.y != 1.0)
                throw ConfigError("BCE loss requires targets in {0, 1}");
    }
    if (!(loss.l2_lambda >= 0.0))
        throw ConfigError("l2_lambda must be nonnegative");
}

// Output within clamping tolerance of [0, 1], then clamped.
inline double clamp_probability(double f)
{
    if (!(f >= -bce_clamp && f <= 1.0 + bce_clamp))
        throw ComputeError("BCE: network output " + std::to_string(f) + " outside [0, 1]");
    return std::clamp(f, bce_clamp, 1.0 - bce_clamp);
}

} // namespace detail

/// MSE: (1/m) sum (y - f)^2.  BCE: sum -y log f - (1-y) log(1-f).
/// Both plus lambda * 0.5 * |theta|^2.
inline double loss_eval(Network const& net, std::span<double const> params, Dataset const& data,
                        LossSpec const& loss)
{
    detail::check_dataset(net, data, loss);
    double total = 0.0;
    for (auto const& s : data) {
        double const f = forward(net, params, s.x).output;
        if (loss.kind == LossKind::MSE) {
            double const r = s.y - f;
            total += r * r;
        } else {
            double const p = detail::clamp_probability(f);
            total += -s.y * std::log(p) - (1.0 - s.y) * std::log(1.0 - p);
        }
    }
    if (loss.kind == LossKind::MSE)
        total /= static_cast<double>(data.size());
    if (loss.l2_lambda > 0.0) {
        double sq = 0.0;
        for (double w : params)
            sq += w * w;
        total += loss.l2_lambda * 0.5 * sq;
    }
    return total;
}

/// dL/da^L for one sample, via the generic chain rule.
inline double output_delta_generic(Network const& net, ForwardTrace const& t, double y,
                                   LossSpec const& loss, std::size_t m)
{
    double const aL = t.a.back()[0];
    double const f = t.output;
    double dldf;
    if (loss.kind == LossKind::MSE) {
        dldf = 2.0 * (f - y) / static_cast<double>(m);
    } else {
        double const p = detail::clamp_probability(f);
        dldf = -y / p + (1.0 - y) / (1.0 - p);
    }
    return net.arch.last_layer ? dldf * net.arch.last_layer->deriv(aL) : dldf;
}

/// dL/da^L for BCE with a logsig output: g'(a)/(g(a)(1-g(a))) = 1, so the
/// delta reduces to g(a^L) - y.
inline double output_delta_bce_logsig(ForwardTrace const& t, double y)
{
    return activations::logsig_eval(t.a.back()[0]) - y;
}

/// Gradient by the delta recursion
///   dL/dw^l_{j,i} = delta^l_j z^{l-1}_i,
///   delta^l_j = sigma'(a^l_j) sum_k delta^{l+1}_k w^{l+1}_{k,j},
/// with the identity path added through skip connections.
inline std::vector<double> backprop_grad(Network const& net, std::span<double const> params,
                                         Dataset const& data, LossSpec const& loss)
{
    detail::check_dataset(net, data, loss);
    auto const& arch = net.arch;
    std::size_t const L = arch.layers();
    bool const bce_logsig =
        loss.kind == LossKind::BCE && arch.last_layer && arch.last_layer->is_logsig();

    std::vector<double> grad(params.size(), 0.0);
    std::vector<double> delta, dh, dh_prev;

    auto accumulate = [&](std::size_t l, ForwardTrace const& t) {
        std::size_t const cols = arch.width(l - 1) + 1;
        std::size_t const off = net.layer_offset(l);
        auto const& zin = t.z[l - 1];
        for (std::size_t j = 0; j < delta.size(); ++j)
            for (std::size_t i = 0; i < cols; ++i)
                grad[off + j * cols + i] += delta[j] * zin[i];
    };
    // dL/dh^{l-1} through W^l (bias column excluded).
    auto pull_back = [&](std::size_t l, std::vector<double>& out) {
        std::size_t const cols = arch.width(l - 1) + 1;
        std::size_t const off = net.layer_offset(l);
        out.assign(cols - 1, 0.0);
        for (std::size_t j = 0; j < delta.size(); ++j)
            for (std::size_t i = 1; i < cols; ++i)
                out[i - 1] += delta[j] * params[off + j * cols + i];
    };

    for (auto const& s : data) {
        ForwardTrace const t = forward(net, params, s.x);
        delta.assign(1, bce_logsig ? output_delta_bce_logsig(t, s.y)
                                   : output_delta_generic(net, t, s.y, loss, data.size()));
        accumulate(L, t);
        pull_back(L, dh);

        for (std::size_t l = L - 1; l >= 1; --l) {
            delta.resize(dh.size());
            for (std::size_t j = 0; j < dh.size(); ++j)
                delta[j] = dh[j] * net.hidden.deriv(t.a[l][j]);
            accumulate(l, t);
            if (l == 1)
                break;
            pull_back(l, dh_prev);
            // h^l = sigma(a^l) + h^{l-1} also passes dL/dh^l straight through.
            if (net.has_skip(l))
                for (std::size_t j = 0; j < dh_prev.size(); ++j)
                    dh_prev[j] += dh[j];
            dh.swap(dh_prev);
        }
    }

    if (loss.l2_lambda > 0.0)
        for (std::size_t i = 0; i < grad.size(); ++i)
            grad[i] += loss.l2_lambda * params[i];
    return grad;
}

/// Central differences (L(theta + h e_i) - L(theta - h e_i)) / 2h.
inline std::vector<double> finite_diff_grad(Network const& net, std::span<double const> params,
                                            Dataset const& data, LossSpec const& loss, double step)
{
    if (!(step > 0.0))
        throw std::invalid_argument("finite_diff_grad: step must be positive");
    std::vector<double> p(params.begin(), params.end());
    std::vector<double> g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        double const orig = p[i];
        p[i] = orig + step;
        double const up = loss_eval(net, p, data, loss);
        p[i] = orig - step;
        double const down = loss_eval(net, p, data, loss);
        p[i] = orig;
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

} // namespace pfl

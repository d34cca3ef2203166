#pragma once

// End-to-end verification: format -> bound -> sampled slice -> sublevel
// homology -> verdicts, and its JSON/CSV serializations.

#include <pfl/bound.hpp>
#include <pfl/config.hpp>
#include <pfl/cubical.hpp>
#include <pfl/format_calculus.hpp>
#include <pfl/homology.hpp>
#include <pfl/landscape.hpp>

#include <nlohmann/json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#ifndef PFL_VERSION
#define PFL_VERSION "0.1.0"
#endif

namespace pfl {

inline constexpr char const* version = PFL_VERSION;

inline constexpr char const* bound_assumption_statement =
    "upper bound up to the theorem's unstated constant: O-constant = 1, s = 1 sign condition, "
    "n' = parameter count";

enum class Verdict { Holds, Fails, NotApplicable };

inline std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    default: return "not-applicable";
    }
}

struct VerdictRecord
{
    Verdict verdict = Verdict::NotApplicable;
    nlohmann::ordered_json evidence;
};

struct InequalityCheck
{
    double threshold = 0.0;
    std::uint64_t measured = 0; ///< sum of Betti numbers at this level
    Verdict verdict = Verdict::NotApplicable;
};

struct VerificationReport
{
    FormatMode mode = FormatMode::Theorem;
    bool direct = false;
    PfaffianFormat theorem_format;
    std::optional<PfaffianFormat> corollary_format;
    PfaffianFormat bound_format;
    std::uint64_t n_tilde = 0; ///< parameter count the bound is taken over
    std::uint64_t n_params_total = 0;
    std::uint64_t samples = 0;
    std::string loss;
    double l2_lambda = 0.0;
    BoundResult bound;

    std::vector<ThresholdBetti> betti;
    std::vector<InequalityCheck> inequality;
    VerdictRecord l2_invariance;
    VerdictRecord skip_invariance;

    std::optional<std::uint64_t> seed;
    std::vector<SliceAxis> grid;
    std::string base_point;
    std::string homology_method;
    std::string dataset_source;

    std::string scope() const { return direct ? "direct" : "sectional"; }

    /// Worst verdict across all checks.
    Verdict overall() const
    {
        bool fails = l2_invariance.verdict == Verdict::Fails || skip_invariance.verdict == Verdict::Fails;
        for (auto const& c : inequality)
            fails = fails || c.verdict == Verdict::Fails;
        return fails ? Verdict::Fails : Verdict::Holds;
    }
};

namespace detail {

/// Prefix errors with the pipeline stage, keeping the error category.
template <class F>
auto staged(char const* stage, F&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (ConfigError const& e) {
        throw ConfigError(std::string(stage) + ": " + e.what());
    } catch (std::invalid_argument const& e) {
        throw std::invalid_argument(std::string(stage) + ": " + e.what());
    } catch (ComputeError const& e) {
        throw ComputeError(std::string(stage) + ": " + e.what());
    }
}

/// measured <= bound, exactly when the bound was materialized.
inline bool within_bound(std::uint64_t measured, BoundResult const& b)
{
    if (b.exact)
        return mpz_class(static_cast<unsigned long>(measured)) <= *b.exact;
    if (measured == 0)
        return true;
    return std::log2(static_cast<double>(measured)) <= b.log2_value;
}

inline std::string fmt(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto const r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline nlohmann::ordered_json format_json(PfaffianFormat const& f)
{
    return {{"alpha", f.alpha}, {"beta", f.beta}, {"ell", f.ell}};
}

inline nlohmann::ordered_json log2_json(double v)
{
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

} // namespace detail

inline nlohmann::ordered_json bound_json(BoundResult const& b)
{
    nlohmann::ordered_json j;
    auto dec = b.exact_decimal();
    j["exact"] = dec ? nlohmann::ordered_json(*dec) : nlohmann::ordered_json(nullptr);
    j["exact_suppressed"] = b.exact_suppressed;
    j["log2"] = detail::log2_json(b.log2_value);
    j["two_power_exponent"] = b.two_power_exponent;
    j["base"] = b.base;
    j["exponent"] = b.exponent;
    j["assumptions"] = {{"s", b.assumptions.s},
                        {"n_prime", b.assumptions.n_prime},
                        {"big_o_constant", b.assumptions.big_o_constant},
                        {"statement", bound_assumption_statement}};
    return j;
}

/// Format fed to the bound in the given mode, before the l2 and skip transforms.
inline std::optional<PfaffianFormat> mode_format(Architecture const& arch, ActivationSpec const& sigma,
                                                 LossKind loss, std::uint64_t m, FormatMode mode)
{
    if (mode == FormatMode::Theorem)
        return loss_format(arch, sigma, loss, m);
    try {
        return corollary_published_format(arch, sigma, loss, m);
    } catch (std::invalid_argument const&) {
        return std::nullopt;
    }
}

inline PfaffianFormat with_transforms(PfaffianFormat f, Architecture const& arch, LossSpec const& loss)
{
    if (loss.l2_lambda > 0.0)
        f = apply_l2(f);
    if (arch.skip_connections)
        f = apply_skip_connections(f);
    return f;
}

inline VerificationReport run_verify(ExperimentConfig const& cfg)
{
    VerificationReport r;
    Network const net = network_of(cfg);
    net.validate();
    std::uint64_t const m = cfg.data.size();
    r.mode = cfg.mode;
    r.samples = m;
    r.loss = to_string(cfg.loss.kind);
    r.l2_lambda = cfg.loss.l2_lambda;
    r.n_params_total = total_params(cfg.arch);
    // Direct: the slice is the whole parameter space, or the frozen
    // coordinates are declared constants of the loss.
    r.direct = cfg.frozen_as_constants || cfg.axes.size() == r.n_params_total;
    r.n_tilde = r.direct ? cfg.axes.size() : r.n_params_total;
    r.seed = cfg.seed;
    r.grid = cfg.axes;
    r.dataset_source = cfg.dataset_source;

    detail::staged("format", [&] {
        r.theorem_format = with_transforms(*mode_format(cfg.arch, cfg.hidden, cfg.loss.kind, m, FormatMode::Theorem),
                                           cfg.arch, cfg.loss);
        if (auto c = mode_format(cfg.arch, cfg.hidden, cfg.loss.kind, m, FormatMode::Corollary))
            r.corollary_format = with_transforms(*c, cfg.arch, cfg.loss);
        if (cfg.mode == FormatMode::Corollary && !r.corollary_format)
            throw ConfigError("corollary mode needs uniform width, tanh/logsig hidden activation and a "
                              "supported (loss, last layer) pair");
        r.bound_format = cfg.mode == FormatMode::Theorem ? r.theorem_format : *r.corollary_format;
    });

    r.bound = detail::staged("bound", [&] { return zell_bound(r.bound_format, r.n_tilde, cfg.exact_bit_cap); });

    r.base_point = to_string(cfg.base_kind);
    ParameterSlice const slice{cfg.axes, base_point_of(cfg)};
    auto const field = detail::staged("sampling", [&] {
        return sample_field(net, cfg.data, cfg.loss, slice, cfg.threads);
    });

    HomologyMethod method = HomologyMethod::Gf2;
    if (cfg.homology == HomologyChoice::Fast2d ||
        (cfg.homology == HomologyChoice::Auto && cfg.axes.size() == 2))
        method = HomologyMethod::Fast2d;
    r.homology_method = method == HomologyMethod::Fast2d ? "fast2d" : "gf2";
    r.betti = detail::staged("homology", [&] {
        return sweep_betti(field, default_thresholds(field, cfg.quantiles, cfg.extra_thresholds), method,
                           cfg.threads);
    });

    for (auto const& t : r.betti) {
        std::uint64_t const total = t.betti.total();
        r.inequality.push_back({t.threshold, total,
                                detail::within_bound(total, r.bound) ? Verdict::Holds : Verdict::Fails});
    }

    // l2: the claim is that adding the regularizer leaves the bound alone.
    detail::staged("invariance", [&] {
        auto base_fmt = *mode_format(cfg.arch, cfg.hidden, cfg.loss.kind, m,
                                     cfg.mode == FormatMode::Theorem || !r.corollary_format
                                         ? FormatMode::Theorem
                                         : FormatMode::Corollary);
        if (cfg.arch.skip_connections)
            base_fmt = apply_skip_connections(base_fmt);
        auto const reg_fmt = apply_l2(base_fmt);
        auto const b0 = zell_bound(base_fmt, r.n_tilde, cfg.exact_bit_cap);
        auto const b1 = zell_bound(reg_fmt, r.n_tilde, cfg.exact_bit_cap);
        bool const same = base_fmt == reg_fmt && b0.same_value(b1);
        auto& v = r.l2_invariance;
        v.evidence["format_without_l2"] = detail::format_json(base_fmt);
        v.evidence["format_with_l2"] = detail::format_json(reg_fmt);
        v.evidence["log2_bound_without_l2"] = detail::log2_json(b0.log2_value);
        v.evidence["log2_bound_with_l2"] = detail::log2_json(b1.log2_value);
        v.evidence["exact_equal"] = same;
        if (cfg.loss.kind == LossKind::MSE) {
            v.verdict = same ? Verdict::Holds : Verdict::Fails;
        } else {
            v.verdict = Verdict::NotApplicable;
            v.evidence["note"] = "bce: the regularizer raises beta from 1 to 2, so the exact bound changes; "
                                 "the unchanged-bound claim is read as asymptotic";
        }

        // skip: formats with and without additive skips between hidden layers.
        auto& s = r.skip_invariance;
        Architecture plain = cfg.arch;
        plain.skip_connections = false;
        Architecture skipped = cfg.arch;
        skipped.skip_connections = true;
        bool matched = true;
        for (std::size_t l = 2; l < cfg.arch.layers(); ++l)
            matched = matched && cfg.arch.width(l) == cfg.arch.width(l - 1);
        if (!matched || cfg.arch.layers() < 3) {
            s.verdict = Verdict::NotApplicable;
            s.evidence["note"] = cfg.arch.layers() < 3 ? "no pair of hidden layers to connect"
                                                       : "hidden widths differ; skips cannot be added";
        } else {
            auto const f_plain = loss_format(plain, cfg.hidden, cfg.loss.kind, m);
            auto const f_skip = apply_skip_connections(loss_format(skipped, cfg.hidden, cfg.loss.kind, m));
            s.evidence["format_without_skip"] = detail::format_json(f_plain);
            s.evidence["format_with_skip"] = detail::format_json(f_skip);
            s.verdict = f_plain == f_skip ? Verdict::Holds : Verdict::Fails;
        }
    });
    return r;
}

inline nlohmann::ordered_json report_json(VerificationReport const& r)
{
    nlohmann::ordered_json j;
    j["mode"] = to_string(r.mode);
    j["scope"] = r.scope();
    j["format"] = {{"theorem", detail::format_json(r.theorem_format)},
                   {"corollary", r.corollary_format ? detail::format_json(*r.corollary_format)
                                                    : nlohmann::ordered_json(nullptr)},
                   {"used", detail::format_json(r.bound_format)}};
    j["n_tilde"] = r.n_tilde;
    j["n_params_total"] = r.n_params_total;
    j["samples"] = r.samples;
    j["loss"] = {{"kind", r.loss}, {"l2_lambda", r.l2_lambda}};
    j["bound"] = bound_json(r.bound);

    auto& levels = j["betti"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.betti.size(); ++i) {
        auto const& t = r.betti[i];
        levels.push_back({{"c", t.threshold},
                          {"b", t.betti.b},
                          {"chi", t.betti.euler},
                          {"empty", t.betti.empty},
                          {"cell_counts", t.cell_counts}});
    }
    auto& ineq = j["verdicts"]["inequality"] = nlohmann::ordered_json::array();
    for (auto const& c : r.inequality)
        ineq.push_back({{"c", c.threshold},
                        {"measured", c.measured},
                        {"bound_log2", detail::log2_json(r.bound.log2_value)},
                        {"verdict", to_string(c.verdict)}});
    j["verdicts"]["l2_invariance"] = {{"verdict", to_string(r.l2_invariance.verdict)},
                                      {"evidence", r.l2_invariance.evidence}};
    j["verdicts"]["skip_invariance"] = {{"verdict", to_string(r.skip_invariance.verdict)},
                                        {"evidence", r.skip_invariance.evidence}};
    j["verdicts"]["overall"] = to_string(r.overall());

    auto& p = j["provenance"];
    p["seed"] = r.seed ? nlohmann::ordered_json(*r.seed) : nlohmann::ordered_json(nullptr);
    p["grid"] = nlohmann::ordered_json::array();
    for (auto const& a : r.grid)
        p["grid"].push_back({{"index", a.index}, {"min", a.min}, {"max", a.max}, {"count", a.count}});
    p["base_point"] = r.base_point;
    p["homology"] = r.homology_method;
    p["dataset"] = r.dataset_source;
    p["version"] = version;
    return j;
}

inline std::string report_csv(VerificationReport const& r)
{
    using detail::fmt;
    std::string out = "row,c,b0,b1,b2,chi,cells_0,cells_1,cells_2,cells_3,measured,bound_log2,verdict\n";
    std::string const blog = fmt(r.bound.log2_value);
    std::vector<std::uint64_t> maxb(3, 0);
    std::uint64_t max_measured = 0;
    for (std::size_t i = 0; i < r.betti.size(); ++i) {
        auto const& t = r.betti[i];
        out += std::to_string(i) + "," + fmt(t.threshold);
        for (std::size_t k = 0; k < 3; ++k) {
            out += "," + std::to_string(t.betti.at(k));
            maxb[k] = std::max(maxb[k], t.betti.at(k));
        }
        out += "," + std::to_string(t.betti.euler);
        for (std::size_t k = 0; k < 4; ++k)
            out += "," + std::to_string(k < t.cell_counts.size() ? t.cell_counts[k] : 0);
        out += "," + std::to_string(r.inequality[i].measured) + "," + blog + "," +
               to_string(r.inequality[i].verdict) + "\n";
        max_measured = std::max(max_measured, r.inequality[i].measured);
    }
    out += "summary,," + std::to_string(maxb[0]) + "," + std::to_string(maxb[1]) + "," +
           std::to_string(maxb[2]) + ",,,,,," + std::to_string(max_measured) + "," + blog + "," +
           to_string(r.overall()) + "\n";
    return out;
}

inline std::string render_report(VerificationReport const& r, ReportFormat f)
{
    return f == ReportFormat::Json ? report_json(r).dump(2) + "\n" : report_csv(r);
}

/// Writes report.json or report.csv into dir and returns the path.
inline std::filesystem::path emit_report(VerificationReport const& r, ReportFormat f,
                                         std::filesystem::path const& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    auto const path = dir / (f == ReportFormat::Json ? "report.json" : "report.csv");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ComputeError("cannot write " + path.string());
    out << render_report(r, f);
    if (!out)
        throw ComputeError("write failed for " + path.string());
    return path;
}

} // namespace pfl

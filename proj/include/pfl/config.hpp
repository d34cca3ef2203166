#pragma once

// Experiment configuration: one JSON document per run.
//
//   {
//     "architecture": {"n0": 1, "hidden": [1], "last": "linear", "skip_connections": false},
//     "activation": "tanh",
//     "loss": {"kind": "mse", "l2_lambda": 0.0},
//     "dataset": {"inline": [[0.5, 0.2], ...]}      or {"path": "data.csv"},
//     "slice": {"axes": [{"index": 1, "min": -3, "max": 3, "count": 200}, ...],
//               "base_point": "random" | "zero" | [...],
//               "frozen_as_constants": false},
//     "thresholds": {"quantiles": 16, "extra": []},
//     "homology": "auto" | "gf2" | "fast2d",
//     "bound": {"exact_bit_cap": 10000000, "mode": "theorem" | "corollary"},
//     "output": {"dir": "out", "format": "json" | "csv"},
//     "seed": 7,
//     "threads": 1
//   }
//
// Only architecture, activation, loss.kind, dataset, slice.axes are required,
// plus seed when base_point is "random" (the default). Relative dataset
// paths resolve against the config file's directory.

#include <pfl/activation.hpp>
#include <pfl/architecture.hpp>
#include <pfl/bound.hpp>
#include <pfl/data.hpp>
#include <pfl/error.hpp>
#include <pfl/field.hpp>
#include <pfl/homology.hpp>
#include <pfl/landscape.hpp>
#include <pfl/network.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace pfl {

enum class FormatMode { Theorem, Corollary };
enum class BasePointKind { Random, Zero, Explicit };
enum class HomologyChoice { Auto, Gf2, Fast2d };
enum class ReportFormat { Json, Csv };

inline std::string to_string(FormatMode m) { return m == FormatMode::Theorem ? "theorem" : "corollary"; }
inline std::string to_string(ReportFormat f) { return f == ReportFormat::Json ? "json" : "csv"; }

inline constexpr std::size_t default_max_3d_nodes = 64 * 64 * 64;

struct ExperimentConfig
{
    Architecture arch;
    ActivationSpec hidden = activations::tanh();
    LossSpec loss;
    Dataset data;
    std::string dataset_source = "inline";

    std::vector<SliceAxis> axes;
    BasePointKind base_kind = BasePointKind::Random;
    std::vector<double> base_point; ///< explicit values only
    bool frozen_as_constants = false;

    std::size_t quantiles = 16;
    std::vector<double> extra_thresholds;
    HomologyChoice homology = HomologyChoice::Auto;

    std::uint64_t exact_bit_cap = default_exact_bit_cap;
    FormatMode mode = FormatMode::Theorem;

    std::optional<std::string> out_dir;
    ReportFormat out_format = ReportFormat::Json;

    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::size_t max_3d_nodes = default_max_3d_nodes;
};

namespace detail {

class SchemaCheck
{
public:
    std::vector<std::string> errors;

    void fail(std::string const& path, std::string const& msg) { errors.push_back(path + ": " + msg); }

    bool object(nlohmann::json const& j, std::string const& path, std::set<std::string> const& allowed)
    {
        if (!j.is_object()) {
            fail(path, "expected object");
            return false;
        }
        for (auto const& [k, v] : j.items())
            if (!allowed.count(k))
                fail(path + "." + k, "unknown key");
        return true;
    }

    nlohmann::json const* field(nlohmann::json const& j, std::string const& key, std::string const& path,
                                bool required)
    {
        if (!j.is_object())
            return nullptr;
        auto it = j.find(key);
        if (it == j.end()) {
            if (required)
                fail(path + "." + key, "required");
            return nullptr;
        }
        return &*it;
    }

    std::optional<std::uint64_t> uint(nlohmann::json const* j, std::string const& path)
    {
        if (!j)
            return std::nullopt;
        if (j->is_number_unsigned())
            return j->get<std::uint64_t>();
        if (j->is_number_integer() && j->get<std::int64_t>() >= 0)
            return static_cast<std::uint64_t>(j->get<std::int64_t>());
        fail(path, "expected nonnegative integer");
        return std::nullopt;
    }

    std::optional<double> number(nlohmann::json const* j, std::string const& path)
    {
        if (!j)
            return std::nullopt;
        if (!j->is_number()) {
            fail(path, "expected number");
            return std::nullopt;
        }
        return j->get<double>();
    }

    std::optional<bool> boolean(nlohmann::json const* j, std::string const& path)
    {
        if (!j)
            return std::nullopt;
        if (!j->is_boolean()) {
            fail(path, "expected boolean");
            return std::nullopt;
        }
        return j->get<bool>();
    }

    std::optional<std::string> string(nlohmann::json const* j, std::string const& path,
                                      std::vector<std::string> const& choices = {})
    {
        if (!j)
            return std::nullopt;
        if (!j->is_string()) {
            fail(path, "expected string");
            return std::nullopt;
        }
        auto s = j->get<std::string>();
        if (!choices.empty() && std::find(choices.begin(), choices.end(), s) == choices.end()) {
            std::string list;
            for (auto const& c : choices)
                list += (list.empty() ? "" : ", ") + c;
            fail(path, "expected one of {" + list + "}, got \"" + s + "\"");
            return std::nullopt;
        }
        return s;
    }

    std::vector<double> numbers(nlohmann::json const& j, std::string const& path)
    {
        std::vector<double> out;
        if (!j.is_array()) {
            fail(path, "expected array of numbers");
            return out;
        }
        for (std::size_t i = 0; i < j.size(); ++i) {
            auto v = number(&j[i], path + "[" + std::to_string(i) + "]");
            if (v)
                out.push_back(*v);
        }
        return out;
    }
};

} // namespace detail

/// Validate a parsed document. base_dir resolves relative dataset paths.
inline ExperimentConfig config_from_json(nlohmann::json const& doc,
                                         std::filesystem::path const& base_dir = {})
{
    detail::SchemaCheck sc;
    ExperimentConfig cfg;
    std::string const root = "$";
    sc.object(doc, root,
              {"architecture", "activation", "loss", "dataset", "slice", "thresholds", "homology",
               "bound", "output", "seed", "threads"});
    if (!doc.is_object())
        throw ConfigError(sc.errors.front());

    if (auto s = sc.uint(sc.field(doc, "seed", root, false), "$.seed"))
        cfg.seed = *s;
    if (auto t = sc.uint(sc.field(doc, "threads", root, false), "$.threads")) {
        if (*t == 0 || *t > 1024)
            sc.fail("$.threads", "expected 1..1024");
        else
            cfg.threads = static_cast<unsigned>(*t);
    }

    if (auto a = sc.string(sc.field(doc, "activation", root, true), "$.activation")) {
        if (auto spec = find_activation(*a))
            cfg.hidden = *spec;
        else
            sc.fail("$.activation", "unknown activation \"" + *a + "\"");
    }

    if (auto const* a = sc.field(doc, "architecture", root, true);
        a && sc.object(*a, "$.architecture", {"n0", "hidden", "last", "skip_connections"})) {
        if (auto n0 = sc.uint(sc.field(*a, "n0", "$.architecture", true), "$.architecture.n0")) {
            if (*n0 == 0)
                sc.fail("$.architecture.n0", "must be positive");
            cfg.arch.n0 = *n0;
        }
        if (auto const* h = sc.field(*a, "hidden", "$.architecture", true)) {
            if (!h->is_array()) {
                sc.fail("$.architecture.hidden", "expected array of widths");
            } else if (h->empty()) {
                sc.fail("$.architecture.hidden", "need at least one hidden layer (L >= 2)");
            } else {
                for (std::size_t i = 0; i < h->size(); ++i) {
                    std::string const p = "$.architecture.hidden[" + std::to_string(i) + "]";
                    if (auto w = sc.uint(&(*h)[i], p)) {
                        if (*w == 0)
                            sc.fail(p, "must be positive");
                        cfg.arch.hidden_widths.push_back(*w);
                    }
                }
            }
        }
        if (auto last = sc.string(sc.field(*a, "last", "$.architecture", false), "$.architecture.last",
                                  {"linear", "tanh", "logsig", "sigmoid"})) {
            if (*last != "linear")
                cfg.arch.last_layer = activation_by_name(*last);
        }
        if (auto s = sc.boolean(sc.field(*a, "skip_connections", "$.architecture", false),
                                "$.architecture.skip_connections"))
            cfg.arch.skip_connections = *s;
    }

    if (auto const* l = sc.field(doc, "loss", root, true);
        l && sc.object(*l, "$.loss", {"kind", "l2_lambda"})) {
        if (auto k = sc.string(sc.field(*l, "kind", "$.loss", true), "$.loss.kind", {"mse", "bce"}))
            cfg.loss.kind = *k == "mse" ? LossKind::MSE : LossKind::BCE;
        if (auto lam = sc.number(sc.field(*l, "l2_lambda", "$.loss", false), "$.loss.l2_lambda")) {
            if (!(*lam >= 0.0) || !std::isfinite(*lam))
                sc.fail("$.loss.l2_lambda", "must be finite and >= 0");
            cfg.loss.l2_lambda = *lam;
        }
    }

    nlohmann::json const* dataset = sc.field(doc, "dataset", root, true);
    if (dataset && sc.object(*dataset, "$.dataset", {"inline", "path"})) {
        bool const has_inline = dataset->contains("inline");
        bool const has_path = dataset->contains("path");
        if (has_inline == has_path)
            sc.fail("$.dataset", "exactly one of \"inline\" or \"path\" required");
    }

    if (auto const* s = sc.field(doc, "slice", root, true);
        s && sc.object(*s, "$.slice", {"axes", "base_point", "frozen_as_constants"})) {
        if (auto const* axes = sc.field(*s, "axes", "$.slice", true)) {
            if (!axes->is_array() || axes->size() < 2 || axes->size() > 3) {
                sc.fail("$.slice.axes", "expected array of 2 or 3 axes");
            } else {
                for (std::size_t i = 0; i < axes->size(); ++i) {
                    std::string const p = "$.slice.axes[" + std::to_string(i) + "]";
                    auto const& ax = (*axes)[i];
                    if (!sc.object(ax, p, {"index", "min", "max", "count"}))
                        continue;
                    auto idx = sc.uint(sc.field(ax, "index", p, true), p + ".index");
                    auto lo = sc.number(sc.field(ax, "min", p, true), p + ".min");
                    auto hi = sc.number(sc.field(ax, "max", p, true), p + ".max");
                    auto cnt = sc.uint(sc.field(ax, "count", p, true), p + ".count");
                    if (idx && lo && hi && cnt)
                        cfg.axes.push_back({*idx, *lo, *hi, *cnt});
                }
            }
        }
        if (auto const* bp = sc.field(*s, "base_point", "$.slice", false)) {
            if (bp->is_string()) {
                if (auto k = sc.string(bp, "$.slice.base_point", {"random", "zero"}))
                    cfg.base_kind = *k == "random" ? BasePointKind::Random : BasePointKind::Zero;
            } else {
                cfg.base_kind = BasePointKind::Explicit;
                cfg.base_point = sc.numbers(*bp, "$.slice.base_point");
            }
        }
        if (auto f = sc.boolean(sc.field(*s, "frozen_as_constants", "$.slice", false),
                                "$.slice.frozen_as_constants"))
            cfg.frozen_as_constants = *f;
    }

    if (auto const* t = sc.field(doc, "thresholds", root, false);
        t && sc.object(*t, "$.thresholds", {"quantiles", "extra"})) {
        if (auto q = sc.uint(sc.field(*t, "quantiles", "$.thresholds", false), "$.thresholds.quantiles"))
            cfg.quantiles = *q;
        if (auto const* e = sc.field(*t, "extra", "$.thresholds", false))
            cfg.extra_thresholds = sc.numbers(*e, "$.thresholds.extra");
        if (cfg.quantiles == 0 && cfg.extra_thresholds.empty())
            sc.fail("$.thresholds", "no thresholds: quantiles is 0 and extra is empty");
    }

    if (auto h = sc.string(sc.field(doc, "homology", root, false), "$.homology", {"auto", "gf2", "fast2d"}))
        cfg.homology = *h == "auto" ? HomologyChoice::Auto
                       : *h == "gf2" ? HomologyChoice::Gf2
                                     : HomologyChoice::Fast2d;

    if (auto const* b = sc.field(doc, "bound", root, false);
        b && sc.object(*b, "$.bound", {"exact_bit_cap", "mode"})) {
        if (auto cap = sc.uint(sc.field(*b, "exact_bit_cap", "$.bound", false), "$.bound.exact_bit_cap"))
            cfg.exact_bit_cap = *cap;
        if (auto m = sc.string(sc.field(*b, "mode", "$.bound", false), "$.bound.mode", {"theorem", "corollary"}))
            cfg.mode = *m == "theorem" ? FormatMode::Theorem : FormatMode::Corollary;
    }

    if (auto const* o = sc.field(doc, "output", root, false);
        o && sc.object(*o, "$.output", {"dir", "format"})) {
        if (auto d = sc.string(sc.field(*o, "dir", "$.output", false), "$.output.dir"))
            cfg.out_dir = *d;
        if (auto f = sc.string(sc.field(*o, "format", "$.output", false), "$.output.format", {"json", "csv"}))
            cfg.out_format = *f == "json" ? ReportFormat::Json : ReportFormat::Csv;
    }

    if (cfg.base_kind == BasePointKind::Random && !cfg.seed)
        sc.fail("$.seed", "required when slice.base_point is \"random\" (the default)");

    // Structural checks that need the pieces above.
    if (sc.errors.empty()) {
        if (cfg.arch.skip_connections) {
            for (std::size_t l = 2; l < cfg.arch.layers(); ++l)
                if (cfg.arch.width(l) != cfg.arch.width(l - 1))
                    sc.fail("$.architecture.skip_connections",
                            "hidden widths must match for skip connections");
        }
        if (cfg.loss.kind == LossKind::BCE && !cfg.arch.last_layer)
            sc.fail("$.architecture.last", "bce needs an activated output layer");
        std::size_t const n_params = static_cast<std::size_t>(total_params(cfg.arch));
        if (cfg.base_kind == BasePointKind::Explicit && cfg.base_point.size() != n_params)
            sc.fail("$.slice.base_point", "expected " + std::to_string(n_params) + " values, got " +
                                              std::to_string(cfg.base_point.size()));
        std::set<std::size_t> seen;
        std::size_t nodes = 1;
        for (std::size_t i = 0; i < cfg.axes.size(); ++i) {
            auto const& a = cfg.axes[i];
            std::string const p = "$.slice.axes[" + std::to_string(i) + "]";
            if (a.index >= n_params)
                sc.fail(p + ".index", "out of range for " + std::to_string(n_params) + " parameters");
            if (!seen.insert(a.index).second)
                sc.fail(p + ".index", "parameter varied twice");
            if (a.count < 2)
                sc.fail(p + ".count", "must be >= 2");
            if (!(std::isfinite(a.min) && std::isfinite(a.max) && a.min < a.max))
                sc.fail(p, "need finite min < max");
            nodes *= std::max<std::size_t>(a.count, 1);
        }
        if (cfg.axes.size() == 3 && nodes > cfg.max_3d_nodes)
            sc.fail("$.slice.axes", "3-axis grid has " + std::to_string(nodes) + " nodes, cap is " +
                                        std::to_string(cfg.max_3d_nodes));
        if (cfg.homology == HomologyChoice::Fast2d && cfg.axes.size() != 2)
            sc.fail("$.homology", "fast2d needs a 2-axis slice");
    }

    if (sc.errors.empty() && dataset) {
        try {
            if (dataset->contains("inline")) {
                auto const& rows = dataset->at("inline");
                if (!rows.is_array() || rows.empty())
                    sc.fail("$.dataset.inline", "expected non-empty array of rows");
                else
                    for (std::size_t i = 0; i < rows.size(); ++i) {
                        std::string const p = "$.dataset.inline[" + std::to_string(i) + "]";
                        auto row = sc.numbers(rows[i], p);
                        if (row.size() != cfg.arch.n0 + 1) {
                            sc.fail(p, "expected " + std::to_string(cfg.arch.n0 + 1) + " numbers");
                            continue;
                        }
                        Sample smp;
                        smp.x.assign(row.begin(), row.end() - 1);
                        smp.y = row.back();
                        cfg.data.push_back(std::move(smp));
                    }
            } else if (auto path = sc.string(&dataset->at("path"), "$.dataset.path")) {
                std::filesystem::path p(*path);
                if (p.is_relative() && !base_dir.empty())
                    p = base_dir / p;
                cfg.dataset_source = *path;
                cfg.data = read_dataset_file(p.string(), cfg.arch.n0);
            }
        } catch (ConfigError const& e) {
            sc.fail("$.dataset", e.what());
        }
        if (cfg.loss.kind == LossKind::BCE)
            for (std::size_t i = 0; i < cfg.data.size(); ++i)
                if (cfg.data[i].y != 0.0 && cfg.data[i].y != 1.0) {
                    sc.fail("$.dataset", "bce target of sample " + std::to_string(i) + " is not 0 or 1");
                    break;
                }
    }

    if (!sc.errors.empty()) {
        std::string msg = "invalid config:";
        for (auto const& e : sc.errors)
            msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

inline ExperimentConfig parse_config_text(std::string const& text, std::filesystem::path const& base_dir = {})
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (nlohmann::json::parse_error const& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    return config_from_json(doc, base_dir);
}

inline ExperimentConfig parse_config(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.parent_path());
}

inline Network network_of(ExperimentConfig const& cfg) { return Network{cfg.arch, cfg.hidden}; }

/// Full parameter vector holding the frozen coordinates.
inline std::vector<double> base_point_of(ExperimentConfig const& cfg)
{
    std::size_t const n = static_cast<std::size_t>(total_params(cfg.arch));
    switch (cfg.base_kind) {
    case BasePointKind::Random: return random_base_point(n, *cfg.seed);
    case BasePointKind::Zero: return std::vector<double>(n, 0.0);
    default: return cfg.base_point;
    }
}

inline std::string to_string(BasePointKind k)
{
    return k == BasePointKind::Random ? "random" : k == BasePointKind::Zero ? "zero" : "explicit";
}

} // namespace pfl

// pfl: formats, bounds, slice landscapes and sublevel Betti numbers.
//
// Exit codes: 0 ok / all verdicts hold, 1 a verdict failed, 2 usage or
// config error, 3 runtime error.

#include <pfl/bound.hpp>
#include <pfl/config.hpp>
#include <pfl/cubical.hpp>
#include <pfl/format_calculus.hpp>
#include <pfl/homology.hpp>
#include <pfl/landscape.hpp>
#include <pfl/report.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace pfl;

namespace {

enum Exit { Ok = 0, VerdictFailed = 1, UsageError = 2, RuntimeError = 3 };

struct Common
{
    std::string config;
    std::string out;
    std::string format = "json";
    std::uint64_t exact_bit_cap = default_exact_bit_cap;
    std::string mode = "theorem";
};

struct ArchFlags
{
    std::size_t n0 = 1;
    std::vector<std::size_t> hidden{1};
    std::string activation = "tanh";
    std::string last = "linear";
    std::string loss = "mse";
    std::uint64_t m = 1;
    double l2 = 0.0;
    bool skip = false;
};

void add_arch_flags(CLI::App* cmd, ArchFlags& a)
{
    cmd->add_option("--n0", a.n0, "input width")->check(CLI::PositiveNumber);
    cmd->add_option("--hidden", a.hidden, "hidden widths, comma separated")->delimiter(',');
    cmd->add_option("--activation", a.activation, "hidden activation")
        ->check(CLI::IsMember({"tanh", "logsig", "sigmoid", "arctan"}));
    cmd->add_option("--last", a.last, "output layer")->check(CLI::IsMember({"linear", "tanh", "logsig", "sigmoid"}));
    cmd->add_option("--loss", a.loss, "loss")->check(CLI::IsMember({"mse", "bce"}));
    cmd->add_option("-m,--samples", a.m, "training set size")->check(CLI::PositiveNumber);
    cmd->add_option("--l2", a.l2, "l2 coefficient")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--skip", a.skip, "skip connections between hidden layers");
}

FormatMode parse_mode(std::string const& s) { return s == "corollary" ? FormatMode::Corollary : FormatMode::Theorem; }

/// Architecture, activation, loss, m: from --config when given, else flags.
struct Problem
{
    Architecture arch;
    ActivationSpec sigma;
    LossSpec loss;
    std::uint64_t m = 1;
};

Problem problem_from(Common const& c, ArchFlags const& a)
{
    if (!c.config.empty()) {
        auto const cfg = parse_config(c.config);
        return {cfg.arch, cfg.hidden, cfg.loss, cfg.data.size()};
    }
    Problem p;
    p.arch.n0 = a.n0;
    p.arch.hidden_widths = a.hidden;
    if (a.last != "linear")
        p.arch.last_layer = activation_by_name(a.last);
    p.arch.skip_connections = a.skip;
    p.arch.validate();
    p.sigma = activation_by_name(a.activation);
    p.loss = {a.loss == "mse" ? LossKind::MSE : LossKind::BCE, a.l2};
    p.m = a.m;
    return p;
}

void write_output(Common const& c, std::string const& filename, std::string const& content)
{
    if (c.out.empty()) {
        std::cout << content;
        return;
    }
    fs::create_directories(c.out);
    auto const path = fs::path(c.out) / filename;
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << content))
        throw ComputeError("cannot write " + path.string());
    std::cerr << "wrote " << path.string() << "\n";
}

nlohmann::ordered_json formats_json(Problem const& p)
{
    nlohmann::ordered_json j;
    j["theorem"] = detail::format_json(
        with_transforms(*mode_format(p.arch, p.sigma, p.loss.kind, p.m, FormatMode::Theorem), p.arch, p.loss));
    auto cor = mode_format(p.arch, p.sigma, p.loss.kind, p.m, FormatMode::Corollary);
    j["corollary"] = cor ? detail::format_json(with_transforms(*cor, p.arch, p.loss)) : nlohmann::ordered_json(nullptr);
    j["n_tilde"] = total_params(p.arch);
    j["samples"] = p.m;
    return j;
}

PfaffianFormat chosen_format(Problem const& p, FormatMode mode)
{
    auto f = mode_format(p.arch, p.sigma, p.loss.kind, p.m, mode);
    if (!f)
        throw ConfigError("corollary mode needs uniform width, tanh/logsig hidden activation and a "
                          "supported (loss, last layer) pair");
    return with_transforms(*f, p.arch, p.loss);
}

/// "a:b" (inclusive), "a:b:step", or "a,b,c".
std::vector<std::uint64_t> parse_range(std::string const& s, char const* what)
{
    std::vector<std::uint64_t> out;
    auto num = [&](std::string const& t) {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(t, &pos);
        } catch (std::exception const&) {
            pos = 0;
        }
        if (pos != t.size() || t.empty() || t[0] == '-')
            throw ConfigError(std::string(what) + ": bad number \"" + t + "\"");
        return static_cast<std::uint64_t>(v);
    };
    if (s.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(s);
        for (std::string t; std::getline(ss, t, ':');)
            parts.push_back(t);
        if (parts.size() < 2 || parts.size() > 3)
            throw ConfigError(std::string(what) + ": expected a:b or a:b:step");
        auto const lo = num(parts[0]), hi = num(parts[1]);
        auto const step = parts.size() == 3 ? num(parts[2]) : 1;
        if (step == 0 || lo > hi)
            throw ConfigError(std::string(what) + ": empty range");
        for (auto v = lo; v <= hi; v += step)
            out.push_back(v);
    } else {
        std::stringstream ss(s);
        for (std::string t; std::getline(ss, t, ',');)
            out.push_back(num(t));
    }
    if (out.empty())
        throw ConfigError(std::string(what) + ": empty");
    return out;
}

int run_format(Common const& c, ArchFlags const& a)
{
    write_output(c, "format.json", formats_json(problem_from(c, a)).dump(2) + "\n");
    return Ok;
}

struct ExplicitFormat
{
    std::optional<std::uint64_t> alpha, beta, ell, n;
};

int run_bound(Common const& c, ArchFlags const& a, ExplicitFormat const& e)
{
    PfaffianFormat f;
    std::uint64_t n = 0;
    if (e.alpha || e.beta || e.ell || e.n) {
        if (!(e.alpha && e.beta && e.ell && e.n))
            throw ConfigError("--alpha, --beta, --ell and --n go together");
        f = {*e.alpha, *e.beta, *e.ell};
        n = *e.n;
    } else {
        auto const p = problem_from(c, a);
        f = chosen_format(p, parse_mode(c.mode));
        n = total_params(p.arch);
    }
    auto const b = zell_bound(f, n, c.exact_bit_cap);
    nlohmann::ordered_json j;
    j["format"] = detail::format_json(f);
    j["n_tilde"] = n;
    j["bound"] = bound_json(b);
    write_output(c, "bound.json", j.dump(2) + "\n");
    return Ok;
}

int run_landscape(Common const& c)
{
    if (c.config.empty())
        throw ConfigError("landscape: --config is required");
    auto const cfg = parse_config(c.config);
    auto const net = network_of(cfg);
    auto const field = sample_field(net, cfg.data, cfg.loss, ParameterSlice{cfg.axes, base_point_of(cfg)}, cfg.threads);
    std::ostringstream os;
    write_field(os, field);
    write_output(c, "field.txt", os.str());
    return Ok;
}

struct BettiFlags
{
    std::string field;
    std::size_t quantiles = 16;
    std::vector<double> thresholds;
    std::string method = "auto";
    unsigned threads = 1;
};

int run_betti(Common const& c, BettiFlags const& b)
{
    std::ifstream in(b.field);
    if (!in)
        throw ConfigError("cannot open field file " + b.field);
    auto const field = read_field(in);
    auto th = b.thresholds;
    std::sort(th.begin(), th.end());
    if (b.quantiles > 0 || th.empty())
        th = default_thresholds(field, b.quantiles, th);
    HomologyMethod method = HomologyMethod::Gf2;
    if (b.method == "fast2d" || (b.method == "auto" && field.slice.dimension() == 2))
        method = HomologyMethod::Fast2d;
    auto const res = sweep_betti(field, th, method, b.threads);
    if (c.format == "csv") {
        std::string out = "c,b0,b1,b2,chi,cells_0,cells_1,cells_2,cells_3\n";
        for (auto const& t : res) {
            out += detail::fmt(t.threshold);
            for (std::size_t k = 0; k < 3; ++k)
                out += "," + std::to_string(t.betti.at(k));
            out += "," + std::to_string(t.betti.euler);
            for (std::size_t k = 0; k < 4; ++k)
                out += "," + std::to_string(k < t.cell_counts.size() ? t.cell_counts[k] : 0);
            out += "\n";
        }
        write_output(c, "betti.csv", out);
    } else {
        auto j = nlohmann::ordered_json::array();
        for (auto const& t : res)
            j.push_back({{"c", t.threshold},
                         {"b", t.betti.b},
                         {"chi", t.betti.euler},
                         {"empty", t.betti.empty},
                         {"cell_counts", t.cell_counts}});
        write_output(c, "betti.json", j.dump(2) + "\n");
    }
    return Ok;
}

int run_verify(Common const& c, CLI::App const& cmd)
{
    if (c.config.empty())
        throw ConfigError("verify: --config is required");
    auto cfg = parse_config(c.config);
    if (cmd.count("--exact-bit-cap"))
        cfg.exact_bit_cap = c.exact_bit_cap;
    if (cmd.count("--mode"))
        cfg.mode = parse_mode(c.mode);
    if (cmd.count("--format"))
        cfg.out_format = c.format == "csv" ? ReportFormat::Csv : ReportFormat::Json;
    auto const report = pfl::run_verify(cfg);
    std::string out_dir = c.out;
    if (out_dir.empty() && cfg.out_dir)
        out_dir = (fs::path(c.config).parent_path() / *cfg.out_dir).string();
    if (out_dir.empty())
        std::cout << render_report(report, cfg.out_format);
    else
        std::cerr << "wrote " << emit_report(report, cfg.out_format, out_dir).string() << "\n";
    return report.overall() == Verdict::Fails ? VerdictFailed : Ok;
}

struct SweepFlags
{
    std::string loss = "mse";
    std::string last = "linear";
    std::string activation = "tanh";
    std::string n0 = "1";
    std::string h = "1:4";
    std::string L = "2:5";
    std::string m = "1:10";
};

int run_sweep(Common const& c, SweepFlags const& s)
{
    auto const n0s = parse_range(s.n0, "--n0");
    auto const hs = parse_range(s.h, "--width");
    auto const Ls = parse_range(s.L, "--L");
    auto const ms = parse_range(s.m, "--m");
    auto const sigma = activation_by_name(s.activation);
    std::optional<ActivationSpec> last;
    if (s.last != "linear")
        last = activation_by_name(s.last);
    LossSpec const loss{s.loss == "mse" ? LossKind::MSE : LossKind::BCE, 0.0};
    auto const mode = parse_mode(c.mode);
    std::string out = "loss,last,n0,h,L,m,n_tilde,alpha,beta,ell,log2_bound\n";
    for (auto n0 : n0s)
        for (auto L : Ls)
            for (auto h : hs)
                for (auto m : ms) {
                    if (L < 2)
                        throw ConfigError("--L: need L >= 2");
                    Problem const p{uniform_architecture(n0, h, L, last), sigma, loss, m};
                    auto const f = chosen_format(p, mode);
                    auto const n = total_params(p.arch);
                    auto const b = zell_bound(f, n, 0);
                    out += to_string(loss.kind) + "," + s.last + "," + std::to_string(n0) + "," +
                           std::to_string(h) + "," + std::to_string(L) + "," + std::to_string(m) + "," +
                           std::to_string(n) + "," + std::to_string(f.alpha) + "," + std::to_string(f.beta) +
                           "," + std::to_string(f.ell) + "," + detail::fmt(b.log2_value) + "\n";
                }
    write_output(c, "sweep.csv", out);
    return Ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Pfaffian format and Betti-number bound toolkit"};
    app.set_version_flag("--version", std::string(pfl::version));
    app.require_subcommand(1);

    Common common;
    ArchFlags arch;
    ExplicitFormat explicit_fmt;
    BettiFlags betti;
    SweepFlags sweep;

    auto add_common = [&](CLI::App* cmd, bool config, bool mode) {
        if (config)
            cmd->add_option("--config", common.config, "experiment config (JSON)")->check(CLI::ExistingFile);
        cmd->add_option("--out", common.out, "output directory (stdout when omitted)");
        cmd->add_option("--format", common.format, "output format")->check(CLI::IsMember({"json", "csv"}));
        cmd->add_option("--exact-bit-cap", common.exact_bit_cap, "largest exact bound materialized, in bits");
        if (mode)
            cmd->add_option("--mode", common.mode, "format source")->check(CLI::IsMember({"theorem", "corollary"}));
    };

    auto* format_cmd = app.add_subcommand("format", "Pfaffian format of the loss (theorem and corollary modes)");
    add_common(format_cmd, true, false);
    add_arch_flags(format_cmd, arch);

    auto* bound_cmd = app.add_subcommand("bound", "Betti-number bound for an architecture or explicit format");
    add_common(bound_cmd, true, true);
    add_arch_flags(bound_cmd, arch);
    bound_cmd->add_option("--alpha", explicit_fmt.alpha);
    bound_cmd->add_option("--beta", explicit_fmt.beta);
    bound_cmd->add_option("--ell", explicit_fmt.ell);
    bound_cmd->add_option("--n", explicit_fmt.n, "parameter count");

    auto* landscape_cmd = app.add_subcommand("landscape", "sample the loss on the configured slice");
    add_common(landscape_cmd, true, false);

    auto* betti_cmd = app.add_subcommand("betti", "sublevel Betti numbers of a field file");
    add_common(betti_cmd, false, false);
    betti_cmd->add_option("--field", betti.field, "field file")->required()->check(CLI::ExistingFile);
    betti_cmd->add_option("--quantiles", betti.quantiles, "quantile thresholds");
    betti_cmd->add_option("--thresholds", betti.thresholds, "extra thresholds")->delimiter(',');
    betti_cmd->add_option("--method", betti.method)->check(CLI::IsMember({"auto", "gf2", "fast2d"}));
    betti_cmd->add_option("--threads", betti.threads)->check(CLI::Range(1u, 1024u));

    auto* verify_cmd = app.add_subcommand("verify", "full pipeline with verdicts");
    add_common(verify_cmd, true, true);

    auto* sweep_cmd = app.add_subcommand("sweep", "CSV of log2 bounds over a parameter grid");
    add_common(sweep_cmd, false, true);
    sweep_cmd->add_option("--loss", sweep.loss)->check(CLI::IsMember({"mse", "bce"}));
    sweep_cmd->add_option("--last", sweep.last)->check(CLI::IsMember({"linear", "tanh", "logsig", "sigmoid"}));
    sweep_cmd->add_option("--activation", sweep.activation)->check(CLI::IsMember({"tanh", "logsig", "sigmoid", "arctan"}));
    sweep_cmd->add_option("--n0", sweep.n0, "a:b, a:b:step or a,b,c");
    sweep_cmd->add_option("--width", sweep.h, "hidden width range");
    sweep_cmd->add_option("--L", sweep.L);
    sweep_cmd->add_option("--m", sweep.m);

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        int const code = app.exit(e);
        return code == 0 ? Ok : UsageError;
    }

    try {
        if (*format_cmd)
            return run_format(common, arch);
        if (*bound_cmd)
            return run_bound(common, arch, explicit_fmt);
        if (*landscape_cmd)
            return run_landscape(common);
        if (*betti_cmd)
            return run_betti(common, betti);
        if (*verify_cmd)
            return run_verify(common, *verify_cmd);
        if (*sweep_cmd)
            return run_sweep(common, sweep);
    } catch (ConfigError const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return UsageError;
    } catch (std::invalid_argument const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return UsageError;
    } catch (std::exception const& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return RuntimeError;
    }
    return UsageError;
}

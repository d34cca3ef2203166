#include <pfl/config.hpp>
#include <pfl/report.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace pfl;
namespace fs = std::filesystem;

namespace {

fs::path const data_dir{PFL_TEST_DATA_DIR};

nlohmann::json load(std::string const& name)
{
    std::ifstream in(data_dir / name);
    return nlohmann::json::parse(in);
}

std::string read_file(fs::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Config error message, or "" when the document is accepted.
std::string config_error(nlohmann::json const& doc)
{
    try {
        config_from_json(doc, data_dir);
        return "";
    } catch (ConfigError const& e) {
        return e.what();
    }
}

fs::path scratch(std::string const& name)
{
    auto p = fs::temp_directory_path() / ("pfl_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(std::string const& args)
{
    std::string const cmd = std::string(PFL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int const status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Config, MinimalGetsDefaults)
{
    auto const cfg = parse_config(data_dir / "minimal.json");
    EXPECT_EQ(cfg.arch.n0, 2u);
    EXPECT_EQ(cfg.arch.hidden_widths, (std::vector<std::size_t>{3, 3}));
    EXPECT_FALSE(cfg.arch.last_layer);
    EXPECT_FALSE(cfg.arch.skip_connections);
    EXPECT_EQ(cfg.hidden.name, "logsig");
    EXPECT_EQ(cfg.loss.l2_lambda, 0.0);
    EXPECT_EQ(cfg.base_kind, BasePointKind::Random);
    EXPECT_FALSE(cfg.frozen_as_constants);
    EXPECT_EQ(cfg.quantiles, 16u);
    EXPECT_TRUE(cfg.extra_thresholds.empty());
    EXPECT_EQ(cfg.homology, HomologyChoice::Auto);
    EXPECT_EQ(cfg.exact_bit_cap, default_exact_bit_cap);
    EXPECT_EQ(cfg.mode, FormatMode::Theorem);
    EXPECT_EQ(cfg.out_format, ReportFormat::Json);
    EXPECT_EQ(cfg.threads, 1u);
    // CSV with a header line, resolved relative to the config.
    ASSERT_EQ(cfg.data.size(), 4u);
    EXPECT_EQ(cfg.data[1].x, (std::vector<double>{0.0, 1.0}));
    EXPECT_EQ(cfg.data[1].y, 1.0);
}

TEST(Config, RandomBasePointNeedsSeed)
{
    auto doc = load("desk.json");
    doc.erase("seed");
    EXPECT_NE(config_error(doc).find("$.seed"), std::string::npos);
    doc["slice"]["base_point"] = "zero";
    EXPECT_EQ(config_error(doc), "");
    doc["slice"]["base_point"] = {0.1, 0.2, 0.3, 0.4};
    EXPECT_EQ(config_error(doc), "");
    doc["slice"]["base_point"] = {0.1, 0.2};
    EXPECT_NE(config_error(doc).find("$.slice.base_point: expected 4 values"), std::string::npos);
}

TEST(Config, SingleLayerRejected)
{
    auto doc = load("desk.json");
    doc["architecture"]["hidden"] = nlohmann::json::array();
    EXPECT_NE(config_error(doc).find("L >= 2"), std::string::npos);
}

TEST(Config, SchemaErrorsCarryFieldPaths)
{
    auto doc = load("desk.json");
    doc["extra_key"] = 1;
    doc["slice"]["axes"][0]["count"] = "many";
    doc["slice"]["axes"][1]["index"] = 99;
    doc["loss"]["kind"] = "hinge";
    doc["architecture"]["widht"] = 3;
    auto const msg = config_error(doc);
    EXPECT_NE(msg.find("$.extra_key: unknown key"), std::string::npos) << msg;
    EXPECT_NE(msg.find("$.slice.axes[0].count: expected nonnegative integer"), std::string::npos) << msg;
    EXPECT_NE(msg.find("$.loss.kind: expected one of"), std::string::npos) << msg;
    EXPECT_NE(msg.find("$.architecture.widht: unknown key"), std::string::npos) << msg;

    auto doc2 = load("desk.json");
    doc2["slice"]["axes"][1]["index"] = 99;
    EXPECT_NE(config_error(doc2).find("$.slice.axes[1].index: out of range"), std::string::npos);
    doc2["slice"]["axes"][1]["index"] = 1;
    EXPECT_NE(config_error(doc2).find("varied twice"), std::string::npos);
}

TEST(Config, StructuralRules)
{
    auto doc = load("desk.json");
    doc["loss"]["kind"] = "bce";
    EXPECT_NE(config_error(doc).find("$.architecture.last"), std::string::npos);
    doc["architecture"]["last"] = "logsig";
    EXPECT_NE(config_error(doc).find("not 0 or 1"), std::string::npos);

    auto skip = load("desk.json");
    skip["architecture"]["hidden"] = {2, 3};
    skip["architecture"]["skip_connections"] = true;
    EXPECT_NE(config_error(skip).find("widths must match"), std::string::npos);

    auto both = load("desk.json");
    both["dataset"]["path"] = "xor.csv";
    EXPECT_NE(config_error(both).find("exactly one"), std::string::npos);

    auto big = load("bce3d.json");
    for (auto& a : big["slice"]["axes"])
        a["count"] = 65;
    EXPECT_NE(config_error(big).find("cap is 262144"), std::string::npos);

    EXPECT_THROW(parse_config_text("{ not json"), ConfigError);
    EXPECT_THROW(parse_config(data_dir / "does_not_exist.json"), ConfigError);
}

TEST(Config, DatasetFiles)
{
    std::stringstream ok("# not numbers\n1,2\n\n3,4\n");
    auto const d = read_dataset(ok, 1);
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d[1].x[0], 3.0);
    std::stringstream bad_cols("1,2,3\n");
    EXPECT_THROW(read_dataset(bad_cols, 1), ConfigError);
    std::stringstream bad_row("1,2\nx,4\n");
    EXPECT_THROW(read_dataset(bad_row, 1), ConfigError);
    std::stringstream empty("a,b\n");
    EXPECT_THROW(read_dataset(empty, 1), ConfigError);
}

TEST(Verify, DeskRunHoldsAndIsDirect)
{
    auto const r = run_verify(parse_config(data_dir / "desk.json"));
    EXPECT_EQ(r.scope(), "direct");
    EXPECT_EQ(r.n_tilde, 2u);
    EXPECT_EQ(r.n_params_total, 4u);
    EXPECT_EQ(r.samples, 3u);
    EXPECT_EQ(r.theorem_format, (PfaffianFormat{2, 4, 3}));
    ASSERT_TRUE(r.corollary_format);
    EXPECT_EQ(*r.corollary_format, (PfaffianFormat{0, 4, 3}));
    EXPECT_EQ(r.betti.size(), 16u);
    for (auto const& c : r.inequality)
        EXPECT_EQ(c.verdict, Verdict::Holds);
    EXPECT_EQ(r.l2_invariance.verdict, Verdict::Holds);
    EXPECT_EQ(r.skip_invariance.verdict, Verdict::NotApplicable);
    EXPECT_EQ(r.overall(), Verdict::Holds);
}

TEST(Verify, SectionalScopeUsesFullParameterCount)
{
    auto const r = run_verify(parse_config(data_dir / "minimal.json"));
    EXPECT_EQ(r.scope(), "sectional");
    EXPECT_EQ(r.n_tilde, 25u);
    EXPECT_EQ(r.n_tilde, r.n_params_total);
}

TEST(Verify, BoundMatchesIndependentRecomputation)
{
    for (auto const* name : {"desk.json", "minimal.json", "bce3d.json"}) {
        auto const r = run_verify(parse_config(data_dir / name));
        auto const j = nlohmann::json::parse(report_json(r).dump());
        PfaffianFormat const used{j["format"]["used"]["alpha"].get<std::uint64_t>(),
                                  j["format"]["used"]["beta"].get<std::uint64_t>(),
                                  j["format"]["used"]["ell"].get<std::uint64_t>()};
        auto const again = zell_bound(used, j["n_tilde"].get<std::uint64_t>());
        ASSERT_TRUE(again.exact) << name;
        EXPECT_EQ(j["bound"]["exact"].get<std::string>(), again.exact->get_str()) << name;
        EXPECT_EQ(j["bound"]["log2"].get<double>(), again.log2_value) << name;
    }
}

TEST(Verify, DeterministicAcrossRunsAndThreads)
{
    auto cfg = parse_config(data_dir / "desk.json");
    auto const a = run_verify(cfg);
    auto const b = run_verify(cfg);
    cfg.threads = 3;
    auto const c = run_verify(cfg);
    for (auto f : {ReportFormat::Json, ReportFormat::Csv}) {
        EXPECT_EQ(render_report(a, f), render_report(b, f));
        EXPECT_EQ(render_report(a, f), render_report(c, f));
    }
}

TEST(Verify, L2OnMseLeavesBoundFieldsIdentical)
{
    auto doc = load("desk.json");
    auto const plain = run_verify(config_from_json(doc));
    doc["loss"]["l2_lambda"] = 0.25;
    auto const reg = run_verify(config_from_json(doc));
    EXPECT_EQ(report_json(plain)["bound"], report_json(reg)["bound"]);
    EXPECT_EQ(report_json(plain)["format"], report_json(reg)["format"]);
    EXPECT_EQ(reg.l2_invariance.verdict, Verdict::Holds);
}

TEST(Verify, L2OnBceIsReportedNotJudged)
{
    auto const r = run_verify(parse_config(data_dir / "bce3d.json"));
    EXPECT_EQ(r.l2_invariance.verdict, Verdict::NotApplicable);
    auto const& ev = r.l2_invariance.evidence;
    EXPECT_EQ(ev["format_without_l2"]["beta"], 1);
    EXPECT_EQ(ev["format_with_l2"]["beta"], 2);
    EXPECT_LT(ev["log2_bound_without_l2"].get<double>(), ev["log2_bound_with_l2"].get<double>());
    EXPECT_EQ(r.skip_invariance.verdict, Verdict::Holds);
    EXPECT_EQ(r.betti.front().betti.b.size(), 4u);
}

TEST(Verify, SkipConnectionsLeaveFormatsIdentical)
{
    auto doc = load("desk.json");
    doc["architecture"]["hidden"] = {2, 2, 2};
    auto const plain = run_verify(config_from_json(doc));
    doc["architecture"]["skip_connections"] = true;
    auto const skip = run_verify(config_from_json(doc));
    EXPECT_EQ(report_json(plain)["format"], report_json(skip)["format"]);
    EXPECT_EQ(report_json(plain)["bound"], report_json(skip)["bound"]);
    EXPECT_EQ(skip.skip_invariance.verdict, Verdict::Holds);
    // The landscapes themselves differ.
    EXPECT_NE(report_json(plain)["betti"], report_json(skip)["betti"]);
}

TEST(Verify, CorollaryModeUnsupportedIsAConfigError)
{
    auto doc = load("desk.json");
    doc["activation"] = "arctan";
    doc["bound"]["mode"] = "corollary";
    EXPECT_THROW(run_verify(config_from_json(doc)), ConfigError);
}

TEST(Verify, NonFiniteLossLabelsTheStage)
{
    auto doc = load("desk.json");
    doc["dataset"]["inline"] = {{1.0, 1e200}};
    try {
        run_verify(config_from_json(doc));
        FAIL() << "expected ComputeError";
    } catch (ComputeError const& e) {
        EXPECT_EQ(std::string(e.what()).rfind("sampling: ", 0), 0u) << e.what();
    }
}

TEST(Report, SchemaAndCsvShape)
{
    auto const r = run_verify(parse_config(data_dir / "desk.json"));
    auto const j = nlohmann::json::parse(render_report(r, ReportFormat::Json));
    for (auto const* key : {"mode", "scope", "format", "n_tilde", "bound", "betti", "verdicts", "provenance"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["bound"]["assumptions"]["big_o_constant"], 1);
    EXPECT_EQ(j["bound"]["assumptions"]["s"], 1);
    EXPECT_EQ(j["provenance"]["seed"], 7);
    EXPECT_EQ(j["provenance"]["version"], version);
    EXPECT_EQ(j["verdicts"]["overall"], "holds");

    auto const csv = render_report(r, ReportFormat::Csv);
    std::stringstream ss(csv);
    std::vector<std::string> lines;
    for (std::string l; std::getline(ss, l);)
        lines.push_back(l);
    ASSERT_EQ(lines.size(), 1u + r.betti.size() + 1u);
    EXPECT_EQ(lines.front().rfind("row,c,b0,b1,b2,chi", 0), 0u);
    EXPECT_EQ(lines.back().rfind("summary,", 0), 0u);
    EXPECT_NE(lines.back().find(",holds"), std::string::npos);
}

TEST(Report, OverallVerdict)
{
    VerificationReport r;
    r.l2_invariance.verdict = Verdict::NotApplicable;
    r.skip_invariance.verdict = Verdict::Holds;
    r.inequality = {{0.0, 1, Verdict::Holds}};
    EXPECT_EQ(r.overall(), Verdict::Holds);
    r.inequality.push_back({1.0, 5, Verdict::Fails});
    EXPECT_EQ(r.overall(), Verdict::Fails);
}

TEST(Report, EmitIsByteStable)
{
    auto const cfg = parse_config(data_dir / "desk.json");
    auto const d1 = scratch("emit1"), d2 = scratch("emit2");
    for (auto f : {ReportFormat::Json, ReportFormat::Csv}) {
        auto const p1 = emit_report(run_verify(cfg), f, d1);
        auto const p2 = emit_report(run_verify(cfg), f, d2);
        EXPECT_EQ(read_file(p1), read_file(p2));
        EXPECT_FALSE(read_file(p1).empty());
    }
}

TEST(Cli, ExitCodes)
{
    auto const desk = (data_dir / "desk.json").string();
    auto const out = scratch("cli");
    EXPECT_EQ(run_cli("verify --config " + desk + " --out " + (out / "a").string()), 0);
    EXPECT_EQ(run_cli("verify --config " + desk + " --out " + (out / "b").string()), 0);
    EXPECT_EQ(read_file(out / "a" / "report.json"), read_file(out / "b" / "report.json"));
    EXPECT_EQ(run_cli("verify --config " + desk + " --format csv --out " + (out / "c").string()), 0);
    EXPECT_TRUE(fs::exists(out / "c" / "report.csv"));

    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("verify"), 2);
    EXPECT_EQ(run_cli("verify --config " + desk + " --format xml"), 2);
    EXPECT_EQ(run_cli("bound --alpha 1"), 2);

    auto bad = load("desk.json");
    bad.erase("seed");
    std::ofstream(out / "bad.json") << bad.dump();
    EXPECT_EQ(run_cli("verify --config " + (out / "bad.json").string()), 2);

    auto blowup = load("desk.json");
    blowup["dataset"]["inline"] = {{1.0, 1e200}};
    std::ofstream(out / "blowup.json") << blowup.dump();
    EXPECT_EQ(run_cli("verify --config " + (out / "blowup.json").string()), 3);

    EXPECT_EQ(run_cli("format --n0 1 --hidden 2,2 -m 5"), 0);
    EXPECT_EQ(run_cli("bound --n0 1 --hidden 2,2 -m 5 --mode corollary"), 0);
    EXPECT_EQ(run_cli("bound --n0 1 --hidden 2,2 --activation arctan -m 5 --mode corollary"), 2);
    EXPECT_EQ(run_cli("sweep --m 1:3 --width 1,2 --L 2:3"), 0);
    EXPECT_EQ(run_cli("sweep --m 3:1"), 2);
    EXPECT_EQ(run_cli("landscape --config " + desk + " --out " + (out / "ls").string()), 0);
    EXPECT_EQ(run_cli("betti --field " + (out / "ls" / "field.txt").string() + " --format csv"), 0);
}

TEST(Cli, BoundSubcommandReportsSpotValue)
{
    auto const out = scratch("spot");
    ASSERT_EQ(run_cli("bound --n0 1 --hidden 2,2 -m 5 --mode corollary --out " + out.string()), 0);
    auto const j = nlohmann::json::parse(read_file(out / "bound.json"));
    EXPECT_EQ(j["bound"]["two_power_exponent"], 190);
    EXPECT_EQ(j["bound"]["base"], 91);
    EXPECT_EQ(j["bound"]["exponent"], 33);
    mpz_class expect;
    mpz_ui_pow_ui(expect.get_mpz_t(), 91, 33);
    expect <<= 190;
    EXPECT_EQ(j["bound"]["exact"].get<std::string>(), expect.get_str());
}

#include "gen.hpp"
#include "rtlab/criteria.hpp"
#include "rtlab/report.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace rtlab;

namespace {
ScenarioConfig cfg(const std::string& name, nlohmann::json params = nlohmann::json::object()) {
    ScenarioConfig c;
    c.scenario = name;
    c.params = std::move(params);
    return c;
}
}  // namespace

TEST_SUITE("report") {

TEST_CASE("verdicts follow from the row fields") {
    CHECK(make_row("a", "1/3", "==", "2/6").verdict == "pass");
    CHECK(make_row("a", "0.5", "<=", "1/2").verdict == "pass");
    CHECK(make_row("a", "0.5", "<", "1/2").verdict == "fail");
    CHECK(make_row("a", "[1, 2]", "<=", "2").verdict == "pass");
    CHECK(make_row("a", "[1, 2.5]", "<=", "2").verdict == "fail");
    CHECK(make_row("a", "[1, 2]", "contains", "3/2").verdict == "pass");
    CHECK(make_row("a", "1/3", "in-open", "[1/3, 1]").verdict == "fail");
    CHECK(make_row("a", "1/3", "in", "[1/3, 1]").verdict == "pass");
    CHECK(make_row("a", "1e-12", "<", "1e-10").verdict == "pass");
    CHECK(make_row("a", "true", "true", "").verdict == "pass");
    CHECK(make_row("a", "7", "report", "").verdict == "report-only");
    CHECK(make_row("a", "3", "<=", "6").ratio.value() == doctest::Approx(0.5));
    CHECK_THROWS(make_row("a", "1", "~", "1"));
}

TEST_CASE("verdicts are stable under re-evaluation") {
    Gen g(51);
    const std::vector<std::string> rels{"==", "<=", "<", ">=", ">"};
    for (int t = 0; t < 300; ++t) {
        const Q a = g.rational(20, 9), b = g.rational(20, 9);
        ReportRow r = make_row("x", q_str(a), rels[g.below(rels.size())], q_str(b));
        const std::string v = r.verdict;
        r.verdict.clear();
        CHECK(verdict_of(r) == v);
    }
}

TEST_CASE("number formatting round-trips") {
    Gen g(52);
    for (int t = 0; t < 300; ++t) {
        const double d = static_cast<double>(g.next()) / 1e10;
        CHECK(std::strtod(fmt_double(d).c_str(), nullptr) == d);
    }
    CHECK(fmt_q(Q(4, 69)) == "4/69");
    const Enclosure e(Q(1, 3), Q(2, 3));
    const std::string s = fmt_enclosure(e);
    CHECK(make_row("e", s, "contains", "1/3").verdict == "pass");
    CHECK(make_row("e", s, "contains", "2/3").verdict == "pass");
}

TEST_CASE("least-squares slope") {
    CHECK(fit_slope({1, 2, 3}, {2, 4, 6}) == doctest::Approx(2.0));
    CHECK_THROWS(fit_slope({1}, {1}));
}

TEST_CASE("config parsing") {
    const auto j = nlohmann::json::parse(R"({"scenario": "packing", "params": {"k": [2, 3]}, "seed": 4,
                                            "output": {"format": "json"}})");
    const ScenarioConfig c = parse_config(j);
    CHECK(c.scenario == "packing");
    CHECK(c.seed == 4);
    CHECK(c.format == "json");
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"params": {}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"scenario": "x", "colour": 1})")), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"scenario": "x", "output": {"format": "xml"}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"scenario": "x", "seed": -1})")), ConfigError);
}

TEST_CASE("scenario errors are actionable") {
    CHECK_THROWS_WITH_AS(run_scenario(cfg("no-such")), doctest::Contains("known:"), ConfigError);
    CHECK_THROWS_WITH_AS(run_scenario(cfg("packing", {{"kk", 2}})), doctest::Contains("unknown parameter 'kk'"), ConfigError);
    CHECK_THROWS_WITH_AS(run_scenario(cfg("packing", {{"k", 1}})), doctest::Contains("outside the supported range"), ConfigError);
    CHECK_THROWS_WITH_AS(run_scenario(cfg("blowup", {{"r", 1.5}})), doctest::Contains("num/den"), ConfigError);
    CHECK_THROWS_AS(run_scenario(cfg("construct", {{"p", "3"}, {"r", "3/2"}})), ConfigError);
}

TEST_CASE("rationals are read from num/den strings") {
    const Bundle b = run_scenario(cfg("blowup", {{"k", {6, 7}}, {"r", "3/2"}}));
    CHECK(b.config["params"]["r"] == "3/2");
    CHECK(b.pass());
}

TEST_CASE("empty parameter grid gives an empty successful bundle") {
    for (const char* name : {"averages-exact", "packing", "triadic-testing", "hilbert-growth", "entropy", "psi-bump"}) {
        const Bundle b = run_scenario(cfg(name, {{"k", nlohmann::json::array()}}));
        CHECK(b.pass());
        REQUIRE(b.sections.size() == 1);
        CHECK(b.sections[0].rows.empty());
    }
}

TEST_CASE("resolved config embeds defaults") {
    const Bundle b = run_scenario(cfg("mass-conservation", {{"k", {2}}}));
    CHECK(b.config["params"]["depth"] == nlohmann::json({1, 2, 3, 4}));
    CHECK(render_csv(b).find("# config: ") != std::string::npos);
}

TEST_CASE("averages scenario exact-matches") {
    const Bundle b = run_scenario(cfg("averages-exact", {{"k", {2, 3}}, {"depth", 3}}));
    CHECK(b.pass());
}

TEST_CASE("A_p walk over one translate per J equals the walk over all cells") {
    for (int k : {2, 3}) {
        const Bundle a = run_scenario(cfg("ap-uniformity", {{"k", {k}}, {"depth", 2}}));
        const Bundle b = run_scenario(cfg("ap-uniformity", {{"k", {k}}, {"depth", 2}, {"allTranslates", 1}}));
        CHECK(a.sections[0].rows[0].value == b.sections[0].rows[0].value);
    }
}

TEST_CASE("composite scenarios take namespaced parameters") {
    const Bundle b = run_scenario(cfg("lorentz", {{"series", {{"x", {0.5}}}}, {"orlicz-lorentz", {{"functions", 5}}}}));
    REQUIRE(b.sections.size() == 3);
    CHECK(b.sections[1].scenario == "series");
    CHECK(b.config["params"]["series"]["x"] == nlohmann::json({0.5}));
    CHECK_THROWS_AS(run_scenario(cfg("lorentz", {{"series", {{"y", 1}}}})), ConfigError);
}

TEST_CASE("re-runs are byte-identical and only meta.json carries a timestamp") {
    const ScenarioConfig c = cfg("sparse-exactness", {{"seeds", 20}});
    const Bundle a = run_scenario(c), b = run_scenario(c);
    CHECK(render_csv(a) == render_csv(b));
    CHECK(render_json(a) == render_json(b));
    namespace fs = std::filesystem;
    const fs::path d1 = fs::temp_directory_path() / "rtlab_report_a", d2 = fs::temp_directory_path() / "rtlab_report_b";
    fs::remove_all(d1);
    fs::remove_all(d2);
    const auto f1 = write_bundle(a, d1.string());
    const auto f2 = write_bundle(b, d2.string());
    REQUIRE(f1.size() == f2.size());
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    for (size_t i = 0; i < f1.size(); ++i) {
        if (fs::path(f1[i]).filename() == "meta.json") continue;
        CHECK(slurp(f1[i]) == slurp(f2[i]));
    }
    CHECK(slurp((d1 / "meta.json").string()).find("generated") != std::string::npos);
    CHECK(fs::exists(d1 / "sparse-exactness.json"));
    CHECK(fs::exists(d1 / "sparse-exactness.csv"));
    CHECK(fs::exists(d1 / "summary.txt"));
}

TEST_CASE("criterion table") {
    CHECK(criterion_scenario(1) == "averages-exact");
    CHECK(criterion_scenario(18) == "determinism");
    CHECK_THROWS(criterion_scenario(19));
    const CriterionResult r = run_criterion(2);
    CHECK(r.pass);
}

}

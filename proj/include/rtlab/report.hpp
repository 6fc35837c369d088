#pragma once

#include "rtlab/rational.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtlab {

using Json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/* One checked quantity. The verdict is recomputed from value, relation and
   reference by verdict_of, so a report can be re-verified from its rows.
   Relations: "==", "<=", "<", ">=", ">", "in" (closed [a, b]), "in-open"
   ((a, b)), "contains" (value enclosure holds the reference), "true"
   (value is "true"/"false"), "report" (no verdict). Values are rationals
   "a/b", decimals, or enclosures "[lo, hi]". */
struct ReportRow {
    std::string quantity;
    std::string value;
    std::string relation;
    std::string reference;
    std::optional<double> ratio;  // value / reference when both are scalars
    std::optional<double> trend;  // fitted slope for sweep rows
    std::string verdict;          // "pass", "fail", "report-only"
};

std::string verdict_of(const ReportRow& row);
ReportRow make_row(std::string quantity, std::string value, std::string relation, std::string reference,
                   std::optional<double> trend = std::nullopt);

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct Section {
    std::string scenario;
    std::vector<ReportRow> rows;
    std::vector<Table> tables;
    std::string summary;  // one line
    bool pass() const;
};

struct Bundle {
    std::string scenario;
    Json config;  // resolved: defaults filled in
    std::vector<Section> sections;
    bool pass() const;
};

struct ScenarioConfig {
    std::string scenario;
    Json params = Json::object();
    Json tolerance = Json::object();
    uint64_t seed = 1;
    int threads = 1;
    std::string outDir;
    std::string format = "csv";  // csv | json, the rendering sent to stdout
};

// Parses and checks the shape; parameter values are checked when the scenario runs.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path);
std::vector<std::string> scenario_names();

Bundle run_scenario(const ScenarioConfig& config);

std::string render_csv(const Bundle& bundle);
std::string render_json(const Bundle& bundle);
std::string render_summary(const Bundle& bundle);
/* Writes <scenario>.csv, one <scenario>__<section>__<table>.csv per table,
   <scenario>.json, summary.txt, and meta.json (the only file with a timestamp). */
std::vector<std::string> write_bundle(const Bundle& bundle, const std::string& dir);

// Shortest decimal that reads back as the same double.
std::string fmt_double(double v);
// Rational if short, otherwise its double.
std::string fmt_q(const Q& v);
// "[lo, hi]" rounded outward to doubles, or the exact value.
std::string fmt_enclosure(const Enclosure& e);

// Least-squares slope of y on x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace rtlab

#include "rtlab/report.hpp"

#include "scenario_ctx.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace rtlab {

namespace fs = std::filesystem;

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    for (int prec = 6; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string fmt_q(const Q& v) {
    if (v.get_num().get_str().size() + v.get_den().get_str().size() <= 24) return q_str(v);
    return fmt_double(q_double(v));
}

namespace detail {

double lo_d(const Enclosure& e) {
    double d = q_double(e.lo);
    if (Q(d) > e.lo) d = std::nextafter(d, -INFINITY);
    return d;
}

double hi_d(const Enclosure& e) {
    double d = q_double(e.hi);
    if (Q(d) < e.hi) d = std::nextafter(d, INFINITY);
    return d;
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

}  // namespace detail

std::string fmt_enclosure(const Enclosure& e) {
    if (e.exact()) return fmt_q(e.lo);
    return "[" + fmt_double(detail::lo_d(e)) + ", " + fmt_double(detail::hi_d(e)) + "]";
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_slope needs two or more points");
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

namespace {

Q parse_scalar(const std::string& s) {
    if (s.find_first_of("eEin") != std::string::npos) {
        const double d = std::strtod(s.c_str(), nullptr);
        if (!std::isfinite(d)) throw std::invalid_argument("non-finite value '" + s + "'");
        return q_from_double(d);
    }
    return q_parse(s);
}

Enclosure parse_value(const std::string& s) {
    if (!s.empty() && s.front() == '[') {
        const auto comma = s.find(',');
        if (comma == std::string::npos || s.back() != ']') throw std::invalid_argument("bad enclosure '" + s + "'");
        std::string a = s.substr(1, comma - 1), b = s.substr(comma + 1, s.size() - comma - 2);
        auto trim = [](std::string t) {
            t.erase(0, t.find_first_not_of(' '));
            t.erase(t.find_last_not_of(' ') + 1);
            return t;
        };
        return {parse_scalar(trim(a)), parse_scalar(trim(b))};
    }
    return parse_scalar(s);
}

}  // namespace

std::string verdict_of(const ReportRow& row) {
    const std::string& rel = row.relation;
    if (rel == "report") return "report-only";
    if (rel == "true") return row.value == "true" ? "pass" : "fail";
    const Enclosure v = parse_value(row.value);
    const Enclosure ref = parse_value(row.reference);
    bool ok = false;
    if (rel == "==") ok = v.exact() && ref.exact() && v.lo == ref.lo;
    else if (rel == "<=") ok = v.hi <= ref.lo;
    else if (rel == "<") ok = v.hi < ref.lo;
    else if (rel == ">=") ok = v.lo >= ref.hi;
    else if (rel == ">") ok = v.lo > ref.hi;
    else if (rel == "in") ok = ref.lo <= v.lo && v.hi <= ref.hi;
    else if (rel == "in-open") ok = ref.lo < v.lo && v.hi < ref.hi;
    else if (rel == "contains") ok = v.lo <= ref.lo && ref.hi <= v.hi;
    else throw std::logic_error("unknown relation '" + rel + "'");
    return ok ? "pass" : "fail";
}

ReportRow make_row(std::string quantity, std::string value, std::string relation, std::string reference,
                   std::optional<double> trend) {
    ReportRow r{std::move(quantity), std::move(value), std::move(relation), std::move(reference), std::nullopt, trend, ""};
    static const std::vector<std::string> scalarRel{"==", "<=", "<", ">=", ">"};
    if (std::find(scalarRel.begin(), scalarRel.end(), r.relation) != scalarRel.end()) {
        const Enclosure v = parse_value(r.value), ref = parse_value(r.reference);
        if (ref.exact() && ref.lo != 0) r.ratio = q_double(v.mid() / ref.lo);
    }
    r.verdict = verdict_of(r);
    return r;
}

bool Section::pass() const {
    return std::none_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.verdict == "fail"; });
}

bool Bundle::pass() const {
    return std::all_of(sections.begin(), sections.end(), [](const Section& s) { return s.pass(); });
}

// ---------------------------------------------------------------- params

namespace detail {

Params::Params(std::string owner, nlohmann::json in) : owner_(std::move(owner)), in_(std::move(in)) {
    if (in_.is_null()) in_ = nlohmann::json::object();
    if (!in_.is_object()) throw ConfigError("scenario '" + owner_ + "': parameters must be a JSON object");
}

void Params::fail(const std::string& key, const std::string& msg) const {
    throw ConfigError("scenario '" + owner_ + "', parameter '" + key + "': " + msg);
}

int Params::integer(const std::string& key, int def) {
    used_.insert(key);
    int v = def;
    if (in_.contains(key)) {
        if (!in_[key].is_number_integer()) fail(key, "expected an integer");
        v = in_[key].get<int>();
    }
    resolved_[key] = v;
    return v;
}

std::vector<int> Params::ints(const std::string& key, std::vector<int> def) {
    used_.insert(key);
    std::vector<int> v = std::move(def);
    if (in_.contains(key)) {
        const auto& j = in_[key];
        v.clear();
        if (j.is_number_integer()) {
            v.push_back(j.get<int>());
        } else if (j.is_array()) {
            for (const auto& e : j) {
                if (!e.is_number_integer()) fail(key, "expected a list of integers");
                v.push_back(e.get<int>());
            }
        } else if (j.is_object() && j.contains("from") && j.contains("to") && j.size() == 2) {
            if (!j["from"].is_number_integer() || !j["to"].is_number_integer()) fail(key, "range bounds must be integers");
            for (int x = j["from"].get<int>(); x <= j["to"].get<int>(); ++x) v.push_back(x);
        } else {
            fail(key, "expected an integer, a list, or {\"from\": a, \"to\": b}");
        }
    }
    resolved_[key] = v;
    return v;
}

namespace {
Q rational_of(const Params& p, const std::string& key, const nlohmann::json& j) {
    if (j.is_number_integer()) return Q(j.get<long>());
    if (j.is_string()) {
        try {
            return q_parse(j.get<std::string>());
        } catch (const std::exception&) {
            p.fail(key, "cannot read '" + j.get<std::string>() + "' as a rational; use \"num/den\"");
        }
    }
    if (j.is_number()) p.fail(key, "write non-integer rationals as \"num/den\" strings");
    p.fail(key, "expected a rational");
}
}  // namespace

Q Params::rational(const std::string& key, const Q& def) {
    used_.insert(key);
    Q v = in_.contains(key) ? rational_of(*this, key, in_[key]) : def;
    resolved_[key] = q_str(v);
    return v;
}

std::vector<Q> Params::rationals(const std::string& key, std::vector<Q> def) {
    used_.insert(key);
    std::vector<Q> v = std::move(def);
    if (in_.contains(key)) {
        v.clear();
        const auto& j = in_[key];
        if (j.is_array())
            for (const auto& e : j) v.push_back(rational_of(*this, key, e));
        else
            v.push_back(rational_of(*this, key, j));
    }
    Json out = Json::array();
    for (const auto& x : v) out.push_back(q_str(x));
    resolved_[key] = out;
    return v;
}

double Params::real(const std::string& key, double def) {
    used_.insert(key);
    double v = def;
    if (in_.contains(key)) {
        const auto& j = in_[key];
        if (j.is_number()) v = j.get<double>();
        else v = q_double(rational_of(*this, key, j));
    }
    resolved_[key] = v;
    return v;
}

std::vector<double> Params::reals(const std::string& key, std::vector<double> def) {
    used_.insert(key);
    std::vector<double> v = std::move(def);
    if (in_.contains(key)) {
        v.clear();
        const auto& j = in_[key];
        auto one = [&](const nlohmann::json& e) {
            return e.is_number() ? e.get<double>() : q_double(rational_of(*this, key, e));
        };
        if (j.is_array())
            for (const auto& e : j) v.push_back(one(e));
        else
            v.push_back(one(j));
    }
    resolved_[key] = v;
    return v;
}

std::string Params::text(const std::string& key, const std::string& def) {
    used_.insert(key);
    std::string v = def;
    if (in_.contains(key)) {
        if (!in_[key].is_string()) fail(key, "expected a string");
        v = in_[key].get<std::string>();
    }
    resolved_[key] = v;
    return v;
}

std::vector<std::string> Params::texts(const std::string& key, std::vector<std::string> def) {
    used_.insert(key);
    std::vector<std::string> v = std::move(def);
    if (in_.contains(key)) {
        v.clear();
        const auto& j = in_[key];
        if (j.is_string()) {
            v.push_back(j.get<std::string>());
        } else if (j.is_array()) {
            for (const auto& e : j) {
                if (!e.is_string()) fail(key, "expected a list of strings");
                v.push_back(e.get<std::string>());
            }
        } else {
            fail(key, "expected a string or a list of strings");
        }
    }
    resolved_[key] = v;
    return v;
}

nlohmann::json Params::object(const std::string& key) {
    used_.insert(key);
    if (!in_.contains(key)) return nlohmann::json::object();
    if (!in_[key].is_object()) fail(key, "expected an object");
    return in_[key];
}

void Params::put_resolved(const std::string& key, Json value) { resolved_[key] = std::move(value); }

void Params::finish() const {
    for (const auto& [key, _] : in_.items()) {
        if (used_.count(key)) continue;
        std::string known;
        for (const auto& u : used_) known += (known.empty() ? "" : ", ") + u;
        throw ConfigError("scenario '" + owner_ + "': unknown parameter '" + key + "' (known: " +
                          (known.empty() ? "none" : known) + ")");
    }
}

void parallel_for(size_t count, int threads, const std::function<void(size_t)>& fn) {
    const size_t workers = std::min(count, static_cast<size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (size_t t = 0; t < workers; ++t)
        pool.emplace_back([&, t] {
            try {
                for (size_t i = next++; i < count; i = next++) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
                next = count;
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

// ---------------------------------------------------------------- config

std::vector<std::string> scenario_names() {
    std::vector<std::string> out;
    for (const auto& e : detail::registry()) out.push_back(e.name);
    return out;
}

ScenarioConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    static const std::vector<std::string> keys{"scenario", "params", "tolerance", "seed", "threads", "output"};
    for (const auto& [key, _] : j.items())
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError("config: unknown key '" + key +
                              "' (allowed: scenario, params, tolerance, seed, threads, output)");
    ScenarioConfig c;
    if (!j.contains("scenario") || !j["scenario"].is_string())
        throw ConfigError("config: 'scenario' (string) is required");
    c.scenario = j["scenario"].get<std::string>();
    if (j.contains("params")) {
        if (!j["params"].is_object()) throw ConfigError("config: 'params' must be an object");
        c.params = j["params"];
    }
    if (j.contains("tolerance")) {
        if (!j["tolerance"].is_object()) throw ConfigError("config: 'tolerance' must be an object");
        c.tolerance = j["tolerance"];
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("config: 'seed' must be a non-negative integer");
        c.seed = j["seed"].get<uint64_t>();
    }
    if (j.contains("threads")) {
        if (!j["threads"].is_number_integer() || j["threads"].get<int>() < 1)
            throw ConfigError("config: 'threads' must be a positive integer");
        c.threads = j["threads"].get<int>();
    }
    if (j.contains("output")) {
        const auto& o = j["output"];
        if (!o.is_object()) throw ConfigError("config: 'output' must be an object with 'dir' and/or 'format'");
        for (const auto& [key, v] : o.items()) {
            if (key == "dir" && v.is_string()) c.outDir = v.get<std::string>();
            else if (key == "format" && v.is_string()) c.format = v.get<std::string>();
            else throw ConfigError("config: output." + key + " is not a recognized string field (dir, format)");
        }
    }
    if (c.format != "csv" && c.format != "json")
        throw ConfigError("config: output.format must be 'csv' or 'json', got '" + c.format + "'");
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

// ---------------------------------------------------------------- running

Bundle run_scenario(const ScenarioConfig& config) {
    const auto& reg = detail::registry();
    auto it = std::find_if(reg.begin(), reg.end(), [&](const detail::ScenarioEntry& e) { return e.name == config.scenario; });
    if (it == reg.end()) {
        std::string known;
        for (const auto& e : reg) known += (known.empty() ? "" : ", ") + e.name;
        throw ConfigError("unknown scenario '" + config.scenario + "' (known: " + known + ")");
    }
    detail::Params params(config.scenario, config.params);
    detail::Params tol(config.scenario + ".tolerance", config.tolerance);
    Bundle b;
    b.scenario = config.scenario;
    auto runOne = [&](const detail::ScenarioEntry& e, detail::Params& p, detail::Params& t) {
        detail::Ctx ctx{p, t, config.seed, config.threads};
        try {
            Section s = e.fn(ctx);
            s.scenario = e.name;
            return s;
        } catch (const std::invalid_argument& ex) {
            throw ConfigError("scenario '" + e.name + "': " + ex.what());
        } catch (const std::domain_error& ex) {
            throw ConfigError("scenario '" + e.name + "': " + ex.what());
        }
    };
    if (it->parts.empty()) {
        b.sections.push_back(runOne(*it, params, tol));
    } else {
        for (const auto& part : it->parts) {
            const auto& sub = *std::find_if(reg.begin(), reg.end(), [&](const detail::ScenarioEntry& e) { return e.name == part; });
            detail::Params sp(part, params.object(part)), st(part + ".tolerance", tol.object(part));
            b.sections.push_back(runOne(sub, sp, st));
            sp.finish();
            st.finish();
            params.put_resolved(part, sp.resolved());
            tol.put_resolved(part, st.resolved());
        }
    }
    params.finish();
    tol.finish();
    b.config = Json::object();
    b.config["scenario"] = config.scenario;
    b.config["seed"] = config.seed;
    b.config["params"] = params.resolved();
    b.config["tolerance"] = tol.resolved();
    return b;
}

// ---------------------------------------------------------------- output

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + csv_field(fields[i]);
    return out + "\n";
}

std::string opt_str(const std::optional<double>& v) { return v ? fmt_double(*v) : ""; }

std::string table_csv(const Table& t) {
    std::string out = csv_line(t.columns);
    for (const auto& r : t.rows) out += csv_line(r);
    return out;
}

Json row_json(const ReportRow& r) {
    Json j;
    j["quantity"] = r.quantity;
    j["value"] = r.value;
    j["relation"] = r.relation;
    j["reference"] = r.reference;
    j["ratio"] = r.ratio ? Json(*r.ratio) : Json(nullptr);
    j["trend"] = r.trend ? Json(*r.trend) : Json(nullptr);
    j["verdict"] = r.verdict;
    return j;
}

}  // namespace

std::string render_csv(const Bundle& b) {
    std::string out = "# scenario: " + b.scenario + "\n# config: " + b.config.dump() + "\n";
    out += csv_line({"section", "quantity", "value", "relation", "reference", "ratio", "trend", "verdict"});
    for (const auto& s : b.sections)
        for (const auto& r : s.rows)
            out += csv_line({s.scenario, r.quantity, r.value, r.relation, r.reference, opt_str(r.ratio), opt_str(r.trend), r.verdict});
    return out;
}

std::string render_json(const Bundle& b) {
    Json j;
    j["scenario"] = b.scenario;
    j["config"] = b.config;
    j["pass"] = b.pass();
    j["sections"] = Json::array();
    for (const auto& s : b.sections) {
        Json js;
        js["scenario"] = s.scenario;
        js["pass"] = s.pass();
        js["summary"] = s.summary;
        js["rows"] = Json::array();
        for (const auto& r : s.rows) js["rows"].push_back(row_json(r));
        js["tables"] = Json::array();
        for (const auto& t : s.tables) js["tables"].push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows}});
        j["sections"].push_back(js);
    }
    return j.dump(2) + "\n";
}

std::string render_summary(const Bundle& b) {
    std::ostringstream os;
    os << "scenario " << b.scenario << ": " << (b.pass() ? "PASS" : "FAIL") << "\n";
    for (const auto& s : b.sections) {
        os << "  " << s.scenario << ": " << (s.pass() ? "PASS" : "FAIL");
        if (!s.summary.empty()) os << "  " << s.summary;
        os << "\n";
        for (const auto& r : s.rows)
            if (r.verdict == "fail")
                os << "    failed: " << r.quantity << " = " << r.value << " " << r.relation << " " << r.reference << "\n";
    }
    return os.str();
}

std::vector<std::string> write_bundle(const Bundle& b, const std::string& dir) {
    fs::create_directories(dir);
    std::vector<std::string> files;
    auto put = [&](const std::string& name, const std::string& body) {
        const fs::path path = fs::path(dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << body;
        files.push_back(path.string());
    };
    put(b.scenario + ".csv", render_csv(b));
    for (const auto& s : b.sections)
        for (const auto& t : s.tables) put(b.scenario + "__" + s.scenario + "__" + t.name + ".csv", table_csv(t));
    put(b.scenario + ".json", render_json(b));
    put("summary.txt", render_summary(b));

    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    Json meta;
    meta["generated"] = stamp;
    meta["scenario"] = b.scenario;
    meta["pass"] = b.pass();
    meta["files"] = files;
    put("meta.json", meta.dump(2) + "\n");
    return files;
}

}  // namespace rtlab

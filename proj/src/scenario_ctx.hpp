#pragma once

#include "rtlab/report.hpp"

#include <functional>
#include <set>
#include <string>
#include <vector>

namespace rtlab::detail {

/* Typed reads from a JSON object. Every read records the value actually used
   (default or given) into `resolved`; finish() rejects keys never read. */
class Params {
public:
    Params(std::string owner, nlohmann::json in);

    int integer(const std::string& key, int def);
    std::vector<int> ints(const std::string& key, std::vector<int> def);
    Q rational(const std::string& key, const Q& def);
    std::vector<Q> rationals(const std::string& key, std::vector<Q> def);
    double real(const std::string& key, double def);
    std::vector<double> reals(const std::string& key, std::vector<double> def);
    std::string text(const std::string& key, const std::string& def);
    std::vector<std::string> texts(const std::string& key, std::vector<std::string> def);
    // Nested object for a sub-scenario; {} when absent.
    nlohmann::json object(const std::string& key);
    void put_resolved(const std::string& key, Json value);

    void finish() const;
    const Json& resolved() const { return resolved_; }
    [[noreturn]] void fail(const std::string& key, const std::string& msg) const;

private:
    std::string owner_;
    nlohmann::json in_;
    Json resolved_ = Json::object();
    std::set<std::string> used_;
};

struct Ctx {
    Params& params;
    Params& tol;
    uint64_t seed;
    int threads;
};

using ScenarioFn = std::function<Section(Ctx&)>;

struct ScenarioEntry {
    std::string name;
    ScenarioFn fn;
    std::vector<std::string> parts;  // non-empty for composites
};

const std::vector<ScenarioEntry>& registry();

// Runs fn(i) for i < count on up to `threads` workers; the first exception is rethrown.
void parallel_for(size_t count, int threads, const std::function<void(size_t)>& fn);

// Lower and upper ends of an enclosure as doubles, rounded outward.
double lo_d(const Enclosure& e);
double hi_d(const Enclosure& e);

std::string bool_str(bool b);

}  // namespace rtlab::detail

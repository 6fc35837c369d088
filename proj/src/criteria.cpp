#include "rtlab/criteria.hpp"

#include "rtlab/report.hpp"

#include <chrono>
#include <stdexcept>

namespace rtlab {

namespace {

struct Spec {
    const char* scenario;
    double seconds;  // runtime limit, 0 when none
};

const Spec kSpecs[kCriterionCount] = {
    {"averages-exact", 10},  {"mass-conservation", 0}, {"packing", 0},        {"ap-uniformity", 0},
    {"triadic-testing", 60}, {"general-testing", 0},   {"rescaled-testing", 0}, {"sparse-exactness", 0},
    {"hilbert-growth", 0},   {"norm-ratio", 0},        {"maximal", 0},        {"entropy", 0},
    {"blowup", 0},           {"psi-bump", 0},          {"fundamental", 0},    {"series", 0},
    {"orlicz-lorentz", 0},   {"determinism", 0},
};

}  // namespace

std::string criterion_scenario(int id) {
    if (id < 1 || id > kCriterionCount) throw std::out_of_range("criterion id " + std::to_string(id));
    return kSpecs[id - 1].scenario;
}

CriterionResult run_criterion(int id, uint64_t seed, int threads) {
    CriterionResult out;
    out.id = id;
    out.scenario = criterion_scenario(id);
    ScenarioConfig cfg;
    cfg.scenario = out.scenario;
    cfg.seed = seed;
    cfg.threads = threads;
    const auto t0 = std::chrono::steady_clock::now();
    const Bundle b = run_scenario(cfg);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.pass = b.pass();
    for (const auto& s : b.sections) {
        if (!s.summary.empty()) out.detail += s.summary;
        for (const auto& r : s.rows)
            if (r.verdict == "fail")
                out.detail += (out.detail.empty() ? "" : "; ") + r.quantity + " = " + r.value + " (need " + r.relation + " " + r.reference + ")";
    }
    const double limit = kSpecs[id - 1].seconds;
    if (limit > 0 && out.seconds > limit) {
        out.pass = false;
        out.detail += (out.detail.empty() ? "" : "; ") + std::string("runtime ") + fmt_double(out.seconds) + " s exceeds " +
                      fmt_double(limit) + " s";
    }
    return out;
}

}  // namespace rtlab

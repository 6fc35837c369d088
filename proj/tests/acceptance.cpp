// Runs every acceptance criterion and prints one line per criterion.
#include "rtlab/criteria.hpp"
#include "rtlab/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> only;
    uint64_t seed = 1;
    int threads = 1;
    app.add_option("--only", only, "criterion ids to run")->check(CLI::Range(1, rtlab::kCriterionCount));
    app.add_option("--seed", seed, "seed");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    if (only.empty())
        for (int i = 1; i <= rtlab::kCriterionCount; ++i) only.push_back(i);

    int failed = 0;
    for (int id : only) {
        rtlab::CriterionResult r;
        try {
            r = rtlab::run_criterion(id, seed, threads);
        } catch (const std::exception& e) {
            r.id = id;
            r.scenario = rtlab::criterion_scenario(id);
            r.detail = std::string("error: ") + e.what();
        }
        if (!r.pass) ++failed;
        std::printf("AC%02d %s  %-18s %7.2f s  %s\n", id, r.pass ? "PASS" : "FAIL", r.scenario.c_str(), r.seconds, r.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(only.size()) - failed, only.size());
    return failed ? 1 : 0;
}

// Command-line front end: one subcommand per module report, plus `scenario`.
#include "rtlab/report.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

namespace {

struct Options {
    std::string config, out, format, name;
    std::optional<uint64_t> seed;
    int threads = 1;
    std::vector<std::string> params;  // key=json
};

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "JSON scenario config")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (prints to stdout when absent)");
    sub->add_option("--seed", o.seed, "seed (overrides the config)");
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", o.format, "stdout rendering when --out is absent: csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--param", o.params, "parameter override key=value (value read as JSON, else as a string)");
}

int run(const std::string& scenario, const Options& o) {
    using namespace rtlab;
    ScenarioConfig cfg;
    if (!o.config.empty()) {
        cfg = load_config(o.config);
        if (!scenario.empty() && cfg.scenario != scenario)
            throw ConfigError("config names scenario '" + cfg.scenario + "' but this subcommand runs '" + scenario + "'");
    } else {
        if (scenario.empty()) throw ConfigError("give --config or --name");
        cfg.scenario = scenario;
    }
    if (o.seed) cfg.seed = *o.seed;
    cfg.threads = o.threads;
    if (!o.format.empty()) cfg.format = o.format;
    if (!o.out.empty()) cfg.outDir = o.out;
    for (const auto& kv : o.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        nlohmann::json v = nlohmann::json::parse(val, nullptr, false);
        cfg.params[key] = v.is_discarded() ? nlohmann::json(val) : v;
    }
    const Bundle b = run_scenario(cfg);
    if (cfg.outDir.empty()) {
        std::cout << (cfg.format == "json" ? render_json(b) : render_csv(b));
        std::cerr << render_summary(b);
    } else {
        write_bundle(b, cfg.outDir);
        std::cout << render_summary(b);
    }
    return b.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Triadic weight counterexample laboratory"};
    app.require_subcommand(1);
    const std::map<std::string, std::pair<std::string, std::string>> subs{
        {"construct", {"construct", "Construction summary and support cells"}},
        {"averages", {"measures", "Exact averages, mass, packing and A_p products"}},
        {"sparse-test", {"sparse", "Sparse family testing conditions"}},
        {"hilbert", {"singular", "Hilbert transform and maximal function"}},
        {"lorentz", {"lorentz", "Orlicz and Lorentz norm comparisons"}},
        {"bumps", {"bumps", "Entropy, blow-up and psi-bump products"}},
    };
    Options o;
    std::string chosen;
    for (const auto& [cmd, info] : subs) {
        CLI::App* sub = app.add_subcommand(cmd, info.second);
        add_common(sub, o);
        sub->callback([&chosen, s = info.first] { chosen = s; });
    }
    CLI::App* sc = app.add_subcommand("scenario", "Run a named scenario or a config file");
    add_common(sc, o);
    sc->add_option("--name", o.name, "scenario name");
    sc->add_flag_callback("--list", [] {
        for (const auto& n : rtlab::scenario_names()) std::cout << n << "\n";
        throw CLI::Success();
    }, "list scenarios");
    sc->callback([&] { chosen = o.name; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        return run(chosen, o);
    } catch (const rtlab::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failed: " << e.what() << "\n";
        return 1;
    }
}

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "slicing/cli.hpp"

namespace {

struct Flags {
    std::string config, out = ".";
    std::vector<std::string> set;
    std::vector<std::pair<std::string, std::string>> named;
};

void add_common(CLI::App* sub, Flags& f)
{
    sub->add_option("--config", f.config, "flat key=value config file");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--set", f.set, "override key=value (repeatable)");
}

// Shorthand flag that becomes a key=value override.
void add_key(CLI::App* sub, Flags& f, const std::string& flag, const std::string& key, const std::string& help)
{
    sub->add_option_function<std::string>(flag, [&f, key](const std::string& v) { f.named.emplace_back(key, v); }, help);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectrum slicing KPI toolkit"};
    app.require_subcommand(1);
    Flags f;
    auto* analyze = app.add_subcommand("analyze", "exact KPIs and PMFs for one config");
    auto* simulate = app.add_subcommand("simulate", "slot-level Monte Carlo for one config");
    auto* sweep = app.add_subcommand("sweep", "evaluate every config in the grid and mark the Pareto frontier");
    auto* optimize = app.add_subcommand("optimize", "minimize timeliness subject to a throughput floor");
    for (auto* s : {analyze, simulate, sweep, optimize}) add_common(s, f);
    add_key(simulate, f, "--slots", "sim.slots", "simulated slots");
    add_key(simulate, f, "--seed", "sim.seed", "RNG seed");
    add_key(simulate, f, "--replications", "sim.replications", "independent replications");
    for (auto* s : {sweep, optimize}) {
        add_key(s, f, "--scheme", "scheme", "OMA, NOMA or PNOMA");
        add_key(s, f, "--kpi", "kpi", "lr90 or paoi90");
        add_key(s, f, "--alpha", "alpha", "intermittent activation probability");
        add_key(s, f, "--eps1", "eps1", "broadband erasure probability");
        add_key(s, f, "--eps2", "eps2", "intermittent erasure probability");
        add_key(s, f, "--threads", "threads", "worker threads (0 = all cores)");
    }
    add_key(optimize, f, "--smin", "smin", "throughput floor");
    CLI11_PARSE(app, argc, argv);

    slicing::Command cmd = analyze->parsed()    ? slicing::Command::Analyze
                           : simulate->parsed() ? slicing::Command::Simulate
                           : sweep->parsed()    ? slicing::Command::Sweep
                                                : slicing::Command::Optimize;
    std::vector<std::pair<std::string, std::string>> overrides = f.named;
    for (const std::string& kv : f.set) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "config error: --set expects key=value, got '" << kv << "'\n";
            return slicing::exit_code::config;
        }
        overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    slicing::RunSpec spec;
    try {
        spec = slicing::parse_runspec(cmd, f.config, f.out, overrides);
    } catch (const slicing::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return slicing::exit_code::io;
    } catch (const slicing::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return slicing::exit_code::config;
    }
    return slicing::execute(spec, std::cerr);
}

// scalesentry: run conditions, aggregate results.
#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "scalesentry/errors.hpp"
#include "scalesentry/harness.hpp"

namespace ss = scalesentry;

namespace {

void print_aggregate(const ss::ExperimentOutcome& outcome) {
    const auto& a = outcome.aggregate;
    std::cout << "condition " << a.condition_id << ": nginx_attacks=" << a.nginx_attacks_received
              << " five_xx=" << a.five_xx_count << " honeypot_attacks=" << a.honeypot_attacks_received
              << " total_time_s=" << a.total_request_time_s << " f1=" << a.first_f1
              << " ip_future_rate=" << a.first_ip_future_rate << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attack-aware autoscaling simulator"};
    app.require_subcommand(1);

    int condition = 1;
    int reps = 3;
    std::uint64_t seed = 42;
    double tick = 1.0;
    std::string out = "out";
    std::vector<std::string> overrides;

    auto* run = app.add_subcommand("run", "Run one condition for several repetitions");
    run->add_option("--condition", condition, "Condition id (1-6)")->required()->check(CLI::Range(1, 6));
    run->add_option("--reps", reps, "Repetitions")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "Master seed");
    run->add_option("--tick", tick, "Tick length in seconds")->check(CLI::PositiveNumber);
    run->add_option("--out", out, "Output directory");
    run->add_option("--override", overrides, "section.field=value, repeatable");

    auto* rep = app.add_subcommand("report", "Aggregate runs/*/result.json into results.csv and summary.csv");
    rep->add_option("--out", out, "Output directory");

    auto* all = app.add_subcommand("all", "Run conditions 1-6 and write the report");
    all->add_option("--reps", reps, "Repetitions")->check(CLI::PositiveNumber);
    all->add_option("--seed", seed, "Master seed");
    all->add_option("--tick", tick, "Tick length in seconds")->check(CLI::PositiveNumber);
    all->add_option("--out", out, "Output directory");
    all->add_option("--override", overrides, "section.field=value, repeatable");

    CLI11_PARSE(app, argc, argv);

    try {
        auto experiment = [&](int id) {
            ss::ExperimentConfig cfg;
            cfg.condition_id = id;
            cfg.repetitions = reps;
            cfg.master_seed = seed;
            cfg.tick_s = tick;
            cfg.output_dir = out;
            cfg.overrides = overrides;
            print_aggregate(ss::run_experiment(cfg));
        };
        if (*run) {
            experiment(condition);
            ss::report(out);
        } else if (*all) {
            for (int id = 1; id <= 6; ++id) experiment(id);
            ss::report(out);
        } else if (*rep) {
            const auto rows = ss::report(out);
            std::cout << "aggregated " << rows.size() << " runs into " << (std::filesystem::path(out) / "results.csv")
                      << '\n';
        }
    } catch (const ss::ConfigError& e) {
        std::cerr << "scalesentry: configuration error: " << e.what() << '\n';
        return 2;
    } catch (const ss::IoError& e) {
        std::cerr << "scalesentry: I/O error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "scalesentry: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

// tmtele: command-line front end for the teleportation link simulator.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tmtele/runner/config_io.hpp"
#include "tmtele/runner/json_io.hpp"
#include "tmtele/runner/limits.hpp"
#include "tmtele/runner/scenarios.hpp"

namespace fs = std::filesystem;
using namespace tmtele;

namespace {

enum Exit : int { ok = 0, parse = 2, validation = 3, infeasible = 4, runtime = 5 };

ExperimentConfig preset(const std::string& scenario) {
    if (scenario == "short-distance") return runner::short_distance_preset();
    if (scenario == "long-distance") return runner::long_distance_preset();
    if (scenario == "rate-sweep") return runner::rate_sweep_preset();
    throw std::invalid_argument("unknown scenario " + scenario);
}

ExperimentConfig resolve(ExperimentConfig base, const std::string& config, const std::string& calibration, bool strict) {
    if (!config.empty()) base = runner::load_config(config, base);
    if (!calibration.empty()) base = runner::load_config(calibration, base);
    if (strict) base.strict = true;
    base.validate();
    return base;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_outputs(const fs::path& dir, const runner::ScenarioRun& run) {
    fs::create_directories(dir);
    write_file(dir / "report.json", runner::to_json_text(run.result));
    write_file(dir / "histogram.csv", run.histogram.to_csv());
    std::ostringstream plot;
    runner::write_plot(plot, run.plot);
    write_file(dir / run.plot_name, plot.str());
}

void print_summary(const runner::ScenarioResult& r) {
    auto show = [](const char* name, const std::optional<analysis::Estimate>& e) {
        if (e) std::printf("  %-12s %.4f +- %.4f\n", name, e->value, e->sigma);
        else std::printf("  %-12s n/a\n", name);
    };
    std::printf("%s: %llu attempts per setting, seed %llu\n", r.scenario.c_str(),
                static_cast<unsigned long long>(r.attempts_per_setting), static_cast<unsigned long long>(r.seed));
    std::printf(" timing margin %.3g us, stored modes %d-%d\n", r.timing.remaining_margin_us, r.timing.in_flight_steady_min,
                r.timing.in_flight_max);
    if (r.report) {
        std::printf(" sampled\n");
        show("F_poles", r.report->poles);
        show("F_eq", r.report->equator);
        show("F_mean", r.report->mean);
        show("F_eq uncond", r.report->unconditional_equator);
    }
    if (r.expected) {
        std::printf(" model expectation\n");
        show("F_poles", r.expected->poles);
        show("F_eq", r.expected->equator);
        show("F_mean", r.expected->mean);
        show("F_eq uncond", r.expected->unconditional_equator);
    }
    if (r.rate_sweep) {
        for (const auto& p : r.rate_sweep->points) {
            std::printf("  %7.1f kHz  expected %.4f", p.rate_khz, p.expected_fidelity);
            if (p.fidelity) std::printf("  sampled %.4f +- %.4f", p.fidelity->value, p.fidelity->sigma);
            std::printf("  modes %d-%d\n", p.in_flight_steady_min, p.in_flight_max);
        }
        if (r.rate_sweep->p_value)
            std::printf("  chi2 %.3f / %d dof, p = %.3f\n", *r.rate_sweep->chi2, r.rate_sweep->dof, *r.rate_sweep->p_value);
    }
    for (const auto& w : r.warnings) std::printf(" warning: %s\n", w.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporally multiplexed teleportation link simulator"};
    app.require_subcommand(1);

    std::string scenario, config, calibration, out_dir = "out";
    std::optional<std::uint64_t> seed, attempts;
    bool strict = false, records = false;
    std::vector<double> rates;
    double target = runner::default_calibration_target;

    auto* run = app.add_subcommand("run", "run a scenario");
    run->add_option("scenario", scenario, "short-distance | long-distance | rate-sweep")
        ->required()
        ->check(CLI::IsMember({"short-distance", "long-distance", "rate-sweep"}));
    run->add_option("--config", config, "YAML config overlaid on the scenario preset");
    run->add_option("--calibration", calibration, "calibration file written by `calibrate`");
    run->add_option("--seed", seed, "master seed (default: campaign.master_seed)");
    run->add_option("--attempts", attempts, "attempts per analyzer setting (default: campaign.n_attempts)");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--rates", rates, "rate-sweep rates in kHz")->delimiter(',');
    run->add_flag("--strict", strict, "refuse configurations whose heralds arrive after retrieval");
    run->add_flag("--records", records, "also write non-empty trial records as NDJSON");

    auto* cal = app.add_subcommand("calibrate", "fit werner_white_noise to the short-distance equator fidelity");
    cal->add_option("--config", config, "YAML config overlaid on the short-distance preset");
    cal->add_option("--target", target, "target equator fidelity");
    cal->add_option("--out", out_dir, "output directory");

    auto* check = app.add_subcommand("validate-config", "parse and validate a config");
    check->add_option("config", config, "config path")->required();
    check->add_flag("--strict", strict, "apply strict timing checks");

    auto* lim = app.add_subcommand("limits", "print the rate-limit table");
    lim->add_option("--config", config, "YAML config overlaid on the long-distance preset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::parse;
    }

    try {
        if (*run) {
            ExperimentConfig cfg = resolve(preset(scenario), config, calibration, strict);
            const std::uint64_t s = seed.value_or(cfg.campaign.master_seed);
            const std::uint64_t n = attempts.value_or(cfg.campaign.n_attempts);
            if (n < 1) throw ValidationError("--attempts", "must be >= 1");
            cfg.check_timing();
            fs::create_directories(out_dir);
            std::optional<runner::ScenarioRun> result;
            if (scenario == "rate-sweep") {
                result = runner::scenario_rate_sweep(cfg, rates.empty() ? runner::default_sweep_rates_khz() : rates, n, s);
            } else {
                std::ofstream ndjson;
                runner::RecordSink sink;
                if (records) {
                    ndjson.open(fs::path(out_dir) / "records.ndjson", std::ios::binary);
                    sink = [&](const std::string& setting, const protocol::TrialRecord& r) {
                        if (r.analyzer_windows != 0 || heralded(r.outcome)) ndjson << runner::record_line(setting, r) << '\n';
                    };
                }
                result = runner::scenario_teleportation(scenario, cfg, n, s, sink);
            }
            write_outputs(out_dir, *result);
            print_summary(result->result);
        } else if (*cal) {
            ExperimentConfig cfg = resolve(runner::short_distance_preset(), config, "", false);
            const auto summary = runner::calibrate(cfg, target);
            fs::create_directories(out_dir);
            write_file(fs::path(out_dir) / "calibration.yaml", runner::calibration_yaml(summary));
            runner::ScenarioResult r;
            r.scenario = "calibrate";
            r.config = cfg;
            r.config.spdc.werner_white_noise = summary.werner_white_noise;
            r.calibration = summary;
            r.timing = runner::TimingSummary{};
            write_file(fs::path(out_dir) / "calibration.json", runner::to_json_text(r));
            std::printf("werner_white_noise = %.6f (F_eq %.5f, target %.4f, %d evaluations)\n", summary.werner_white_noise,
                        summary.achieved, summary.target, summary.iterations);
        } else if (*check) {
            ExperimentConfig cfg = resolve(runner::short_distance_preset(), config, "", strict);
            cfg.check_timing();
            std::printf("%s: valid (storage margin %.3g us)\n", config.c_str(), cfg.budget().remaining_margin_us());
        } else if (*lim) {
            const ExperimentConfig cfg = resolve(runner::long_distance_preset(), config, "", false);
            std::fputs(runner::limits_table(cfg).c_str(), stdout);
        }
    } catch (const runner::ConfigParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Exit::parse;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return Exit::validation;
    } catch (const InfeasibleTimingError& e) {
        std::cerr << "infeasible timing: " << e.what() << '\n';
        return Exit::infeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Exit::runtime;
    }
    return Exit::ok;
}

#pragma once

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tmtele/analysis/report.hpp"
#include "tmtele/protocol/campaign.hpp"
#include "tmtele/runner/result.hpp"

namespace tmtele::runner {

// Short distance: a few metres of fiber, 10 us storage, 244 kHz.
inline ExperimentConfig short_distance_preset() { return ExperimentConfig{}; }

// 1 km of fiber (5 us each way) and 17.5 us storage.
inline ExperimentConfig long_distance_preset() {
    ExperimentConfig c;
    c.fiber.length_km = 1.0;
    c.memory.storage_time_us = 17.5;
    return c;
}

inline ExperimentConfig rate_sweep_preset() { return long_distance_preset(); }

inline const std::vector<double>& default_sweep_rates_khz() {
    static const std::vector<double> r{133.0, 178.0, 244.0, 323.0};
    return r;
}

inline constexpr double default_calibration_target = 0.88;
inline constexpr std::uint64_t timing_probe_attempts = 20000;

struct SettingPlan {
    std::string state;
    std::string role;  // parallel, orthogonal or pole
    devices::InputQubitSpec input;
    devices::AnalyzerSetting analyzer;

    std::string label() const { return analysis::setting_label(state, role); }
};

// The teleported state of alpha|e> + e^{i phi} beta|l> is e^{i phi} beta|e> + alpha|l>;
// for the equator states this is |e> + e^{-i phi}|l> up to a global phase.
inline double parallel_theta(const devices::InputQubitSpec& spec) { return -spec.phi; }

inline std::vector<SettingPlan> teleportation_plan(const ExperimentConfig& cfg,
                                                   std::vector<devices::NamedQubit> states = {
                                                       devices::NamedQubit::Early, devices::NamedQubit::Late,
                                                       devices::NamedQubit::Plus, devices::NamedQubit::R}) {
    std::vector<SettingPlan> plan;
    for (devices::NamedQubit q : states) {
        const auto spec = devices::named_qubit(q, cfg.input_qubit.mean_photon_number, cfg.input_qubit.overlap);
        auto with = [&](devices::AnalyzerSetting a) {
            a.analysis_afc_storage_ns = cfg.analyzer.analysis_afc_storage_ns;
            a.analysis_split = cfg.analyzer.analysis_split;
            return a;
        };
        const std::string name = devices::to_string(q);
        if (q == devices::NamedQubit::Early || q == devices::NamedQubit::Late) {
            plan.push_back({name, "pole", spec, with(devices::AnalyzerSetting::pole())});
        } else {
            const double theta = parallel_theta(spec);
            plan.push_back({name, "parallel", spec, with(devices::AnalyzerSetting::equator(theta))});
            plan.push_back({name, "orthogonal", spec, with(devices::AnalyzerSetting::equator(theta + std::numbers::pi))});
        }
    }
    return plan;
}

// Independent master seed per setting, derived from the label.
inline std::uint64_t setting_seed(std::uint64_t master_seed, const std::string& label) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : label) h = (h ^ c) * 0x100000001b3ull;
    return protocol::splitmix64(master_seed ^ h);
}

// Signal-arm efficiency: probability that a heralded signal photon is detected.
inline double herald_efficiency(const ExperimentConfig& cfg) {
    return devices::afc_efficiency(cfg.memory.storage_time_us, cfg.memory) * cfg.detectors.signal.efficiency;
}

struct CampaignOutput {
    analysis::Histogram histogram;
    analysis::ExpectedHistogram expected;
    std::vector<std::string> warnings;
};

using RecordSink = std::function<void(const std::string& setting, const protocol::TrialRecord&)>;

// Runs every setting of the plan for n attempts. With a record sink the event
// scheduler produces the counts, otherwise the statistics path does; both give
// identical histograms.
inline CampaignOutput run_plan(const ExperimentConfig& cfg, const std::vector<SettingPlan>& plan, std::uint64_t n,
                               std::uint64_t master_seed, const RecordSink& sink = {}) {
    CampaignOutput out;
    const bool in_time = protocol::make_schedule(cfg).herald_in_time();
    std::optional<protocol::BsmTable> table;
    std::string table_state;
    for (const SettingPlan& p : plan) {
        if (!table || table_state != p.state) {
            table = protocol::compute_bsm_table(cfg, p.input);
            table_state = p.state;
        }
        const protocol::AttemptModel model(*table, cfg, p.analyzer);
        const std::uint64_t seed = setting_seed(master_seed, p.label());
        protocol::CampaignTally tally;
        if (sink) {
            const std::string label = p.label();
            tally = protocol::run_campaign(cfg, model, n, seed, [&](const protocol::TrialRecord& r) { sink(label, r); }).tally;
        } else {
            tally = protocol::simulate_statistics(cfg, model, n, seed);
        }
        out.histogram.merge(analysis::from_tally(tally, p.label(), model.window_labels()));
        out.expected.merge(analysis::from_expected(protocol::expected_tally(model, in_time), static_cast<double>(n),
                                                   p.label(), model.window_labels()));
        const auto probe = devices::analyze(table->signal.front(), p.analyzer, cfg.detectors.signal);
        if (probe.warning &&
            std::find(out.warnings.begin(), out.warnings.end(), *probe.warning) == out.warnings.end())
            out.warnings.push_back(*probe.warning);
    }
    return out;
}

// Budget plus slot accounting measured by the event scheduler on a prefix of
// the attempt train.
inline TimingSummary timing_summary(const ExperimentConfig& cfg, const protocol::AttemptModel& model, std::uint64_t n,
                                    std::uint64_t seed) {
    const TimingBudget b = cfg.budget();
    TimingSummary t;
    t.one_way_optical_us = b.one_way_optical_us;
    t.classical_return_us = b.classical_return_us;
    t.processing_latency_us = b.processing_latency_us;
    t.storage_time_us = b.storage_time_us;
    t.wait_us = b.wait_us();
    t.remaining_margin_us = b.remaining_margin_us();
    t.feasible = b.feasible();
    t.herald_before_deadline = protocol::make_schedule(cfg).herald_in_time();
    t.in_flight_bound = protocol::max_concurrent_slots(b.storage_time_us, cfg.timing.attempt_period_us);
    t.scheduled_attempts = std::min(n, timing_probe_attempts);
    const auto stats = protocol::run_campaign(cfg, model, t.scheduled_attempts, seed);
    t.in_flight_max = stats.max_in_flight;
    t.in_flight_steady_min = stats.steady_min_in_flight;
    t.heralds_matched = stats.heralds_matched;
    t.heralds_dropped = stats.heralds_dropped;
    return t;
}

struct ScenarioRun {
    ScenarioResult result;
    analysis::Histogram histogram;
    std::vector<std::pair<std::string, double>> plot;  // two-column plot data
    std::string plot_name;
};

inline std::optional<analysis::FidelityReport> try_report(const analysis::Histogram& h, const analysis::ClassicalBounds& b) {
    if (h.empty()) return std::nullopt;
    return analysis::report(h, b);
}

// Teleportation of e, l, plus and R with parallel and orthogonal analyzers.
inline ScenarioRun scenario_teleportation(const std::string& name, const ExperimentConfig& cfg, std::uint64_t n,
                                          std::uint64_t seed, const RecordSink& sink = {}) {
    cfg.validate();
    cfg.check_timing();
    ScenarioRun run;
    ScenarioResult& r = run.result;
    r.scenario = name;
    r.seed = seed;
    r.attempts_per_setting = n;
    r.config = cfg;
    r.config.campaign = {n, seed};

    const auto plan = teleportation_plan(cfg);
    CampaignOutput out = run_plan(cfg, plan, n, seed, sink);
    const auto bounds = analysis::classical_bounds(cfg.input_qubit.mean_photon_number, herald_efficiency(cfg));
    r.report = try_report(out.histogram, bounds);
    r.expected = analysis::report(out.expected, bounds);
    r.warnings = std::move(out.warnings);

    const auto& probe_plan = plan.back();
    const protocol::AttemptModel probe(cfg, probe_plan.input, probe_plan.analyzer);
    r.timing = timing_summary(cfg, probe, n, setting_seed(seed, probe_plan.label()));
    if (!r.timing.herald_before_deadline)
        r.warnings.push_back("heralds reach Alice after the feed-forward deadline; heralded attempts are counted as missed");
    run.histogram = std::move(out.histogram);
    run.plot_name = "state_fidelity.tsv";
    for (const auto& s : r.report ? r.report->states : std::vector<analysis::StateResult>{})
        if (s.fidelity) run.plot.emplace_back(s.state, s.fidelity->value);
    return run;
}

namespace detail {

// Mean equator fidelity of the model expectation (seed independent).
inline double expected_equator_fidelity(const ExperimentConfig& cfg) {
    const bool in_time = protocol::make_schedule(cfg).herald_in_time();
    analysis::ExpectedHistogram h;
    for (const SettingPlan& p : teleportation_plan(cfg, {devices::NamedQubit::Plus, devices::NamedQubit::R})) {
        const protocol::AttemptModel m(cfg, p.input, p.analyzer);
        h.merge(analysis::from_expected(protocol::expected_tally(m, in_time), 1.0, p.label(), m.window_labels()));
    }
    const auto rep = analysis::report(h, analysis::ClassicalBounds{});
    if (!rep.equator) throw std::runtime_error("calibration: no equator coincidences in the model");
    return rep.equator->value;
}

}  // namespace detail

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One-dimensional root find of werner_white_noise against the expected
// short-distance equator fidelity.
inline CalibrationSummary calibrate(ExperimentConfig cfg, double target = default_calibration_target, double tolerance = 0.002) {
    cfg.validate();
    auto f = [&](double w) {
        cfg.spdc.werner_white_noise = w;
        return detail::expected_equator_fidelity(cfg);
    };
    CalibrationSummary s;
    s.target = target;
    const double f0 = f(0.0);
    if (f0 < target - tolerance)
        throw CalibrationError("calibration target " + std::to_string(target) + " unreachable: noiseless F_eq is " +
                               std::to_string(f0));
    if (f0 <= target + tolerance && f0 <= target) {
        s.werner_white_noise = 0.0;
        s.achieved = f0;
        s.iterations = 1;
        return s;
    }
    const double f1 = f(1.0);
    if (f1 > target + tolerance)
        throw CalibrationError("calibration target " + std::to_string(target) + " unreachable: F_eq at full noise is " +
                               std::to_string(f1));
    std::uintmax_t iterations = 60;
    const auto [lo, hi] = boost::math::tools::toms748_solve(
        [&](double w) { return f(w) - target; }, 0.0, 1.0, f0 - target, f1 - target,
        [](double a, double b) { return std::abs(b - a) < 1e-9; }, iterations);
    s.werner_white_noise = 0.5 * (lo + hi);
    s.achieved = f(s.werner_white_noise);
    s.iterations = static_cast<int>(iterations) + 2;
    if (std::abs(s.achieved - target) > tolerance) throw CalibrationError("calibration did not converge");
    return s;
}

inline std::string calibration_yaml(const CalibrationSummary& s) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "# werner_white_noise fitted to the short-distance equator fidelity %.4f (achieved %.6f)\n"
                  "spdc:\n  werner_white_noise: %.17g\n",
                  s.target, s.achieved, s.werner_white_noise);
    return buf;
}

class RateError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Fidelity of |R> at several attempt rates; everything but the period is
// shared between the points.
inline ScenarioRun scenario_rate_sweep(const ExperimentConfig& cfg, const std::vector<double>& rates_khz, std::uint64_t n,
                                       std::uint64_t seed) {
    cfg.validate();
    cfg.check_timing();
    if (rates_khz.empty()) throw RateError("rates", "at least one rate is required");
    const double max_rate_khz = protocol::max_multiplexed_rate_mhz(cfg.timing.qubit_duration_ns) * 1000.0;
    for (double r : rates_khz)
        if (!(r > 0.0) || r > max_rate_khz * (1.0 + 1e-12))
            throw RateError("rates", "rate " + std::to_string(r) + " kHz outside (0, " + std::to_string(max_rate_khz) +
                                         "] kHz set by the qubit duration");

    ScenarioRun run;
    ScenarioResult& res = run.result;
    res.scenario = "rate-sweep";
    res.seed = seed;
    res.attempts_per_setting = n;
    res.config = cfg;
    res.config.campaign = {n, seed};
    RateSweep sweep;
    sweep.single_mode_limit_khz = protocol::max_single_mode_rate_khz(cfg.fiber);
    sweep.multiplexed_limit_mhz = protocol::max_multiplexed_rate_mhz(cfg.timing.qubit_duration_ns);

    const auto plan = teleportation_plan(cfg, {devices::NamedQubit::R});
    const protocol::BsmTable table = protocol::compute_bsm_table(cfg, plan.front().input);
    const protocol::AttemptModel par(table, cfg, plan[0].analyzer), orth(table, cfg, plan[1].analyzer);
    const auto bounds = analysis::ClassicalBounds{};

    for (double rate : rates_khz) {
        ExperimentConfig c = cfg;
        c.timing.attempt_period_us = 1000.0 / rate;
        c.validate();
        c.check_timing();
        const bool in_time = protocol::make_schedule(c).herald_in_time();
        char tag[32];
        std::snprintf(tag, sizeof tag, "@%g", rate);
        analysis::Histogram h;
        analysis::ExpectedHistogram e;
        for (const auto* m : {&par, &orth}) {
            const SettingPlan& p = m == &par ? plan[0] : plan[1];
            const auto tally = protocol::simulate_statistics(c, *m, n, setting_seed(seed, p.label() + tag));
            h.merge(analysis::from_tally(tally, p.label(), m->window_labels()));
            e.merge(analysis::from_expected(protocol::expected_tally(*m, in_time), static_cast<double>(n), p.label(),
                                            m->window_labels()));
        }
        RatePoint pt;
        pt.rate_khz = rate;
        pt.attempt_period_us = c.timing.attempt_period_us;
        if (auto rep = try_report(h, bounds); rep && rep->equator) pt.fidelity = rep->equator;
        pt.expected_fidelity = analysis::report(e, bounds).equator->value;
        const auto timing = timing_summary(c, par, n, seed);
        pt.in_flight_max = timing.in_flight_max;
        pt.in_flight_steady_min = timing.in_flight_steady_min;
        sweep.points.push_back(pt);
        for (const auto& [k, v] : h.cells())
            run.histogram.add(std::get<0>(k) + tag, std::get<1>(k), std::get<2>(k), v);
        if (pt.fidelity) run.plot.emplace_back(tag + 1, pt.fidelity->value);
    }

    // Constant-fidelity hypothesis.
    double sw = 0.0, swf = 0.0, s2 = 0.0, lo = 1.0, hi = 0.0;
    int used = 0;
    for (const auto& p : sweep.points)
        if (p.fidelity && p.fidelity->sigma > 0.0) {
            const double w = 1.0 / (p.fidelity->sigma * p.fidelity->sigma);
            sw += w;
            swf += w * p.fidelity->value;
            s2 += p.fidelity->sigma * p.fidelity->sigma;
            lo = std::min(lo, p.fidelity->value);
            hi = std::max(hi, p.fidelity->value);
            ++used;
        }
    if (used >= 2) {
        const double mean = swf / sw;
        double chi2 = 0.0;
        for (const auto& p : sweep.points)
            if (p.fidelity && p.fidelity->sigma > 0.0) chi2 += std::pow((p.fidelity->value - mean) / p.fidelity->sigma, 2);
        sweep.weighted_mean = mean;
        sweep.chi2 = chi2;
        sweep.dof = used - 1;
        sweep.p_value = boost::math::gamma_q(0.5 * sweep.dof, 0.5 * chi2);
        sweep.spread = hi - lo;
        sweep.pooled_sigma = std::sqrt(s2 / used);
    } else {
        res.warnings.push_back("too few coincidences for the constant-fidelity test");
    }

    res.timing = timing_summary(cfg, par, n, seed);
    res.rate_sweep = std::move(sweep);
    run.plot_name = "rate_fidelity.tsv";
    return run;
}

inline void write_plot(std::ostream& os, const std::vector<std::pair<std::string, double>>& rows) {
    for (const auto& [x, y] : rows) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.10g", y);
        os << x << '\t' << buf << '\n';
    }
}

inline std::string record_line(const std::string& setting, const protocol::TrialRecord& r) {
    nlohmann::ordered_json j{{"setting", setting},
                             {"attempt_id", r.attempt_id},
                             {"launch_time_us", r.launch_time_us},
                             {"bsm_pattern", r.bsm_pattern},
                             {"outcome", to_string(r.outcome)},
                             {"feed_forward", to_string(r.feed_forward)},
                             {"herald_arrival_us", r.herald_arrival_us ? nlohmann::ordered_json(*r.herald_arrival_us)
                                                                       : nlohmann::ordered_json(nullptr)},
                             {"analyzer_windows", r.analyzer_windows}};
    return j.dump();
}

}  // namespace tmtele::runner

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tmtele/analysis/report.hpp"
#include "tmtele/config/experiment.hpp"

namespace tmtele::runner {

struct TimingSummary {
    double one_way_optical_us = 0.0;
    double classical_return_us = 0.0;
    double processing_latency_us = 0.0;
    double storage_time_us = 0.0;
    double wait_us = 0.0;
    double remaining_margin_us = 0.0;
    bool feasible = true;
    bool herald_before_deadline = true;
    int in_flight_max = 0;           // measured by the event scheduler
    int in_flight_steady_min = 0;
    int in_flight_bound = 0;         // ceil(storage / period)
    std::uint64_t scheduled_attempts = 0;
    std::uint64_t heralds_matched = 0;
    std::uint64_t heralds_dropped = 0;
};

struct RatePoint {
    double rate_khz = 0.0;
    double attempt_period_us = 0.0;
    std::optional<analysis::Estimate> fidelity;  // Monte-Carlo, equator state R
    double expected_fidelity = 0.0;
    int in_flight_max = 0;
    int in_flight_steady_min = 0;
};

struct RateSweep {
    std::vector<RatePoint> points;
    double single_mode_limit_khz = 0.0;
    double multiplexed_limit_mhz = 0.0;
    std::optional<double> weighted_mean;
    std::optional<double> chi2;
    int dof = 0;
    std::optional<double> p_value;  // constant-fidelity hypothesis
    std::optional<double> spread;   // max - min
    std::optional<double> pooled_sigma;
};

struct CalibrationSummary {
    double target = 0.0;
    double werner_white_noise = 0.0;
    double achieved = 0.0;
    int iterations = 0;
};

struct ScenarioResult {
    std::string scenario;
    std::uint64_t seed = 0;
    std::uint64_t attempts_per_setting = 0;
    ExperimentConfig config;
    TimingSummary timing;
    std::optional<analysis::FidelityReport> report;  // Monte-Carlo counts
    std::optional<analysis::FidelityReport> expected;  // model expectation for the same attempts
    std::optional<RateSweep> rate_sweep;
    std::optional<CalibrationSummary> calibration;
    std::vector<std::string> warnings;
};

}  // namespace tmtele::runner

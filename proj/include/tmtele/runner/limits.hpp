#pragma once

#include <cstdio>
#include <string>

#include "tmtele/protocol/campaign.hpp"

namespace tmtele::runner {

// Three significant digits, kHz below 1 MHz.
inline std::string format_rate_khz(double khz) {
    char buf[64];
    if (khz >= 1000.0) std::snprintf(buf, sizeof buf, "%.3g MHz", khz / 1000.0);
    else std::snprintf(buf, sizeof buf, "%.3g kHz", khz);
    return buf;
}

inline std::string limits_table(const ExperimentConfig& cfg) {
    const TimingBudget b = cfg.budget();
    const double period = cfg.timing.attempt_period_us;
    std::string out;
    char line[256];
    auto row = [&](const char* name, const std::string& value, const std::string& basis) {
        std::snprintf(line, sizeof line, "%-26s %-12s %s\n", name, value.c_str(), basis.c_str());
        out += line;
    };
    row("limit", "value", "from");
    if (cfg.fiber.length_km > 0.0) {
        std::snprintf(line, sizeof line, "%g km fiber, %g us one way", cfg.fiber.length_km, b.one_way_optical_us);
        row("single-mode rate", format_rate_khz(protocol::max_single_mode_rate_khz(cfg.fiber)), line);
    } else {
        row("single-mode rate", "unbounded", "no fiber");
    }
    std::snprintf(line, sizeof line, "%g ns time-bin qubit", cfg.timing.qubit_duration_ns);
    row("multiplexed rate", format_rate_khz(protocol::max_multiplexed_rate_mhz(cfg.timing.qubit_duration_ns) * 1000.0), line);
    std::snprintf(line, sizeof line, "%g us attempt period", period);
    row("configured rate", format_rate_khz(1000.0 / period), line);
    std::snprintf(line, sizeof line, "%g us storage / %g us period", b.storage_time_us, period);
    row("stored modes (steady)",
        std::to_string(protocol::steady_min_concurrent_slots(b.storage_time_us, period)) + "-" +
            std::to_string(protocol::max_concurrent_slots(b.storage_time_us, period)),
        line);
    std::snprintf(line, sizeof line, "%.3g us", b.remaining_margin_us());
    std::string basis = "storage - (one way + return + processing)";
    row("storage margin", line, basis);
    return out;
}

}  // namespace tmtele::runner

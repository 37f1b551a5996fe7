#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "tmtele/devices/params.hpp"
#include "tmtele/fock/detection.hpp"

namespace tmtele {

// Validation failure with the dotted path of the offending field.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

class InfeasibleTimingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TimingParams {
    double attempt_period_us = 4.1;
    double bin_separation_ns = 420.0;
    double qubit_duration_ns = 840.0;
    std::optional<double> classical_return_us;  // defaults to the fiber delay
    double processing_latency_us = 0.0;
};

struct DetectorSet {
    fock::ThresholdDetectorParams d1{0.8, 1e-5, 100.0};
    fock::ThresholdDetectorParams d2{0.8, 1e-5, 100.0};
    fock::ThresholdDetectorParams signal{0.0745, 1e-5, 0.0};
};

struct CampaignParams {
    std::uint64_t n_attempts = 1'000'000;
    std::uint64_t master_seed = 1;
};

// Storage left once the herald has reached Alice and been processed.
struct TimingBudget {
    double one_way_optical_us = 0.0;
    double classical_return_us = 0.0;
    double processing_latency_us = 0.0;
    double storage_time_us = 0.0;

    double wait_us() const { return one_way_optical_us + classical_return_us + processing_latency_us; }
    double remaining_margin_us() const { return storage_time_us - wait_us(); }
    bool feasible() const { return remaining_margin_us() >= 0.0; }
};

struct ExperimentConfig {
    int cutoff = 2;
    double soundness = 1e-4;
    devices::SpdcSourceParams spdc;
    devices::InputQubitSpec input_qubit = devices::named_qubit(devices::NamedQubit::R);
    std::optional<devices::NamedQubit> input_name = devices::NamedQubit::R;
    devices::AfcMemoryParams memory;
    devices::FiberParams fiber;
    DetectorSet detectors;
    TimingParams timing;
    devices::AnalyzerSetting analyzer;
    CampaignParams campaign;
    bool strict = false;

    double classical_return_us() const {
        return timing.classical_return_us.value_or(fiber.length_km * fiber.delay_us_per_km);
    }

    TimingBudget budget() const {
        return {fiber.length_km * fiber.delay_us_per_km, classical_return_us(), timing.processing_latency_us,
                memory.storage_time_us};
    }

    void validate() const {
        auto wrap = [](const char* field, auto&& fn) {
            try {
                fn();
            } catch (const ValidationError&) {
                throw;
            } catch (const std::invalid_argument& e) {
                std::string msg = e.what();
                const std::string top = std::string(field).substr(0, std::string(field).find('.'));
                if (msg.rfind(top, 0) == 0 && msg.find(':') != std::string::npos) {
                    const auto colon = msg.find(':');
                    throw ValidationError(msg.substr(0, colon), msg.substr(colon + 2));
                }
                throw ValidationError(field, msg);
            }
        };
        if (cutoff < 1 || cutoff > 8) throw ValidationError("cutoff", "must be in [1, 8]");
        if (!(soundness > 0.0 && soundness < 1.0)) throw ValidationError("soundness", "must be in (0,1)");
        wrap("spdc", [&] { spdc.validate(); });
        wrap("input_qubit", [&] { input_qubit.validate(); });
        wrap("memory", [&] { memory.validate(); });
        wrap("fiber", [&] { fiber.validate(); });
        wrap("detectors.d1", [&] { detectors.d1.validate(); });
        wrap("detectors.d2", [&] { detectors.d2.validate(); });
        wrap("detectors.signal", [&] { detectors.signal.validate(); });
        wrap("analyzer", [&] { analyzer.validate(); });

        if (!(timing.bin_separation_ns > 0.0)) throw ValidationError("timing.bin_separation_ns", "must be > 0");
        if (!(timing.qubit_duration_ns > 0.0)) throw ValidationError("timing.qubit_duration_ns", "must be > 0");
        if (!(timing.attempt_period_us > 0.0)) throw ValidationError("timing.attempt_period_us", "must be > 0");
        if (timing.attempt_period_us * 1000.0 < timing.qubit_duration_ns - 1e-9)
            throw ValidationError("timing.attempt_period_us",
                                  "must be >= timing.qubit_duration_ns (attempt windows would overlap)");
        if (timing.bin_separation_ns > timing.qubit_duration_ns / 2.0 + 1e-9)
            throw ValidationError("timing.bin_separation_ns", "must be <= timing.qubit_duration_ns / 2");
        if (timing.classical_return_us && !(*timing.classical_return_us >= 0.0))
            throw ValidationError("timing.classical_return_us", "must be >= 0");
        if (!(timing.processing_latency_us >= 0.0)) throw ValidationError("timing.processing_latency_us", "must be >= 0");
        if (std::abs(analyzer.analysis_afc_storage_ns - timing.bin_separation_ns) > 1e-9)
            throw ValidationError("analyzer.analysis_afc_storage_ns", "must equal timing.bin_separation_ns for the bins to overlap");
        const double cross_gap_ns = timing.attempt_period_us * 1000.0 - timing.bin_separation_ns;
        for (const auto* name : {"d1", "d2"}) {
            const auto& d = std::string(name) == "d1" ? detectors.d1 : detectors.d2;
            if (d.dead_time_ns >= cross_gap_ns)
                throw ValidationError(std::string("detectors.") + name + ".dead_time_ns",
                                      "must be shorter than the gap between consecutive attempts");
        }
        if (campaign.n_attempts < 1) throw ValidationError("campaign.n_attempts", "must be >= 1");
    }

    // Strict mode refuses configurations where the herald reaches Alice after
    // the stored qubit has left the memory.
    void check_timing() const {
        const TimingBudget b = budget();
        if (strict && !b.feasible())
            throw InfeasibleTimingError("herald arrives " + std::to_string(-b.remaining_margin_us()) +
                                        " us after retrieval (storage " + std::to_string(b.storage_time_us) +
                                        " us < wait " + std::to_string(b.wait_us()) + " us)");
    }
};

}  // namespace tmtele

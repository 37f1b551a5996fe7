#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tmtele/fock/density_operator.hpp"

namespace tmtele::protocol {

enum class Detector : std::uint8_t { D1, D2 };
enum class Bin : std::uint8_t { Early, Late };

struct Click {
    Detector detector = Detector::D1;
    Bin bin = Bin::Early;
    friend bool operator==(const Click&, const Click&) = default;
};

// Bit layout of a four-detector click pattern.
inline constexpr unsigned d1_early_bit = 1u;
inline constexpr unsigned d2_early_bit = 2u;
inline constexpr unsigned d1_late_bit = 4u;
inline constexpr unsigned d2_late_bit = 8u;

constexpr unsigned click_bit(Click c) {
    return (c.detector == Detector::D1 ? 1u : 2u) << (c.bin == Bin::Late ? 2 : 0);
}

inline std::vector<Click> clicks_from_pattern(unsigned pattern) {
    std::vector<Click> out;
    for (Bin b : {Bin::Early, Bin::Late})
        for (Detector d : {Detector::D1, Detector::D2})
            if (pattern & click_bit({d, b})) out.push_back({d, b});
    return out;
}

inline unsigned pattern_from_clicks(const std::vector<Click>& clicks) {
    unsigned p = 0;
    for (const Click& c : clicks) p |= click_bit(c);
    return p;
}

enum class BellOutcome : std::uint8_t { PsiPlus, PsiMinus, NoHerald };

inline std::string to_string(BellOutcome o) {
    switch (o) {
        case BellOutcome::PsiPlus: return "psi_plus";
        case BellOutcome::PsiMinus: return "psi_minus";
        case BellOutcome::NoHerald: return "no_herald";
    }
    return "?";
}

constexpr bool heralded(BellOutcome o) { return o != BellOutcome::NoHerald; }

// Simultaneous events are processed in declaration order, then by attempt id.
enum class EventKind : std::uint8_t {
    AttemptLaunched,
    PhotonArrivesAtBSM,
    DetectorClick,
    HeraldMessage,
    MemoryEmission,
    FeedForwardApplied,
};

struct Event {
    double timestamp_us = 0.0;
    EventKind kind = EventKind::AttemptLaunched;
    std::uint64_t attempt_id = 0;
    Click click{};  // DetectorClick only

    friend bool operator<(const Event& a, const Event& b) {
        if (a.timestamp_us != b.timestamp_us) return a.timestamp_us < b.timestamp_us;
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.attempt_id < b.attempt_id;
    }
    friend bool operator>(const Event& a, const Event& b) { return b < a; }
};

struct HeraldMessage {
    std::uint64_t attempt_id = 0;
    BellOutcome outcome = BellOutcome::NoHerald;
    double send_time_us = 0.0;
    double arrival_time_us = 0.0;
};

enum class FeedForwardStatus : std::uint8_t { NotHeralded, Applied, NotNeeded, Missed };

inline std::string to_string(FeedForwardStatus s) {
    switch (s) {
        case FeedForwardStatus::NotHeralded: return "not_heralded";
        case FeedForwardStatus::Applied: return "applied";
        case FeedForwardStatus::NotNeeded: return "not_needed";
        case FeedForwardStatus::Missed: return "missed";
    }
    return "?";
}

// One stored temporal mode of the memory. Every attempt occupies a slot; only
// heralded attempts carry a conditional signal state.
struct MemorySlot {
    std::uint64_t attempt_id = 0;
    double absorb_time_us = 0.0;
    double emission_time_us = 0.0;
    bool feed_forward_pending = false;
    bool uncorrected = false;
    std::optional<fock::DensityOperator> conditional_state;

    bool in_flight(double now_us) const { return absorb_time_us <= now_us && now_us < emission_time_us; }
};

// Per-attempt output of a campaign.
struct TrialRecord {
    std::uint64_t attempt_id = 0;
    double launch_time_us = 0.0;
    unsigned bsm_pattern = 0;  // after the dead-time filter
    BellOutcome outcome = BellOutcome::NoHerald;
    FeedForwardStatus feed_forward = FeedForwardStatus::NotHeralded;
    std::optional<double> herald_arrival_us;
    unsigned analyzer_windows = 0;  // bit i: window i clicked

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

}  // namespace tmtele::protocol

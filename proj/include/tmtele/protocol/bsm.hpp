#pragma once

#include <algorithm>
#include <vector>

#include "tmtele/protocol/types.hpp"

namespace tmtele::protocol {

// Removes a late-bin click that follows an early-bin click on the same
// detector within the dead time, and duplicate (detector, bin) entries.
inline std::vector<Click> apply_dead_time(std::vector<Click> clicks, double dead_time_d1_ns, double dead_time_d2_ns,
                                          double bin_separation_ns) {
    std::vector<Click> out;
    for (const Click& c : clicks)
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    auto blind = [&](Detector d) {
        const double dead = d == Detector::D1 ? dead_time_d1_ns : dead_time_d2_ns;
        const bool early = std::find(out.begin(), out.end(), Click{d, Bin::Early}) != out.end();
        return early && bin_separation_ns <= dead;
    };
    const bool blind1 = blind(Detector::D1), blind2 = blind(Detector::D2);
    std::erase_if(out, [&](const Click& c) {
        return c.bin == Bin::Late && ((c.detector == Detector::D1 && blind1) || (c.detector == Detector::D2 && blind2));
    });
    return out;
}

inline unsigned apply_dead_time(unsigned pattern, double dead_time_d1_ns, double dead_time_d2_ns,
                                double bin_separation_ns) {
    return pattern_from_clicks(
        apply_dead_time(clicks_from_pattern(pattern), dead_time_d1_ns, dead_time_d2_ns, bin_separation_ns));
}

// Two clicks in different bins herald a Psi state: same detector -> Psi+,
// opposite detectors -> Psi-. Every other pattern is discarded.
inline BellOutcome classify_bsm(std::vector<Click> clicks, double dead_time_ns, double bin_separation_ns) {
    clicks = apply_dead_time(std::move(clicks), dead_time_ns, dead_time_ns, bin_separation_ns);
    if (clicks.size() != 2 || clicks[0].bin == clicks[1].bin) return BellOutcome::NoHerald;
    return clicks[0].detector == clicks[1].detector ? BellOutcome::PsiPlus : BellOutcome::PsiMinus;
}

// Classification of an already filtered pattern.
inline BellOutcome classify_pattern(unsigned pattern) {
    switch (pattern) {
        case d1_early_bit | d1_late_bit:
        case d2_early_bit | d2_late_bit: return BellOutcome::PsiPlus;
        case d1_early_bit | d2_late_bit:
        case d2_early_bit | d1_late_bit: return BellOutcome::PsiMinus;
        default: return BellOutcome::NoHerald;
    }
}

}  // namespace tmtele::protocol

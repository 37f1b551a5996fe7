#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "tmtele/fock/ops.hpp"

namespace tmtele::fock {

struct ThresholdDetectorParams {
    double efficiency = 1.0;
    double dark_click_probability = 0.0;  // per gate
    double dead_time_ns = 0.0;

    void validate() const {
        if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw std::invalid_argument("detector efficiency must be in [0,1]");
        if (!(dark_click_probability >= 0.0 && dark_click_probability <= 1.0))
            throw std::invalid_argument("detector dark_click_probability must be in [0,1]");
        if (!(dead_time_ns >= 0.0)) throw std::invalid_argument("detector dead_time must be >= 0");
    }

    // POVM element for "no click" given n photons in the watched modes.
    double no_click(int photons) const {
        return (1.0 - dark_click_probability) * std::pow(1.0 - efficiency, photons);
    }
    double click(int photons) const { return 1.0 - no_click(photons); }
};

struct MeasurementResult {
    bool click = false;
    double probability = 0.0;  // of the realized outcome
    DensityOperator post_state;
};

// Click probability of a threshold detector watching every mode in `modes`.
inline double click_probability(const DensityOperator& state, std::span<const ModeId> modes,
                                 const ThresholdDetectorParams& params) {
    std::vector<std::size_t> pos;
    for (ModeId m : modes) pos.push_back(state.position(m));
    const double tr = state.trace();
    const double no_click = diagonal_expectation(state, [&](std::span<const int> occ) {
        int n = 0;
        for (std::size_t p : pos) n += occ[p];
        return params.no_click(n);
    });
    return tr - no_click;
}

// Samples a threshold detection on `modes` with a uniform draw in [0,1) and
// returns the normalized Lüders post-measurement state (modes stay in the
// register).
inline MeasurementResult measure_threshold(const DensityOperator& state, std::span<const ModeId> modes,
                                           const ThresholdDetectorParams& params, double uniform_draw) {
    params.validate();
    const double tr = state.trace();
    if (!(tr > 0.0)) throw std::domain_error("measure_threshold: zero-trace state");
    std::vector<std::size_t> pos;
    for (ModeId m : modes) pos.push_back(state.position(m));
    const double p_click = std::clamp(click_probability(state, modes, params) / tr, 0.0, 1.0);
    const bool click = uniform_draw < p_click;
    auto photons = [&](BasisKey key) {
        int n = 0;
        for (std::size_t p : pos) n += occupation(key, p);
        return n;
    };
    EntryMap out;
    out.reserve(state.nonzeros());
    for (const auto& [k, v] : state.entries()) {
        const double ek = click ? params.click(photons(k.ket)) : params.no_click(photons(k.ket));
        const double eb = click ? params.click(photons(k.bra)) : params.no_click(photons(k.bra));
        const double w = std::sqrt(std::max(0.0, ek) * std::max(0.0, eb));
        if (w != 0.0) out.emplace(k, v * w);
    }
    DensityOperator post{state.modes(), state.cutoff(), std::move(out)};
    const double p = click ? p_click : 1.0 - p_click;
    return {click, p, p > 0.0 ? post.normalized() : post};
}

inline MeasurementResult measure_threshold(const DensityOperator& state, ModeId mode,
                                           const ThresholdDetectorParams& params, double uniform_draw) {
    const ModeId modes[] = {mode};
    return measure_threshold(state, modes, params, uniform_draw);
}

}  // namespace tmtele::fock

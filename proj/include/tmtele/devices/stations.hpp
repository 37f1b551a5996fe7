#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "tmtele/devices/params.hpp"
#include "tmtele/fock/detection.hpp"
#include "tmtele/fock/ops.hpp"

namespace tmtele::devices {

using fock::DensityOperator;
using fock::ModeId;

inline const std::vector<ModeId>& pair_modes() {
    static const std::vector<ModeId> m{fock::signal_early, fock::signal_late, fock::idler_early, fock::idler_late};
    return m;
}

inline const std::vector<ModeId>& input_modes() {
    static const std::vector<ModeId> m{fock::input_early, fock::input_late, fock::aux_early, fock::aux_late};
    return m;
}

namespace detail {

// Average over {I, X, Z, XZ} on one time-bin channel (X swaps bins, Z is a
// pi phase on the late bin).
inline DensityOperator pauli_twirl(const DensityOperator& rho, ModeId early, ModeId late) {
    const DensityOperator x = fock::swap_modes(rho, early, late);
    const DensityOperator z = fock::phase_shift(rho, late, std::numbers::pi);
    const DensityOperator xz = fock::phase_shift(x, late, std::numbers::pi);
    return (rho + x + z + xz).scaled(0.25);
}

}  // namespace detail

// Pair state over {s_e, s_l, i_e, i_l}: one squeezer per bin, pump-phase
// dephasing between bins, then (1 - w) rho + w T(rho) with T the Pauli twirl
// of both time-bin qubits. On the one-pair sector T(rho) = tr(rho) I/4.
inline DensityOperator build_entangled_state(const SpdcSourceParams& params, int cutoff,
                                             double soundness = fock::default_soundness) {
    params.validate();
    DensityOperator rho = fock::vacuum(pair_modes(), cutoff);
    rho = fock::inject_pair_source(rho, fock::signal_early, fock::idler_early, params.pair_amplitude, soundness);
    rho = fock::inject_pair_source(rho, fock::signal_late, fock::idler_late, params.pair_amplitude, soundness);
    if (params.phase_coherence < 1.0) {
        const DensityOperator flipped = fock::phase_shift(rho, fock::signal_late, std::numbers::pi);
        rho = rho.scaled(0.5 * (1.0 + params.phase_coherence)) + flipped.scaled(0.5 * (1.0 - params.phase_coherence));
    }
    if (params.werner_white_noise > 0.0) {
        DensityOperator twirled = detail::pauli_twirl(rho, fock::signal_early, fock::signal_late);
        twirled = detail::pauli_twirl(twirled, fock::idler_early, fock::idler_late);
        rho = rho.scaled(1.0 - params.werner_white_noise) + twirled.scaled(params.werner_white_noise);
    }
    return rho;
}

// Weak coherent qubit over {q_e, q_l, a_e, a_l}. The matched modes q carry
// amplitude fraction sqrt(overlap); the auxiliary modes a carry the rest and
// never interfere with the idler.
inline DensityOperator build_input_qubit(const InputQubitSpec& spec, int cutoff,
                                         double soundness = fock::default_soundness) {
    spec.validate();
    const double root_mu = std::sqrt(spec.mean_photon_number);
    const fock::complex early = root_mu * spec.alpha;
    const fock::complex late = root_mu * spec.beta * std::polar(1.0, spec.phi);
    const double matched = std::sqrt(spec.overlap);
    const double unmatched = std::sqrt(1.0 - spec.overlap);
    DensityOperator rho = fock::vacuum(input_modes(), cutoff);
    rho = fock::inject_coherent(rho, fock::input_early, early * matched, soundness);
    rho = fock::inject_coherent(rho, fock::input_late, late * matched, soundness);
    rho = fock::inject_coherent(rho, fock::aux_early, early * unmatched, soundness);
    rho = fock::inject_coherent(rho, fock::aux_late, late * unmatched, soundness);
    return rho;
}

// Oracle inputs: exactly one pair in |Phi+> = (|e_s e_i> + |l_s l_i>)/sqrt(2),
// and a single-photon time-bin qubit with the auxiliary modes empty.
inline DensityOperator ideal_pair_state(int cutoff) {
    const double h = std::numbers::sqrt2 / 2.0;
    fock::PureState psi{pair_modes(), {{fock::FockBasisState{1, 0, 1, 0}, h}, {fock::FockBasisState{0, 1, 0, 1}, h}}};
    return fock::to_density(psi, cutoff);
}

inline DensityOperator single_photon_qubit(const InputQubitSpec& spec, int cutoff) {
    spec.validate();
    fock::PureState psi{input_modes(),
                        {{fock::FockBasisState{1, 0, 0, 0}, spec.alpha},
                         {fock::FockBasisState{0, 1, 0, 0}, spec.beta * std::polar(1.0, spec.phi)}}};
    return fock::to_density(psi, cutoff);
}

inline double afc_efficiency(double t_us, const AfcMemoryParams& params) {
    const double eta = params.eta0 * std::exp(-t_us / params.tau_afc_us);
    return std::clamp(eta, std::numeric_limits<double>::min(), 1.0);
}

inline DensityOperator apply_memory(const DensityOperator& state, const AfcMemoryParams& params) {
    const double survival = afc_efficiency(params.storage_time_us, params);
    DensityOperator out = fock::loss_channel(state, fock::signal_early, survival);
    return fock::loss_channel(out, fock::signal_late, survival);
}

inline double fiber_survival(const FiberParams& params) {
    return std::pow(10.0, -params.attenuation_db_per_km * params.length_km / 10.0);
}

inline double fiber_delay_us(const FiberParams& params) { return params.length_km * params.delay_us_per_km; }

struct FiberOutput {
    DensityOperator state;
    double delay_us = 0.0;
};

inline FiberOutput apply_fiber(const DensityOperator& state, std::span<const ModeId> modes, const FiberParams& params) {
    params.validate();
    const double survival = fiber_survival(params);
    DensityOperator out = state;
    for (ModeId m : modes) out = fock::loss_channel(out, m, survival);
    return {std::move(out), fiber_delay_us(params)};
}

// Time-window click statistics of the signal detector behind an analyzer.
// `joint[mask]` is the probability that exactly the windows in `mask` click
// (bit i = window i); `window` holds the marginals.
struct AnalyzerOutput {
    std::vector<std::string> labels;
    std::vector<double> window;
    std::vector<double> joint;
    std::optional<std::string> warning;
};

namespace detail {

inline AnalyzerOutput window_statistics(const DensityOperator& state, const std::vector<ModeId>& windows,
                                        std::vector<std::string> labels, const fock::ThresholdDetectorParams& det) {
    std::vector<std::size_t> pos;
    for (ModeId m : windows) pos.push_back(state.position(m));
    AnalyzerOutput out;
    out.labels = std::move(labels);
    out.joint.assign(std::size_t{1} << windows.size(), 0.0);
    for (std::size_t mask = 0; mask < out.joint.size(); ++mask) {
        out.joint[mask] = fock::diagonal_expectation(state, [&](std::span<const int> occ) {
            double w = 1.0;
            for (std::size_t i = 0; i < pos.size(); ++i)
                w *= (mask >> i & 1u) ? det.click(occ[pos[i]]) : det.no_click(occ[pos[i]]);
            return w;
        });
    }
    out.window.assign(windows.size(), 0.0);
    for (std::size_t mask = 0; mask < out.joint.size(); ++mask)
        for (std::size_t i = 0; i < windows.size(); ++i)
            if (mask >> i & 1u) out.window[i] += out.joint[mask];
    return out;
}

}  // namespace detail

// Delay-overlap interferometer of the analysis crystal. Each bin is stored
// with probability analysis_split (and re-emitted one bin later) or
// transmitted. The stored early and transmitted late components meet in the
// central window, where a phase -theta on the late bin makes the central
// window project onto (|e> + e^{i theta}|l>)/sqrt(2). Windows: early, central,
// late. `state` is over {s_e, s_l}, possibly unnormalized.
inline AnalyzerOutput equator_analyzer(const DensityOperator& state, const AnalyzerSetting& setting,
                                       const fock::ThresholdDetectorParams& detector = {}) {
    setting.validate();
    if (setting.kind != AnalyzerKind::Equator) throw std::invalid_argument("equator_analyzer: setting is not an equator setting");
    const ModeId stored_early = fock::ancilla(0), stored_late = fock::ancilla(1);
    DensityOperator rho = fock::partial_trace(state, {fock::signal_early, fock::signal_late});
    rho = fock::tensor(rho, fock::vacuum({stored_early, stored_late}, rho.cutoff()));
    const double transmit = 1.0 - setting.analysis_split;
    rho = fock::beam_splitter(rho, fock::signal_early, stored_early, transmit);
    rho = fock::beam_splitter(rho, fock::signal_late, stored_late, transmit);
    // The merge splitter sends the second port to the central window with a
    // minus sign, absorbed here into the phase.
    rho = fock::phase_shift(rho, fock::signal_late, std::numbers::pi - setting.theta);
    rho = fock::beam_splitter(rho, stored_early, fock::signal_late, 0.5);
    AnalyzerOutput out = detail::window_statistics(rho, {fock::signal_early, stored_early, stored_late},
                                                   {"early", "central", "late"}, detector);
    if (std::abs(setting.analysis_split - 0.5) > 1e-12)
        out.warning = "analysis_split != 0.5: central-window visibility estimator assumes balanced storage";
    return out;
}

// Transparency window: full transmission, windows early and late.
inline AnalyzerOutput pole_analyzer(const DensityOperator& state, const fock::ThresholdDetectorParams& detector = {}) {
    const DensityOperator rho = fock::partial_trace(state, {fock::signal_early, fock::signal_late});
    return detail::window_statistics(rho, {fock::signal_early, fock::signal_late}, {"early", "late"}, detector);
}

inline AnalyzerOutput analyze(const DensityOperator& state, const AnalyzerSetting& setting,
                              const fock::ThresholdDetectorParams& detector = {}) {
    return setting.kind == AnalyzerKind::Equator ? equator_analyzer(state, setting, detector)
                                                 : pole_analyzer(state, detector);
}

}  // namespace tmtele::devices

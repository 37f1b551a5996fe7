#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tmtele/config/experiment.hpp"
#include "tmtele/devices/stations.hpp"
#include "tmtele/protocol/bsm.hpp"
#include "tmtele/protocol/rng.hpp"
#include "tmtele/protocol/types.hpp"

namespace tmtele::protocol {

using fock::DensityOperator;

// Exact BSM statistics of one attempt: probability of every raw four-detector
// click pattern and the unnormalized signal state left behind by it (memory
// loss included). Index = pattern bits (see types.hpp).
struct BsmTable {
    std::array<double, 16> probability{};
    std::vector<DensityOperator> signal;
    double truncation_loss = 0.0;  // mass pushed above the cutoff by the splitters
};

namespace detail {

// The auxiliary (non-interfering) part of the input light leaves the input
// state as a product with the matched part; anything else would make the
// per-detector factorization below wrong.
inline void require_product(const DensityOperator& input, const DensityOperator& matched, const DensityOperator& aux) {
    const DensityOperator product = fock::tensor(matched, aux);
    double worst = 0.0;
    std::vector<std::size_t> pos;
    for (fock::ModeId m : product.modes()) pos.push_back(input.position(m));
    auto remap = [&](fock::BasisKey k) {
        fock::BasisKey out = 0;
        for (std::size_t i = 0; i < pos.size(); ++i) out = fock::with_occupation(out, pos[i], fock::occupation(k, i));
        return out;
    };
    for (const auto& [k, v] : product.entries()) worst = std::max(worst, std::abs(v - input.entry(remap(k.ket), remap(k.bra))));
    if (worst > 1e-12 || std::abs(product.trace() - input.trace()) > 1e-12)
        throw std::invalid_argument("input state: matched and auxiliary modes must be uncorrelated");
}

}  // namespace detail

// Interferes the idler with the input qubit on a 50:50 splitter per bin and
// conditions the signal on every click pattern. `pair` is over the pair modes
// (fiber already applied), `input` over the input modes.
inline BsmTable compute_bsm_table(const DensityOperator& pair, const DensityOperator& input,
                                  const DetectorSet& detectors, const devices::AfcMemoryParams& memory) {
    using namespace tmtele::fock;
    const DensityOperator matched = partial_trace(input, {input_early, input_late});
    const DensityOperator aux = partial_trace(input, {aux_early, aux_late});
    detail::require_product(input, matched, aux);

    DensityOperator main = tensor(pair, matched);
    main = beam_splitter(main, idler_early, input_early, 0.5);
    main = beam_splitter(main, idler_late, input_late, 0.5);

    // Non-interfering light: each auxiliary mode meets vacuum on its own
    // splitter and reaches the same two detectors.
    DensityOperator stray = tensor(aux, vacuum({ancilla(0), ancilla(1)}, aux.cutoff()));
    stray = beam_splitter(stray, aux_early, ancilla(0), 0.5);
    stray = beam_splitter(stray, aux_late, ancilla(1), 0.5);
    struct StrayTerm {
        std::array<int, 4> n;
        double p;
    };
    std::vector<StrayTerm> stray_terms;
    {
        const std::size_t p_d1e = stray.position(aux_early), p_d2e = stray.position(ancilla(0));
        const std::size_t p_d1l = stray.position(aux_late), p_d2l = stray.position(ancilla(1));
        for (const auto& [k, v] : stray.entries())
            if (k.ket == k.bra && v.real() != 0.0)
                stray_terms.push_back({{occupation(k.ket, p_d1e), occupation(k.ket, p_d2e), occupation(k.ket, p_d1l),
                                        occupation(k.ket, p_d2l)},
                                       v.real()});
    }

    // weight[pattern][packed main occupations]
    const int base = main.cutoff() + 1;
    const int cells = base * base * base * base;
    const std::array<const ThresholdDetectorParams*, 4> det{&detectors.d1, &detectors.d2, &detectors.d1, &detectors.d2};
    std::array<std::vector<double>, 16> weight;
    for (unsigned pattern = 0; pattern < 16; ++pattern) {
        weight[pattern].assign(cells, 0.0);
        for (int cell = 0; cell < cells; ++cell) {
            std::array<int, 4> n{cell % base, cell / base % base, cell / (base * base) % base, cell / (base * base * base)};
            double w = 0.0;
            for (const StrayTerm& t : stray_terms) {
                double f = t.p;
                for (int d = 0; d < 4; ++d) {
                    const int photons = n[d] + t.n[d];
                    f *= (pattern >> d & 1u) ? det[d]->click(photons) : det[d]->no_click(photons);
                }
                w += f;
            }
            weight[pattern][cell] = w;
        }
    }

    // Measured modes in bit order: D1 early, D2 early, D1 late, D2 late.
    const ModeId measured[] = {idler_early, input_early, idler_late, input_late};
    BsmTable table;
    double total = 0.0;
    for (unsigned pattern = 0; pattern < 16; ++pattern) {
        DensityOperator signal = condition_diagonal(main, measured, [&](std::span<const int> occ) {
            return weight[pattern][occ[0] + base * (occ[1] + base * (occ[2] + base * occ[3]))];
        });
        signal = devices::apply_memory(signal, memory);
        table.probability[pattern] = std::max(0.0, signal.trace());
        total += table.probability[pattern];
        table.signal.push_back(std::move(signal));
    }
    table.truncation_loss = std::max(0.0, pair.trace() * input.trace() - total);
    return table;
}

inline BsmTable compute_bsm_table(const ExperimentConfig& cfg, const devices::InputQubitSpec& input) {
    DensityOperator pair = devices::build_entangled_state(cfg.spdc, cfg.cutoff, cfg.soundness);
    const fock::ModeId idlers[] = {fock::idler_early, fock::idler_late};
    pair = devices::apply_fiber(pair, idlers, cfg.fiber).state;
    const DensityOperator in = devices::build_input_qubit(input, cfg.cutoff, cfg.soundness);
    return compute_bsm_table(pair, in, cfg.detectors, cfg.memory);
}

// pi phase on the late signal bin after a Psi- herald.
inline DensityOperator feed_forward_correction(const DensityOperator& signal) {
    return fock::phase_shift(signal, fock::signal_late, std::numbers::pi);
}

// Everything needed to sample one attempt: BSM table, dead-time filtered
// classification and the analyzer's window statistics per pattern, with and
// without the feed-forward phase.
class AttemptModel {
public:
    AttemptModel(BsmTable table, const ExperimentConfig& cfg, const devices::AnalyzerSetting& analyzer)
        : table_(std::move(table)), analyzer_(analyzer) {
        const double bin_ns = cfg.timing.bin_separation_ns;
        double total = 0.0;
        for (unsigned p = 0; p < 16; ++p) total += table_.probability[p];
        if (!(total > 0.0)) throw std::domain_error("attempt model: zero total probability");
        for (unsigned p = 0; p < 16; ++p) {
            filtered_[p] = apply_dead_time(p, cfg.detectors.d1.dead_time_ns, cfg.detectors.d2.dead_time_ns, bin_ns);
            outcome_[p] = classify_pattern(filtered_[p]);
            normalized_[p] = table_.probability[p] / total;
            for (int corrected = 0; corrected < 2; ++corrected) {
                const bool apply = corrected && outcome_[p] == BellOutcome::PsiMinus;
                const DensityOperator& sig = table_.signal[p];
                const devices::AnalyzerOutput a =
                    devices::analyze(apply ? feed_forward_correction(sig) : sig, analyzer_, cfg.detectors.signal);
                windows_ = a.labels;
                std::vector<double> joint = a.joint;
                const double mass = std::accumulate(joint.begin(), joint.end(), 0.0);
                if (mass > 0.0)
                    for (double& j : joint) j /= mass;
                else
                    joint.assign(joint.size(), 0.0), joint[0] = 1.0;
                window_given_[corrected][p] = std::move(joint);
            }
        }
        std::iota(order_.begin(), order_.end(), 0u);
        std::stable_sort(order_.begin(), order_.end(),
                         [&](unsigned a, unsigned b) { return normalized_[a] > normalized_[b]; });
        double acc = 0.0;
        for (unsigned i = 0; i < 16; ++i) cdf_[i] = acc += normalized_[order_[i]];
        for (int c = 0; c < 2; ++c)
            for (unsigned p = 0; p < 16; ++p) {
                const auto& dist = window_given_[c][p];
                double w = 0.0;
                window_cdf_[c][p].fill(2.0);
                for (std::size_t m = 0; m < dist.size(); ++m) window_cdf_[c][p][m] = w += dist[m];
            }
    }

    AttemptModel(const ExperimentConfig& cfg, const devices::InputQubitSpec& input, const devices::AnalyzerSetting& analyzer)
        : AttemptModel(compute_bsm_table(cfg, input), cfg, analyzer) {}

    const BsmTable& table() const { return table_; }
    const devices::AnalyzerSetting& analyzer() const { return analyzer_; }
    const std::vector<std::string>& window_labels() const { return windows_; }

    // Pattern probability normalized over the 16 patterns.
    double pattern_probability(unsigned raw) const { return normalized_[raw]; }
    unsigned filtered_pattern(unsigned raw) const { return filtered_[raw]; }
    BellOutcome outcome(unsigned raw) const { return outcome_[raw]; }

    // Conditional distribution over analyzer window masks for a raw pattern.
    const std::vector<double>& windows_given(unsigned raw, bool corrected) const {
        return window_given_[corrected ? 1 : 0][raw];
    }

    DensityOperator conditional_state(unsigned raw) const { return table_.signal[raw].normalized(); }

    // Inverse-CDF sampling, most likely pattern first.
    unsigned sample_pattern(double u) const {
        for (unsigned i = 0; i < 16; ++i)
            if (u < cdf_[i]) return order_[i];
        return order_[0];
    }

    unsigned sample_windows(unsigned raw, bool corrected, double u) const {
        const auto& cdf = window_cdf_[corrected ? 1 : 0][raw];
        for (unsigned mask = 0; mask < cdf.size(); ++mask)
            if (u < cdf[mask]) return mask;
        return 0;
    }

private:
    BsmTable table_;
    devices::AnalyzerSetting analyzer_;
    std::vector<std::string> windows_;
    std::array<double, 16> normalized_{};
    std::array<unsigned, 16> filtered_{};
    std::array<BellOutcome, 16> outcome_{};
    std::array<std::array<std::vector<double>, 16>, 2> window_given_;
    std::array<unsigned, 16> order_{};
    std::array<double, 16> cdf_{};
    std::array<std::array<std::array<double, 8>, 16>, 2> window_cdf_{};
};

struct AttemptResult {
    unsigned raw_pattern = 0;
    std::vector<Click> clicks;  // after the dead-time filter
    BellOutcome outcome = BellOutcome::NoHerald;
    std::optional<MemorySlot> slot;  // heralded attempts only
};

// Samples the BSM of one attempt. Draws one uniform from `stream`.
inline AttemptResult run_attempt(const AttemptModel& model, std::uint64_t attempt_id, CounterStream& stream,
                                 double launch_time_us, double storage_time_us) {
    AttemptResult r;
    r.raw_pattern = model.sample_pattern(stream.uniform());
    r.clicks = clicks_from_pattern(model.filtered_pattern(r.raw_pattern));
    r.outcome = model.outcome(r.raw_pattern);
    if (heralded(r.outcome)) {
        MemorySlot slot;
        slot.attempt_id = attempt_id;
        slot.absorb_time_us = launch_time_us;
        slot.emission_time_us = launch_time_us + storage_time_us;
        slot.feed_forward_pending = true;
        slot.conditional_state = model.conditional_state(r.raw_pattern);
        r.slot = std::move(slot);
    }
    return r;
}

// Applies the conditional pi phase. A herald processed after `deadline_us`
// leaves the slot flagged uncorrected.
inline MemorySlot apply_feed_forward(MemorySlot slot, BellOutcome outcome, double now_us, double deadline_us) {
    slot.feed_forward_pending = false;
    if (now_us > deadline_us) {
        slot.uncorrected = true;
        return slot;
    }
    if (outcome == BellOutcome::PsiMinus && slot.conditional_state)
        slot.conditional_state = feed_forward_correction(*slot.conditional_state);
    return slot;
}

}  // namespace tmtele::protocol

#include <gtest/gtest.h>

#include <numbers>

#include "fixtures.hpp"
#include "tmtele/protocol/attempt.hpp"

using namespace tmtele;
using namespace tmtele::devices;
using fock::FockBasisState;
using fock::ModeId;

namespace {

constexpr double h = std::numbers::sqrt2 / 2;

// Entries whose ket and bra both hold exactly one signal and one idler photon.
fock::DensityOperator one_pair_sector(const fock::DensityOperator& rho) {
    auto in_sector = [](fock::BasisKey k) {
        return fock::occupation(k, 0) + fock::occupation(k, 1) == 1 && fock::occupation(k, 2) + fock::occupation(k, 3) == 1;
    };
    fock::EntryMap e;
    for (const auto& [k, v] : rho.entries())
        if (in_sector(k.ket) && in_sector(k.bra)) e.emplace(k, v);
    return {rho.modes(), rho.cutoff(), std::move(e)};
}

fock::PureState bell(double sign) {
    return {pair_modes(), {{FockBasisState{1, 0, 1, 0}, h}, {FockBasisState{0, 1, 0, 1}, sign * h}}};
}

double central(const AnalyzerOutput& o) { return o.window[1]; }

}  // namespace

TEST(EntangledState, IdealOnePairFidelity) {
    for (double lambda : {0.01, 0.04, 0.1}) {
        SpdcSourceParams p;
        p.pair_amplitude = lambda;
        const auto rho = one_pair_sector(build_entangled_state(p, 2));
        EXPECT_GE(fock::fidelity_to_pure(rho, bell(+1)), 0.999) << lambda;
    }
}

TEST(EntangledState, DephasedStateHasNoEquatorCorrelation) {
    SpdcSourceParams p;
    p.phase_coherence = 0.0;
    const auto rho = one_pair_sector(build_entangled_state(p, 2));
    const double plus = fock::fidelity_to_pure(rho, bell(+1)), minus = fock::fidelity_to_pure(rho, bell(-1));
    EXPECT_NEAR(plus, 0.5, 1e-12);
    EXPECT_NEAR(plus - minus, 0.0, 1e-12);
}

TEST(EntangledState, DoublePairRatio) {
    for (double lambda : {0.02, 0.04, 0.1}) {
        SpdcSourceParams p;
        p.pair_amplitude = lambda;
        const auto rho = build_entangled_state(p, 2);
        const double two = rho.entry(FockBasisState{2, 0, 2, 0}, FockBasisState{2, 0, 2, 0}).real();
        const double one = rho.entry(FockBasisState{1, 0, 1, 0}, FockBasisState{1, 0, 1, 0}).real();
        EXPECT_NEAR(two / one, lambda * lambda, 1e-12);
    }
}

TEST(EntangledState, WernerNoiseOnOnePairSector) {
    SpdcSourceParams p;
    p.werner_white_noise = 0.2;
    const auto rho = one_pair_sector(build_entangled_state(p, 2));
    EXPECT_NEAR(fock::fidelity_to_pure(rho, bell(+1)), 0.8 + 0.2 / 4, 1e-12);
}

TEST(InputQubit, EarlyStateHasNoLateLight) {
    const auto rho = build_input_qubit({1.0, 0.0, 0.0, 0.02, 0.9}, 2);
    EXPECT_EQ(fock::photon_number_expectation(rho, fock::input_late), 0.0);
    EXPECT_EQ(fock::photon_number_expectation(rho, fock::aux_late), 0.0);
}

TEST(InputQubit, PlusStatePerBinMean) {
    const auto rho = build_input_qubit(named_qubit(NamedQubit::Plus, 0.02, 0.9), 2);
    const double early = fock::photon_number_expectation(rho, fock::input_early) +
                         fock::photon_number_expectation(rho, fock::aux_early);
    const double late = fock::photon_number_expectation(rho, fock::input_late) +
                        fock::photon_number_expectation(rho, fock::aux_late);
    EXPECT_NEAR(early, 0.01, 1e-6);
    EXPECT_NEAR(late, 0.01, 1e-6);
    // exact mean of a Poisson distribution renormalized over n <= 2
    auto truncated_mean = [](double mu) { return (mu + mu * mu) / (1.0 + mu + mu * mu / 2); };
    EXPECT_NEAR(fock::photon_number_expectation(rho, fock::input_early), truncated_mean(0.009), 1e-12);
    EXPECT_NEAR(fock::photon_number_expectation(rho, fock::aux_early), truncated_mean(0.001), 1e-12);
}

TEST(InputQubit, NoOverlapMatchesDistinguishablePhotons) {
    // A photon that cannot interfere with the idler: each photon picks a
    // detector at random, so a two-bin herald only says which bin each came
    // from and the signal keeps no coherence.
    const double alpha = 0.6, beta = 0.8, phi = 0.3;
    const auto pair = ideal_pair_state(2);
    const auto ideal = fixtures::ideal_detectors();
    const auto table = protocol::compute_bsm_table(pair, fixtures::photon_qubit(alpha, beta, phi, true), ideal,
                                                   fixtures::lossless_memory());
    using namespace protocol;
    for (unsigned pattern : {d1_early_bit | d1_late_bit, d2_early_bit | d2_late_bit, d1_early_bit | d2_late_bit,
                             d2_early_bit | d1_late_bit}) {
        EXPECT_NEAR(table.probability[pattern], 1.0 / 8, 1e-12);
        const auto s = table.signal[pattern].normalized();
        EXPECT_NEAR(s.entry(FockBasisState{1, 0}, FockBasisState{1, 0}).real(), beta * beta, 1e-12);
        EXPECT_NEAR(s.entry(FockBasisState{0, 1}, FockBasisState{0, 1}).real(), alpha * alpha, 1e-12);
        EXPECT_NEAR(std::abs(s.entry(FockBasisState{1, 0}, FockBasisState{0, 1})), 0.0, 1e-12);
        // the equator contrast collapses to zero
        const auto at0 = equator_analyzer(s, AnalyzerSetting::equator(0.0));
        const auto atpi = equator_analyzer(s, AnalyzerSetting::equator(std::numbers::pi));
        EXPECT_NEAR(central(at0) - central(atpi), 0.0, 1e-12);
    }
    // with full overlap the same herald carries the qubit coherently
    const auto matched = protocol::compute_bsm_table(pair, fixtures::photon_qubit(alpha, beta, phi, false), ideal,
                                                     fixtures::lossless_memory());
    const auto s = matched.signal[d1_early_bit | d1_late_bit].normalized();
    EXPECT_NEAR(fock::fidelity_to_pure(s, fixtures::signal_qubit(std::polar(beta, phi), alpha)), 1.0, 1e-12);
}

TEST(AfcEfficiency, PassesThroughMeasuredPoints) {
    const AfcMemoryParams m;
    EXPECT_NEAR(afc_efficiency(10.0, m), 0.188, 1e-3);
    EXPECT_NEAR(afc_efficiency(17.5, m), 0.122, 1e-3);
    // two-point exponential fit
    const double tau = 7.5 / std::log(0.188 / 0.122);
    EXPECT_NEAR(m.tau_afc_us, tau, 1e-12);
    EXPECT_NEAR(tau, 17.34, 0.01);
    EXPECT_NEAR(m.eta0, 0.188 * std::exp(10.0 / tau), 1e-12);
    EXPECT_NEAR(m.eta0, 0.335, 0.001);
    EXPECT_DOUBLE_EQ(afc_efficiency(0.0, m), m.eta0);
    double prev = afc_efficiency(0.0, m);
    for (double t = 0.5; t <= 100.0; t += 0.5) {
        const double e = afc_efficiency(t, m);
        EXPECT_LT(e, prev);
        EXPECT_GT(e, 0.0);
        prev = e;
    }
}

TEST(AfcMemory, SurvivalAndBinSymmetricLoss) {
    AfcMemoryParams m;
    m.storage_time_us = 10.0;
    const auto in = fixtures::signal_state(h, h);
    const auto out = apply_memory(in, m);
    const double eta = afc_efficiency(10.0, m);
    EXPECT_NEAR(eta, 0.188, 1e-3);
    const double pop = out.entry(FockBasisState{1, 0}, FockBasisState{1, 0}).real() /
                       in.entry(FockBasisState{1, 0}, FockBasisState{1, 0}).real();
    const double coh = std::abs(out.entry(FockBasisState{1, 0}, FockBasisState{0, 1})) /
                       std::abs(in.entry(FockBasisState{1, 0}, FockBasisState{0, 1}));
    EXPECT_NEAR(pop, eta, 1e-12);
    EXPECT_NEAR(coh, eta, 1e-12);
    m.storage_time_us = 1e-9;
    EXPECT_NEAR(afc_efficiency(m.storage_time_us, m), m.eta0, 1e-9);
}

TEST(Fiber, ZeroLengthIsIdentity) {
    FiberParams f;
    f.length_km = 0.0;
    const auto in = fixtures::signal_state(0.6, 0.8);
    const ModeId modes[] = {fock::signal_early, fock::signal_late};
    const auto out = apply_fiber(in, modes, f);
    EXPECT_EQ(out.delay_us, 0.0);
    EXPECT_NEAR(fock::fidelity_to_pure(out.state, fixtures::signal_qubit(0.6, 0.8)), 1.0, 1e-15);
    EXPECT_NEAR(out.state.trace(), 1.0, 1e-15);
}

TEST(Fiber, DelayAndAttenuation) {
    FiberParams f;
    f.length_km = 1.0;
    EXPECT_NEAR(fiber_delay_us(f), 5.0, 1e-12);
    f.length_km = 10.0;
    f.attenuation_db_per_km = 0.3;
    EXPECT_NEAR(fiber_survival(f), std::pow(10.0, -0.3), 1e-12);
    EXPECT_NEAR(fiber_survival(f), 0.501, 1e-3);
    const ModeId modes[] = {fock::signal_early};
    const auto out = apply_fiber(fixtures::signal_state(1.0, 0.0), modes, f);
    EXPECT_NEAR(fock::photon_number_expectation(out.state, fock::signal_early), std::pow(10.0, -0.3), 1e-12);
}

TEST(Fiber, SegmentsCompose) {
    const ModeId modes[] = {fock::signal_early, fock::signal_late};
    FiberParams whole;
    whole.length_km = 1.0;
    FiberParams piece;
    piece.length_km = 0.1;
    auto s = fixtures::signal_state(0.6, 0.8);
    double delay = 0.0;
    for (int i = 0; i < 10; ++i) {
        auto r = apply_fiber(s, modes, piece);
        s = r.state;
        delay += r.delay_us;
    }
    const auto direct = apply_fiber(fixtures::signal_state(0.6, 0.8), modes, whole);
    EXPECT_NEAR(delay, direct.delay_us, 1e-12);
    for (const auto& [k, v] : direct.state.entries()) EXPECT_NEAR(std::abs(v - s.entry(k.ket, k.bra)), 0.0, 1e-12);
}

TEST(EquatorAnalyzer, InterferometerExtremes) {
    const auto plus = fixtures::signal_state(h, h);
    const auto at0 = equator_analyzer(plus, AnalyzerSetting::equator(0.0));
    const auto atpi = equator_analyzer(plus, AnalyzerSetting::equator(std::numbers::pi));
    EXPECT_NEAR(central(at0), 0.5, 1e-12);
    EXPECT_NEAR(central(atpi), 0.0, 1e-12);
    EXPECT_EQ(at0.labels, (std::vector<std::string>{"early", "central", "late"}));
    EXPECT_NEAR(at0.window[0], 0.25, 1e-12);
    EXPECT_NEAR(at0.window[2], 0.25, 1e-12);

    const auto r = fixtures::signal_state(h, fock::complex(0.0, h));
    double best = -1.0;
    for (double theta : {0.0, std::numbers::pi / 2, std::numbers::pi, 3 * std::numbers::pi / 2})
        best = std::max(best, central(equator_analyzer(r, AnalyzerSetting::equator(theta))));
    EXPECT_NEAR(central(equator_analyzer(r, AnalyzerSetting::equator(std::numbers::pi / 2))), best, 1e-15);
    EXPECT_NEAR(best, 0.5, 1e-12);
}

TEST(EquatorAnalyzer, DephasedQubitHasNoVisibility) {
    const auto mixed = (fixtures::signal_state(1.0, 0.0) + fixtures::signal_state(0.0, 1.0)).scaled(0.5);
    for (double theta : {0.0, 0.7, std::numbers::pi / 2})
        EXPECT_NEAR(central(equator_analyzer(mixed, AnalyzerSetting::equator(theta))), 0.25, 1e-12);
}

TEST(EquatorAnalyzer, CentralWindowIsSinusoidal) {
    const double phi = 1.1;
    const auto s = fixtures::signal_state(h, std::polar(h, phi));
    auto c = [&](double theta) { return central(equator_analyzer(s, AnalyzerSetting::equator(theta))); };
    const double c0 = c(0.0), c1 = c(std::numbers::pi / 2), c2 = c(std::numbers::pi), c3 = c(3 * std::numbers::pi / 2);
    const double v = std::hypot(c0 - c2, c1 - c3) / (c0 + c2);
    EXPECT_NEAR(v, 1.0, 1e-9);
    EXPECT_NEAR(std::atan2(c1 - c3, c0 - c2), phi, 1e-9);
    for (double theta = 0.0; theta < 6.3; theta += 0.3)
        EXPECT_NEAR(c(theta), 0.25 * (1.0 + std::cos(theta - phi)), 1e-12);
}

TEST(EquatorAnalyzer, ProbabilitiesAreSubNormalized) {
    const fock::ThresholdDetectorParams lossy{0.3, 1e-3, 0.0};
    for (double split : {0.0, 0.3, 0.5, 0.9}) {
        AnalyzerSetting a = AnalyzerSetting::equator(0.4);
        a.analysis_split = split;
        const auto out = equator_analyzer(fixtures::signal_state(0.6, fock::complex(0.0, 0.8)), a, lossy);
        double sum = 0.0;
        for (double p : out.joint) {
            EXPECT_GE(p, 0.0);
            sum += p;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
        for (double p : out.window) EXPECT_GE(p, 0.0);
        EXPECT_LE(out.joint[0], 1.0);
        EXPECT_EQ(out.warning.has_value(), split != 0.5);
    }
}

TEST(PoleAnalyzer, TimeBins) {
    auto windows = [](const fock::DensityOperator& s) { return pole_analyzer(s).window; };
    EXPECT_EQ(windows(fixtures::signal_state(1.0, 0.0)), (std::vector<double>{1.0, 0.0}));
    EXPECT_EQ(windows(fixtures::signal_state(0.0, 1.0)), (std::vector<double>{0.0, 1.0}));
    const auto plus = windows(fixtures::signal_state(h, h));
    EXPECT_NEAR(plus[0], plus[1], 1e-12);
    EXPECT_THROW(equator_analyzer(fixtures::signal_state(h, h), AnalyzerSetting::pole()), std::invalid_argument);
}

#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "dense_oracle.hpp"
#include "tmtele/fock/detection.hpp"

using namespace tmtele::fock;

namespace {

constexpr int cases = 100;

struct Case {
    std::mt19937_64 rng;
    std::vector<ModeId> modes;
    int cutoff;
    DensityOperator rho;
};

// Registers of 2-6 modes at cutoff 2 or 3, capped at `max_dense` dimensions.
Case make_case(int seed, std::size_t max_dense = 256) {
    std::mt19937_64 rng(0x5eed0000u + static_cast<unsigned>(seed));
    int cutoff = 2 + static_cast<int>(rng() % 2);
    std::size_t n = 2 + rng() % 5;
    while (std::pow(cutoff + 1.0, static_cast<double>(n)) > static_cast<double>(max_dense)) --n;
    std::vector<ModeId> modes;
    for (std::size_t i = 0; i < n; ++i) modes.push_back(ancilla(static_cast<std::uint8_t>(i)));
    auto rho = oracle::random_state(rng, modes, cutoff);
    return {std::move(rng), std::move(modes), cutoff, std::move(rho)};
}

std::pair<ModeId, ModeId> pick_two(Case& c) {
    const std::size_t i = c.rng() % c.modes.size();
    std::size_t j = c.rng() % (c.modes.size() - 1);
    if (j >= i) ++j;
    return {c.modes[i], c.modes[j]};
}

double uniform(Case& c) { return std::uniform_real_distribution<double>(0.0, 1.0)(c.rng); }

void expect_physical(const DensityOperator& s, double trace) {
    EXPECT_NEAR(s.trace(), trace, 1e-12);
    EXPECT_LT(s.hermiticity_defect(), 1e-12);
    EXPECT_GE(min_eigenvalue(s), -1e-9);
}

double max_diff(const DensityOperator& x, const DensityOperator& y) {
    return oracle::max_abs(to_dense(x, 1u << 20) - to_dense(y, 1u << 20));
}

}  // namespace

TEST(FockProperties, RandomStatesArePhysical) {
    for (int seed = 0; seed < cases; ++seed) expect_physical(make_case(seed).rho, 1.0);
}

TEST(FockProperties, OperationsPreserveTraceHermiticityPositivity) {
    for (int seed = 0; seed < cases; ++seed) {
        Case c = make_case(seed);
        const auto [m1, m2] = pick_two(c);
        const double t = uniform(c), phase = 2 * std::numbers::pi * uniform(c);
        expect_physical(beam_splitter(c.rho, m1, m2, t, phase), 1.0);
        expect_physical(phase_shift(c.rho, m1, phase), 1.0);
        expect_physical(loss_channel(c.rho, m2, uniform(c)), 1.0);
        expect_physical(swap_modes(c.rho, m1, m2), 1.0);
        expect_physical(partial_trace(c.rho, std::span<const ModeId>(c.modes.data(), c.modes.size() - 1)), 1.0);
    }
}

TEST(FockProperties, TracePreservedOnLargeRegisters) {
    for (int seed = 0; seed < cases; ++seed) {
        Case c = make_case(seed, 4096);
        const auto [m1, m2] = pick_two(c);
        const double t = uniform(c), phase = 2 * std::numbers::pi * uniform(c);
        auto s = beam_splitter(c.rho, m1, m2, t, phase);
        s = phase_shift(s, m2, phase);
        s = loss_channel(s, m1, uniform(c));
        EXPECT_NEAR(s.trace(), 1.0, 1e-12);
        EXPECT_LT(s.hermiticity_defect(), 1e-12);
    }
}

TEST(FockProperties, BeamSplitterMatchesDenseUnitary) {
    for (int seed = 0; seed < cases; ++seed) {
        Case c = make_case(seed);
        const auto [m1, m2] = pick_two(c);
        const double t = uniform(c), phase = 2 * std::numbers::pi * uniform(c);
        const auto u = oracle::beam_splitter_unitary(c.rho.position(m1), c.rho.position(m2), c.modes.size(), c.cutoff, t,
                                                     phase);
        const oracle::Matrix expected = u * to_dense(c.rho) * u.adjoint();
        EXPECT_LT(oracle::max_abs(to_dense(beam_splitter(c.rho, m1, m2, t, phase)) - expected), 1e-10) << seed;
    }
}

TEST(FockProperties, PhaseShiftMatchesDenseUnitary) {
    for (int seed = 0; seed < cases; ++seed) {
        Case c = make_case(seed);
        const ModeId m = c.modes[c.rng() % c.modes.size()];
        const double theta = 2 * std::numbers::pi * uniform(c);
        const auto u = oracle::phase_unitary(c.rho.position(m), c.modes.size(), c.cutoff, theta);
        const oracle::Matrix expected = u * to_dense(c.rho) * u.adjoint();
        EXPECT_LT(oracle::max_abs(to_dense(phase_shift(c.rho, m, theta)) - expected), 1e-12) << seed;
    }
}

TEST(FockProperties, BeamSplitterInverse) {
    for (int seed = 0; seed < cases; ++seed) {
        Case c = make_case(seed);
        const auto [m1, m2] = pick_two(c);
        const double t = uniform(c), phase = 2 * std::numbers::pi * uniform(c);
        const auto back = beam_splitter(beam_splitter(c.rho, m1, m2, t, phase), m1, m2, t, phase + std::numbers::pi);
        EXPECT_LT(max_diff(back, c.rho), 1e-10) << seed;
    }
}

TEST(FockProperties, PovmCompleteness) {
    for (int seed = 0; seed < cases; ++seed) {
        Case c = make_case(seed);
        const ThresholdDetectorParams det{uniform(c), uniform(c), 0.0};
        for (int n = 0; n <= 8; ++n) EXPECT_NEAR(det.click(n) + det.no_click(n), 1.0, 1e-12);
        const std::vector<ModeId> watched{c.modes.front(), c.modes.back()};
        const auto on = measure_threshold(c.rho, watched, det, 0.0);
        const auto off = measure_threshold(c.rho, watched, det, 1.0);
        if (on.click && !off.click) {
            EXPECT_NEAR(on.probability + off.probability, 1.0, 1e-12);
        }
        expect_physical(on.post_state, 1.0);
        expect_physical(off.post_state, 1.0);
    }
}

TEST(FockProperties, LossIsBeamSplitterWithDiscardedAncilla) {
    const ModeId env = ancilla(15);
    for (int seed = 0; seed < cases; ++seed) {
        Case c = make_case(seed, 243);
        const ModeId m = c.modes[c.rng() % c.modes.size()];
        const double survival = uniform(c);
        auto dilated = tensor(c.rho, vacuum({env}, c.cutoff));
        dilated = beam_splitter(dilated, m, env, survival);
        const auto reduced = partial_trace(dilated, std::span<const ModeId>(c.modes));
        EXPECT_LT(max_diff(loss_channel(c.rho, m, survival), reduced), 1e-12) << seed;
    }
}

TEST(FockProperties, LossOnDisjointModesCommutes) {
    for (int seed = 0; seed < cases; ++seed) {
        Case c = make_case(seed);
        const auto [m1, m2] = pick_two(c);
        const double s1 = uniform(c), s2 = uniform(c);
        const auto x = loss_channel(loss_channel(c.rho, m1, s1), m2, s2);
        const auto y = loss_channel(loss_channel(c.rho, m2, s2), m1, s1);
        EXPECT_LT(max_diff(x, y), 1e-12) << seed;
    }
}

TEST(FockProperties, HongOuMandel) {
    const ModeId a = ancilla(0), b = ancilla(1), a_aux = ancilla(2), b_aux = ancilla(3);
    const std::vector<ModeId> modes{a, b, a_aux, b_aux};
    const ThresholdDetectorParams ideal{1.0, 0.0, 0.0};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
    auto coincidence = [&](const DensityOperator& in, double phase) {
        auto s = beam_splitter(in, a, b, 0.5, phase);
        s = beam_splitter(s, a_aux, b_aux, 0.5, phase);
        return diagonal_expectation(s, [&](std::span<const int> n) {
            return ideal.click(n[0] + n[2]) * ideal.click(n[1] + n[3]);
        });
    };
    for (int seed = 0; seed < cases; ++seed) {
        const double phase = u(rng);
        const auto same = to_density(PureState{modes, {{{1, 1, 0, 0}, 1.0}}}, 2);
        const auto distinguishable = to_density(PureState{modes, {{{1, 0, 0, 1}, 1.0}}}, 2);
        EXPECT_NEAR(coincidence(same, phase), 0.0, 1e-12);
        EXPECT_NEAR(coincidence(distinguishable, phase), 0.5, 1e-12);
    }
}

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmtele/fock/density_operator.hpp"

namespace tmtele::fock {

// Rejection threshold for probability mass lost to truncation on injection.
inline constexpr double default_soundness = 1e-4;

class TruncationError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

namespace detail {

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

inline complex ipow(complex base, int e) {
    complex r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return factorial(n) / (factorial(k) * factorial(n - k));
}

// Replaces the vacuum of `pos` by the single-mode (or two-mode) ket given by
// `amps`, indexed by the occupation pattern written by `place`.
template <typename Place>
DensityOperator attach_ket(const DensityOperator& state, std::span<const std::size_t> positions,
                           const std::vector<complex>& amps, Place place) {
    for (const auto& [k, v] : state.entries())
        for (std::size_t pos : positions)
            if (occupation(k.ket, pos) != 0 || occupation(k.bra, pos) != 0)
                throw std::invalid_argument("injection target mode is not in vacuum");
    EntryMap out;
    out.reserve(state.nonzeros() * amps.size() * amps.size());
    for (const auto& [k, v] : state.entries())
        for (std::size_t n = 0; n < amps.size(); ++n) {
            if (amps[n] == complex{}) continue;
            for (std::size_t m = 0; m < amps.size(); ++m) {
                if (amps[m] == complex{}) continue;
                out[{place(k.ket, n), place(k.bra, m)}] += v * amps[n] * std::conj(amps[m]);
            }
        }
    return {state.modes(), state.cutoff(), std::move(out)};
}

}  // namespace detail

inline DensityOperator vacuum(std::vector<ModeId> modes, int cutoff) {
    if (modes.empty()) throw std::invalid_argument("vacuum: empty register");
    if (cutoff < 1) throw std::invalid_argument("vacuum: cutoff must be >= 1");
    EntryMap e;
    e[{0, 0}] = 1.0;
    return {std::move(modes), cutoff, std::move(e)};
}

// Truncated Poisson mass beyond the cutoff for mean photon number `mean`.
inline double poisson_tail(double mean, int cutoff) {
    double kept = 0.0;
    double term = std::exp(-mean);
    for (int n = 0; n <= cutoff; ++n) {
        kept += term;
        term *= mean / (n + 1);
    }
    return std::max(0.0, 1.0 - kept);
}

inline DensityOperator inject_coherent(const DensityOperator& state, ModeId mode, complex amplitude,
                                       double soundness = default_soundness) {
    const std::size_t pos = state.position(mode);
    const double mean = std::norm(amplitude);
    if (mean == 0.0) return state;
    if (mean > state.cutoff() || poisson_tail(mean, state.cutoff()) > soundness)
        throw TruncationError("inject_coherent: |amplitude|^2 = " + std::to_string(mean) +
                              " is not representable at cutoff " + std::to_string(state.cutoff()));
    std::vector<complex> amps(state.cutoff() + 1);
    complex c = std::exp(-mean / 2.0);
    double norm = 0.0;
    for (int n = 0; n <= state.cutoff(); ++n) {
        amps[n] = c;
        norm += std::norm(c);
        c *= amplitude / std::sqrt(static_cast<double>(n + 1));
    }
    for (auto& a : amps) a /= std::sqrt(norm);
    const std::size_t positions[] = {pos};
    return detail::attach_ket(state, positions, amps,
                              [pos](BasisKey k, std::size_t n) { return with_occupation(k, pos, static_cast<int>(n)); });
}

// Two-mode squeezed vacuum sum_n lambda^n |n,n>, truncated and renormalized.
inline DensityOperator inject_pair_source(const DensityOperator& state, ModeId mode_a, ModeId mode_b,
                                          double pair_amplitude, double soundness = default_soundness) {
    if (mode_a == mode_b) throw std::invalid_argument("inject_pair_source: modes must differ");
    const std::size_t pa = state.position(mode_a);
    const std::size_t pb = state.position(mode_b);
    const double x = pair_amplitude * pair_amplitude;
    if (x >= 1.0) throw std::invalid_argument("inject_pair_source: pair_amplitude^2 must be < 1");
    if (pair_amplitude == 0.0) return state;
    if (std::pow(x, state.cutoff() + 1) > soundness)
        throw TruncationError("inject_pair_source: multi-pair tail exceeds soundness bound at cutoff " +
                              std::to_string(state.cutoff()));
    std::vector<complex> amps(state.cutoff() + 1);
    double norm = 0.0;
    double c = 1.0;
    for (int n = 0; n <= state.cutoff(); ++n) {
        amps[n] = c;
        norm += c * c;
        c *= pair_amplitude;
    }
    for (auto& a : amps) a /= std::sqrt(norm);
    const std::size_t positions[] = {pa, pb};
    return detail::attach_ket(state, positions, amps, [pa, pb](BasisKey k, std::size_t n) {
        return with_occupation(with_occupation(k, pa, static_cast<int>(n)), pb, static_cast<int>(n));
    });
}

// Two-mode unitary a1^+ -> t a1^+ + r a2^+, a2^+ -> -conj(r) a1^+ + t a2^+,
// with t = sqrt(transmissivity) and r = sqrt(1 - transmissivity) e^{i phase}.
// The inverse is the same splitter with phase + pi. Components pushed above
// the cutoff are dropped.
inline DensityOperator beam_splitter(const DensityOperator& state, ModeId m1, ModeId m2, double transmissivity,
                                     double phase = 0.0) {
    if (m1 == m2) throw std::invalid_argument("beam_splitter: modes must differ");
    if (!(transmissivity >= 0.0 && transmissivity <= 1.0))
        throw std::invalid_argument("beam_splitter: transmissivity must be in [0,1]");
    const std::size_t p1 = state.position(m1);
    const std::size_t p2 = state.position(m2);
    const int cutoff = state.cutoff();
    const double t = std::sqrt(transmissivity);
    const complex r = std::sqrt(1.0 - transmissivity) * std::polar(1.0, phase);

    // coefficient[n1][n2] lists (m1, amplitude) with m2 = n1 + n2 - m1.
    std::vector<std::vector<std::vector<std::pair<int, complex>>>> table(
        cutoff + 1, std::vector<std::vector<std::pair<int, complex>>>(cutoff + 1));
    for (int n1 = 0; n1 <= cutoff; ++n1)
        for (int n2 = 0; n2 <= cutoff; ++n2) {
            std::vector<complex> acc(n1 + n2 + 1);
            for (int j = 0; j <= n1; ++j)
                for (int k = 0; k <= n2; ++k) {
                    const complex term = detail::binomial(n1, j) * std::pow(t, j) * detail::ipow(r, n1 - j) *
                                         detail::binomial(n2, k) * detail::ipow(-std::conj(r), k) *
                                         std::pow(t, n2 - k);
                    acc[j + k] += term;
                }
            const double inv = 1.0 / std::sqrt(detail::factorial(n1) * detail::factorial(n2));
            for (int out1 = 0; out1 <= n1 + n2; ++out1) {
                const int out2 = n1 + n2 - out1;
                if (out1 > cutoff || out2 > cutoff) continue;
                const complex a = acc[out1] * inv * std::sqrt(detail::factorial(out1) * detail::factorial(out2));
                if (std::abs(a) > prune_tolerance) table[n1][n2].emplace_back(out1, a);
            }
        }

    EntryMap out;
    out.reserve(state.nonzeros() * 2);
    for (const auto& [k, v] : state.entries()) {
        const int kn1 = occupation(k.ket, p1), kn2 = occupation(k.ket, p2);
        const int bn1 = occupation(k.bra, p1), bn2 = occupation(k.bra, p2);
        for (const auto& [ko, ka] : table[kn1][kn2]) {
            const BasisKey ket = with_occupation(with_occupation(k.ket, p1, ko), p2, kn1 + kn2 - ko);
            for (const auto& [bo, ba] : table[bn1][bn2]) {
                const BasisKey bra = with_occupation(with_occupation(k.bra, p1, bo), p2, bn1 + bn2 - bo);
                out[{ket, bra}] += ka * v * std::conj(ba);
            }
        }
    }
    return {state.modes(), state.cutoff(), std::move(out)};
}

inline DensityOperator phase_shift(const DensityOperator& state, ModeId mode, double theta) {
    const std::size_t pos = state.position(mode);
    EntryMap out;
    out.reserve(state.nonzeros());
    for (const auto& [k, v] : state.entries()) {
        const int dn = occupation(k.ket, pos) - occupation(k.bra, pos);
        out.emplace(k, dn == 0 ? v : v * std::polar(1.0, theta * dn));
    }
    return {state.modes(), state.cutoff(), std::move(out)};
}

// Exchanges the contents of two modes (relabeling, no phases).
inline DensityOperator swap_modes(const DensityOperator& state, ModeId m1, ModeId m2) {
    const std::size_t p1 = state.position(m1);
    const std::size_t p2 = state.position(m2);
    auto swap_key = [&](BasisKey key) {
        const int a = occupation(key, p1), b = occupation(key, p2);
        return with_occupation(with_occupation(key, p1, b), p2, a);
    };
    EntryMap out;
    out.reserve(state.nonzeros());
    for (const auto& [k, v] : state.entries()) out.emplace(EntryKey{swap_key(k.ket), swap_key(k.bra)}, v);
    return {state.modes(), state.cutoff(), std::move(out)};
}

// Pure-loss channel with Kraus operators
//   A_j = sum_n sqrt(C(n,j) survival^(n-j) (1-survival)^j) |n-j><n|,
// i.e. a splitter of transmissivity `survival` against a vacuum ancilla that
// is then discarded.
inline DensityOperator loss_channel(const DensityOperator& state, ModeId mode, double survival) {
    if (!(survival >= 0.0 && survival <= 1.0)) throw std::invalid_argument("loss_channel: survival must be in [0,1]");
    const std::size_t pos = state.position(mode);
    if (survival == 1.0) return state;
    auto kraus = [survival](int n, int j) {
        return std::sqrt(detail::binomial(n, j) * std::pow(survival, n - j) * std::pow(1.0 - survival, j));
    };
    EntryMap out;
    out.reserve(state.nonzeros() * 2);
    for (const auto& [k, v] : state.entries()) {
        const int nk = occupation(k.ket, pos), nb = occupation(k.bra, pos);
        for (int j = 0; j <= std::min(nk, nb); ++j) {
            const double w = kraus(nk, j) * kraus(nb, j);
            if (w == 0.0) continue;
            out[{with_occupation(k.ket, pos, nk - j), with_occupation(k.bra, pos, nb - j)}] += v * w;
        }
    }
    return {state.modes(), state.cutoff(), std::move(out)};
}

// Reduced state on `keep`, in the order given.
inline DensityOperator partial_trace(const DensityOperator& state, std::span<const ModeId> keep) {
    if (keep.empty()) throw std::invalid_argument("partial_trace: nothing to keep");
    std::vector<std::size_t> kept_pos;
    for (ModeId m : keep) kept_pos.push_back(state.position(m));
    std::vector<std::size_t> traced_pos;
    for (std::size_t i = 0; i < state.size(); ++i)
        if (std::find(kept_pos.begin(), kept_pos.end(), i) == kept_pos.end()) traced_pos.push_back(i);
    auto project = [&](BasisKey key) {
        BasisKey out = 0;
        for (std::size_t i = 0; i < kept_pos.size(); ++i) out = with_occupation(out, i, occupation(key, kept_pos[i]));
        return out;
    };
    EntryMap out;
    for (const auto& [k, v] : state.entries()) {
        bool diagonal = true;
        for (std::size_t p : traced_pos)
            if (occupation(k.ket, p) != occupation(k.bra, p)) {
                diagonal = false;
                break;
            }
        if (diagonal) out[{project(k.ket), project(k.bra)}] += v;
    }
    return {std::vector<ModeId>(keep.begin(), keep.end()), state.cutoff(), std::move(out)};
}

inline DensityOperator partial_trace(const DensityOperator& state, std::initializer_list<ModeId> keep) {
    return partial_trace(state, std::span<const ModeId>(keep.begin(), keep.size()));
}

// Tensor product on the concatenated register; registers must be disjoint.
inline DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
    if (a.cutoff() != b.cutoff()) throw std::invalid_argument("tensor: cutoff mismatch");
    std::vector<ModeId> modes = a.modes();
    for (ModeId m : b.modes()) {
        if (a.contains(m)) throw std::invalid_argument("tensor: mode " + to_string(m) + " appears twice");
        modes.push_back(m);
    }
    const unsigned shift = static_cast<unsigned>(4 * a.size());
    EntryMap out;
    out.reserve(a.nonzeros() * b.nonzeros());
    for (const auto& [ka, va] : a.entries())
        for (const auto& [kb, vb] : b.entries())
            out.emplace(EntryKey{ka.ket | (kb.ket << shift), ka.bra | (kb.bra << shift)}, va * vb);
    return {std::move(modes), a.cutoff(), std::move(out)};
}

inline double photon_number_expectation(const DensityOperator& state, ModeId mode) {
    const std::size_t pos = state.position(mode);
    double n = 0.0;
    for (const auto& [k, v] : state.entries())
        if (k.ket == k.bra) n += occupation(k.ket, pos) * v.real();
    return n;
}

// Diagonal weights P(n) for one mode, n = 0..cutoff.
inline std::vector<double> photon_number_distribution(const DensityOperator& state, ModeId mode) {
    const std::size_t pos = state.position(mode);
    std::vector<double> p(state.cutoff() + 1, 0.0);
    for (const auto& [k, v] : state.entries())
        if (k.ket == k.bra) p[occupation(k.ket, pos)] += v.real();
    return p;
}

inline double purity(const DensityOperator& state) {
    double p = 0.0;
    for (const auto& [k, v] : state.entries()) p += (v * state.entry(k.bra, k.ket)).real();
    return p;
}

inline double fidelity_to_pure(const DensityOperator& state, const PureState& target) {
    const double tr = state.trace();
    if (!(tr > 0.0)) throw std::domain_error("fidelity_to_pure: zero-trace state");
    if (std::abs(target.norm_squared() - 1.0) > 1e-9) throw std::invalid_argument("fidelity_to_pure: target not normalized");
    std::vector<std::size_t> pos;
    for (ModeId m : target.modes) pos.push_back(state.position(m));
    if (pos.size() != state.size()) throw std::invalid_argument("fidelity_to_pure: target must span the full register");
    auto key_of = [&](const FockBasisState& s) {
        BasisKey k = 0;
        for (std::size_t i = 0; i < pos.size(); ++i) k = with_occupation(k, pos[i], s.occupations[i]);
        return k;
    };
    complex f{};
    for (const auto& [s1, a1] : target.amplitudes)
        for (const auto& [s2, a2] : target.amplitudes) f += std::conj(a1) * state.entry(key_of(s1), key_of(s2)) * a2;
    return std::clamp(f.real() / tr, 0.0, 1.0);
}

// Applies a diagonal weight w(occupations of `measured`) to every entry whose
// ket and bra agree on the measured modes, then traces those modes out.
// Returns the unnormalized conditional state on the remaining modes; its trace
// is the probability of the weighted outcome.
template <typename Weight>
DensityOperator condition_diagonal(const DensityOperator& state, std::span<const ModeId> measured, Weight weight) {
    std::vector<std::size_t> mpos;
    for (ModeId m : measured) mpos.push_back(state.position(m));
    std::vector<ModeId> keep;
    for (ModeId m : state.modes())
        if (std::find(measured.begin(), measured.end(), m) == measured.end()) keep.push_back(m);
    if (keep.empty()) throw std::invalid_argument("condition_diagonal: nothing left after measurement");
    std::vector<std::size_t> kpos;
    for (ModeId m : keep) kpos.push_back(state.position(m));
    std::vector<int> occ(mpos.size());
    EntryMap out;
    for (const auto& [k, v] : state.entries()) {
        bool diagonal = true;
        for (std::size_t i = 0; i < mpos.size(); ++i) {
            occ[i] = occupation(k.ket, mpos[i]);
            if (occ[i] != occupation(k.bra, mpos[i])) {
                diagonal = false;
                break;
            }
        }
        if (!diagonal) continue;
        const double w = weight(std::span<const int>(occ));
        if (w == 0.0) continue;
        BasisKey ket = 0, bra = 0;
        for (std::size_t i = 0; i < kpos.size(); ++i) {
            ket = with_occupation(ket, i, occupation(k.ket, kpos[i]));
            bra = with_occupation(bra, i, occupation(k.bra, kpos[i]));
        }
        out[{ket, bra}] += v * w;
    }
    return {std::move(keep), state.cutoff(), std::move(out)};
}

// <target| rho |target> on the target's modes; returns the unnormalized
// state of the remaining modes.
inline DensityOperator project_onto(const DensityOperator& state, const PureState& target) {
    std::vector<std::size_t> tpos;
    for (ModeId m : target.modes) tpos.push_back(state.position(m));
    std::vector<ModeId> keep;
    std::vector<std::size_t> kpos;
    for (std::size_t i = 0; i < state.size(); ++i)
        if (std::find(tpos.begin(), tpos.end(), i) == tpos.end()) {
            keep.push_back(state.modes()[i]);
            kpos.push_back(i);
        }
    if (keep.empty()) throw std::invalid_argument("project_onto: target spans the whole register");
    auto target_part = [&](BasisKey key) {
        BasisKey out = 0;
        for (std::size_t i = 0; i < tpos.size(); ++i) out = with_occupation(out, i, occupation(key, tpos[i]));
        return out;
    };
    auto rest_part = [&](BasisKey key) {
        BasisKey out = 0;
        for (std::size_t i = 0; i < kpos.size(); ++i) out = with_occupation(out, i, occupation(key, kpos[i]));
        return out;
    };
    std::unordered_map<BasisKey, complex> amp;
    for (const auto& [s, a] : target.amplitudes) amp[s.key()] += a;
    EntryMap out;
    for (const auto& [k, v] : state.entries()) {
        auto ik = amp.find(target_part(k.ket));
        if (ik == amp.end()) continue;
        auto ib = amp.find(target_part(k.bra));
        if (ib == amp.end()) continue;
        out[{rest_part(k.ket), rest_part(k.bra)}] += std::conj(ik->second) * v * ib->second;
    }
    return {std::move(keep), state.cutoff(), std::move(out)};
}

// Sum over the diagonal of w(all occupations) * rho(n, n).
template <typename Weight>
double diagonal_expectation(const DensityOperator& state, Weight weight) {
    std::vector<int> occ(state.size());
    double total = 0.0;
    for (const auto& [k, v] : state.entries()) {
        if (k.ket != k.bra) continue;
        for (std::size_t i = 0; i < occ.size(); ++i) occ[i] = occupation(k.ket, i);
        total += weight(std::span<const int>(occ)) * v.real();
    }
    return total;
}

}  // namespace tmtele::fock

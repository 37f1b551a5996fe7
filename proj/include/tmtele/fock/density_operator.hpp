#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tmtele/fock/modes.hpp"

namespace tmtele::fock {

using complex = std::complex<double>;

// Occupation numbers packed four bits per mode; a register holds at most
// sixteen modes and the cutoff is at most fifteen.
using BasisKey = std::uint64_t;

inline constexpr int max_modes = 16;
inline constexpr int max_cutoff = 15;
inline constexpr double prune_tolerance = 1e-14;

constexpr int occupation(BasisKey key, std::size_t pos) {
    return static_cast<int>((key >> (4 * pos)) & 0xFu);
}

constexpr BasisKey with_occupation(BasisKey key, std::size_t pos, int n) {
    const BasisKey mask = BasisKey{0xF} << (4 * pos);
    return (key & ~mask) | (static_cast<BasisKey>(n) << (4 * pos));
}

// Per-mode photon numbers of one occupation basis vector.
struct FockBasisState {
    std::vector<int> occupations;

    FockBasisState() = default;
    FockBasisState(std::initializer_list<int> n) : occupations(n) {}
    explicit FockBasisState(std::vector<int> n) : occupations(std::move(n)) {}

    BasisKey key() const {
        BasisKey k = 0;
        for (std::size_t i = 0; i < occupations.size(); ++i) k = with_occupation(k, i, occupations[i]);
        return k;
    }

    static FockBasisState from_key(BasisKey key, std::size_t size) {
        FockBasisState s;
        s.occupations.resize(size);
        for (std::size_t i = 0; i < size; ++i) s.occupations[i] = occupation(key, i);
        return s;
    }

    friend bool operator==(const FockBasisState&, const FockBasisState&) = default;
};

struct EntryKey {
    BasisKey ket = 0;
    BasisKey bra = 0;
    friend bool operator==(const EntryKey&, const EntryKey&) = default;
};

struct EntryKeyHash {
    std::size_t operator()(const EntryKey& k) const noexcept {
        std::uint64_t h = k.ket * 0x9E3779B97F4A7C15ull;
        h ^= k.bra + 0x632BE59BD9B4E019ull + (h << 6) + (h >> 2);
        h ^= h >> 31;
        return static_cast<std::size_t>(h * 0xBF58476D1CE4E5B9ull);
    }
};

using EntryMap = std::unordered_map<EntryKey, complex, EntryKeyHash>;

// Sparse operator on a truncated multimode Fock space. Instances are
// immutable; every operation in ops.hpp returns a new value.
class DensityOperator {
public:
    DensityOperator(std::vector<ModeId> modes, int cutoff, EntryMap entries = {})
        : modes_(std::move(modes)), cutoff_(cutoff), entries_(std::move(entries)) {
        if (modes_.empty()) throw std::invalid_argument("density operator: empty mode register");
        if (modes_.size() > static_cast<std::size_t>(max_modes))
            throw std::invalid_argument("density operator: at most 16 modes are supported");
        if (cutoff_ < 1 || cutoff_ > max_cutoff)
            throw std::invalid_argument("density operator: cutoff must be in [1, 15]");
        for (std::size_t i = 0; i < modes_.size(); ++i)
            for (std::size_t j = i + 1; j < modes_.size(); ++j)
                if (modes_[i] == modes_[j])
                    throw std::invalid_argument("density operator: duplicate mode " + to_string(modes_[i]));
        prune();
    }

    const std::vector<ModeId>& modes() const { return modes_; }
    std::size_t size() const { return modes_.size(); }
    int cutoff() const { return cutoff_; }
    const EntryMap& entries() const { return entries_; }
    std::size_t nonzeros() const { return entries_.size(); }

    bool contains(ModeId m) const { return std::find(modes_.begin(), modes_.end(), m) != modes_.end(); }

    std::size_t position(ModeId m) const {
        auto it = std::find(modes_.begin(), modes_.end(), m);
        if (it == modes_.end()) throw std::invalid_argument("mode " + to_string(m) + " not in register");
        return static_cast<std::size_t>(it - modes_.begin());
    }

    complex entry(BasisKey ket, BasisKey bra) const {
        auto it = entries_.find({ket, bra});
        return it == entries_.end() ? complex{} : it->second;
    }

    complex entry(const FockBasisState& ket, const FockBasisState& bra) const {
        return entry(ket.key(), bra.key());
    }

    double trace() const {
        double t = 0.0;
        for (const auto& [k, v] : entries_)
            if (k.ket == k.bra) t += v.real();
        return t;
    }

    // Largest |entry(a,b) - conj(entry(b,a))| over the support.
    double hermiticity_defect() const {
        double worst = 0.0;
        for (const auto& [k, v] : entries_) worst = std::max(worst, std::abs(v - std::conj(entry(k.bra, k.ket))));
        return worst;
    }

    DensityOperator scaled(double factor) const {
        EntryMap out;
        out.reserve(entries_.size());
        for (const auto& [k, v] : entries_) out.emplace(k, v * factor);
        return {modes_, cutoff_, std::move(out)};
    }

    DensityOperator normalized() const {
        const double t = trace();
        if (!(t > 0.0)) throw std::domain_error("cannot normalize a zero-trace state");
        return scaled(1.0 / t);
    }

    // Elementwise sum; registers must match exactly.
    friend DensityOperator operator+(const DensityOperator& a, const DensityOperator& b) {
        if (a.modes_ != b.modes_ || a.cutoff_ != b.cutoff_)
            throw std::invalid_argument("density operator sum: register mismatch");
        EntryMap out = a.entries_;
        for (const auto& [k, v] : b.entries_) out[k] += v;
        return {a.modes_, a.cutoff_, std::move(out)};
    }

private:
    void prune() {
        for (auto it = entries_.begin(); it != entries_.end();) {
            if (std::abs(it->second) < prune_tolerance)
                it = entries_.erase(it);
            else
                ++it;
        }
    }

    std::vector<ModeId> modes_;
    int cutoff_;
    EntryMap entries_;
};

// Sparse ket over a register, used as a fidelity target.
struct PureState {
    std::vector<ModeId> modes;
    std::vector<std::pair<FockBasisState, complex>> amplitudes;

    double norm_squared() const {
        double n = 0.0;
        for (const auto& [s, a] : amplitudes) n += std::norm(a);
        return n;
    }
};

// Projector |psi><psi| as a density operator.
inline DensityOperator to_density(const PureState& psi, int cutoff) {
    EntryMap e;
    for (const auto& [s1, a1] : psi.amplitudes)
        for (const auto& [s2, a2] : psi.amplitudes) e[{s1.key(), s2.key()}] += a1 * std::conj(a2);
    return {psi.modes, cutoff, std::move(e)};
}

}  // namespace tmtele::fock

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmtele::analysis {

// Optimal measure-and-prepare fidelity for a single qubit copy.
constexpr double classical_bound_single() { return 2.0 / 3.0; }

enum class WcsStrategy {
    StateEstimation,            // F_n = (n+1)/(n+2)
    UnambiguousDiscrimination,  // F_1 = 2/3, F_n = 1 for n >= 2
};

inline std::string to_string(WcsStrategy s) {
    return s == WcsStrategy::StateEstimation ? "state_estimation" : "unambiguous_discrimination";
}

inline double wcs_photon_fidelity(WcsStrategy s, int n) {
    if (s == WcsStrategy::StateEstimation) return (n + 1.0) / (n + 2.0);
    return n >= 2 ? 1.0 : 2.0 / 3.0;
}

struct WcsBound {
    bool feasible = false;
    double fidelity = 0.0;
    int highest_accepted = 0;  // largest photon number the cheater keeps
    int lowest_accepted = 0;   // smallest photon number with q_n > 0
    std::vector<double> acceptance;  // q_n, index n
};

namespace detail {

// Poisson weights up to the point where the remaining tail is negligible.
inline std::vector<double> poisson_weights(double mu) {
    // 1 - sum(p) stalls at rounding level, so stop on the terms themselves
    // once they are past the mode and decreasing.
    std::vector<double> p{std::exp(-mu)};
    for (int n = 1; n < 1000 && (n <= 2 || n <= mu + 1.0 || p.back() > 1e-20); ++n) p.push_back(p.back() * mu / n);
    return p;
}

}  // namespace detail

// Cheater that accepts photon-number n with probability q_n must herald with
// overall probability eta = sum p_n q_n; the ratio objective is maximised by
// filling q_n in order of decreasing F_n.
inline WcsBound classical_bound_wcs(double mu, double herald_efficiency, WcsStrategy strategy) {
    if (!(mu > 0.0)) throw std::invalid_argument("classical_bound_wcs: mu must be > 0");
    if (!(herald_efficiency > 0.0 && herald_efficiency <= 1.0))
        throw std::invalid_argument("classical_bound_wcs: herald efficiency must be in (0, 1]");
    const std::vector<double> p = detail::poisson_weights(mu);
    WcsBound out;
    out.acceptance.assign(p.size(), 0.0);
    if (herald_efficiency > -std::expm1(-mu) * (1.0 + 1e-12)) return out;

    std::vector<int> order(p.size() - 1);
    std::iota(order.begin(), order.end(), 1);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double fa = wcs_photon_fidelity(strategy, a), fb = wcs_photon_fidelity(strategy, b);
        return fa != fb ? fa > fb : p[a] > p[b];
    });
    double remaining = herald_efficiency, numerator = 0.0;
    out.lowest_accepted = static_cast<int>(p.size());
    for (int n : order) {
        if (remaining <= 0.0) break;
        const double take = std::min(p[n], remaining);
        out.acceptance[n] = take / p[n];
        numerator += take * wcs_photon_fidelity(strategy, n);
        remaining -= take;
        out.highest_accepted = std::max(out.highest_accepted, n);
        out.lowest_accepted = std::min(out.lowest_accepted, n);
    }
    out.feasible = true;
    out.fidelity = numerator / (herald_efficiency - std::max(0.0, remaining));
    return out;
}

}  // namespace tmtele::analysis

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace tmtele::analysis {

// 68% one-sided Poisson upper limit for zero observed counts.
inline constexpr double zero_count_upper_limit = 1.14;

struct Visibility {
    double value = 0.0;
    double sigma = 0.0;
    // Set when one cell is empty; sigma is then 0 by the propagation formula
    // and the note carries a one-sided bound instead.
    std::optional<std::string> note;
};

namespace detail {

inline Visibility contrast(double good, double bad) {
    if (!(good >= 0.0 && bad >= 0.0)) throw std::invalid_argument("visibility: counts must be non-negative");
    const double total = good + bad;
    if (!(total > 0.0)) throw std::invalid_argument("visibility: zero total counts");
    Visibility v;
    v.value = (good - bad) / total;
    v.sigma = 2.0 * std::sqrt(good * good * bad + bad * bad * good) / (total * total);
    if (bad == 0.0) {
        const double bound = (good - zero_count_upper_limit) / (good + zero_count_upper_limit);
        v.note = "zero-count cell: V >= " + std::to_string(bound) + " (68% one-sided)";
    } else if (good == 0.0) {
        const double bound = (zero_count_upper_limit - bad) / (zero_count_upper_limit + bad);
        v.note = "zero-count cell: V <= " + std::to_string(bound) + " (68% one-sided)";
    }
    return v;
}

}  // namespace detail

// (C_par - C_orth) / (C_par + C_orth).
inline Visibility visibility_equator(double c_parallel, double c_orthogonal) {
    return detail::contrast(c_parallel, c_orthogonal);
}

// Flipped contrast for the poles: without the bit flip the teleported pole
// lands in the orthogonal window.
inline Visibility visibility_pole(double c_parallel, double c_orthogonal) {
    return detail::contrast(c_orthogonal, c_parallel);
}

inline double fidelity_from_visibility(double v) {
    if (!(v >= -1.0 - 1e-12 && v <= 1.0 + 1e-12)) throw std::invalid_argument("fidelity_from_visibility: V outside [-1, 1]");
    return (1.0 + v) / 2.0;
}

struct Estimate {
    double value = 0.0;
    double sigma = 0.0;
};

inline Estimate mean_fidelity(Estimate poles, Estimate equator) {
    for (double f : {poles.value, equator.value})
        if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("mean_fidelity: fidelity outside [0, 1]");
    return {poles.value / 3.0 + 2.0 * equator.value / 3.0,
            std::hypot(poles.sigma / 3.0, 2.0 * equator.sigma / 3.0)};
}

inline double mean_fidelity(double poles, double equator) { return mean_fidelity({poles, 0.0}, {equator, 0.0}).value; }

}  // namespace tmtele::analysis

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmtele/analysis/bounds.hpp"
#include "tmtele/analysis/estimators.hpp"
#include "tmtele/analysis/histogram.hpp"

namespace tmtele::analysis {

// Reference value for the weak-coherent-state bound quoted with the data.
inline constexpr double published_wcs_bound = 0.727;

class EmptyDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Setting labels are "<state>/parallel", "<state>/orthogonal" (equator
// analyzer) and "<state>/pole".
inline std::string setting_label(const std::string& state, const std::string& role) { return state + "/" + role; }

struct StateResult {
    std::string state;
    std::string analyzer;  // "pole" or "equator"
    double c_parallel = 0.0;
    double c_orthogonal = 0.0;
    std::optional<Visibility> visibility;  // empty when no coincidences
    std::optional<Estimate> fidelity;
};

struct ClassicalBounds {
    double single = classical_bound_single();
    double mu = 0.0;
    double herald_efficiency = 0.0;
    WcsBound state_estimation;
    WcsBound unambiguous;
    double published = published_wcs_bound;
};

inline ClassicalBounds classical_bounds(double mu, double herald_efficiency) {
    ClassicalBounds b;
    b.mu = mu;
    b.herald_efficiency = herald_efficiency;
    b.state_estimation = classical_bound_wcs(mu, herald_efficiency, WcsStrategy::StateEstimation);
    b.unambiguous = classical_bound_wcs(mu, herald_efficiency, WcsStrategy::UnambiguousDiscrimination);
    return b;
}

struct FidelityReport {
    std::vector<StateResult> states;
    std::optional<Estimate> poles;
    std::optional<Estimate> equator;
    std::optional<Estimate> mean;
    std::optional<Estimate> unconditional_equator;
    ClassicalBounds bounds;
    std::vector<std::string> notes;
};

namespace detail {

inline std::optional<Estimate> average(const std::vector<StateResult>& states, const std::string& analyzer) {
    double sum = 0.0, var = 0.0;
    int n = 0;
    for (const auto& s : states)
        if (s.analyzer == analyzer && s.fidelity) {
            sum += s.fidelity->value;
            var += s.fidelity->sigma * s.fidelity->sigma;
            ++n;
        }
    if (n == 0) return std::nullopt;
    return Estimate{sum / n, std::sqrt(var) / n};
}

template <typename Count>
double heralded(const BasicHistogram<Count>& h, const std::string& setting, const std::string& window) {
    return static_cast<double>(h.count(setting, "psi_plus", window)) + static_cast<double>(h.count(setting, "psi_minus", window));
}

template <typename Count>
double unconditioned(const BasicHistogram<Count>& h, const std::string& setting, const std::string& window) {
    double s = 0.0;
    for (const char* o : {"psi_plus", "psi_minus", "no_herald", "missed"}) s += static_cast<double>(h.count(setting, o, window));
    return s;
}

inline StateResult evaluate(std::string state, std::string analyzer, double c_par, double c_orth) {
    StateResult r{std::move(state), std::move(analyzer), c_par, c_orth, std::nullopt, std::nullopt};
    if (c_par + c_orth > 0.0) {
        r.visibility = r.analyzer == "pole" ? visibility_pole(c_par, c_orth) : visibility_equator(c_par, c_orth);
        r.fidelity = Estimate{fidelity_from_visibility(r.visibility->value), r.visibility->sigma / 2.0};
    }
    return r;
}

}  // namespace detail

// Without herald conditioning: all central-window detections of the equator
// settings, whatever the BSM reported.
template <typename Count>
std::optional<Estimate> unconditional_fidelity(const BasicHistogram<Count>& h) {
    std::vector<StateResult> states;
    for (const std::string& setting : h.settings()) {
        const auto slash = setting.rfind('/');
        if (slash == std::string::npos || setting.substr(slash + 1) != "parallel") continue;
        const std::string state = setting.substr(0, slash);
        states.push_back(detail::evaluate(state, "equator", detail::unconditioned(h, setting, "central"),
                                          detail::unconditioned(h, setting_label(state, "orthogonal"), "central")));
    }
    return detail::average(states, "equator");
}

template <typename Count>
FidelityReport report(const BasicHistogram<Count>& h, const ClassicalBounds& bounds) {
    if (h.empty()) throw EmptyDataError("report: histogram is empty");
    FidelityReport rep;
    rep.bounds = bounds;
    for (const std::string& setting : h.settings()) {
        const auto slash = setting.rfind('/');
        if (slash == std::string::npos) throw std::invalid_argument("report: malformed setting label '" + setting + "'");
        const std::string state = setting.substr(0, slash), role = setting.substr(slash + 1);
        if (role == "pole") {
            if (state != "e" && state != "l")
                throw std::invalid_argument("report: pole analyzer used for non-pole state '" + state + "'");
            const std::string own = state == "e" ? "early" : "late", other = state == "e" ? "late" : "early";
            rep.states.push_back(
                detail::evaluate(state, "pole", detail::heralded(h, setting, own), detail::heralded(h, setting, other)));
        } else if (role == "parallel") {
            rep.states.push_back(detail::evaluate(state, "equator", detail::heralded(h, setting, "central"),
                                                  detail::heralded(h, setting_label(state, "orthogonal"), "central")));
        } else if (role != "orthogonal") {
            throw std::invalid_argument("report: unknown analyzer role '" + role + "'");
        }
    }
    for (const auto& s : rep.states) {
        if (!s.fidelity) rep.notes.push_back("no heralded coincidences for state " + s.state);
        else if (s.visibility->note) rep.notes.push_back(s.state + ": " + *s.visibility->note);
    }
    rep.poles = detail::average(rep.states, "pole");
    rep.equator = detail::average(rep.states, "equator");
    if (rep.poles && rep.equator) {
        rep.mean = mean_fidelity(*rep.poles, *rep.equator);
        if (std::abs(rep.mean->value - (rep.poles->value / 3.0 + 2.0 * rep.equator->value / 3.0)) > 1e-12)
            throw std::logic_error("report: mean fidelity inconsistent with its parts");
    }
    rep.unconditional_equator = unconditional_fidelity(h);
    return rep;
}

}  // namespace tmtele::analysis

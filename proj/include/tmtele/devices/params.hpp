#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tmtele::devices {

// Entangled-pair source. One two-mode squeezer per time bin.
struct SpdcSourceParams {
    double pair_amplitude = 0.04;
    double phase_coherence = 1.0;     // damping of the |ee><ll| coherence
    double werner_white_noise = 0.0;  // weight of the fully twirled admixture
    double tau_pump_us = 1.0;
    double tau_pair_ns = 120.0;

    void validate() const {
        if (!(pair_amplitude >= 0.0 && pair_amplitude * pair_amplitude < 1.0))
            throw std::invalid_argument("spdc.pair_amplitude: must satisfy 0 <= pair_amplitude^2 < 1");
        if (!(phase_coherence >= 0.0 && phase_coherence <= 1.0))
            throw std::invalid_argument("spdc.phase_coherence: must be in [0,1]");
        if (!(werner_white_noise >= 0.0 && werner_white_noise <= 1.0))
            throw std::invalid_argument("spdc.werner_white_noise: must be in [0,1]");
        if (!(tau_pump_us * 1000.0 > tau_pair_ns))
            throw std::invalid_argument("spdc.tau_pump_us: pump coherence must exceed the pair coherence time");
    }
};

// Weak coherent time-bin qubit alpha|e> + e^{i phi} beta|l>.
struct InputQubitSpec {
    double alpha = 1.0;
    double beta = 0.0;
    double phi = 0.0;
    double mean_photon_number = 0.02;
    double overlap = 0.9;  // intensity fraction in the mode matched to the idler

    void validate() const {
        if (std::abs(alpha * alpha + beta * beta - 1.0) > 1e-9)
            throw std::invalid_argument("input_qubit: alpha^2 + beta^2 must equal 1");
        if (!(mean_photon_number >= 0.0)) throw std::invalid_argument("input_qubit.mean_photon_number: must be >= 0");
        if (!(overlap >= 0.0 && overlap <= 1.0)) throw std::invalid_argument("input_qubit.overlap: must be in [0,1]");
    }
};

enum class NamedQubit { Early, Late, Plus, R };

inline InputQubitSpec named_qubit(NamedQubit q, double mean_photon_number = 0.02, double overlap = 0.9) {
    const double h = std::numbers::sqrt2 / 2.0;
    switch (q) {
        case NamedQubit::Early: return {1.0, 0.0, 0.0, mean_photon_number, overlap};
        case NamedQubit::Late: return {0.0, 1.0, 0.0, mean_photon_number, overlap};
        case NamedQubit::Plus: return {h, h, 0.0, mean_photon_number, overlap};
        case NamedQubit::R: return {h, h, std::numbers::pi / 2.0, mean_photon_number, overlap};
    }
    throw std::invalid_argument("unknown named qubit");
}

inline std::string to_string(NamedQubit q) {
    switch (q) {
        case NamedQubit::Early: return "e";
        case NamedQubit::Late: return "l";
        case NamedQubit::Plus: return "plus";
        case NamedQubit::R: return "R";
    }
    return "?";
}

inline NamedQubit parse_named_qubit(const std::string& s) {
    if (s == "e") return NamedQubit::Early;
    if (s == "l") return NamedQubit::Late;
    if (s == "plus" || s == "+") return NamedQubit::Plus;
    if (s == "R") return NamedQubit::R;
    throw std::invalid_argument("unknown qubit name '" + s + "' (expected e, l, plus or R)");
}

// Defaults are the exponential through (10 us, 0.188) and (17.5 us, 0.122).
struct AfcMemoryParams {
    double eta0 = 0.188 * std::exp(10.0 * std::log(0.188 / 0.122) / 7.5);
    double tau_afc_us = 7.5 / std::log(0.188 / 0.122);
    double storage_time_us = 10.0;
    bool retrieval_is_fixed_delay = true;

    void validate() const {
        if (!(eta0 > 0.0 && eta0 <= 1.0)) throw std::invalid_argument("memory.eta0: must be in (0,1]");
        if (!(tau_afc_us > 0.0)) throw std::invalid_argument("memory.tau_afc_us: must be > 0");
        if (!(storage_time_us > 0.0)) throw std::invalid_argument("memory.storage_time_us: must be > 0");
    }
};

struct FiberParams {
    double length_km = 0.005;
    double attenuation_db_per_km = 0.3;
    double delay_us_per_km = 5.0;

    void validate() const {
        if (!(length_km >= 0.0)) throw std::invalid_argument("fiber.length_km: must be >= 0");
        if (!(attenuation_db_per_km >= 0.0)) throw std::invalid_argument("fiber.attenuation_db_per_km: must be >= 0");
        if (!(delay_us_per_km >= 0.0)) throw std::invalid_argument("fiber.delay_us_per_km: must be >= 0");
    }
};

enum class AnalyzerKind { Equator, Pole };

struct AnalyzerSetting {
    AnalyzerKind kind = AnalyzerKind::Equator;
    double theta = 0.0;                    // equator projection phase (rad)
    double analysis_afc_storage_ns = 420.0;
    double analysis_split = 0.5;           // probability of storage in the analysis crystal

    void validate() const {
        if (!(analysis_split >= 0.0 && analysis_split <= 1.0))
            throw std::invalid_argument("analyzer.analysis_split: must be in [0,1]");
        if (!(analysis_afc_storage_ns > 0.0)) throw std::invalid_argument("analyzer.analysis_afc_storage_ns: must be > 0");
    }

    static AnalyzerSetting equator(double theta) { return {AnalyzerKind::Equator, theta}; }
    static AnalyzerSetting pole() { return {AnalyzerKind::Pole}; }
};

}  // namespace tmtele::devices

#pragma once

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "tmtele/config/experiment.hpp"

namespace tmtele::runner {

// Unreadable or syntactically broken config document.
class ConfigParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

using Setter = std::function<void(const YAML::Node&)>;

template <typename T>
Setter field(T& target) {
    return [&target](const YAML::Node& n) { target = n.as<T>(); };
}

inline Setter optional_field(std::optional<double>& target) {
    return [&target](const YAML::Node& n) {
        if (n.IsNull()) target.reset();
        else target = n.as<double>();
    };
}

// Applies a mapping node through a table of known keys; unknown keys are an
// error so that typos do not silently fall back to defaults.
inline void apply_map(const YAML::Node& node, const std::string& path, const std::map<std::string, Setter>& keys) {
    if (node.IsNull()) return;
    if (!node.IsMap()) throw ValidationError(path.empty() ? "<root>" : path, "expected a mapping");
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        const std::string where = path.empty() ? key : path + "." + key;
        auto it = keys.find(key);
        if (it == keys.end()) throw ValidationError(where, "unknown key");
        try {
            it->second(kv.second);
        } catch (const YAML::BadConversion&) {
            throw ValidationError(where, "value has the wrong type");
        }
    }
}

inline void apply_detector(const YAML::Node& n, const std::string& path, fock::ThresholdDetectorParams& d) {
    apply_map(n, path,
              {{"efficiency", field(d.efficiency)},
               {"dark_click_probability", field(d.dark_click_probability)},
               {"dead_time_ns", field(d.dead_time_ns)}});
}

inline void apply_input(const YAML::Node& n, ExperimentConfig& cfg) {
    std::string state = cfg.input_name ? devices::to_string(*cfg.input_name) : "custom";
    devices::InputQubitSpec spec = cfg.input_qubit;
    apply_map(n, "input_qubit",
              {{"state", field(state)},
               {"alpha", field(spec.alpha)},
               {"beta", field(spec.beta)},
               {"phi", field(spec.phi)},
               {"mean_photon_number", field(spec.mean_photon_number)},
               {"overlap", field(spec.overlap)}});
    if (state == "custom") {
        cfg.input_name.reset();
        cfg.input_qubit = spec;
        return;
    }
    devices::NamedQubit q;
    try {
        q = devices::parse_named_qubit(state);
    } catch (const std::invalid_argument& e) {
        throw ValidationError("input_qubit.state", e.what());
    }
    for (const char* k : {"alpha", "beta", "phi"})
        if (n[k]) throw ValidationError(std::string("input_qubit.") + k, "only allowed with state: custom");
    cfg.input_name = q;
    cfg.input_qubit = devices::named_qubit(q, spec.mean_photon_number, spec.overlap);
}

inline void apply_document(const YAML::Node& root, ExperimentConfig& cfg) {
    std::string kind = cfg.analyzer.kind == devices::AnalyzerKind::Pole ? "pole" : "equator";
    apply_map(root, "",
              {{"cutoff", field(cfg.cutoff)},
               {"soundness", field(cfg.soundness)},
               {"strict", field(cfg.strict)},
               {"spdc",
                [&](const YAML::Node& n) {
                    apply_map(n, "spdc",
                              {{"pair_amplitude", field(cfg.spdc.pair_amplitude)},
                               {"phase_coherence", field(cfg.spdc.phase_coherence)},
                               {"werner_white_noise", field(cfg.spdc.werner_white_noise)},
                               {"tau_pump_us", field(cfg.spdc.tau_pump_us)},
                               {"tau_pair_ns", field(cfg.spdc.tau_pair_ns)}});
                }},
               {"input_qubit", [&](const YAML::Node& n) { apply_input(n, cfg); }},
               {"memory",
                [&](const YAML::Node& n) {
                    apply_map(n, "memory",
                              {{"eta0", field(cfg.memory.eta0)},
                               {"tau_afc_us", field(cfg.memory.tau_afc_us)},
                               {"storage_time_us", field(cfg.memory.storage_time_us)},
                               {"retrieval_is_fixed_delay", field(cfg.memory.retrieval_is_fixed_delay)}});
                }},
               {"fiber",
                [&](const YAML::Node& n) {
                    apply_map(n, "fiber",
                              {{"length_km", field(cfg.fiber.length_km)},
                               {"attenuation_db_per_km", field(cfg.fiber.attenuation_db_per_km)},
                               {"delay_us_per_km", field(cfg.fiber.delay_us_per_km)}});
                }},
               {"detectors",
                [&](const YAML::Node& n) {
                    apply_map(n, "detectors",
                              {{"d1", [&](const YAML::Node& d) { apply_detector(d, "detectors.d1", cfg.detectors.d1); }},
                               {"d2", [&](const YAML::Node& d) { apply_detector(d, "detectors.d2", cfg.detectors.d2); }},
                               {"signal",
                                [&](const YAML::Node& d) { apply_detector(d, "detectors.signal", cfg.detectors.signal); }}});
                }},
               {"timing",
                [&](const YAML::Node& n) {
                    apply_map(n, "timing",
                              {{"attempt_period_us", field(cfg.timing.attempt_period_us)},
                               {"bin_separation_ns", field(cfg.timing.bin_separation_ns)},
                               {"qubit_duration_ns", field(cfg.timing.qubit_duration_ns)},
                               {"classical_return_us", optional_field(cfg.timing.classical_return_us)},
                               {"processing_latency_us", field(cfg.timing.processing_latency_us)}});
                }},
               {"analyzer",
                [&](const YAML::Node& n) {
                    apply_map(n, "analyzer",
                              {{"kind", field(kind)},
                               {"theta", field(cfg.analyzer.theta)},
                               {"analysis_afc_storage_ns", field(cfg.analyzer.analysis_afc_storage_ns)},
                               {"analysis_split", field(cfg.analyzer.analysis_split)}});
                }},
               {"campaign",
                [&](const YAML::Node& n) {
                    apply_map(n, "campaign",
                              {{"n_attempts", field(cfg.campaign.n_attempts)},
                               {"master_seed", field(cfg.campaign.master_seed)}});
                }}});
    if (kind == "equator") cfg.analyzer.kind = devices::AnalyzerKind::Equator;
    else if (kind == "pole") cfg.analyzer.kind = devices::AnalyzerKind::Pole;
    else throw ValidationError("analyzer.kind", "expected equator or pole");
}

}  // namespace detail

// Overlays a YAML document on `base` and validates the result.
inline ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {}) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigParseError(std::string("config parse error: ") + e.what());
    }
    detail::apply_document(root, base);
    base.validate();
    return base;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigParseError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), std::move(base));
}

// Full YAML form of a config; parse_config(dump_config(c)) reproduces c.
inline std::string dump_config(const ExperimentConfig& cfg) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    auto detector = [&](const char* name, const fock::ThresholdDetectorParams& d) {
        out << YAML::Key << name << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "efficiency" << YAML::Value << d.efficiency;
        out << YAML::Key << "dark_click_probability" << YAML::Value << d.dark_click_probability;
        out << YAML::Key << "dead_time_ns" << YAML::Value << d.dead_time_ns;
        out << YAML::EndMap;
    };
    out << YAML::BeginMap;
    out << YAML::Key << "cutoff" << YAML::Value << cfg.cutoff;
    out << YAML::Key << "soundness" << YAML::Value << cfg.soundness;
    out << YAML::Key << "strict" << YAML::Value << cfg.strict;
    out << YAML::Key << "spdc" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "pair_amplitude" << YAML::Value << cfg.spdc.pair_amplitude;
    out << YAML::Key << "phase_coherence" << YAML::Value << cfg.spdc.phase_coherence;
    out << YAML::Key << "werner_white_noise" << YAML::Value << cfg.spdc.werner_white_noise;
    out << YAML::Key << "tau_pump_us" << YAML::Value << cfg.spdc.tau_pump_us;
    out << YAML::Key << "tau_pair_ns" << YAML::Value << cfg.spdc.tau_pair_ns;
    out << YAML::EndMap;
    out << YAML::Key << "input_qubit" << YAML::Value << YAML::BeginMap;
    if (cfg.input_name) {
        out << YAML::Key << "state" << YAML::Value << devices::to_string(*cfg.input_name);
    } else {
        out << YAML::Key << "state" << YAML::Value << "custom";
        out << YAML::Key << "alpha" << YAML::Value << cfg.input_qubit.alpha;
        out << YAML::Key << "beta" << YAML::Value << cfg.input_qubit.beta;
        out << YAML::Key << "phi" << YAML::Value << cfg.input_qubit.phi;
    }
    out << YAML::Key << "mean_photon_number" << YAML::Value << cfg.input_qubit.mean_photon_number;
    out << YAML::Key << "overlap" << YAML::Value << cfg.input_qubit.overlap;
    out << YAML::EndMap;
    out << YAML::Key << "memory" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "eta0" << YAML::Value << cfg.memory.eta0;
    out << YAML::Key << "tau_afc_us" << YAML::Value << cfg.memory.tau_afc_us;
    out << YAML::Key << "storage_time_us" << YAML::Value << cfg.memory.storage_time_us;
    out << YAML::Key << "retrieval_is_fixed_delay" << YAML::Value << cfg.memory.retrieval_is_fixed_delay;
    out << YAML::EndMap;
    out << YAML::Key << "fiber" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "length_km" << YAML::Value << cfg.fiber.length_km;
    out << YAML::Key << "attenuation_db_per_km" << YAML::Value << cfg.fiber.attenuation_db_per_km;
    out << YAML::Key << "delay_us_per_km" << YAML::Value << cfg.fiber.delay_us_per_km;
    out << YAML::EndMap;
    out << YAML::Key << "detectors" << YAML::Value << YAML::BeginMap;
    detector("d1", cfg.detectors.d1);
    detector("d2", cfg.detectors.d2);
    detector("signal", cfg.detectors.signal);
    out << YAML::EndMap;
    out << YAML::Key << "timing" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "attempt_period_us" << YAML::Value << cfg.timing.attempt_period_us;
    out << YAML::Key << "bin_separation_ns" << YAML::Value << cfg.timing.bin_separation_ns;
    out << YAML::Key << "qubit_duration_ns" << YAML::Value << cfg.timing.qubit_duration_ns;
    out << YAML::Key << "classical_return_us" << YAML::Value;
    if (cfg.timing.classical_return_us) out << *cfg.timing.classical_return_us;
    else out << YAML::Null;
    out << YAML::Key << "processing_latency_us" << YAML::Value << cfg.timing.processing_latency_us;
    out << YAML::EndMap;
    out << YAML::Key << "analyzer" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << (cfg.analyzer.kind == devices::AnalyzerKind::Pole ? "pole" : "equator");
    out << YAML::Key << "theta" << YAML::Value << cfg.analyzer.theta;
    out << YAML::Key << "analysis_afc_storage_ns" << YAML::Value << cfg.analyzer.analysis_afc_storage_ns;
    out << YAML::Key << "analysis_split" << YAML::Value << cfg.analyzer.analysis_split;
    out << YAML::EndMap;
    out << YAML::Key << "campaign" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "n_attempts" << YAML::Value << cfg.campaign.n_attempts;
    out << YAML::Key << "master_seed" << YAML::Value << cfg.campaign.master_seed;
    out << YAML::EndMap;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace tmtele::runner

#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "tmtele/runner/result.hpp"

namespace tmtele::runner {

using Json = nlohmann::ordered_json;

inline constexpr int report_schema_version = 1;

namespace detail {

template <typename T, typename F>
Json encode_optional(const std::optional<T>& v, F&& f) {
    return v ? f(*v) : Json(nullptr);
}

template <typename T, typename F>
std::optional<T> decode_optional(const Json& j, F&& f) {
    if (j.is_null()) return std::nullopt;
    return f(j);
}

inline Json encode_number(double v) { return v; }
inline double decode_number(const Json& j) { return j.get<double>(); }

}  // namespace detail

// ---- config -----------------------------------------------------------------

inline Json encode(const fock::ThresholdDetectorParams& d) {
    return {{"efficiency", d.efficiency}, {"dark_click_probability", d.dark_click_probability}, {"dead_time_ns", d.dead_time_ns}};
}

inline fock::ThresholdDetectorParams decode_detector(const Json& j) {
    return {j.at("efficiency").get<double>(), j.at("dark_click_probability").get<double>(), j.at("dead_time_ns").get<double>()};
}

inline Json encode(const ExperimentConfig& c) {
    Json input = {{"state", c.input_name ? devices::to_string(*c.input_name) : "custom"},
                  {"alpha", c.input_qubit.alpha},
                  {"beta", c.input_qubit.beta},
                  {"phi", c.input_qubit.phi},
                  {"mean_photon_number", c.input_qubit.mean_photon_number},
                  {"overlap", c.input_qubit.overlap}};
    return {
        {"cutoff", c.cutoff},
        {"soundness", c.soundness},
        {"strict", c.strict},
        {"spdc",
         {{"pair_amplitude", c.spdc.pair_amplitude},
          {"phase_coherence", c.spdc.phase_coherence},
          {"werner_white_noise", c.spdc.werner_white_noise},
          {"tau_pump_us", c.spdc.tau_pump_us},
          {"tau_pair_ns", c.spdc.tau_pair_ns}}},
        {"input_qubit", input},
        {"memory",
         {{"eta0", c.memory.eta0},
          {"tau_afc_us", c.memory.tau_afc_us},
          {"storage_time_us", c.memory.storage_time_us},
          {"retrieval_is_fixed_delay", c.memory.retrieval_is_fixed_delay}}},
        {"fiber",
         {{"length_km", c.fiber.length_km},
          {"attenuation_db_per_km", c.fiber.attenuation_db_per_km},
          {"delay_us_per_km", c.fiber.delay_us_per_km}}},
        {"detectors", {{"d1", encode(c.detectors.d1)}, {"d2", encode(c.detectors.d2)}, {"signal", encode(c.detectors.signal)}}},
        {"timing",
         {{"attempt_period_us", c.timing.attempt_period_us},
          {"bin_separation_ns", c.timing.bin_separation_ns},
          {"qubit_duration_ns", c.timing.qubit_duration_ns},
          {"classical_return_us", detail::encode_optional(c.timing.classical_return_us, detail::encode_number)},
          {"processing_latency_us", c.timing.processing_latency_us}}},
        {"analyzer",
         {{"kind", c.analyzer.kind == devices::AnalyzerKind::Pole ? "pole" : "equator"},
          {"theta", c.analyzer.theta},
          {"analysis_afc_storage_ns", c.analyzer.analysis_afc_storage_ns},
          {"analysis_split", c.analyzer.analysis_split}}},
        {"campaign", {{"n_attempts", c.campaign.n_attempts}, {"master_seed", c.campaign.master_seed}}},
    };
}

inline ExperimentConfig decode_config(const Json& j) {
    ExperimentConfig c;
    c.cutoff = j.at("cutoff").get<int>();
    c.soundness = j.at("soundness").get<double>();
    c.strict = j.at("strict").get<bool>();
    const Json& s = j.at("spdc");
    c.spdc = {s.at("pair_amplitude").get<double>(), s.at("phase_coherence").get<double>(),
              s.at("werner_white_noise").get<double>(), s.at("tau_pump_us").get<double>(), s.at("tau_pair_ns").get<double>()};
    const Json& q = j.at("input_qubit");
    c.input_qubit = {q.at("alpha").get<double>(), q.at("beta").get<double>(), q.at("phi").get<double>(),
                     q.at("mean_photon_number").get<double>(), q.at("overlap").get<double>()};
    const std::string state = q.at("state").get<std::string>();
    if (state == "custom") c.input_name.reset();
    else c.input_name = devices::parse_named_qubit(state);
    const Json& m = j.at("memory");
    c.memory = {m.at("eta0").get<double>(), m.at("tau_afc_us").get<double>(), m.at("storage_time_us").get<double>(),
                m.at("retrieval_is_fixed_delay").get<bool>()};
    const Json& f = j.at("fiber");
    c.fiber = {f.at("length_km").get<double>(), f.at("attenuation_db_per_km").get<double>(), f.at("delay_us_per_km").get<double>()};
    const Json& d = j.at("detectors");
    c.detectors = {decode_detector(d.at("d1")), decode_detector(d.at("d2")), decode_detector(d.at("signal"))};
    const Json& t = j.at("timing");
    c.timing.attempt_period_us = t.at("attempt_period_us").get<double>();
    c.timing.bin_separation_ns = t.at("bin_separation_ns").get<double>();
    c.timing.qubit_duration_ns = t.at("qubit_duration_ns").get<double>();
    c.timing.classical_return_us = detail::decode_optional<double>(t.at("classical_return_us"), detail::decode_number);
    c.timing.processing_latency_us = t.at("processing_latency_us").get<double>();
    const Json& a = j.at("analyzer");
    c.analyzer.kind = a.at("kind").get<std::string>() == "pole" ? devices::AnalyzerKind::Pole : devices::AnalyzerKind::Equator;
    c.analyzer.theta = a.at("theta").get<double>();
    c.analyzer.analysis_afc_storage_ns = a.at("analysis_afc_storage_ns").get<double>();
    c.analyzer.analysis_split = a.at("analysis_split").get<double>();
    c.campaign = {j.at("campaign").at("n_attempts").get<std::uint64_t>(), j.at("campaign").at("master_seed").get<std::uint64_t>()};
    return c;
}

// ---- report -----------------------------------------------------------------

inline Json encode(const analysis::Estimate& e) { return {{"value", e.value}, {"sigma", e.sigma}}; }
inline analysis::Estimate decode_estimate(const Json& j) { return {j.at("value").get<double>(), j.at("sigma").get<double>()}; }

inline Json encode(const analysis::WcsBound& b) {
    return {{"feasible", b.feasible},
            {"fidelity", b.feasible ? Json(b.fidelity) : Json(nullptr)},
            {"lowest_accepted", b.lowest_accepted},
            {"highest_accepted", b.highest_accepted}};
}

inline analysis::WcsBound decode_wcs(const Json& j) {
    analysis::WcsBound b;
    b.feasible = j.at("feasible").get<bool>();
    b.fidelity = j.at("fidelity").is_null() ? 0.0 : j.at("fidelity").get<double>();
    b.lowest_accepted = j.at("lowest_accepted").get<int>();
    b.highest_accepted = j.at("highest_accepted").get<int>();
    return b;
}

inline Json encode(const analysis::FidelityReport& r) {
    auto est = [](const analysis::Estimate& e) { return encode(e); };
    Json states = Json::array();
    for (const auto& s : r.states) {
        states.push_back({{"state", s.state},
                          {"analyzer", s.analyzer},
                          {"c_parallel", s.c_parallel},
                          {"c_orthogonal", s.c_orthogonal},
                          {"visibility", s.visibility ? encode(analysis::Estimate{s.visibility->value, s.visibility->sigma})
                                                      : Json(nullptr)},
                          {"visibility_note", s.visibility && s.visibility->note ? Json(*s.visibility->note) : Json(nullptr)},
                          {"fidelity", detail::encode_optional(s.fidelity, est)}});
    }
    return {{"states", states},
            {"f_poles", detail::encode_optional(r.poles, est)},
            {"f_eq", detail::encode_optional(r.equator, est)},
            {"f_mean", detail::encode_optional(r.mean, est)},
            {"unconditional_f_eq", detail::encode_optional(r.unconditional_equator, est)},
            {"classical_bounds",
             {{"single", r.bounds.single},
              {"mu", r.bounds.mu},
              {"herald_efficiency", r.bounds.herald_efficiency},
              {"wcs_state_estimation", encode(r.bounds.state_estimation)},
              {"wcs_unambiguous_discrimination", encode(r.bounds.unambiguous)},
              {"wcs_published_reference", r.bounds.published}}},
            {"notes", r.notes}};
}

inline analysis::FidelityReport decode_report(const Json& j) {
    analysis::FidelityReport r;
    for (const Json& s : j.at("states")) {
        analysis::StateResult st;
        st.state = s.at("state").get<std::string>();
        st.analyzer = s.at("analyzer").get<std::string>();
        st.c_parallel = s.at("c_parallel").get<double>();
        st.c_orthogonal = s.at("c_orthogonal").get<double>();
        if (!s.at("visibility").is_null()) {
            const auto v = decode_estimate(s.at("visibility"));
            st.visibility = analysis::Visibility{v.value, v.sigma, std::nullopt};
            if (!s.at("visibility_note").is_null()) st.visibility->note = s.at("visibility_note").get<std::string>();
        }
        st.fidelity = detail::decode_optional<analysis::Estimate>(s.at("fidelity"), decode_estimate);
        r.states.push_back(std::move(st));
    }
    r.poles = detail::decode_optional<analysis::Estimate>(j.at("f_poles"), decode_estimate);
    r.equator = detail::decode_optional<analysis::Estimate>(j.at("f_eq"), decode_estimate);
    r.mean = detail::decode_optional<analysis::Estimate>(j.at("f_mean"), decode_estimate);
    r.unconditional_equator = detail::decode_optional<analysis::Estimate>(j.at("unconditional_f_eq"), decode_estimate);
    const Json& b = j.at("classical_bounds");
    r.bounds.single = b.at("single").get<double>();
    r.bounds.mu = b.at("mu").get<double>();
    r.bounds.herald_efficiency = b.at("herald_efficiency").get<double>();
    r.bounds.state_estimation = decode_wcs(b.at("wcs_state_estimation"));
    r.bounds.unambiguous = decode_wcs(b.at("wcs_unambiguous_discrimination"));
    r.bounds.published = b.at("wcs_published_reference").get<double>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
}

// ---- scenario result ------------------------------------------------------------

inline Json encode(const TimingSummary& t) {
    return {{"one_way_optical_us", t.one_way_optical_us},
            {"classical_return_us", t.classical_return_us},
            {"processing_latency_us", t.processing_latency_us},
            {"storage_time_us", t.storage_time_us},
            {"wait_us", t.wait_us},
            {"remaining_margin_us", t.remaining_margin_us},
            {"feasible", t.feasible},
            {"herald_before_deadline", t.herald_before_deadline},
            {"in_flight_max", t.in_flight_max},
            {"in_flight_steady_min", t.in_flight_steady_min},
            {"in_flight_bound", t.in_flight_bound},
            {"scheduled_attempts", t.scheduled_attempts},
            {"heralds_matched", t.heralds_matched},
            {"heralds_dropped", t.heralds_dropped}};
}

inline TimingSummary decode_timing(const Json& j) {
    TimingSummary t;
    t.one_way_optical_us = j.at("one_way_optical_us").get<double>();
    t.classical_return_us = j.at("classical_return_us").get<double>();
    t.processing_latency_us = j.at("processing_latency_us").get<double>();
    t.storage_time_us = j.at("storage_time_us").get<double>();
    t.wait_us = j.at("wait_us").get<double>();
    t.remaining_margin_us = j.at("remaining_margin_us").get<double>();
    t.feasible = j.at("feasible").get<bool>();
    t.herald_before_deadline = j.at("herald_before_deadline").get<bool>();
    t.in_flight_max = j.at("in_flight_max").get<int>();
    t.in_flight_steady_min = j.at("in_flight_steady_min").get<int>();
    t.in_flight_bound = j.at("in_flight_bound").get<int>();
    t.scheduled_attempts = j.at("scheduled_attempts").get<std::uint64_t>();
    t.heralds_matched = j.at("heralds_matched").get<std::uint64_t>();
    t.heralds_dropped = j.at("heralds_dropped").get<std::uint64_t>();
    return t;
}

inline Json encode(const RateSweep& s) {
    auto est = [](const analysis::Estimate& e) { return encode(e); };
    Json points = Json::array();
    for (const auto& p : s.points)
        points.push_back({{"rate_khz", p.rate_khz},
                          {"attempt_period_us", p.attempt_period_us},
                          {"fidelity", detail::encode_optional(p.fidelity, est)},
                          {"expected_fidelity", p.expected_fidelity},
                          {"in_flight_max", p.in_flight_max},
                          {"in_flight_steady_min", p.in_flight_steady_min}});
    return {{"points", points},
            {"single_mode_limit_khz", s.single_mode_limit_khz},
            {"multiplexed_limit_mhz", s.multiplexed_limit_mhz},
            {"weighted_mean", detail::encode_optional(s.weighted_mean, detail::encode_number)},
            {"chi2", detail::encode_optional(s.chi2, detail::encode_number)},
            {"dof", s.dof},
            {"p_value", detail::encode_optional(s.p_value, detail::encode_number)},
            {"spread", detail::encode_optional(s.spread, detail::encode_number)},
            {"pooled_sigma", detail::encode_optional(s.pooled_sigma, detail::encode_number)}};
}

inline RateSweep decode_sweep(const Json& j) {
    RateSweep s;
    for (const Json& p : j.at("points"))
        s.points.push_back({p.at("rate_khz").get<double>(), p.at("attempt_period_us").get<double>(),
                            detail::decode_optional<analysis::Estimate>(p.at("fidelity"), decode_estimate),
                            p.at("expected_fidelity").get<double>(), p.at("in_flight_max").get<int>(),
                            p.at("in_flight_steady_min").get<int>()});
    s.single_mode_limit_khz = j.at("single_mode_limit_khz").get<double>();
    s.multiplexed_limit_mhz = j.at("multiplexed_limit_mhz").get<double>();
    s.weighted_mean = detail::decode_optional<double>(j.at("weighted_mean"), detail::decode_number);
    s.chi2 = detail::decode_optional<double>(j.at("chi2"), detail::decode_number);
    s.dof = j.at("dof").get<int>();
    s.p_value = detail::decode_optional<double>(j.at("p_value"), detail::decode_number);
    s.spread = detail::decode_optional<double>(j.at("spread"), detail::decode_number);
    s.pooled_sigma = detail::decode_optional<double>(j.at("pooled_sigma"), detail::decode_number);
    return s;
}

inline Json encode(const CalibrationSummary& c) {
    return {{"target_f_eq", c.target},
            {"werner_white_noise", c.werner_white_noise},
            {"achieved_f_eq", c.achieved},
            {"iterations", c.iterations}};
}

inline CalibrationSummary decode_calibration(const Json& j) {
    return {j.at("target_f_eq").get<double>(), j.at("werner_white_noise").get<double>(),
            j.at("achieved_f_eq").get<double>(), j.at("iterations").get<int>()};
}

inline Json encode(const ScenarioResult& r) {
    auto rep = [](const analysis::FidelityReport& x) { return encode(x); };
    auto sweep = [](const RateSweep& x) { return encode(x); };
    auto cal = [](const CalibrationSummary& x) { return encode(x); };
    return {{"schema_version", report_schema_version},
            {"scenario", r.scenario},
            {"seed", r.seed},
            {"attempts_per_setting", r.attempts_per_setting},
            {"config", encode(r.config)},
            {"timing", encode(r.timing)},
            {"report", detail::encode_optional(r.report, rep)},
            {"expected", detail::encode_optional(r.expected, rep)},
            {"rate_sweep", detail::encode_optional(r.rate_sweep, sweep)},
            {"calibration", detail::encode_optional(r.calibration, cal)},
            {"warnings", r.warnings}};
}

inline ScenarioResult decode_result(const Json& j) {
    if (j.at("schema_version").get<int>() != report_schema_version)
        throw std::invalid_argument("unsupported report schema version");
    ScenarioResult r;
    r.scenario = j.at("scenario").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.attempts_per_setting = j.at("attempts_per_setting").get<std::uint64_t>();
    r.config = decode_config(j.at("config"));
    r.timing = decode_timing(j.at("timing"));
    r.report = detail::decode_optional<analysis::FidelityReport>(j.at("report"), decode_report);
    r.expected = detail::decode_optional<analysis::FidelityReport>(j.at("expected"), decode_report);
    r.rate_sweep = detail::decode_optional<RateSweep>(j.at("rate_sweep"), decode_sweep);
    r.calibration = detail::decode_optional<CalibrationSummary>(j.at("calibration"), decode_calibration);
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
}

inline std::string to_json_text(const ScenarioResult& r) { return encode(r).dump(2) + "\n"; }

}  // namespace tmtele::runner

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tmtele/config/experiment.hpp"
#include "tmtele/protocol/attempt.hpp"

namespace tmtele::protocol {

// Per-attempt time offsets, all relative to the attempt's launch (us).
struct AttemptSchedule {
    double period_us = 0.0;
    double bsm_arrival_us = 0.0;    // idler reaches the BSM (early bin)
    double herald_send_us = 0.0;    // after the late-bin detection
    double herald_arrival_us = 0.0;
    double emission_us = 0.0;       // memory re-emits the early bin
    double deadline_us = 0.0;       // late bin leaves the phase shifter
    double bin_separation_us = 0.0;

    bool herald_in_time() const { return herald_arrival_us <= deadline_us; }
};

inline AttemptSchedule make_schedule(const ExperimentConfig& cfg) {
    const TimingBudget b = cfg.budget();
    AttemptSchedule s;
    s.period_us = cfg.timing.attempt_period_us;
    s.bin_separation_us = cfg.timing.bin_separation_ns / 1000.0;
    s.bsm_arrival_us = b.one_way_optical_us;
    s.herald_send_us = s.bsm_arrival_us + s.bin_separation_us;
    s.herald_arrival_us = s.herald_send_us + b.classical_return_us + b.processing_latency_us;
    s.emission_us = b.storage_time_us;
    s.deadline_us = s.emission_us + s.bin_separation_us;
    return s;
}

// Rate ceiling of a single-mode memory: one attempt per round trip.
inline double max_single_mode_rate_khz(const devices::FiberParams& fiber) {
    const double one_way = devices::fiber_delay_us(fiber);
    if (!(one_way > 0.0)) throw std::invalid_argument("max_single_mode_rate: fiber length must be > 0");
    return 1000.0 / (2.0 * one_way);
}

inline double max_multiplexed_rate_mhz(double qubit_duration_ns) {
    if (!(qubit_duration_ns > 0.0)) throw std::invalid_argument("max_multiplexed_rate: qubit duration must be > 0");
    return 1000.0 / qubit_duration_ns;
}

// Slots [launch, launch + storage) of a periodic attempt train.
inline int max_concurrent_slots(double storage_us, double period_us) {
    return static_cast<int>(std::ceil(storage_us / period_us - 1e-12));
}
inline int steady_min_concurrent_slots(double storage_us, double period_us) {
    return static_cast<int>(std::floor(storage_us / period_us + 1e-12));
}

// Attempt categories used by the tallies. Late heralds are kept apart from
// both Psi outcomes.
enum class Category : std::uint8_t { PsiPlus, PsiMinus, NoHerald, Missed };
inline constexpr std::size_t category_count = 4;
inline constexpr std::size_t max_window_masks = 8;

inline std::string to_string(Category c) {
    switch (c) {
        case Category::PsiPlus: return "psi_plus";
        case Category::PsiMinus: return "psi_minus";
        case Category::NoHerald: return "no_herald";
        case Category::Missed: return "missed";
    }
    return "?";
}

inline Category categorize(BellOutcome o, FeedForwardStatus s) {
    if (s == FeedForwardStatus::Missed) return Category::Missed;
    switch (o) {
        case BellOutcome::PsiPlus: return Category::PsiPlus;
        case BellOutcome::PsiMinus: return Category::PsiMinus;
        default: return Category::NoHerald;
    }
}

// Additive summary of a campaign. counts[category][mask] counts attempts whose
// analyzer windows clicked exactly as in `mask`.
struct CampaignTally {
    std::uint64_t attempts = 0;
    std::array<std::uint64_t, 16> raw_patterns{};
    std::array<std::array<std::uint64_t, max_window_masks>, category_count> counts{};

    void add(unsigned raw_pattern, Category c, unsigned mask) {
        ++attempts;
        ++raw_patterns[raw_pattern];
        ++counts[static_cast<std::size_t>(c)][mask];
    }

    CampaignTally& operator+=(const CampaignTally& o) {
        attempts += o.attempts;
        for (std::size_t i = 0; i < 16; ++i) raw_patterns[i] += o.raw_patterns[i];
        for (std::size_t c = 0; c < category_count; ++c)
            for (std::size_t m = 0; m < max_window_masks; ++m) counts[c][m] += o.counts[c][m];
        return *this;
    }

    std::uint64_t category_total(Category c) const {
        std::uint64_t s = 0;
        for (auto v : counts[static_cast<std::size_t>(c)]) s += v;
        return s;
    }

    // Attempts of category c in which window w clicked.
    std::uint64_t window_count(Category c, std::size_t w) const {
        std::uint64_t s = 0;
        for (std::size_t m = 0; m < max_window_masks; ++m)
            if (m >> w & 1u) s += counts[static_cast<std::size_t>(c)][m];
        return s;
    }

    friend bool operator==(const CampaignTally&, const CampaignTally&) = default;
};

// Exact per-attempt probabilities behind CampaignTally:
// probability[category][mask].
struct ExpectedTally {
    std::array<std::array<double, max_window_masks>, category_count> probability{};

    double window_probability(Category c, std::size_t w) const {
        double s = 0.0;
        for (std::size_t m = 0; m < max_window_masks; ++m)
            if (m >> w & 1u) s += probability[static_cast<std::size_t>(c)][m];
        return s;
    }
};

struct CampaignStats {
    CampaignTally tally;
    int max_in_flight = 0;
    int steady_min_in_flight = 0;   // over instants when the train is fully loaded
    std::uint64_t heralds_matched = 0;
    std::uint64_t heralds_dropped = 0;  // arrived after the feed-forward deadline
    std::uint64_t events_processed = 0;
};

// Both draws of attempt k: BSM pattern, then analyzer windows.
struct AttemptDraw {
    unsigned raw_pattern;
    unsigned windows;
    FeedForwardStatus status;
};

inline AttemptDraw draw_attempt(const AttemptModel& model, bool herald_in_time, std::uint64_t seed, std::uint64_t k) {
    CounterStream stream(seed, k);
    const double u_bsm = stream.uniform();
    const double u_win = stream.uniform();
    const unsigned raw = model.sample_pattern(u_bsm);
    const BellOutcome o = model.outcome(raw);
    FeedForwardStatus status = FeedForwardStatus::NotHeralded;
    if (heralded(o)) {
        if (!herald_in_time)
            status = FeedForwardStatus::Missed;
        else
            status = o == BellOutcome::PsiMinus ? FeedForwardStatus::Applied : FeedForwardStatus::NotNeeded;
    }
    return {raw, model.sample_windows(raw, status == FeedForwardStatus::Applied, u_win), status};
}

inline ExpectedTally expected_tally(const AttemptModel& model, bool herald_in_time) {
    ExpectedTally e;
    for (unsigned raw = 0; raw < 16; ++raw) {
        const BellOutcome o = model.outcome(raw);
        FeedForwardStatus status = FeedForwardStatus::NotHeralded;
        if (heralded(o))
            status = !herald_in_time ? FeedForwardStatus::Missed
                     : o == BellOutcome::PsiMinus ? FeedForwardStatus::Applied
                                                  : FeedForwardStatus::NotNeeded;
        const auto& dist = model.windows_given(raw, status == FeedForwardStatus::Applied);
        auto& row = e.probability[static_cast<std::size_t>(categorize(o, status))];
        for (std::size_t m = 0; m < dist.size(); ++m) row[m] += model.pattern_probability(raw) * dist[m];
    }
    return e;
}

// Discrete-event run: schedules every attempt, its detector clicks, herald
// message, memory emission and feed-forward on one clock and emits records in
// attempt order. Produces exactly the draws of simulate_statistics.
inline CampaignStats run_campaign(const ExperimentConfig& cfg, const AttemptModel& model, std::uint64_t n_attempts,
                                  std::uint64_t master_seed, const std::function<void(const TrialRecord&)>& sink = {}) {
    if (n_attempts < 1) throw std::invalid_argument("run_campaign: n_attempts must be >= 1");
    cfg.check_timing();
    const AttemptSchedule s = make_schedule(cfg);

    struct Pending {
        TrialRecord record;
        MemorySlot slot;
        bool emitted = false;
        bool herald_done = false;
        unsigned window_draw_raw = 0;
    };
    std::map<std::uint64_t, Pending> live;
    std::map<std::uint64_t, TrialRecord> finished;
    std::uint64_t next_to_emit = 0;

    CampaignStats stats;
    stats.steady_min_in_flight = max_concurrent_slots(s.emission_us, s.period_us) + 1;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
    auto launch_time = [&](std::uint64_t k) { return static_cast<double>(k) * s.period_us; };
    queue.push({0.0, EventKind::AttemptLaunched, 0, {}});

    auto finish = [&](std::uint64_t id) {
        Pending& p = live.at(id);
        if (!p.emitted || (heralded(p.record.outcome) && !p.herald_done)) return;
        const AttemptDraw d = draw_attempt(model, s.herald_in_time(), master_seed, id);
        p.record.analyzer_windows = d.windows;
        stats.tally.add(p.window_draw_raw, categorize(p.record.outcome, p.record.feed_forward), d.windows);
        finished.emplace(id, std::move(p.record));
        live.erase(id);
        while (!finished.empty() && finished.begin()->first == next_to_emit) {
            if (sink) sink(finished.begin()->second);
            finished.erase(finished.begin());
            ++next_to_emit;
        }
    };

    const double last_launch = launch_time(n_attempts - 1);
    while (!queue.empty()) {
        const double now = queue.top().timestamp_us;
        while (!queue.empty() && queue.top().timestamp_us == now) {
            const Event ev = queue.top();
            queue.pop();
            ++stats.events_processed;
            const std::uint64_t id = ev.attempt_id;
            switch (ev.kind) {
                case EventKind::AttemptLaunched: {
                    CounterStream stream(master_seed, id);
                    AttemptResult r = run_attempt(model, id, stream, now, s.emission_us);
                    Pending p{};
                    p.record.attempt_id = id;
                    p.record.launch_time_us = now;
                    p.record.bsm_pattern = model.filtered_pattern(r.raw_pattern);
                    p.record.outcome = r.outcome;
                    p.window_draw_raw = r.raw_pattern;
                    if (r.slot) {
                        p.slot = std::move(*r.slot);
                    } else {
                        p.slot.attempt_id = id;
                        p.slot.absorb_time_us = now;
                        p.slot.emission_time_us = now + s.emission_us;
                    }
                    live.emplace(id, std::move(p));
                    queue.push({now + s.bsm_arrival_us, EventKind::PhotonArrivesAtBSM, id, {}});
                    queue.push({now + s.emission_us, EventKind::MemoryEmission, id, {}});
                    if (id + 1 < n_attempts) queue.push({launch_time(id + 1), EventKind::AttemptLaunched, id + 1, {}});
                    break;
                }
                case EventKind::PhotonArrivesAtBSM: {
                    const Pending& p = live.at(id);
                    for (const Click& c : clicks_from_pattern(p.record.bsm_pattern))
                        queue.push({now + (c.bin == Bin::Late ? s.bin_separation_us : 0.0), EventKind::DetectorClick, id, c});
                    if (heralded(p.record.outcome))
                        queue.push({now - s.bsm_arrival_us + s.herald_arrival_us, EventKind::HeraldMessage, id, {}});
                    break;
                }
                case EventKind::DetectorClick: break;
                case EventKind::HeraldMessage: {
                    auto it = live.find(id);
                    Pending& p = it->second;
                    p.record.herald_arrival_us = now;
                    if (!s.herald_in_time()) {
                        // Slot already retrieved: counted, excluded from analysis.
                        p.record.feed_forward = FeedForwardStatus::Missed;
                        p.slot.uncorrected = true;
                        p.slot.feed_forward_pending = false;
                        ++stats.heralds_dropped;
                        p.herald_done = true;
                        finish(id);
                    } else {
                        ++stats.heralds_matched;
                        queue.push({now, EventKind::FeedForwardApplied, id, {}});
                    }
                    break;
                }
                case EventKind::FeedForwardApplied: {
                    Pending& p = live.at(id);
                    p.slot = apply_feed_forward(std::move(p.slot), p.record.outcome, now - p.record.launch_time_us,
                                                s.deadline_us);
                    p.record.feed_forward =
                        p.record.outcome == BellOutcome::PsiMinus ? FeedForwardStatus::Applied : FeedForwardStatus::NotNeeded;
                    p.herald_done = true;
                    finish(id);
                    break;
                }
                case EventKind::MemoryEmission: {
                    live.at(id).emitted = true;
                    finish(id);
                    break;
                }
            }
        }
        // Occupancy once every event at this instant has been applied.
        int in_flight = 0;
        for (const auto& [id, p] : live) in_flight += p.slot.in_flight(now) ? 1 : 0;
        stats.max_in_flight = std::max(stats.max_in_flight, in_flight);
        if (now >= s.emission_us && now <= last_launch)
            stats.steady_min_in_flight = std::min(stats.steady_min_in_flight, in_flight);
    }
    if (last_launch < s.emission_us) stats.steady_min_in_flight = 0;
    if (!live.empty() || next_to_emit != n_attempts) throw std::logic_error("run_campaign: unfinished attempts");
    return stats;
}

// Number of campaign workers, from TMTELE_WORKERS (default: hardware threads).
inline unsigned worker_count() {
    if (const char* env = std::getenv("TMTELE_WORKERS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<unsigned>(v);
        throw std::invalid_argument(std::string("TMTELE_WORKERS: expected an integer in [1, 1024], got '") + env + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Same draws as run_campaign without the event machinery. All attempts share
// the schedule offsets, so the feed-forward status only depends on the pattern.
inline CampaignTally simulate_statistics(const ExperimentConfig& cfg, const AttemptModel& model, std::uint64_t n_attempts,
                                         std::uint64_t master_seed, unsigned workers = worker_count()) {
    if (n_attempts < 1) throw std::invalid_argument("simulate_statistics: n_attempts must be >= 1");
    cfg.check_timing();
    const bool in_time = make_schedule(cfg).herald_in_time();
    workers = static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, n_attempts));
    std::vector<CampaignTally> parts(workers);
    auto work = [&](unsigned w) {
        const std::uint64_t begin = n_attempts * w / workers, end = n_attempts * (w + 1) / workers;
        CampaignTally& t = parts[w];
        for (std::uint64_t k = begin; k < end; ++k) {
            const AttemptDraw d = draw_attempt(model, in_time, master_seed, k);
            t.add(d.raw_pattern, categorize(model.outcome(d.raw_pattern), d.status), d.windows);
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
        for (auto& t : threads) t.join();
    }
    CampaignTally total;
    for (const auto& p : parts) total += p;
    return total;
}

}  // namespace tmtele::protocol

#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <type_traits>
#include <vector>

#include "tmtele/protocol/campaign.hpp"

namespace tmtele::analysis {

// Coincidence counts keyed by (analyzer setting, outcome, time window).
// Outcome labels: psi_plus, psi_minus, no_herald, missed. The floating-point
// instantiation holds expected counts.
template <typename Count>
class BasicHistogram {
public:
    using Key = std::tuple<std::string, std::string, std::string>;

    void add(const std::string& setting, const std::string& outcome, const std::string& window, Count n = 1) {
        if (n == Count{}) return;
        if (n < Count{}) throw std::invalid_argument("histogram: negative count");
        counts_[{setting, outcome, window}] += n;
    }

    BasicHistogram& merge(const BasicHistogram& other) {
        for (const auto& [k, v] : other.counts_) counts_[k] += v;
        return *this;
    }

    Count count(const std::string& setting, const std::string& outcome, const std::string& window) const {
        auto it = counts_.find({setting, outcome, window});
        return it == counts_.end() ? Count{} : it->second;
    }

    Count total() const {
        Count s{};
        for (const auto& [k, v] : counts_) s += v;
        return s;
    }

    bool empty() const { return counts_.empty(); }
    const std::map<Key, Count>& cells() const { return counts_; }

    std::vector<std::string> settings() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : counts_)
            if (out.empty() || out.back() != std::get<0>(k)) out.push_back(std::get<0>(k));
        return out;
    }

    void write_csv(std::ostream& os) const {
        os << "setting,outcome,window,count\n";
        for (const auto& [k, v] : counts_) {
            os << std::get<0>(k) << ',' << std::get<1>(k) << ',' << std::get<2>(k) << ',';
            if constexpr (std::is_floating_point_v<Count>) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", v);
                os << buf << '\n';
            } else {
                os << v << '\n';
            }
        }
    }

    std::string to_csv() const {
        std::ostringstream os;
        write_csv(os);
        return os.str();
    }

    friend bool operator==(const BasicHistogram&, const BasicHistogram&) = default;

private:
    std::map<Key, Count> counts_;
};

using Histogram = BasicHistogram<std::uint64_t>;
using ExpectedHistogram = BasicHistogram<double>;

// One count per clicked window of every record.
inline Histogram accumulate(const std::vector<protocol::TrialRecord>& records, const std::string& setting,
                            const std::vector<std::string>& window_labels) {
    Histogram h;
    for (const auto& r : records) {
        if (r.analyzer_windows >> window_labels.size())
            throw std::invalid_argument("accumulate: record has windows beyond the analyzer labels");
        const std::string outcome = to_string(protocol::categorize(r.outcome, r.feed_forward));
        for (std::size_t w = 0; w < window_labels.size(); ++w)
            if (r.analyzer_windows >> w & 1u) h.add(setting, outcome, window_labels[w]);
    }
    return h;
}

inline Histogram from_tally(const protocol::CampaignTally& t, const std::string& setting,
                            const std::vector<std::string>& window_labels) {
    Histogram h;
    for (std::size_t c = 0; c < protocol::category_count; ++c)
        for (std::size_t w = 0; w < window_labels.size(); ++w)
            h.add(setting, to_string(static_cast<protocol::Category>(c)), window_labels[w],
                  t.window_count(static_cast<protocol::Category>(c), w));
    return h;
}

// Expected counts of n attempts.
inline ExpectedHistogram from_expected(const protocol::ExpectedTally& e, double n_attempts, const std::string& setting,
                                       const std::vector<std::string>& window_labels) {
    ExpectedHistogram h;
    for (std::size_t c = 0; c < protocol::category_count; ++c)
        for (std::size_t w = 0; w < window_labels.size(); ++w)
            h.add(setting, to_string(static_cast<protocol::Category>(c)), window_labels[w],
                  n_attempts * e.window_probability(static_cast<protocol::Category>(c), w));
    return h;
}

}  // namespace tmtele::analysis

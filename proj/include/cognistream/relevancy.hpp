#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cognistream/errors.hpp"
#include "cognistream/ids.hpp"

namespace cognistream {

struct RelevancyConfig {
    double decay = 0.5;        // lambda in (0,1]
    std::uint64_t saturation = 4;  // kappa: counts at or above this saturate to 1
    std::size_t budget = 8;    // tasks scheduled per cycle

    void validate() const {
        if (!(decay > 0.0 && decay <= 1.0)) {
            raise(Errc::BadConfig, "relevancy", "decay must be in (0,1]");
        }
        if (saturation < 1) raise(Errc::BadConfig, "relevancy", "saturation must be >= 1");
        if (budget < 1) raise(Errc::BadConfig, "relevancy", "budget must be >= 1");
    }
};

struct ScoreEntry {
    double score = 0.0;
    WindowIndex last_window = 0;  // last window with a sighting or boost
};

// Exponentially decayed per-subject frequency scores, one step per window.
struct ScoreTable {
    std::map<SubjectId, ScoreEntry> entries;
    WindowIndex last_processed = -1;

    double score(SubjectId subject) const {
        auto it = entries.find(subject);
        return it == entries.end() ? 0.0 : it->second.score;
    }
};

// score <- (1-lambda)*score + lambda*min(1, count/kappa); subjects missing
// from the window decay with count 0. New subjects enter from score 0.
inline void update_window(ScoreTable& table, WindowIndex window,
                          const std::map<SubjectId, std::uint64_t>& window_counts,
                          const RelevancyConfig& config) {
    config.validate();
    if (window <= table.last_processed) {
        raise(Errc::WindowRegression, "relevancy",
              "window " + std::to_string(window) + " after " +
                  std::to_string(table.last_processed));
    }
    for (const auto& [subject, count] : window_counts) {
        if (count > 0) table.entries.try_emplace(subject, ScoreEntry{0.0, window});
    }
    for (auto& [subject, entry] : table.entries) {
        auto it = window_counts.find(subject);
        std::uint64_t count = it == window_counts.end() ? 0 : it->second;
        double observed =
            std::min(1.0, static_cast<double>(count) / static_cast<double>(config.saturation));
        entry.score = (1.0 - config.decay) * entry.score + config.decay * observed;
        if (count > 0) entry.last_window = window;
    }
    table.last_processed = window;
}

// A query hit counts as a saturated observation.
inline void query_boost(ScoreTable& table, SubjectId subject, const RelevancyConfig& config) {
    config.validate();
    auto it = table.entries.find(subject);
    if (it == table.entries.end()) {
        raise(Errc::UnknownSubject, "relevancy", "subject " + hex64(subject));
    }
    it->second.score = (1.0 - config.decay) * it->second.score + config.decay;
    it->second.last_window = table.last_processed;
}

// Highest-scored subjects first, stable on ties, at most budget tasks.
template <typename Task>
std::vector<Task> schedule(const std::vector<std::pair<Task, SubjectId>>& tasks,
                           const ScoreTable& scores, const RelevancyConfig& config) {
    config.validate();
    std::vector<std::size_t> order(tasks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores.score(tasks[a].second) > scores.score(tasks[b].second);
    });
    std::vector<Task> out;
    for (std::size_t i = 0; i < order.size() && i < config.budget; ++i) {
        out.push_back(tasks[order[i]].first);
    }
    return out;
}

inline std::string format_score(double score) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", score);
    return buf;
}

// Canonical form: subject \t score(6dp) \t last_window, sorted by subject.
inline std::string export_scores(const ScoreTable& table) {
    std::string out;
    for (const auto& [subject, entry] : table.entries) {
        out += hex64(subject);
        out += '\t';
        out += format_score(entry.score);
        out += '\t';
        out += std::to_string(entry.last_window);
        out += '\n';
    }
    return out;
}

}  // namespace cognistream

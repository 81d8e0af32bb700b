#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cognistream/errors.hpp"
#include "cognistream/generalization.hpp"
#include "cognistream/ids.hpp"
#include "cognistream/relevancy.hpp"

namespace cognistream {

// Leaf instances under a template read as a labeled time series: the label is
// the item at one slot position, the system's own emergent class of the
// instance.
struct ClassSequence {
    NodeId template_id = 0;
    std::size_t class_position = 0;
    std::vector<std::pair<WindowIndex, ItemRef>> labels;  // timestamp-ordered
    std::map<WindowIndex, std::map<ItemRef, double>> window_distributions;
};

enum class ForecastMethod : std::uint8_t { Markov, Trend };

struct Forecast {
    ForecastMethod method = ForecastMethod::Markov;
    std::map<ItemRef, double> distribution;
    enum class Horizon : std::uint8_t { NextStep, NextWindow };
    Horizon horizon = Horizon::NextStep;
};

inline ClassSequence classify(const Hierarchy& h, NodeId template_id,
                              std::size_t class_position) {
    const TemplateNode& t = h.node(template_id);
    if (class_position >= t.arity()) {
        raise(Errc::BadPosition, "forecast",
              "position " + std::to_string(class_position) + " >= arity " +
                  std::to_string(t.arity()));
    }
    if (!is_slot(t.positions[class_position])) {
        raise(Errc::NotASlot, "forecast",
              "position " + std::to_string(class_position) + " is a literal");
    }

    std::vector<StructureInstance> instances;
    for (NodeId lid : h.leaves_under(template_id)) {
        const TemplateNode& leaf = h.node(lid);
        instances.insert(instances.end(), leaf.instances.begin(), leaf.instances.end());
    }
    std::sort(instances.begin(), instances.end(), instance_order);

    ClassSequence seq;
    seq.template_id = template_id;
    seq.class_position = class_position;
    std::map<WindowIndex, std::map<ItemRef, std::uint64_t>> counts;
    for (const StructureInstance& inst : instances) {
        ItemRef label = inst.items[class_position];
        seq.labels.emplace_back(inst.timestamp, label);
        counts[inst.timestamp][label] += 1;
    }
    for (const auto& [window, by_label] : counts) {
        std::uint64_t total = 0;
        for (const auto& [label, n] : by_label) total += n;
        auto& dist = seq.window_distributions[window];
        for (const auto& [label, n] : by_label) {
            dist[label] = static_cast<double>(n) / static_cast<double>(total);
        }
    }
    return seq;
}

// First-order transition model with additive smoothing over the label
// alphabet, conditioned on the last label. With smoothing zero and no
// outgoing transition observed from the last label, falls back to the overall
// label frequencies.
inline Forecast markov_predict(const ClassSequence& seq, double alpha) {
    if (seq.labels.size() < 2) {
        raise(Errc::TooShort, "forecast", "need at least 2 labels for transitions");
    }
    std::set<ItemRef> alphabet;
    for (const auto& [w, label] : seq.labels) alphabet.insert(label);

    std::map<ItemRef, std::uint64_t> from_last;
    std::uint64_t total = 0;
    const ItemRef& last = seq.labels.back().second;
    for (std::size_t i = 0; i + 1 < seq.labels.size(); ++i) {
        if (seq.labels[i].second == last) {
            from_last[seq.labels[i + 1].second] += 1;
            ++total;
        }
    }

    Forecast f;
    f.method = ForecastMethod::Markov;
    f.horizon = Forecast::Horizon::NextStep;
    double denom = static_cast<double>(total) + alpha * static_cast<double>(alphabet.size());
    if (denom <= 0.0) {
        for (const auto& [w, label] : seq.labels) f.distribution[label] += 1.0;
        for (auto& [label, p] : f.distribution) p /= static_cast<double>(seq.labels.size());
        return f;
    }
    for (const ItemRef& label : alphabet) {
        auto it = from_last.find(label);
        double n = it == from_last.end() ? 0.0 : static_cast<double>(it->second);
        f.distribution[label] = (n + alpha) / denom;
    }
    return f;
}

// Least-squares line per label over the per-window relative frequencies,
// extrapolated one window ahead, clipped at zero and renormalized. When every
// extrapolation clips to zero the last window's distribution stands.
inline Forecast trend_predict(const ClassSequence& seq) {
    if (seq.window_distributions.size() < 2) {
        raise(Errc::TooShort, "forecast", "need at least 2 non-empty windows");
    }
    std::set<ItemRef> alphabet;
    for (const auto& [w, dist] : seq.window_distributions) {
        for (const auto& [label, p] : dist) alphabet.insert(label);
    }
    const double m = static_cast<double>(seq.window_distributions.size());

    Forecast f;
    f.method = ForecastMethod::Trend;
    f.horizon = Forecast::Horizon::NextWindow;
    double total = 0.0;
    for (const ItemRef& label : alphabet) {
        // x = 0..m-1 over the non-empty windows in order, extrapolate at x = m.
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        double x = 0;
        for (const auto& [w, dist] : seq.window_distributions) {
            auto it = dist.find(label);
            double y = it == dist.end() ? 0.0 : it->second;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            x += 1.0;
        }
        double denom = m * sxx - sx * sx;
        double slope = denom == 0.0 ? 0.0 : (m * sxy - sx * sy) / denom;
        double intercept = (sy - slope * sx) / m;
        double predicted = std::max(0.0, intercept + slope * m);
        f.distribution[label] = predicted;
        total += predicted;
    }
    if (total <= 0.0) {
        f.distribution = seq.window_distributions.rbegin()->second;
        return f;
    }
    for (auto& [label, p] : f.distribution) p /= total;
    return f;
}

// Canonical form: label \t probability(6dp), highest probability first, ties
// by label.
inline std::string export_forecast(const Forecast& f) {
    std::vector<std::pair<ItemRef, double>> order(f.distribution.begin(), f.distribution.end());
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::string out;
    for (const auto& [label, p] : order) {
        out += item_key(label);
        out += '\t';
        out += format_score(p);
        out += '\n';
    }
    return out;
}

}  // namespace cognistream

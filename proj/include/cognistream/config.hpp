#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>

#include "cognistream/dpu.hpp"
#include "cognistream/errors.hpp"
#include "cognistream/forecast.hpp"
#include "cognistream/pipeline.hpp"

namespace cognistream {

// Flat "[section]" + "key = value" text, '#' comments, whitespace-insensitive.
struct ConfigFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static ConfigFile parse(const std::string& text) {
        ConfigFile cf;
        std::string section;
        std::istringstream in(text);
        std::string line;
        auto trim = [](std::string s) {
            std::size_t b = s.find_first_not_of(" \t\r");
            std::size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
            std::string t = trim(line);
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']') {
                    raise(Errc::BadConfig, "cli", "unterminated section at line " +
                                                      std::to_string(lineno));
                }
                section = trim(t.substr(1, t.size() - 2));
                cf.sections[section];
                continue;
            }
            auto eq = t.find('=');
            if (eq == std::string::npos) {
                raise(Errc::BadConfig, "cli", "expected key = value at line " +
                                                  std::to_string(lineno));
            }
            cf.sections[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
        }
        return cf;
    }

    static ConfigFile load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) raise(Errc::IoError, "cli", "cannot open config " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const {
        auto s = sections.find(section);
        if (s == sections.end()) return fallback;
        auto k = s->second.find(key);
        return k == s->second.end() ? fallback : k->second;
    }
};

struct RunConfig {
    std::string store_path = "cognistream.store";
    PipelineConfig pipeline;
    ForecastMethod forecast_method = ForecastMethod::Markov;
    double forecast_alpha = 1.0;
    TopologyShape dpu_shape = TopologyShape::Ring;
    int dpu_units = 3;
    int dpu_ttl = 0;  // 0: default to unit count
};

namespace detail {

inline std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        std::uint64_t v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        raise(Errc::BadConfig, "cli", "bad integer for " + what + ": " + s);
    }
}

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        raise(Errc::BadConfig, "cli", "bad number for " + what + ": " + s);
    }
}

}  // namespace detail

inline RunConfig run_config_from(const ConfigFile& cf) {
    RunConfig rc;
    rc.store_path = cf.get("store", "path", rc.store_path);

    MinerConfig& m = rc.pipeline.miner;
    m.min_len = detail::parse_u64(cf.get("miner", "min_len", "2"), "miner.min_len");
    m.max_len = detail::parse_u64(cf.get("miner", "max_len", "16"), "miner.max_len");
    m.min_support = detail::parse_u64(cf.get("miner", "min_support", "2"), "miner.min_support");
    m.window_size = detail::parse_u64(cf.get("miner", "window_size", "1024"),
                                      "miner.window_size");
    m.validate();

    RelevancyConfig& r = rc.pipeline.relevancy;
    r.decay = detail::parse_double(cf.get("relevancy", "decay", "0.5"), "relevancy.decay");
    r.saturation = detail::parse_u64(cf.get("relevancy", "saturation", "4"),
                                     "relevancy.saturation");
    r.budget = detail::parse_u64(cf.get("relevancy", "budget", "8"), "relevancy.budget");
    r.validate();

    HypothesisConfig& hy = rc.pipeline.hypothesis;
    hy.distance_threshold = static_cast<std::uint32_t>(
        detail::parse_u64(cf.get("hypotheses", "distance_threshold", "1"), "threshold"));
    hy.correction_quorum = static_cast<std::uint32_t>(
        detail::parse_u64(cf.get("hypotheses", "correction_quorum", "3"), "quorum"));
    hy.fluctuation_window = static_cast<std::uint32_t>(
        detail::parse_u64(cf.get("hypotheses", "fluctuation_window", "5"), "fluctuation"));
    hy.timeout_windows = static_cast<std::int64_t>(
        detail::parse_u64(cf.get("hypotheses", "timeout_windows", "8"), "timeout"));
    hy.budget = detail::parse_u64(cf.get("hypotheses", "budget", "4"), "hypotheses.budget");
    hy.validate();

    std::string mode = cf.get("structures", "mode", "window");
    if (mode == "window") {
        rc.pipeline.structure_mode =
            WindowExtract{detail::parse_u64(cf.get("structures", "k", "3"), "structures.k")};
    } else if (mode == "delimiter") {
        std::string hex = cf.get("structures", "delimiter", "");
        Bytes delim;
        if (hex.empty() || !hex_decode(hex, delim)) {
            raise(Errc::BadConfig, "cli", "structures.delimiter must be hex bytes");
        }
        rc.pipeline.structure_mode = DelimiterExtract{pattern_id_of(delim)};
    } else {
        raise(Errc::BadConfig, "cli", "structures.mode must be window or delimiter");
    }

    std::string method = cf.get("forecast", "method", "markov");
    if (method == "markov") {
        rc.forecast_method = ForecastMethod::Markov;
    } else if (method == "trend") {
        rc.forecast_method = ForecastMethod::Trend;
    } else {
        raise(Errc::BadConfig, "cli", "forecast.method must be markov or trend");
    }
    rc.forecast_alpha = detail::parse_double(cf.get("forecast", "alpha", "1"), "forecast.alpha");

    std::string shape = cf.get("dpu", "shape", "ring");
    if (shape == "ring") {
        rc.dpu_shape = TopologyShape::Ring;
    } else if (shape == "mesh") {
        rc.dpu_shape = TopologyShape::Mesh;
    } else if (shape == "grid") {
        rc.dpu_shape = TopologyShape::Grid;
    } else {
        raise(Errc::BadConfig, "cli", "dpu.shape must be ring, mesh or grid");
    }
    rc.dpu_units = static_cast<int>(detail::parse_u64(cf.get("dpu", "units", "3"), "dpu.units"));
    rc.dpu_ttl = static_cast<int>(detail::parse_u64(cf.get("dpu", "ttl", "0"), "dpu.ttl"));
    return rc;
}

// Topology files reuse the same reader without a section header:
// shape=ring|mesh|grid, units=N, ttl=K.
inline std::tuple<TopologyShape, int, int> parse_topology_file(const std::string& text) {
    ConfigFile cf = ConfigFile::parse(text);
    std::string shape = cf.get("", "shape", "ring");
    TopologyShape ts;
    if (shape == "ring") {
        ts = TopologyShape::Ring;
    } else if (shape == "mesh") {
        ts = TopologyShape::Mesh;
    } else if (shape == "grid") {
        ts = TopologyShape::Grid;
    } else {
        raise(Errc::BadConfig, "dpu", "shape must be ring, mesh or grid");
    }
    int units = static_cast<int>(detail::parse_u64(cf.get("", "units", "3"), "units"));
    int ttl = static_cast<int>(detail::parse_u64(cf.get("", "ttl", "0"), "ttl"));
    if (units < 1) raise(Errc::BadConfig, "dpu", "units must be >= 1");
    return {ts, units, ttl};
}

}  // namespace cognistream

// cognistream command line: ingest raw streams, run cognition cycles, query
// the notion hierarchy, forecast stream states, and drive DPU simulations.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cognistream/config.hpp"
#include "cognistream/dpu.hpp"
#include "cognistream/forecast.hpp"
#include "cognistream/pipeline.hpp"
#include "cognistream/queries.hpp"
#include "cognistream/stream_store.hpp"

namespace cs = cognistream;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) cs::raise(cs::Errc::IoError, "cli", "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

cs::RunConfig load_run_config(const std::string& config_flag) {
    std::string path = config_flag;
    if (path.empty()) {
        if (const char* env = std::getenv("COGNISTREAM_CONFIG")) path = env;
    }
    if (path.empty()) return cs::RunConfig{};
    return cs::run_config_from(cs::ConfigFile::load(path));
}

std::vector<cs::Bytes> split_keywords(const std::string& line) {
    std::vector<cs::Bytes> words;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
            continue;
        }
        if (!quoted && (c == ' ' || c == '\t')) {
            if (!cur.empty()) words.push_back(cur);
            cur.clear();
            continue;
        }
        cur += c;
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

cs::PipelineState run_all(const cs::StreamStore& store, const cs::RunConfig& rc) {
    return cs::run_pipeline(store.segments(), rc.pipeline, true);
}

int run_dpu_sim(const cs::RunConfig& rc, const cs::StreamStore& store,
                const std::string& topology_file, int rounds, const std::string& query_line) {
    cs::TopologyShape shape = rc.dpu_shape;
    int units = rc.dpu_units;
    int ttl = rc.dpu_ttl;
    if (!topology_file.empty()) {
        std::tie(shape, units, ttl) = cs::parse_topology_file(read_file(topology_file));
    }
    cs::World world = cs::make_world(shape, units, ttl, rc.pipeline, 1);

    for (const cs::Segment& seg : store.segments()) {
        int owner = static_cast<int>(seg.id % units);
        cs::world_ingest(world, owner, seg.bytes, seg.timestamp, seg.source_tag);
    }
    cs::world_mine_request(world, 0, true);

    int budget = rounds;
    while (budget > 0 && !cs::idle(world)) {
        cs::step(world);
        --budget;
    }
    if (!query_line.empty()) {
        cs::world_query(world, 0, split_keywords(query_line));
        while (budget > 0 && !cs::idle(world)) {
            cs::step(world);
            --budget;
        }
    }
    std::cout << cs::export_transcript(world);
    return 0;
}

int run_report(const cs::StreamStore& store, const cs::RunConfig& rc) {
    cs::PipelineState st = run_all(store, rc);
    std::uint64_t total_bytes = 0;
    for (const auto& e : store.snapshot()) total_bytes += e.length;
    std::cout << "segments\t" << store.size() << '\n';
    std::cout << "bytes\t" << total_bytes << '\n';
    std::cout << "patterns\t" << st.dictionary.size() << '\n';
    std::cout << "tokens\t" << st.tokens.size() << '\n';
    std::cout << "windows\t" << st.windows.size() << '\n';
    std::cout << "structures\t" << st.groups.size() << '\n';
    std::cout << "nodes\t" << st.hierarchy.nodes.size() << '\n';
    std::cout << "roots\t" << st.hierarchy.roots.size() << '\n';
    std::size_t by_state[4] = {0, 0, 0, 0};
    for (const cs::Hypothesis& h : st.hypotheses) {
        by_state[static_cast<std::size_t>(h.state)] += 1;
    }
    std::cout << "hypotheses\tproposed=" << by_state[0] << " confirmed=" << by_state[1]
              << " rejected=" << by_state[2] << " superseded=" << by_state[3] << '\n';
    std::vector<std::pair<cs::SubjectId, double>> top;
    for (const auto& [subject, entry] : st.scores.entries) top.emplace_back(subject, entry.score);
    std::stable_sort(top.begin(), top.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (std::size_t i = 0; i < top.size() && i < 10; ++i) {
        std::cout << "top" << i << '\t' << cs::hex64(top[i].first) << '\t'
                  << cs::format_score(top[i].second) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cognistream: schema-free pattern cognition over raw byte streams"};
    app.require_subcommand(1);
    std::string config_flag;
    app.add_option("--config", config_flag, "config file (fallback: $COGNISTREAM_CONFIG)");

    auto* cmd_ingest = app.add_subcommand("ingest", "append a file to the stream store");
    std::string ingest_file;
    std::int64_t ingest_timestamp = -1;
    std::string ingest_tag;
    cmd_ingest->add_option("file", ingest_file, "input file")->required();
    cmd_ingest->add_option("--timestamp", ingest_timestamp, "logical tick (default: last+1)");
    cmd_ingest->add_option("--tag", ingest_tag, "source tag (default: file name)");

    auto* cmd_mine = app.add_subcommand("mine", "print the pattern dictionary");
    auto* cmd_structures = app.add_subcommand("structures", "print the deduped structures");
    auto* cmd_generalize = app.add_subcommand("generalize", "print the notion hierarchy");
    auto* cmd_relevancy = app.add_subcommand("relevancy", "print the relevancy scores");
    auto* cmd_hypothesize = app.add_subcommand("hypothesize", "print the hypothesis log");
    auto* cmd_cycle =
        app.add_subcommand("cycle", "one full cognition cycle; prints every layer's report");

    auto* cmd_query = app.add_subcommand("query", "run keyword queries against the hierarchy");
    bool query_broaden = false;
    bool query_narrow = false;
    std::string query_file;
    std::vector<std::string> query_words;
    cmd_query->add_flag("--broaden", query_broaden, "match through slot synonyms");
    cmd_query->add_flag("--narrow", query_narrow, "require keywords in order");
    cmd_query->add_option("--file", query_file, "query file, one query per line");
    cmd_query->add_option("keywords", query_words, "inline query keywords");

    auto* cmd_forecast = app.add_subcommand("forecast", "forecast the class distribution");
    std::string forecast_template;
    std::size_t forecast_position = 0;
    std::string forecast_method;
    double forecast_alpha = -1.0;
    cmd_forecast->add_option("--template", forecast_template, "template node id (hex)")
        ->required();
    cmd_forecast->add_option("--position", forecast_position, "slot position")->required();
    cmd_forecast->add_option("--method", forecast_method, "markov or trend");
    cmd_forecast->add_option("--alpha", forecast_alpha, "markov smoothing");

    auto* cmd_dpu = app.add_subcommand("dpu-sim", "run a decentralized processing simulation");
    std::string dpu_topology;
    int dpu_rounds = 32;
    std::string dpu_query;
    cmd_dpu->add_option("--topology", dpu_topology, "topology file (shape=, units=, ttl=)");
    cmd_dpu->add_option("--rounds", dpu_rounds, "round budget");
    cmd_dpu->add_option("--query", dpu_query, "keywords to query after the sync settles");

    auto* cmd_report = app.add_subcommand("report", "print a summary of every layer");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }

    try {
        cs::RunConfig rc = load_run_config(config_flag);
        cs::StreamStore store{std::filesystem::path(rc.store_path)};

        if (cmd_ingest->parsed()) {
            cs::Bytes bytes = read_file(ingest_file);
            std::int64_t ts = ingest_timestamp >= 0 ? ingest_timestamp
                              : store.empty()       ? 0
                                                    : store.last_timestamp() + 1;
            std::string tag = ingest_tag.empty()
                                  ? std::filesystem::path(ingest_file).filename().string()
                                  : ingest_tag;
            cs::SegmentId id = store.append(std::move(bytes), ts, tag);
            std::cout << "segment\t" << id << '\n';
        } else if (cmd_mine->parsed()) {
            std::cout << cs::export_dictionary(run_all(store, rc).dictionary);
        } else if (cmd_structures->parsed()) {
            std::cout << cs::export_structures(run_all(store, rc).groups);
        } else if (cmd_generalize->parsed()) {
            std::cout << cs::export_hierarchy(run_all(store, rc).hierarchy);
        } else if (cmd_relevancy->parsed()) {
            std::cout << cs::export_scores(run_all(store, rc).scores);
        } else if (cmd_hypothesize->parsed()) {
            std::cout << cs::export_hypotheses(run_all(store, rc).hypotheses);
        } else if (cmd_cycle->parsed()) {
            cs::PipelineState st = run_all(store, rc);
            std::cout << cs::export_dictionary(st.dictionary);
            std::cout << cs::export_structures(st.groups);
            std::cout << cs::export_hierarchy(st.hierarchy);
            std::cout << cs::export_scores(st.scores);
            std::cout << cs::export_hypotheses(st.hypotheses);
        } else if (cmd_query->parsed()) {
            if (query_broaden && query_narrow) {
                std::cerr << "--broaden and --narrow are mutually exclusive\n";
                return 1;
            }
            cs::MatchSemantics semantics = query_broaden ? cs::MatchSemantics::Broaden
                                           : query_narrow ? cs::MatchSemantics::Narrow
                                                          : cs::MatchSemantics::Exact;
            std::vector<std::string> lines;
            if (!query_words.empty()) {
                std::string joined;
                for (const std::string& wrd : query_words) {
                    if (!joined.empty()) joined += ' ';
                    joined += wrd;
                }
                lines.push_back(joined);
            } else {
                std::istringstream file_in(query_file.empty() ? "" : read_file(query_file));
                std::istream& in = query_file.empty() ? std::cin : file_in;
                std::string line;
                while (std::getline(in, line)) lines.push_back(line);
            }
            cs::PipelineState st = run_all(store, rc);
            std::vector<cs::PlannedQuery> planned;
            std::uint64_t qid = 0;
            for (const std::string& line : lines) {
                auto words = split_keywords(line);
                if (words.empty()) continue;
                cs::PlannedQuery pq = cs::plan(qid, words, st.dictionary, st.hierarchy,
                                               st.scores.last_processed, semantics);
                for (const cs::Bytes& kw : pq.query.unresolved) {
                    std::cerr << "query " << qid << ": unresolved keyword "
                              << cs::hex_encode(kw) << '\n';
                }
                for (cs::PatternId r : pq.query.resolved) {
                    cs::query_boost(st.scores, r, rc.pipeline.relevancy);
                }
                planned.push_back(std::move(pq));
                ++qid;
            }
            std::cout << cs::export_results(
                cs::execute_all(planned, st.hierarchy, st.scores, semantics));
        } else if (cmd_forecast->parsed()) {
            cs::PipelineState st = run_all(store, rc);
            std::uint64_t node = 0;
            if (forecast_template.size() != 16) {
                cs::raise(cs::Errc::BadConfig, "cli", "--template wants a 16-hex node id");
            }
            for (char c : forecast_template) {
                int nib = cs::hex_nibble(c);
                if (nib < 0) cs::raise(cs::Errc::BadConfig, "cli", "bad hex in --template");
                node = node << 4 | static_cast<std::uint64_t>(nib);
            }
            cs::ClassSequence seq = cs::classify(st.hierarchy, node, forecast_position);
            cs::ForecastMethod method = rc.forecast_method;
            if (forecast_method == "markov") method = cs::ForecastMethod::Markov;
            else if (forecast_method == "trend") method = cs::ForecastMethod::Trend;
            else if (!forecast_method.empty()) {
                cs::raise(cs::Errc::BadConfig, "cli", "--method wants markov or trend");
            }
            double alpha = forecast_alpha >= 0 ? forecast_alpha : rc.forecast_alpha;
            cs::Forecast fc = method == cs::ForecastMethod::Markov
                                  ? cs::markov_predict(seq, alpha)
                                  : cs::trend_predict(seq);
            std::cout << cs::export_forecast(fc);
        } else if (cmd_dpu->parsed()) {
            return run_dpu_sim(rc, store, dpu_topology, dpu_rounds, dpu_query);
        } else if (cmd_report->parsed()) {
            return run_report(store, rc);
        }
    } catch (const cs::Error& e) {
        std::cerr << e.module() << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

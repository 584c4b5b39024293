#include "serenqa/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "serenqa/cache.hpp"
#include "serenqa/partition.hpp"
#include "serenqa/pattern.hpp"
#include "serenqa/policy_client.hpp"
#include "serenqa/util.hpp"

namespace fs = std::filesystem;

namespace serenqa {

using nlohmann::json;

namespace {

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string sanitize(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        bool keep = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-';
        out.push_back(keep ? c : '_');
    }
    return out;
}

void append_log(const RunConfig& cfg, const std::string& msg) {
    fs::create_directories(cfg.out_dir);
    std::ofstream log(fs::path(cfg.out_dir) / "run.log", std::ios::app);
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    log << stamp << ' ' << msg << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
}

void write_json_file(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::vector<QaRecord> load_records(const RunConfig& cfg) {
    auto records = load_benchmark(cfg.benchmark_path);
    std::stable_sort(records.begin(), records.end(),
                     [](const QaRecord& a, const QaRecord& b) { return a.qid < b.qid; });
    if (cfg.qid) {
        std::vector<QaRecord> picked;
        for (auto& r : records) {
            if (r.qid == *cfg.qid) picked.push_back(std::move(r));
        }
        if (picked.empty()) {
            throw NotFoundError("no benchmark record with qid " + std::to_string(*cfg.qid));
        }
        return picked;
    }
    return records;
}

std::string jsd_name(JsdSupport s) { return s == JsdSupport::Own ? "own" : "shared"; }

// Explore work items: one beam run per root. Roots come from the strategy's
// listed paths (their sources, first appearance wins), or from the exact
// matches when no paths are listed.
struct ExploreTask {
    int64_t qid = 0;
    std::string strategy;
    std::string root;
    std::string question;
    std::string file;  // trace file name
};

std::vector<ExploreTask> explore_tasks_for(const QaRecord& rec, const std::string& strategy) {
    const StrategyPartition& part = rec.partitions.at(strategy);
    std::vector<std::string> roots;
    std::set<std::string> seen;
    for (const auto& p : part.explore_paths) {
        auto src = parse_path_endpoints(p).source;
        if (seen.insert(src).second) roots.push_back(src);
    }
    if (roots.empty()) {
        for (const auto& id : part.exact_matches) {
            if (seen.insert(id).second) roots.push_back(id);
        }
    }
    std::string question = rec.question;
    if (question.empty() && !part.explore_questions.empty()) question = part.explore_questions[0];

    std::vector<ExploreTask> tasks;
    for (const auto& r : roots) {
        ExploreTask t;
        t.qid = rec.qid;
        t.strategy = strategy;
        t.root = r;
        t.question = question;
        t.file = "qid" + std::to_string(rec.qid) + "_" + sanitize(strategy) + "_" + sanitize(r) +
                 ".json";
        tasks.push_back(std::move(t));
    }
    return tasks;
}

}  // namespace

std::string cache_location(const RunConfig& cfg) {
    if (const char* env = std::getenv("SERENQA_CACHE_DIR"); env && *env) return env;
    return (fs::path(cfg.out_dir) / "cache").string();
}

EngineCaches ensure_caches(const RunConfig& cfg, const Graph& g, bool build_all) {
    if (cfg.k < 1) throw DomainError("k must be at least 1");
    fs::path dir = cache_location(cfg);
    fs::create_directories(dir);

    NodeIndex idx = NodeIndex::from_graph(g);
    std::string stem = fs::path(cfg.graph_path).stem().string();
    CacheHeader h1{idx.size(), 1, g.source_hash()};
    CacheHeader hk{idx.size(), static_cast<uint32_t>(cfg.k), g.source_hash()};

    EngineCaches out;
    out.p1_file = (dir / (stem + ".p1.bin")).string();
    out.pk_file = (dir / (stem + ".k" + std::to_string(cfg.k) + ".pk.bin")).string();
    out.marginal_file = (dir / (stem + ".k" + std::to_string(cfg.k) + ".d" + fmt_g(cfg.damping) +
                                ".e" + fmt_g(cfg.epsilon) + ".marg.bin"))
                            .string();

    auto read_m = [&](const std::string& path,
                      const CacheHeader& expect) -> std::optional<ProbMatrix> {
        try {
            return read_matrix_cache(path, expect);
        } catch (const StaleCacheError&) {
            if (cfg.strict) throw;
        } catch (const ParseError&) {
            if (cfg.strict) throw;
        }
        return std::nullopt;
    };
    auto read_v = [&](const std::string& path,
                      const CacheHeader& expect) -> std::optional<std::vector<double>> {
        try {
            return read_vector_cache(path, expect);
        } catch (const StaleCacheError&) {
            if (cfg.strict) throw;
        } catch (const ParseError&) {
            if (cfg.strict) throw;
        }
        return std::nullopt;
    };

    TransitionMatrix p1;
    bool have_p1 = false;
    auto obtain_p1 = [&] {
        if (have_p1) return;
        if (auto m = read_m(out.p1_file, h1)) {
            p1 = TransitionMatrix{std::move(*m), idx, 1};
            out.p1_hit = true;
        } else {
            p1 = build_transition(g, cfg.workers);
            write_matrix_cache(out.p1_file, h1, p1.m);
        }
        have_p1 = true;
    };

    if (build_all) obtain_p1();
    if (auto m = read_m(out.pk_file, hk)) {
        out.pk = TransitionMatrix{std::move(*m), idx, cfg.k};
        out.pk_hit = true;
    } else {
        obtain_p1();
        out.pk = khop_matrix(p1, cfg.k, cfg.workers);
        write_matrix_cache(out.pk_file, hk, out.pk.m);
    }

    if (auto v = read_v(out.marginal_file, hk)) {
        out.marg = MarginalVector{std::move(*v), idx, 0, 0.0};
        out.marginal_hit = true;
    } else {
        out.marg = marginal(out.pk, cfg.damping, cfg.epsilon, cfg.workers);
        write_vector_cache(out.marginal_file, hk, out.marg.p);
    }
    return out;
}

EmbeddingTable ensure_embeddings(const RunConfig& cfg, const Graph& g,
                                 const std::vector<std::string>& needed) {
    EmbeddingTable t;
    if (!cfg.embeddings_path.empty()) t = load_embeddings(cfg.embeddings_path);

    std::set<std::string> uncovered;
    for (const auto& id : needed) {
        if (g.has_node(id) && !t.has(id)) uncovered.insert(id);
    }
    if (uncovered.empty()) return t;
    if (!cfg.fallback_embeddings) {
        std::string list;
        for (const auto& id : uncovered) {
            if (!list.empty()) list += ", ";
            list += id;
        }
        throw ValidationError("no embedding for: " + list +
                              " (pass --fallback-embeddings to synthesize)");
    }
    size_t dim = t.dim() ? t.dim() : 32;
    EmbeddingTable prop = propagate_embeddings(g, dim, 2, cfg.seed);
    for (const auto& id : prop.ids()) {
        if (!t.has(id)) t.put(id, prop.vec(id));
    }
    return t;
}

json cmd_build(const RunConfig& cfg) {
    Graph g = load_edges(cfg.graph_path);
    EngineCaches c = ensure_caches(cfg, g, true);

    char hash_hex[17];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(g.source_hash()));

    json report;
    report["graph"] = cfg.graph_path;
    report["graph_hash"] = hash_hex;
    report["nodes"] = g.sorted_ids().size();
    report["k"] = cfg.k;
    report["damping"] = cfg.damping;
    report["epsilon"] = cfg.epsilon;
    report["files"] = {{"p1", c.p1_file}, {"pk", c.pk_file}, {"marginal", c.marginal_file}};
    write_json_file(fs::path(cfg.out_dir) / "build_report.json", report);

    // Hit/miss status is run-dependent, so it stays out of the report file.
    json status = report;
    status["cache"] = {{"p1_hit", c.p1_hit},
                       {"pk_hit", c.pk_hit},
                       {"marginal_hit", c.marginal_hit}};
    if (!c.marginal_hit) {
        status["marginal_iterations"] = c.marg.iterations;
        status["marginal_residual"] = c.marg.residual;
    }
    append_log(cfg, "build: p1 " + std::string(c.p1_hit ? "hit" : "computed") + ", pk " +
                        (c.pk_hit ? "hit" : "computed") + ", marginal " +
                        (c.marginal_hit ? "hit" : "computed"));
    return status;
}

json cmd_score(const RunConfig& cfg) {
    auto records = load_records(cfg);
    Graph g = load_edges(cfg.graph_path);
    EngineCaches c = ensure_caches(cfg, g);

    std::set<std::string> needed;
    for (const auto& rec : records) {
        for (const auto& [name, part] : rec.partitions) {
            needed.insert(part.exact_matches.begin(), part.exact_matches.end());
            needed.insert(part.serendipity_set.begin(), part.serendipity_set.end());
        }
    }
    EmbeddingTable emb =
        ensure_embeddings(cfg, g, std::vector<std::string>(needed.begin(), needed.end()));
    RnsScorer scorer(c.pk, c.marg, emb, cfg.weights(), cfg.jsd);

    json rows = json::array();
    for (const auto& rec : records) {
        for (const auto& [name, part] : rec.partitions) {
            json row;
            row["qid"] = rec.qid;
            row["strategy"] = name;
            if (part.exact_matches.empty() || part.serendipity_set.empty()) {
                row["skipped"] = "a partition half is empty";
            } else {
                try {
                    RnsBreakdown b =
                        scorer.evaluate(AnswerPartition{part.exact_matches, part.serendipity_set});
                    row["relevance"] = b.relevance;
                    row["novelty"] = b.novelty;
                    row["surprise"] = b.surprise;
                    row["mutual_information"] = b.mutual_information;
                    row["rns"] = b.score;
                } catch (const Error& e) {
                    row["skipped"] = e.what();
                }
            }
            rows.push_back(std::move(row));
        }
    }

    RnsWeights w = cfg.weights();
    json out;
    out["weights"] = {{"relevance", w.relevance}, {"novelty", w.novelty}, {"surprise", w.surprise}};
    out["jsd_mode"] = jsd_name(cfg.jsd);
    out["k"] = cfg.k;
    out["rows"] = std::move(rows);
    write_json_file(fs::path(cfg.out_dir) / "scores.json", out);
    append_log(cfg, "score: " + std::to_string(out["rows"].size()) + " rows");
    return out;
}

json cmd_partition(const RunConfig& cfg) {
    auto records = load_records(cfg);
    Graph g = load_edges(cfg.graph_path);
    EngineCaches c = ensure_caches(cfg, g);

    std::set<std::string> needed;
    for (const auto& rec : records) {
        auto ids = rec.answer_ids();
        needed.insert(ids.begin(), ids.end());
    }
    EmbeddingTable emb =
        ensure_embeddings(cfg, g, std::vector<std::string>(needed.begin(), needed.end()));
    RnsScorer scorer(c.pk, c.marg, emb, cfg.weights(), cfg.jsd);

    json rows = json::array();
    for (const auto& rec : records) {
        json row;
        row["qid"] = rec.qid;
        std::vector<std::string> candidates;
        std::set<std::string> seen;
        for (const auto& id : rec.answer_ids()) {
            if (seen.insert(id).second) candidates.push_back(id);
        }
        if (candidates.size() < 2) {
            row["skipped"] = "fewer than two candidate answers";
            rows.push_back(std::move(row));
            continue;
        }
        try {
            size_t b = budget(candidates.size());
            AnswerPartition init = initial_partition(candidates, b, InitStrategy::Suffix);
            GreedyResult res = greedy_swap(init, std::cref(scorer));
            RnsBreakdown breakdown = scorer.evaluate(res.partition);

            row["budget"] = b;
            row["existing"] = res.partition.existing;
            row["serendipity"] = res.partition.serendipity;
            row["tau"] = res.tau;
            row["swaps"] = res.trace.size();
            row["relevance"] = breakdown.relevance;
            row["novelty"] = breakdown.novelty;
            row["surprise"] = breakdown.surprise;

            json steps = json::array();
            for (const auto& s : res.trace) {
                steps.push_back({{"iteration", s.iteration},
                                 {"out_of_serendipity", s.out_of_serendipity},
                                 {"into_serendipity", s.into_serendipity},
                                 {"delta", s.delta},
                                 {"tau", s.tau}});
            }
            json trace_doc;
            trace_doc["qid"] = rec.qid;
            trace_doc["budget"] = b;
            trace_doc["initial"] = {{"existing", init.existing},
                                    {"serendipity", init.serendipity}};
            trace_doc["final"] = {{"existing", res.partition.existing},
                                  {"serendipity", res.partition.serendipity}};
            trace_doc["tau"] = res.tau;
            trace_doc["steps"] = std::move(steps);
            write_json_file(fs::path(cfg.out_dir) / "swaps" /
                                ("qid" + std::to_string(rec.qid) + ".json"),
                            trace_doc);
            row["swap_trace"] = "swaps/qid" + std::to_string(rec.qid) + ".json";
        } catch (const Error& e) {
            row["skipped"] = e.what();
        }
        rows.push_back(std::move(row));
    }

    json out;
    out["rows"] = std::move(rows);
    write_json_file(fs::path(cfg.out_dir) / "partitions.json", out);
    append_log(cfg, "partition: " + std::to_string(out["rows"].size()) + " rows");
    return out;
}

json cmd_explore(const RunConfig& cfg) {
    auto records = load_records(cfg);
    Graph g = load_edges(cfg.graph_path);
    fs::path traces_dir = fs::path(cfg.out_dir) / "traces";
    fs::create_directories(traces_dir);

    std::vector<ExploreTask> tasks;
    json skipped = json::array();
    for (const auto& rec : records) {
        if (!rec.has_strategy(cfg.strategy)) {
            skipped.push_back({{"qid", rec.qid}, {"reason", "no '" + cfg.strategy + "' strategy"}});
            continue;
        }
        auto per = explore_tasks_for(rec, cfg.strategy);
        tasks.insert(tasks.end(), per.begin(), per.end());
    }

    BeamParams bp = cfg.beam;
    bp.seed = cfg.seed;

    std::vector<json> results(tasks.size());
    parallel_for(tasks.size(), cfg.workers, [&](size_t i) {
        const ExploreTask& t = tasks[i];
        json row;
        row["qid"] = t.qid;
        row["root"] = t.root;
        std::unique_ptr<HeuristicPolicy> heuristic;
        std::unique_ptr<PolicyClient> client;
        Policy* policy;
        if (cfg.policy_url.empty()) {
            heuristic = std::make_unique<HeuristicPolicy>(cfg.seed);
            policy = heuristic.get();
        } else {
            client = std::make_unique<PolicyClient>(cfg.policy_url);
            policy = client.get();
        }
        try {
            ExplorationTrace trace = beam_explore(g, *policy, bp, t.root, t.question);
            if (client) {
                auto extra = client->take_warnings();
                trace.warnings.insert(trace.warnings.end(), extra.begin(), extra.end());
            }
            write_json_file(traces_dir / t.file, trace.to_json(g));
            row["file"] = "traces/" + t.file;
            row["status"] = "ok";
            row["leaf_depth"] = trace.leaf_depth;
        } catch (const ExplorationError& e) {
            ExplorationTrace partial = e.partial;
            if (client) {
                auto extra = client->take_warnings();
                partial.warnings.insert(partial.warnings.end(), extra.begin(), extra.end());
            }
            json tj = partial.to_json(g);
            tj["error"] = e.what();
            write_json_file(traces_dir / t.file, tj);
            row["file"] = "traces/" + t.file;
            row["status"] = "error";
            row["error"] = e.what();
        } catch (const Error& e) {
            row["status"] = "error";
            row["error"] = e.what();
        }
        results[i] = std::move(row);
    });

    json out;
    out["strategy"] = cfg.strategy;
    out["params"] = {{"n", bp.n},
                     {"m", bp.m},
                     {"k", bp.k},
                     {"h", bp.h},
                     {"context", bp.with_context ? "with" : "without"},
                     {"seed", bp.seed}};
    out["rows"] = json(results);
    out["skipped"] = std::move(skipped);
    write_json_file(fs::path(cfg.out_dir) / "explore_report.json", out);
    append_log(cfg, "explore: " + std::to_string(tasks.size()) + " runs, strategy " +
                        cfg.strategy);
    return out;
}

namespace {

struct LoadedTrace {
    std::map<int, std::string> summaries;
    std::vector<LeafNode> leaves;
    std::string error;  // nonempty when the run failed partway
};

std::optional<LoadedTrace> read_trace(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return std::nullopt;
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ParseError("unreadable trace file '" + file.string() + "'");
    LoadedTrace t;
    try {
        if (j.contains("error")) t.error = j["error"].get<std::string>();
        // Bound to a local: iterating items() of a temporary is a dangling
        // reference, the proxy outlives the json it walks.
        const json sums = j.value("summaries", json::object());
        for (const auto& [level, text] : sums.items()) {
            t.summaries[std::stoi(level)] = text.get<std::string>();
        }
        for (const auto& l : j.value("leaves", json::array())) {
            t.leaves.push_back({l.value("id", ""), l.value("type", "")});
        }
    } catch (const json::exception& e) {
        throw ParseError("trace file '" + file.string() + "': " + e.what());
    }
    return t;
}

}  // namespace

json cmd_eval(const RunConfig& cfg) {
    auto records = load_records(cfg);
    Graph g = load_edges(cfg.graph_path);
    fs::path traces_dir = fs::path(cfg.out_dir) / "traces";

    // Retrieval half: run each record's stored query and compare to its
    // listed answers.
    MetricTable retrieval;
    std::vector<RetrievalResult> results;
    std::map<std::string, int> pattern_types;
    for (const auto& rec : records) {
        if (!rec.graph_query) continue;
        std::string qid = std::to_string(rec.qid);
        pattern_types[qid] = rec.pattern_type;
        RetrievalResult r;
        r.qid = qid;
        try {
            AnswerSet ans = execute_pattern(g, *rec.graph_query);
            for (const auto& e : ans.entities) r.predicted.push_back(e.id);
            r.executed_ok = true;
        } catch (const Error&) {
            r.executed_ok = false;
            r.predicted.clear();
        }
        results.push_back(r);
        auto truth = rec.answer_ids();
        try {
            retrieval.set("all", "hit", qid, hit_rate(r.predicted, truth));
            retrieval.set("all", "f1", qid, f1(r.predicted, truth));
        } catch (const Error& e) {
            retrieval.mark_irrational("all", qid, e.what());
        }
    }
    auto buckets = executability(results, pattern_types);

    // Exploration half: per strategy, merge the traces of a record's roots
    // and score coverage, type match, and exact serendipity hits.
    std::set<std::string> strategy_names;
    for (const auto& rec : records) {
        for (const auto& [name, part] : rec.partitions) strategy_names.insert(name);
    }

    MetricTable exploration;
    for (const auto& strategy : strategy_names) {
        for (const auto& rec : records) {
            if (!rec.has_strategy(strategy)) continue;
            std::string qid = std::to_string(rec.qid);
            const StrategyPartition& part = rec.partitions.at(strategy);

            std::map<int, std::string> summaries;
            std::vector<LeafNode> leaves;
            std::set<std::pair<std::string, std::string>> leaf_seen;
            std::string failure;
            auto tasks = explore_tasks_for(rec, strategy);
            if (tasks.empty()) failure = "no roots to explore";
            for (const auto& t : tasks) {
                auto loaded = read_trace(traces_dir / t.file);
                if (!loaded) {
                    failure = "missing trace " + t.file;
                    break;
                }
                if (!loaded->error.empty()) {
                    failure = "failed trace " + t.file + ": " + loaded->error;
                    break;
                }
                for (const auto& [level, text] : loaded->summaries) {
                    auto& slot = summaries[level];
                    if (!slot.empty()) slot += '\n';
                    slot += text;
                }
                for (const auto& l : loaded->leaves) {
                    if (leaf_seen.insert({l.id, l.type}).second) leaves.push_back(l);
                }
            }
            if (!failure.empty()) {
                exploration.mark_irrational(strategy, qid, failure);
                continue;
            }
            try {
                if (!part.explore_paths.empty()) {
                    exploration.set(strategy, "seren_cov", qid,
                                    seren_cov(summaries, part.explore_paths));
                }
                exploration.set(strategy, "seren_hit", qid,
                                static_cast<double>(seren_hit(leaves, part.serendipity_set)));
                exploration.set(strategy, "type_match", qid,
                                static_cast<double>(type_match(leaves, part.serendipity_set, g)));
            } catch (const Error& e) {
                exploration.mark_irrational(strategy, qid, e.what());
            }
        }
    }

    json out;
    out["retrieval"] = retrieval.to_json();
    json bj = json::object();
    for (const auto& [name, stat] : buckets) {
        bj[name] = {{"total", stat.total}, {"ok", stat.ok}, {"fraction", stat.fraction()}};
    }
    out["executability"] = std::move(bj);
    out["exploration"] = exploration.to_json();
    json corr = json::object();
    for (const auto& metric : exploration.metrics()) {
        corr[metric] = exploration.correlations(metric).to_json();
    }
    out["correlations"] = std::move(corr);
    write_json_file(fs::path(cfg.out_dir) / "metrics.json", out);

    std::ostringstream csv;
    exploration.write_csv(csv);
    retrieval.write_csv(csv, false);
    write_text(fs::path(cfg.out_dir) / "metrics.csv", csv.str());
    append_log(cfg, "eval: " + std::to_string(records.size()) + " records");
    return out;
}

}  // namespace serenqa

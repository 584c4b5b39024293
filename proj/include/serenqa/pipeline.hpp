#pragma once

// End-to-end pipeline behind the CLI: cache building, partition scoring and
// optimization, exploration, and metric reports. Every command is a pure
// function of its input files plus the seed; timestamps go to a sidecar log
// (run.log) so the real outputs stay byte-stable.

#include <cstdint>
#include <optional>
#include <string>

#include "serenqa/benchmark.hpp"
#include "serenqa/embed.hpp"
#include "serenqa/evalkit.hpp"
#include "serenqa/explore.hpp"
#include "serenqa/prob.hpp"
#include "serenqa/rns.hpp"

#include "json.hpp"

namespace serenqa {

struct RunConfig {
    std::string graph_path;
    std::string benchmark_path;
    std::string embeddings_path;  // empty: none provided
    int k = 3;
    double damping = 0.85;
    double epsilon = 1e-10;
    double weight_r = 1.0, weight_n = 1.0, weight_s = 1.0;  // normalized downstream
    BeamParams beam;
    std::string policy_url;  // empty: deterministic heuristic policy
    uint64_t seed = 42;
    std::string out_dir = "serenqa_out";
    unsigned workers = 1;
    bool strict = false;
    bool fallback_embeddings = false;
    JsdSupport jsd = JsdSupport::Own;
    std::string strategy = "sscore";
    std::optional<int64_t> qid;

    RnsWeights weights() const { return RnsWeights::make(weight_r, weight_n, weight_s); }
};

// SERENQA_CACHE_DIR when set, otherwise <out_dir>/cache.
std::string cache_location(const RunConfig& cfg);

// Probability-model inputs for one (graph, k, damping, epsilon) tuple,
// loaded from cache when the stored headers match the edge file.
struct EngineCaches {
    TransitionMatrix pk;
    MarginalVector marg;
    bool p1_hit = false;
    bool pk_hit = false;
    bool marginal_hit = false;
    std::string p1_file, pk_file, marginal_file;
};

// Loads or computes the three caches. With build_all the one-hop matrix is
// materialized even when the k-hop cache already covers it. A header
// mismatch (edge file changed under a cached name) rebuilds silently unless
// cfg.strict, which turns it into StaleCacheError.
EngineCaches ensure_caches(const RunConfig& cfg, const Graph& g, bool build_all = false);

// Embeddings for at least `needed` (graph-resident) ids: loaded from
// cfg.embeddings_path, with gaps either rejected (ValidationError listing
// the uncovered ids) or filled by seeded propagation over the graph when
// cfg.fallback_embeddings is set.
EmbeddingTable ensure_embeddings(const RunConfig& cfg, const Graph& g,
                                 const std::vector<std::string>& needed);

nlohmann::json cmd_build(const RunConfig& cfg);      // writes build_report.json
nlohmann::json cmd_score(const RunConfig& cfg);      // writes scores.json
nlohmann::json cmd_partition(const RunConfig& cfg);  // writes partitions.json, swaps/*.json
nlohmann::json cmd_explore(const RunConfig& cfg);    // writes traces/*.json, explore_report.json
nlohmann::json cmd_eval(const RunConfig& cfg);       // writes metrics.json, metrics.csv

}  // namespace serenqa

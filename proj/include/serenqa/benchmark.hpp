#pragma once

// Benchmark records: a natural-language question, its graph query, the full
// answer set, and per-strategy partitions of the answers into an "existing"
// half (kept retrievable) and a "serendipity" half (to be rediscovered by
// exploration).

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "serenqa/pattern.hpp"

namespace serenqa {

struct StrategyPartition {
    std::vector<std::string> exact_matches;
    std::vector<std::string> serendipity_set;
    std::string serendipity_description;
    std::vector<std::string> explore_paths;
    std::vector<std::string> explore_questions;
    std::string partition_tag;                     // e.g. "test"
    std::map<std::string, double> ranking_scores;  // optional per-id ranking
};

struct QaRecord {
    int64_t qid = 0;
    std::string question;
    std::vector<AnswerEntity> answers;
    std::optional<PatternQuery> graph_query;
    int pattern_type = 0;  // 1..9 taxonomy tag, 0 when absent
    std::optional<double> commonness;
    std::map<std::string, StrategyPartition> partitions;  // keyed by strategy

    std::vector<std::string> answer_ids() const;
    bool has_strategy(const std::string& s) const { return partitions.count(s) != 0; }
};

// Reads a JSON file holding either an array of records or a stream of
// record objects. Per record, any object-valued top-level key that carries
// "exact_matches" or "serendipity_set" is treated as a strategy partition.
// Validation: within a strategy the two sets must be disjoint, and when the
// record lists its answers both sets must be drawn from them; violations
// throw ValidationError naming the qid.
std::vector<QaRecord> load_benchmark(const std::string& path);

}  // namespace serenqa

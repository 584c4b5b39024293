#pragma once

// Code-based evaluation metrics over retrieval results and exploration
// traces: hit rate, F1, executability buckets, summary endpoint coverage,
// leaf type/identity matches, Pearson correlation, and the aggregation rule
// that averages over structurally valid ("rational") records only.

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "serenqa/errors.hpp"
#include "serenqa/explore.hpp"
#include "serenqa/graph.hpp"

#include "json.hpp"

namespace serenqa {

struct RetrievalResult {
    std::string qid;
    std::vector<std::string> predicted;
    bool executed_ok = true;  // false means the query did not run; predicted must be empty
};

// |predicted ∩ truth| / |truth|. Empty truth has no denominator.
double hit_rate(const std::vector<std::string>& predicted, const std::vector<std::string>& truth);

// Harmonic mean of precision and recall; 0 when nothing was predicted.
double f1(const std::vector<std::string>& predicted, const std::vector<std::string>& truth);

struct PathEndpoints {
    std::string source;
    std::string target;
};

// Parses "src--REL--node:Type--REL--...--dst" far enough to recover the two
// endpoints. Throws FormatError (citing the path) when the shape is off.
PathEndpoints parse_path_endpoints(const std::string& path);

// True when token appears in text delimited by non-identifier characters
// (identifier characters are [A-Za-z0-9_]).
bool contains_token(const std::string& text, const std::string& token);

// Fraction of ground-truth paths whose source and final target ids both
// appear as tokens in the concatenated summaries.
double seren_cov(const std::map<int, std::string>& summaries,
                 const std::vector<std::string>& gt_paths);

// 1 iff any leaf's type equals the type of any ground-truth entity.
int type_match(const std::vector<LeafNode>& leaves, const std::vector<std::string>& truth,
               const Graph& g);

// 1 iff any leaf id is itself a ground-truth entity.
int seren_hit(const std::vector<LeafNode>& leaves, const std::vector<std::string>& truth);

// Sample Pearson correlation. Requires two equal-length sequences of at
// least two points; a constant sequence has no defined correlation.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

struct AggregateResult {
    double mean = 0.0;
    size_t used = 0;
    size_t skipped = 0;
};

// Mean over the engaged (non-null) values; null entries are the irrational
// records and only count toward skipped. All-null input is a DomainError.
AggregateResult aggregate(const std::vector<std::optional<double>>& values);

// Pattern-type taxonomy buckets: 1-2 one-hop, 3 two-hop, 4-6 multi-hop,
// 7-9 intersection, anything else "other".
std::string executability_bucket(int pattern_type);

struct BucketStat {
    size_t total = 0;
    size_t ok = 0;
    double fraction() const { return total ? static_cast<double>(ok) / total : 0.0; }
};

// Executability = share of results that ran error-free, per taxonomy bucket.
std::map<std::string, BucketStat> executability(const std::vector<RetrievalResult>& results,
                                                const std::map<std::string, int>& pattern_types);

struct CorrelationMatrix {
    std::vector<std::string> strategies;
    // values[i][j]: correlation between strategies i and j over shared
    // records; absent when fewer than two shared points or either side is
    // constant.
    std::vector<std::vector<std::optional<double>>> values;

    nlohmann::json to_json() const;
};

// Per-record metric values for several strategies, with per-strategy sets of
// records whose stage output was invalid and therefore excluded from means.
class MetricTable {
public:
    void set(const std::string& strategy, const std::string& metric, const std::string& qid,
             double value);
    void mark_irrational(const std::string& strategy, const std::string& qid,
                         const std::string& reason);

    std::vector<std::string> strategies() const;
    std::vector<std::string> metrics() const;
    std::optional<double> get(const std::string& strategy, const std::string& metric,
                              const std::string& qid) const;

    // Mean over rational records carrying a value; skipped counts the
    // irrational ones. No usable value at all is a DomainError.
    AggregateResult aggregate_of(const std::string& strategy, const std::string& metric) const;

    // Pairwise correlation between strategies on one metric, over records
    // rational and valued on both sides.
    CorrelationMatrix correlations(const std::string& metric) const;

    // One row per strategy/qid/metric triple, sorted. Several tables can
    // share one file by emitting the header only once.
    void write_csv(std::ostream& os, bool header = true) const;
    // Nested per strategy per metric: values, mean, used, skipped.
    nlohmann::json to_json() const;

private:
    // strategy -> metric -> qid -> value
    std::map<std::string, std::map<std::string, std::map<std::string, double>>> values_;
    // strategy -> qid -> reason
    std::map<std::string, std::map<std::string, std::string>> irrational_;
};

}  // namespace serenqa

#pragma once

// Level-synchronous beam exploration around a root entity. At each level a
// policy picks which relations to follow out of every frontier node, the
// pooled candidate edges are filtered by confidence (top-k, or a seeded
// uniform sample when nothing is scored), and the policy then picks up to n
// nodes to expand. The policy also decides when to stop and writes the
// per-depth summaries. Policies answer four request kinds; implementations
// are the deterministic heuristic below and the HTTP client in
// policy_client.hpp.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "serenqa/errors.hpp"
#include "serenqa/graph.hpp"
#include "serenqa/pattern.hpp"

#include "json.hpp"

namespace serenqa {

// Confidence for candidate edges: the stored edge score when present,
// otherwise the mean of the edge's numeric attributes, each min-max
// normalized over that attribute's observed range in the graph. Edges with
// no signal score as "absent".
class EdgeScorer {
public:
    explicit EdgeScorer(const Graph& g);
    std::optional<double> operator()(const Edge& e) const;

private:
    std::map<std::string, std::pair<double, double>> ranges_;  // attribute -> (min, max)
};

struct BeamParams {
    size_t n = 30;  // nodes expanded per level
    size_t m = 5;   // relations followed per frontier node
    size_t k = 30;  // candidate edges surviving the confidence filter
    size_t h = 3;   // maximum depth
    bool with_context = true;
    uint64_t seed = 42;
};

struct OfferedRelation {
    std::string label;
    std::optional<double> best_score;  // best candidate-edge confidence
    size_t frequency = 0;              // occurrences of the label graph-wide
};

struct OfferedEdge {
    std::string source;
    std::string relation;
    std::string target;
    std::string target_type;
    std::optional<double> score;
};

struct PolicyContext {
    std::string question;
    std::string root;
    int level = 1;
    std::vector<std::string> frontier;
    std::vector<std::string> context;  // prior level descriptions, oldest first
    size_t limit_n = 0, limit_m = 0, limit_k = 0, limit_h = 0;
};

struct ContinueDecision {
    bool proceed = true;
    std::string rationale;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual std::vector<std::string> select_relations(const PolicyContext& ctx,
                                                      const std::string& node,
                                                      const std::vector<OfferedRelation>& offered,
                                                      size_t m) = 0;
    virtual std::vector<std::string> select_nodes(const PolicyContext& ctx,
                                                  const std::vector<OfferedEdge>& offered,
                                                  size_t n) = 0;
    virtual ContinueDecision should_continue(const PolicyContext& ctx,
                                             const std::vector<std::string>& paths) = 0;
    virtual std::string summarize(const PolicyContext& ctx,
                                  const std::vector<std::string>& paths) = 0;
};

struct LeafNode {
    std::string id;
    std::string type;
};

struct ExplorationTrace {
    std::string root;
    std::string question;
    BeamParams params;
    std::map<std::string, std::vector<EdgeTuple>> paths;  // node -> edges from root
    std::map<int, std::string> summaries;                 // depth -> text
    std::vector<LeafNode> leaves;                         // nodes nothing extends, root excluded
    int leaf_depth = 1;
    std::vector<std::string> warnings;
    uint64_t sampling_seed = 0;

    nlohmann::json to_json(const Graph& g) const;
};

// Path rendered as src--REL--node:Type--REL--...--node. Intermediate nodes
// carry their type; the first and last do not.
std::string path_string(const Graph& g, const std::string& root,
                        const std::vector<EdgeTuple>& path);

struct ExplorationError : Error {
    ExplorationTrace partial;
    ExplorationError(const std::string& msg, ExplorationTrace t)
        : Error(msg), partial(std::move(t)) {}
};

// Runs the exploration. Throws NotFoundError for an unknown root,
// DomainError for zero limits, ExplorationError (with the partial trace)
// when the policy transport fails.
ExplorationTrace beam_explore(const Graph& g, Policy& policy, const BeamParams& params,
                              const std::string& root, const std::string& question);

// Deterministic stand-in for a language model: relations ranked by best
// candidate confidence, then rarity, then label; nodes ranked by edge
// confidence, then id; always continues below the depth cap; summaries are
// a fixed template over the path endpoints.
class HeuristicPolicy : public Policy {
public:
    explicit HeuristicPolicy(uint64_t seed) : seed_(seed) {}

    std::vector<std::string> select_relations(const PolicyContext& ctx, const std::string& node,
                                              const std::vector<OfferedRelation>& offered,
                                              size_t m) override;
    std::vector<std::string> select_nodes(const PolicyContext& ctx,
                                          const std::vector<OfferedEdge>& offered,
                                          size_t n) override;
    ContinueDecision should_continue(const PolicyContext& ctx,
                                     const std::vector<std::string>& paths) override;
    std::string summarize(const PolicyContext& ctx,
                          const std::vector<std::string>& paths) override;

    uint64_t seed() const { return seed_; }

private:
    uint64_t seed_;
};

}  // namespace serenqa

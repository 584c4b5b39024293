#pragma once

// Conjunctive graph-pattern execution. A pattern is a small node/edge
// template: nodes are either pinned to one entity or range over a class,
// one or more nodes are flagged as the answer variables. Execution returns
// every deduplicated answer binding plus one witness instantiation per
// answer. split_graph removes edges so a chosen subset of answers is no
// longer derivable while the rest stay derivable.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "serenqa/graph.hpp"

#include "json.hpp"

namespace serenqa {

struct PatternNode {
    std::string nid;
    enum class Kind { Entity, Class } kind = Kind::Class;
    std::string entity_id;   // set when kind == Entity
    std::string node_class;  // required node type
    std::string friendly_name;
    bool question = false;
    std::string function;  // aggregation hint, preserved verbatim
};

struct PatternEdge {
    std::string start;  // nid
    std::string end;    // nid
    std::string relation;
};

struct PatternQuery {
    std::vector<PatternNode> nodes;
    std::vector<PatternEdge> edges;

    const PatternNode* find(const std::string& nid) const;
    std::vector<const PatternNode*> question_nodes() const;
};

// Parses the query JSON: {"nodes": [{nid, node_type, id, class,
// friendly_name, question_node, function}], "edges": [{start, end, relation,
// friendly_name}]}. Edge labels prefer friendly_name over the raw relation
// field, matching how the labels appear in edge files.
PatternQuery parse_pattern(const nlohmann::json& j);

struct EdgeTuple {
    std::string source;
    std::string relation;
    std::string target;

    bool operator==(const EdgeTuple&) const = default;
    auto operator<=>(const EdgeTuple&) const = default;
};

struct AnswerEntity {
    std::string id;
    std::string name;
};

struct AnswerSet {
    std::vector<AnswerEntity> entities;  // sorted by id, distinct
    // One witness per answer id: the matched edge tuples in pattern-edge
    // order for the first binding found.
    std::map<std::string, std::vector<EdgeTuple>> witnesses;

    bool contains(const std::string& id) const;
    nlohmann::json to_json() const;
};

// Runs the pattern over the graph. Bound entities that are missing from the
// graph yield an empty result rather than an error. Patterns whose shape is
// not a tree or a single four-node cycle (the compound intersection form)
// are rejected with UnsupportedPatternError.
AnswerSet execute_pattern(const Graph& g, const PatternQuery& q);

struct SplitResult {
    Graph graph;
    std::vector<Edge> removed;
};

// Removes edges from g until no id in `exclude` is an answer of q, keeping
// every id in `keep` an answer. Repeatedly re-executes the pattern and cuts
// the final hop of each surviving excluded answer's witness, preferring
// edges that no kept answer's witness uses. Throws InfeasibleSplitError when
// the two goals conflict.
SplitResult split_graph(const Graph& g, const PatternQuery& q,
                        const std::vector<std::string>& keep,
                        const std::vector<std::string>& exclude);

}  // namespace serenqa

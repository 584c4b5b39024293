#pragma once

// Directed multigraph over typed nodes, loaded from a tab-separated edge
// file. One edge per line:
//
//   source_id <TAB> source_type <TAB> relation <TAB> target_id <TAB> target_type
//       [<TAB> score] [<TAB> key=value;key=value...]
//
// The optional score is a confidence in [0,1]; the optional attribute column
// carries free-form key=value pairs. Duplicate lines are kept as parallel
// edges. Isolated nodes can be declared on their own lines:
//
//   node:<id> <TAB> <type> [<TAB> display name]
//
// Lines that are empty or start with '#' are skipped. The graph is immutable
// once loaded; concurrent readers need no locking.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace serenqa {

struct NodeRef {
    std::string id;
    std::string type;
    std::string name;  // empty unless declared
};

struct Edge {
    std::string source;
    std::string target;
    std::string relation;
    std::optional<double> score;
    std::map<std::string, std::string> attributes;

    bool same_triple(const Edge& o) const {
        return source == o.source && relation == o.relation && target == o.target;
    }
};

enum class Direction { Out, In };

class Graph {
public:
    void add_node(const std::string& id, const std::string& type, const std::string& name,
                  size_t line = 0);
    void add_edge(Edge e, const std::string& source_type, const std::string& target_type,
                  size_t line = 0);
    // Builds the adjacency and type indexes; call once after the last insert.
    void finalize();

    size_t node_count() const { return nodes_.size(); }
    size_t edge_count() const { return edges_.size(); }

    bool has_node(const std::string& id) const { return node_pos_.count(id) != 0; }
    const NodeRef& node(const std::string& id) const;
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(size_t i) const { return edges_[i]; }

    // Node ids in sorted order; the row order used by every matrix built
    // from this graph.
    const std::vector<std::string>& sorted_ids() const { return sorted_ids_; }
    // Ids of all nodes with the given type, sorted.
    std::vector<std::string> ids_of_type(const std::string& type) const;
    const std::vector<std::string>& declared_types() const { return types_; }

    // Incident edge indices, sorted by relation then the far endpoint id,
    // parallel edges in insertion order.
    const std::vector<size_t>& incident(const std::string& id, Direction d) const;

    uint64_t source_hash() const { return source_hash_; }
    void set_source_hash(uint64_t h) { source_hash_ = h; }

private:
    std::unordered_map<std::string, NodeRef> nodes_;
    std::unordered_map<std::string, size_t> node_pos_;  // id -> index in sorted_ids_
    std::vector<Edge> edges_;
    std::vector<std::string> sorted_ids_;
    std::vector<std::string> types_;
    std::unordered_map<std::string, std::vector<size_t>> out_, in_;
    std::unordered_map<std::string, std::vector<std::string>> by_type_;
    uint64_t source_hash_ = 0;
    bool finalized_ = false;
};

// Reads the edge file format described above. Throws ParseError with the
// 1-based line number for malformed lines, ValidationError for out-of-range
// scores or conflicting node types.
Graph load_edges(const std::string& path);

// Writes a graph back out in the same format. Reloading the output yields
// the same nodes and the same edge multiset.
void save_edges(const Graph& g, const std::string& path);

// Incident edges of one node in deterministic order.
std::vector<Edge> neighbors(const Graph& g, const std::string& id, Direction d);

// Distinct outgoing relation labels of a node, sorted.
std::vector<std::string> relation_types(const Graph& g, const std::string& id);

}  // namespace serenqa

#pragma once

// Unit-norm entity embeddings: loaded from a text table or synthesized by
// smoothing seeded random features over the graph. File format:
//
//   D=<dim>
//   <id> <TAB> v1 v2 ... vD
//
// Vectors are L2-normalized on load; a zero vector is rejected.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "serenqa/graph.hpp"

namespace serenqa {

class EmbeddingTable {
public:
    EmbeddingTable() = default;
    explicit EmbeddingTable(size_t dim) : dim_(dim) {}

    size_t dim() const { return dim_; }
    size_t size() const { return order_.size(); }
    bool has(const std::string& id) const { return vecs_.count(id) != 0; }
    const std::vector<double>& vec(const std::string& id) const;
    const std::vector<std::string>& ids() const { return order_; }

    // Normalizes to unit length; throws DegenerateDistributionError on a
    // zero vector, DomainError on a dimension mismatch.
    void put(const std::string& id, std::vector<double> v);

private:
    size_t dim_ = 0;
    std::unordered_map<std::string, std::vector<double>> vecs_;
    std::vector<std::string> order_;
};

EmbeddingTable load_embeddings(const std::string& path);

// Synthesizes embeddings for every node: seeded random unit features
// smoothed `layers` times with the symmetric-normalized adjacency of the
// undirected simple skeleton plus self-loops. Identical seeds give
// bit-identical tables.
EmbeddingTable propagate_embeddings(const Graph& g, size_t dim, int layers, uint64_t seed);

// Half the Euclidean distance between two unit vectors; 0 for identical
// directions, 1 for opposite ones.
double normalized_distance(const EmbeddingTable& t, const std::string& a, const std::string& b);

}  // namespace serenqa

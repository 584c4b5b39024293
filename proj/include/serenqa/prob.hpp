#pragma once

// Random-walk model over a graph: the one-hop transition matrix (parallel
// edges counted, dangling rows repaired to uniform), its hop-weighted k-step
// mixture, and the damped stationary marginal.

#include <string>
#include <unordered_map>
#include <vector>

#include "serenqa/graph.hpp"
#include "serenqa/matrix.hpp"

namespace serenqa {

// Row order shared by every matrix derived from one graph: sorted node ids.
struct NodeIndex {
    std::vector<std::string> ids;
    std::unordered_map<std::string, uint32_t> pos;

    static NodeIndex from_graph(const Graph& g);
    uint32_t at(const std::string& id) const;
    bool has(const std::string& id) const { return pos.count(id) != 0; }
    size_t size() const { return ids.size(); }
};

struct TransitionMatrix {
    ProbMatrix m;
    NodeIndex index;
    int k = 1;  // hop count this matrix mixes over

    double prob(const std::string& from, const std::string& to) const {
        return m.at(index.at(from), index.at(to));
    }
};

// Mixing weights for hops 1..k: weight(h) = h / (1 + 2 + ... + k), so later
// hops dominate and the weights sum to one.
std::vector<double> hop_weights(int k);

// One-hop transition matrix. Entry (i,j) is the fraction of i's outgoing
// edges (with multiplicity) ending at j; rows without outgoing edges become
// the uniform row. Throws DomainError on an empty graph.
TransitionMatrix build_transition(const Graph& g, unsigned workers = 1);

// Hop-weighted mixture sum_h weight(h) * P^h for h = 1..k. k = 1 returns the
// input unchanged.
TransitionMatrix khop_matrix(const TransitionMatrix& p1, int k, unsigned workers = 1);

struct MarginalVector {
    std::vector<double> p;
    NodeIndex index;
    int iterations = 0;
    double residual = 0.0;

    double at(const std::string& id) const { return p[index.at(id)]; }
};

// Damped fixed point p = damping * transpose(Pk) * p + (1 - damping) * u,
// iterated from the uniform vector u until successive iterates differ by
// less than epsilon in L1. Throws DomainError for damping outside (0,1) or
// epsilon <= 0, ConvergenceError if the tolerance is not reached within
// ceil(ln epsilon / ln damping) + 64 rounds.
MarginalVector marginal(const TransitionMatrix& pk, double damping = 0.85,
                        double epsilon = 1e-10, unsigned workers = 1);

int marginal_iteration_cap(double damping, double epsilon);

}  // namespace serenqa

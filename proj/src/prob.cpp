#include "serenqa/prob.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "serenqa/errors.hpp"
#include "serenqa/util.hpp"

namespace serenqa {

NodeIndex NodeIndex::from_graph(const Graph& g) {
    NodeIndex idx;
    idx.ids = g.sorted_ids();
    idx.pos.reserve(idx.ids.size());
    for (uint32_t i = 0; i < idx.ids.size(); ++i) idx.pos[idx.ids[i]] = i;
    return idx;
}

uint32_t NodeIndex::at(const std::string& id) const {
    auto it = pos.find(id);
    if (it == pos.end()) throw NotFoundError("node '" + id + "' is not in the matrix index");
    return it->second;
}

std::vector<double> hop_weights(int k) {
    if (k < 1) throw DomainError("hop count must be at least 1");
    double total = static_cast<double>(k) * (k + 1) / 2.0;
    std::vector<double> w(k);
    for (int h = 1; h <= k; ++h) w[h - 1] = static_cast<double>(h) / total;
    return w;
}

TransitionMatrix build_transition(const Graph& g, unsigned workers) {
    if (g.node_count() == 0) throw DomainError("cannot build a transition matrix over no nodes");
    TransitionMatrix t;
    t.index = NodeIndex::from_graph(g);
    size_t v = t.index.size();
    t.m = ProbMatrix(v);
    t.k = 1;

    std::vector<std::vector<ProbMatrix::Entry>> rows(v);
    parallel_for(v, workers, [&](size_t r) {
        const std::string& id = t.index.ids[r];
        const auto& out_edges = g.incident(id, Direction::Out);
        if (out_edges.empty()) {
            std::vector<ProbMatrix::Entry> row(v);
            double u = 1.0 / static_cast<double>(v);
            for (uint32_t c = 0; c < v; ++c) row[c] = {c, u};
            rows[r] = std::move(row);
            return;
        }
        std::map<uint32_t, double> counts;
        for (size_t ei : out_edges) {
            counts[t.index.at(g.edge(ei).target)] += 1.0;
        }
        double total = static_cast<double>(out_edges.size());
        std::vector<ProbMatrix::Entry> row;
        row.reserve(counts.size());
        for (const auto& [c, n] : counts) row.emplace_back(c, n / total);
        rows[r] = std::move(row);
    });
    for (size_t r = 0; r < v; ++r) t.m.set_row(r, std::move(rows[r]));
    t.m.maybe_densify();
    return t;
}

TransitionMatrix khop_matrix(const TransitionMatrix& p1, int k, unsigned workers) {
    if (k < 1) throw DomainError("hop count must be at least 1");
    if (k == 1) return p1;
    auto w = hop_weights(k);

    TransitionMatrix out;
    out.index = p1.index;
    out.k = k;
    ProbMatrix acc = p1.m;
    acc.scale(w[0]);
    ProbMatrix power = p1.m;
    for (int h = 2; h <= k; ++h) {
        power = ProbMatrix::multiply(power, p1.m, workers);
        acc.add_scaled(power, w[h - 1]);
    }
    acc.maybe_densify();
    out.m = std::move(acc);
    return out;
}

int marginal_iteration_cap(double damping, double epsilon) {
    return static_cast<int>(std::ceil(std::log(epsilon) / std::log(damping))) + 64;
}

MarginalVector marginal(const TransitionMatrix& pk, double damping, double epsilon,
                        unsigned workers) {
    if (!(damping > 0.0 && damping < 1.0)) {
        throw DomainError("damping must lie strictly between 0 and 1");
    }
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
    size_t v = pk.index.size();
    if (v == 0) throw DomainError("marginal over an empty index");
    for (size_t r = 0; r < v; ++r) {
        if (std::abs(pk.m.row_sum(r) - 1.0) > 1e-9) {
            throw DomainError("transition matrix row " + std::to_string(r) +
                              " is not stochastic");
        }
    }

    std::vector<double> p0(v, 1.0 / static_cast<double>(v));
    std::vector<double> p = p0;
    int cap = marginal_iteration_cap(damping, epsilon);

    MarginalVector out;
    out.index = pk.index;
    for (int it = 1; it <= cap; ++it) {
        std::vector<double> stepped = pk.m.transpose_apply(p, workers);
        double diff = 0.0;
        for (size_t i = 0; i < v; ++i) {
            stepped[i] = damping * stepped[i] + (1.0 - damping) * p0[i];
            diff += std::abs(stepped[i] - p[i]);
        }
        p = std::move(stepped);
        if (diff < epsilon) {
            out.p = std::move(p);
            out.iterations = it;
            out.residual = diff;
            return out;
        }
    }
    throw ConvergenceError("marginal did not converge within " + std::to_string(cap) +
                           " iterations");
}

}  // namespace serenqa

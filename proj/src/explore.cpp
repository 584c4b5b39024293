#include "serenqa/explore.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <random>
#include <set>
#include <sstream>

namespace serenqa {

using nlohmann::json;

EdgeScorer::EdgeScorer(const Graph& g) {
    for (const auto& e : g.edges()) {
        for (const auto& [key, raw] : e.attributes) {
            char* end = nullptr;
            errno = 0;
            double v = std::strtod(raw.c_str(), &end);
            if (errno != 0 || end != raw.c_str() + raw.size() || raw.empty()) continue;
            auto it = ranges_.find(key);
            if (it == ranges_.end()) {
                ranges_[key] = {v, v};
            } else {
                it->second.first = std::min(it->second.first, v);
                it->second.second = std::max(it->second.second, v);
            }
        }
    }
}

std::optional<double> EdgeScorer::operator()(const Edge& e) const {
    if (e.score) return e.score;
    double sum = 0.0;
    size_t count = 0;
    for (const auto& [key, raw] : e.attributes) {
        auto it = ranges_.find(key);
        if (it == ranges_.end()) continue;
        char* end = nullptr;
        errno = 0;
        double v = std::strtod(raw.c_str(), &end);
        if (errno != 0 || end != raw.c_str() + raw.size() || raw.empty()) continue;
        auto [lo, hi] = it->second;
        sum += (hi > lo) ? (v - lo) / (hi - lo) : 0.5;
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

std::string path_string(const Graph& g, const std::string& root,
                        const std::vector<EdgeTuple>& path) {
    std::ostringstream os;
    os << root;
    for (size_t i = 0; i < path.size(); ++i) {
        os << "--" << path[i].relation << "--" << path[i].target;
        if (i + 1 < path.size()) os << ':' << g.node(path[i].target).type;
    }
    return os.str();
}

json ExplorationTrace::to_json(const Graph& g) const {
    json j;
    j["root"] = root;
    j["question"] = question;
    j["params"] = {{"n", params.n},          {"m", params.m},
                   {"k", params.k},          {"h", params.h},
                   {"context", params.with_context ? "with" : "without"}};
    json paths_json = json::object();
    for (const auto& [node, path] : paths) {
        json steps = json::array();
        for (const auto& t : path) steps.push_back({t.source, t.relation, t.target});
        paths_json[node] = {{"edges", steps}, {"rendered", path_string(g, root, path)}};
    }
    j["paths"] = std::move(paths_json);
    json sums = json::object();
    for (const auto& [level, text] : summaries) sums[std::to_string(level)] = text;
    j["summaries"] = std::move(sums);
    json lv = json::array();
    for (const auto& l : leaves) lv.push_back({{"id", l.id}, {"type", l.type}});
    j["leaves"] = std::move(lv);
    j["leaf_depth"] = leaf_depth;
    j["warnings"] = warnings;
    j["sampling_seed"] = sampling_seed;
    return j;
}

namespace {

struct Candidate {
    OfferedEdge edge;
    double effective = -1.0;  // score with "absent" collapsed to -1
};

std::vector<std::string> clamp_selection(const std::vector<std::string>& chosen,
                                         const std::set<std::string>& offered, size_t limit,
                                         const char* what, std::vector<std::string>* warnings) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& id : chosen) {
        if (!offered.count(id)) {
            warnings->push_back(std::string("policy chose an unoffered ") + what + " '" + id +
                                "'; dropped");
            continue;
        }
        if (!seen.insert(id).second) continue;
        if (out.size() == limit) {
            warnings->push_back(std::string("policy exceeded the ") + what + " limit of " +
                                std::to_string(limit) + "; truncated");
            break;
        }
        out.push_back(id);
    }
    return out;
}

}  // namespace

ExplorationTrace beam_explore(const Graph& g, Policy& policy, const BeamParams& params,
                              const std::string& root, const std::string& question) {
    if (params.n < 1 || params.m < 1 || params.k < 1 || params.h < 1) {
        throw DomainError("beam limits must all be at least 1");
    }
    g.node(root);  // unknown root -> NotFoundError

    ExplorationTrace trace;
    trace.root = root;
    trace.question = question;
    trace.params = params;
    trace.sampling_seed = params.seed;
    trace.paths[root] = {};

    std::mt19937_64 rng(params.seed);
    EdgeScorer scorer(g);
    std::map<std::string, size_t> rel_freq;
    for (const auto& e : g.edges()) ++rel_freq[e.relation];

    std::vector<std::string> frontier{root};
    std::vector<std::string> context_buf;
    int leaf_depth = 1;

    auto make_ctx = [&](int level) {
        PolicyContext ctx;
        ctx.question = question;
        ctx.root = root;
        ctx.level = level;
        ctx.frontier = frontier;
        ctx.context = context_buf;
        ctx.limit_n = params.n;
        ctx.limit_m = params.m;
        ctx.limit_k = params.k;
        ctx.limit_h = params.h;
        return ctx;
    };
    auto all_path_strings = [&] {
        std::vector<std::string> out;
        out.reserve(trace.paths.size());
        for (const auto& [node, path] : trace.paths) {
            if (node == root) continue;
            out.push_back(path_string(g, root, path));
        }
        return out;
    };

    try {
        for (size_t level = 1; level <= params.h; ++level) {
            PolicyContext ctx = make_ctx(static_cast<int>(level));

            std::vector<Candidate> pool;
            for (const auto& u : frontier) {
                auto rels = relation_types(g, u);
                if (rels.empty()) continue;

                std::vector<OfferedRelation> offered;
                offered.reserve(rels.size());
                std::set<std::string> offered_labels;
                for (const auto& r : rels) {
                    OfferedRelation rel;
                    rel.label = r;
                    rel.frequency = rel_freq[r];
                    for (size_t ei : g.incident(u, Direction::Out)) {
                        const Edge& e = g.edge(ei);
                        if (e.relation != r) continue;
                        auto s = scorer(e);
                        if (s && (!rel.best_score || *s > *rel.best_score)) rel.best_score = s;
                    }
                    offered.push_back(rel);
                    offered_labels.insert(r);
                }
                auto chosen = policy.select_relations(ctx, u, offered, params.m);
                auto selected = clamp_selection(chosen, offered_labels, params.m, "relation",
                                                &trace.warnings);
                std::set<std::string> selected_set(selected.begin(), selected.end());

                for (size_t ei : g.incident(u, Direction::Out)) {
                    const Edge& e = g.edge(ei);
                    if (!selected_set.count(e.relation)) continue;
                    if (trace.paths.count(e.target)) continue;  // no revisits
                    Candidate c;
                    c.edge = {u, e.relation, e.target, g.node(e.target).type, scorer(e)};
                    c.effective = c.edge.score.value_or(-1.0);
                    pool.push_back(std::move(c));
                }
            }
            if (pool.empty()) break;

            bool all_unscored = std::all_of(pool.begin(), pool.end(), [](const Candidate& c) {
                return c.effective == -1.0;
            });
            if (all_unscored) {
                size_t take = std::min(params.k, pool.size());
                std::vector<size_t> idx(pool.size());
                for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
                for (size_t i = 0; i < take; ++i) {
                    size_t j = i + static_cast<size_t>(rng() % (idx.size() - i));
                    std::swap(idx[i], idx[j]);
                }
                idx.resize(take);
                std::sort(idx.begin(), idx.end());
                std::vector<Candidate> sampled;
                sampled.reserve(take);
                for (size_t i : idx) sampled.push_back(std::move(pool[i]));
                pool = std::move(sampled);
            } else {
                std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
                    if (a.effective != b.effective) return a.effective > b.effective;
                    if (a.edge.source != b.edge.source) return a.edge.source < b.edge.source;
                    if (a.edge.relation != b.edge.relation) return a.edge.relation < b.edge.relation;
                    return a.edge.target < b.edge.target;
                });
                if (pool.size() > params.k) pool.resize(params.k);
            }

            std::vector<OfferedEdge> offered_edges;
            offered_edges.reserve(pool.size());
            std::set<std::string> offered_targets;
            for (const auto& c : pool) {
                offered_edges.push_back(c.edge);
                offered_targets.insert(c.edge.target);
            }
            auto chosen = policy.select_nodes(ctx, offered_edges, params.n);
            auto selected =
                clamp_selection(chosen, offered_targets, params.n, "node", &trace.warnings);

            std::vector<std::string> next_frontier;
            for (const auto& v : selected) {
                if (trace.paths.count(v)) continue;
                const Candidate* via = nullptr;
                for (const auto& c : pool) {
                    if (c.edge.target == v) {
                        via = &c;
                        break;
                    }
                }
                auto path = trace.paths.at(via->edge.source);
                path.push_back({via->edge.source, via->edge.relation, via->edge.target});
                trace.paths[v] = std::move(path);
                next_frontier.push_back(v);
            }
            std::sort(next_frontier.begin(), next_frontier.end());

            if (params.with_context) {
                context_buf.push_back(policy.summarize(ctx, all_path_strings()));
            }

            auto decision = policy.should_continue(ctx, all_path_strings());
            if (!decision.proceed) break;
            frontier = std::move(next_frontier);
            leaf_depth = static_cast<int>(level);
        }

        trace.leaf_depth = leaf_depth;
        for (int l = 1; l <= leaf_depth; ++l) {
            std::vector<std::string> at_depth;
            for (const auto& [node, path] : trace.paths) {
                if (static_cast<int>(path.size()) == l) {
                    at_depth.push_back(path_string(g, root, path));
                }
            }
            PolicyContext ctx = make_ctx(l);
            trace.summaries[l] = policy.summarize(ctx, at_depth);
        }
    } catch (const PolicyTransportError& e) {
        trace.leaf_depth = leaf_depth;
        throw ExplorationError(std::string("policy transport failed: ") + e.what(),
                               std::move(trace));
    }

    // Leaves: nodes whose path no other path extends.
    std::set<std::string> extended;
    for (const auto& [node, path] : trace.paths) {
        if (!path.empty()) extended.insert(path.back().source);
    }
    for (const auto& [node, path] : trace.paths) {
        if (node == root || extended.count(node)) continue;
        trace.leaves.push_back({node, g.node(node).type});
    }
    return trace;
}

std::vector<std::string> HeuristicPolicy::select_relations(
    const PolicyContext&, const std::string&, const std::vector<OfferedRelation>& offered,
    size_t m) {
    std::vector<const OfferedRelation*> order;
    order.reserve(offered.size());
    for (const auto& r : offered) order.push_back(&r);
    std::sort(order.begin(), order.end(), [](const OfferedRelation* a, const OfferedRelation* b) {
        double sa = a->best_score.value_or(-1.0);
        double sb = b->best_score.value_or(-1.0);
        if (sa != sb) return sa > sb;
        if (a->frequency != b->frequency) return a->frequency < b->frequency;  // rarer first
        return a->label < b->label;
    });
    std::vector<std::string> out;
    for (const auto* r : order) {
        if (out.size() == m) break;
        out.push_back(r->label);
    }
    return out;
}

std::vector<std::string> HeuristicPolicy::select_nodes(const PolicyContext&,
                                                       const std::vector<OfferedEdge>& offered,
                                                       size_t n) {
    std::vector<const OfferedEdge*> order;
    order.reserve(offered.size());
    for (const auto& e : offered) order.push_back(&e);
    std::sort(order.begin(), order.end(), [](const OfferedEdge* a, const OfferedEdge* b) {
        double sa = a->score.value_or(-1.0);
        double sb = b->score.value_or(-1.0);
        if (sa != sb) return sa > sb;
        return a->target < b->target;
    });
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto* e : order) {
        if (out.size() == n) break;
        if (seen.insert(e->target).second) out.push_back(e->target);
    }
    return out;
}

ContinueDecision HeuristicPolicy::should_continue(const PolicyContext& ctx,
                                                  const std::vector<std::string>&) {
    bool more = static_cast<size_t>(ctx.level) < ctx.limit_h;
    return {more, more ? "depth budget remains" : "depth budget exhausted"};
}

std::string HeuristicPolicy::summarize(const PolicyContext&,
                                       const std::vector<std::string>& paths) {
    if (paths.empty()) return "No paths at this depth.";
    std::ostringstream os;
    os << "Explored " << paths.size() << (paths.size() == 1 ? " path:" : " paths:");
    for (const auto& p : paths) os << "\n- " << p;
    return os.str();
}

}  // namespace serenqa

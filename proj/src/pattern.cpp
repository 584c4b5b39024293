#include "serenqa/pattern.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "serenqa/errors.hpp"

namespace serenqa {

using nlohmann::json;

const PatternNode* PatternQuery::find(const std::string& nid) const {
    for (const auto& n : nodes)
        if (n.nid == nid) return &n;
    return nullptr;
}

std::vector<const PatternNode*> PatternQuery::question_nodes() const {
    std::vector<const PatternNode*> out;
    for (const auto& n : nodes)
        if (n.question) out.push_back(&n);
    return out;
}

PatternQuery parse_pattern(const json& j) {
    PatternQuery q;
    if (!j.contains("nodes") || !j.contains("edges")) {
        throw ParseError("pattern query needs 'nodes' and 'edges'");
    }
    for (const auto& n : j.at("nodes")) {
        PatternNode pn;
        if (n.contains("nid")) {
            const auto& nid = n.at("nid");
            pn.nid = nid.is_string() ? nid.get<std::string>() : nid.dump();
        }
        std::string kind = n.value("node_type", "class");
        pn.kind = kind == "entity" ? PatternNode::Kind::Entity : PatternNode::Kind::Class;
        pn.entity_id = pn.kind == PatternNode::Kind::Entity ? n.value("id", "") : "";
        pn.node_class = n.value("class", "");
        if (pn.node_class.empty() && pn.kind == PatternNode::Kind::Class) {
            pn.node_class = n.value("id", "");
        }
        pn.friendly_name = n.value("friendly_name", "");
        if (auto it = n.find("question_node"); it != n.end()) {
            pn.question = it->is_boolean() ? it->get<bool>()
                                           : (it->is_number() && it->get<int>() != 0);
        }
        if (auto it = n.find("function"); it != n.end() && it->is_string()) {
            pn.function = it->get<std::string>();
        }
        if (pn.nid.empty()) throw ParseError("pattern node without nid");
        if (pn.node_class.empty()) {
            throw ParseError("pattern node '" + pn.nid + "' without class");
        }
        q.nodes.push_back(std::move(pn));
    }
    for (const auto& e : j.at("edges")) {
        PatternEdge pe;
        auto nid_of = [](const json& v) {
            return v.is_string() ? v.get<std::string>() : v.dump();
        };
        if (!e.contains("start") || !e.contains("end")) {
            throw ParseError("pattern edge without endpoints");
        }
        pe.start = nid_of(e.at("start"));
        pe.end = nid_of(e.at("end"));
        pe.relation = e.value("friendly_name", "");
        if (pe.relation.empty()) pe.relation = e.value("relation", "");
        if (pe.relation.empty()) throw ParseError("pattern edge without relation label");
        q.edges.push_back(std::move(pe));
    }
    std::set<std::string> nids;
    for (const auto& n : q.nodes) {
        if (!nids.insert(n.nid).second) throw ParseError("duplicate nid '" + n.nid + "'");
    }
    for (const auto& e : q.edges) {
        if (!nids.count(e.start) || !nids.count(e.end)) {
            throw ParseError("pattern edge references unknown nid");
        }
    }
    if (q.question_nodes().empty()) throw ParseError("pattern has no question node");
    return q;
}

bool AnswerSet::contains(const std::string& id) const {
    return std::any_of(entities.begin(), entities.end(),
                       [&](const AnswerEntity& e) { return e.id == id; });
}

json AnswerSet::to_json() const {
    json out;
    out["entities"] = json::array();
    for (const auto& e : entities) out["entities"].push_back({{"id", e.id}, {"name", e.name}});
    out["witnesses"] = json::array();
    for (const auto& [id, path] : witnesses) {
        json steps = json::array();
        for (const auto& t : path) steps.push_back({t.source, t.relation, t.target});
        out["witnesses"].push_back({{"id", id}, {"path", steps}});
    }
    return out;
}

namespace {

// The executor accepts trees and the one four-node diamond used by compound
// intersection questions. Anything with another cycle (self-loop, parallel
// pattern edges, longer cycles) is rejected up front.
void check_shape(const PatternQuery& q) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& n : q.nodes) adj[n.nid];
    std::set<std::pair<std::string, std::string>> seen_pairs;
    for (const auto& e : q.edges) {
        if (e.start == e.end) {
            throw UnsupportedPatternError("self-referential pattern edge on '" + e.start + "'");
        }
        auto key = std::minmax(e.start, e.end);
        if (!seen_pairs.insert(key).second) {
            throw UnsupportedPatternError("parallel pattern edges between '" + e.start +
                                          "' and '" + e.end + "'");
        }
        adj[e.start].push_back(e.end);
        adj[e.end].push_back(e.start);
    }
    // Count independent cycles: edges - nodes + components.
    std::set<std::string> visited;
    size_t components = 0;
    for (const auto& [nid, _] : adj) {
        if (visited.count(nid)) continue;
        ++components;
        std::vector<std::string> stack{nid};
        visited.insert(nid);
        while (!stack.empty()) {
            auto cur = stack.back();
            stack.pop_back();
            for (const auto& nxt : adj[cur]) {
                if (visited.insert(nxt).second) stack.push_back(nxt);
            }
        }
    }
    size_t cycles = q.edges.size() + components - adj.size();
    if (cycles == 0) return;
    if (cycles > 1) {
        throw UnsupportedPatternError("pattern has " + std::to_string(cycles) +
                                      " independent cycles");
    }
    // One cycle: accept only the four-node form. Peel degree-1 nodes; what
    // remains is the cycle itself.
    std::map<std::string, std::set<std::string>> deg;
    for (const auto& e : q.edges) {
        deg[e.start].insert(e.end);
        deg[e.end].insert(e.start);
    }
    std::vector<std::string> leaves;
    for (const auto& [nid, nb] : deg)
        if (nb.size() <= 1) leaves.push_back(nid);
    while (!leaves.empty()) {
        auto leaf = leaves.back();
        leaves.pop_back();
        for (const auto& nb : deg[leaf]) {
            deg[nb].erase(leaf);
            if (deg[nb].size() == 1) leaves.push_back(nb);
        }
        deg.erase(leaf);
    }
    if (deg.size() != 4) {
        throw UnsupportedPatternError("cyclic pattern of length " + std::to_string(deg.size()) +
                                      " is not the supported four-node form");
    }
}

struct Binder {
    const Graph& g;
    const PatternQuery& q;
    std::vector<std::string> order;                      // nids, small candidate sets first
    std::map<std::string, std::vector<std::string>> cand;
    std::map<std::string, std::string> bound;
    // answer id -> witness (first found)
    std::map<std::string, std::vector<EdgeTuple>> witnesses;
    std::set<std::string> answers;
    bool enumerate_all;
    // When enumerating for the splitter: every witness of every answer.
    std::map<std::string, std::vector<std::vector<EdgeTuple>>> all_witnesses;

    bool edge_exists(const std::string& src, const std::string& rel,
                     const std::string& dst) const {
        for (size_t i : g.incident(src, Direction::Out)) {
            const Edge& e = g.edge(i);
            if (e.relation == rel && e.target == dst) return true;
        }
        return false;
    }

    bool consistent(const std::string& nid, const std::string& node_id) const {
        for (const auto& pe : q.edges) {
            if (pe.start == nid) {
                auto it = bound.find(pe.end);
                if (it != bound.end() && !edge_exists(node_id, pe.relation, it->second))
                    return false;
            }
            if (pe.end == nid) {
                auto it = bound.find(pe.start);
                if (it != bound.end() && !edge_exists(it->second, pe.relation, node_id))
                    return false;
            }
        }
        return true;
    }

    void record() {
        std::vector<EdgeTuple> path;
        path.reserve(q.edges.size());
        for (const auto& pe : q.edges) {
            path.push_back({bound.at(pe.start), pe.relation, bound.at(pe.end)});
        }
        for (const auto* qn : q.question_nodes()) {
            const std::string& id = bound.at(qn->nid);
            answers.insert(id);
            witnesses.emplace(id, path);  // keeps the first
            if (enumerate_all) all_witnesses[id].push_back(path);
        }
    }

    void run(size_t depth) {
        if (depth == order.size()) {
            record();
            return;
        }
        const std::string& nid = order[depth];
        for (const auto& node_id : cand.at(nid)) {
            if (consistent(nid, node_id)) {
                bound[nid] = node_id;
                run(depth + 1);
                bound.erase(nid);
            }
        }
    }
};

using WitnessMap = std::map<std::string, std::vector<std::vector<EdgeTuple>>>;

AnswerSet execute_impl(const Graph& g, const PatternQuery& q, WitnessMap* all_witnesses) {
    check_shape(q);

    Binder b{g, q, {}, {}, {}, {}, {}, all_witnesses != nullptr, {}};
    for (const auto& n : q.nodes) {
        std::vector<std::string> c;
        if (n.kind == PatternNode::Kind::Entity) {
            if (g.has_node(n.entity_id) && g.node(n.entity_id).type == n.node_class) {
                c.push_back(n.entity_id);
            }
        } else {
            c = g.ids_of_type(n.node_class);
        }
        b.cand[n.nid] = std::move(c);
        b.order.push_back(n.nid);
    }
    std::stable_sort(b.order.begin(), b.order.end(), [&](const auto& x, const auto& y) {
        return b.cand.at(x).size() < b.cand.at(y).size();
    });
    bool any_empty = std::any_of(q.nodes.begin(), q.nodes.end(), [&](const PatternNode& n) {
        return b.cand.at(n.nid).empty();
    });
    if (!any_empty) b.run(0);

    AnswerSet out;
    for (const auto& id : b.answers) {
        const NodeRef& n = g.node(id);
        out.entities.push_back({id, n.name});
    }
    out.witnesses = b.witnesses;
    if (all_witnesses) *all_witnesses = std::move(b.all_witnesses);
    return out;
}

}  // namespace

AnswerSet execute_pattern(const Graph& g, const PatternQuery& q) {
    return execute_impl(g, q, nullptr);
}

SplitResult split_graph(const Graph& g, const PatternQuery& q,
                        const std::vector<std::string>& keep,
                        const std::vector<std::string>& exclude) {
    AnswerSet initial = execute_pattern(g, q);
    for (const auto& id : keep) {
        if (!initial.contains(id)) {
            throw DomainError("split: '" + id + "' is not an answer of the pattern");
        }
    }
    for (const auto& id : exclude) {
        if (!initial.contains(id)) {
            throw DomainError("split: '" + id + "' is not an answer of the pattern");
        }
    }

    std::set<std::string> keep_set(keep.begin(), keep.end());

    Graph cur = g;
    std::vector<Edge> removed;
    std::set<EdgeTuple> removed_triples;

    // Each round removes at least one concrete edge, so |E| bounds the loop.
    for (size_t round = 0; round <= g.edge_count(); ++round) {
        WitnessMap all;
        AnswerSet res = execute_impl(cur, q, &all);

        std::vector<std::string> still;
        for (const auto& id : exclude)
            if (res.contains(id) && still.end() == std::find(still.begin(), still.end(), id))
                still.push_back(id);
        if (still.empty()) {
            for (const auto& id : keep) {
                if (!res.contains(id)) {
                    throw InfeasibleSplitError(
                        "split: removing the serendipity answers also removes kept answer '" +
                        id + "'");
                }
            }
            SplitResult out{std::move(cur), std::move(removed)};
            return out;
        }

        // Edges any kept answer's witnesses rely on; avoided when possible.
        std::set<EdgeTuple> protected_triples;
        for (const auto& id : keep_set) {
            auto it = all.find(id);
            if (it == all.end()) continue;
            for (const auto& path : it->second)
                for (const auto& t : path) protected_triples.insert(t);
        }

        std::set<EdgeTuple> to_cut;
        std::sort(still.begin(), still.end());
        for (const auto& id : still) {
            for (const auto& path : all.at(id)) {
                const EdgeTuple* choice = nullptr;
                for (auto it = path.rbegin(); it != path.rend(); ++it) {
                    if (!protected_triples.count(*it)) {
                        choice = &*it;
                        break;
                    }
                }
                if (!choice) choice = &path.back();  // conflict; caught on re-check
                to_cut.insert(*choice);
            }
        }

        Graph next;
        for (const auto& nid : cur.sorted_ids()) {
            const NodeRef& n = cur.node(nid);
            next.add_node(n.id, n.type, n.name);
        }
        for (const auto& e : cur.edges()) {
            EdgeTuple t{e.source, e.relation, e.target};
            if (to_cut.count(t)) {
                removed.push_back(e);
                removed_triples.insert(t);
                continue;
            }
            next.add_edge(e, cur.node(e.source).type, cur.node(e.target).type);
        }
        next.set_source_hash(cur.source_hash());
        next.finalize();
        cur = std::move(next);
    }
    throw InfeasibleSplitError("split: did not terminate; pattern keeps rematching");
}

}  // namespace serenqa

#include "serenqa/graph.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "serenqa/errors.hpp"
#include "serenqa/util.hpp"

namespace serenqa {

namespace {

std::string where(size_t line) {
    return line == 0 ? std::string{} : " (line " + std::to_string(line) + ")";
}

bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    std::string buf(s);
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(buf.c_str(), &end);
    if (errno != 0 || end != buf.c_str() + buf.size()) return false;
    out = v;
    return true;
}

}  // namespace

void Graph::add_node(const std::string& id, const std::string& type, const std::string& name,
                     size_t line) {
    if (id.empty()) throw ValidationError("empty node id" + where(line));
    if (type.empty()) throw ValidationError("empty node type for '" + id + "'" + where(line));
    auto it = nodes_.find(id);
    if (it == nodes_.end()) {
        nodes_.emplace(id, NodeRef{id, type, name});
        return;
    }
    if (it->second.type != type) {
        throw ValidationError("node '" + id + "' declared with conflicting types '" +
                              it->second.type + "' and '" + type + "'" + where(line));
    }
    if (it->second.name.empty() && !name.empty()) it->second.name = name;
}

void Graph::add_edge(Edge e, const std::string& source_type, const std::string& target_type,
                     size_t line) {
    if (e.score && (*e.score < 0.0 || *e.score > 1.0)) {
        std::ostringstream os;
        os << "edge score " << *e.score << " outside [0,1]" << where(line);
        throw ValidationError(os.str());
    }
    if (e.relation.empty()) throw ValidationError("empty relation" + where(line));
    add_node(e.source, source_type, "", line);
    add_node(e.target, target_type, "", line);
    edges_.push_back(std::move(e));
}

void Graph::finalize() {
    sorted_ids_.clear();
    sorted_ids_.reserve(nodes_.size());
    for (const auto& [id, _] : nodes_) sorted_ids_.push_back(id);
    std::sort(sorted_ids_.begin(), sorted_ids_.end());
    node_pos_.clear();
    for (size_t i = 0; i < sorted_ids_.size(); ++i) node_pos_[sorted_ids_[i]] = i;

    std::set<std::string> type_set;
    by_type_.clear();
    for (const auto& id : sorted_ids_) {
        const auto& n = nodes_.at(id);
        type_set.insert(n.type);
        by_type_[n.type].push_back(id);
    }
    types_.assign(type_set.begin(), type_set.end());

    out_.clear();
    in_.clear();
    for (size_t i = 0; i < edges_.size(); ++i) {
        out_[edges_[i].source].push_back(i);
        in_[edges_[i].target].push_back(i);
    }
    auto order = [this](std::vector<size_t>& v, bool far_is_target) {
        std::stable_sort(v.begin(), v.end(), [&](size_t a, size_t b) {
            const Edge& ea = edges_[a];
            const Edge& eb = edges_[b];
            if (ea.relation != eb.relation) return ea.relation < eb.relation;
            const std::string& fa = far_is_target ? ea.target : ea.source;
            const std::string& fb = far_is_target ? eb.target : eb.source;
            return fa < fb;
        });
    };
    for (auto& [_, v] : out_) order(v, true);
    for (auto& [_, v] : in_) order(v, false);
    finalized_ = true;
}

const NodeRef& Graph::node(const std::string& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw NotFoundError("unknown node '" + id + "'");
    return it->second;
}

std::vector<std::string> Graph::ids_of_type(const std::string& type) const {
    auto it = by_type_.find(type);
    if (it == by_type_.end()) return {};
    return it->second;
}

const std::vector<size_t>& Graph::incident(const std::string& id, Direction d) const {
    static const std::vector<size_t> kEmpty;
    const auto& m = d == Direction::Out ? out_ : in_;
    auto it = m.find(id);
    return it == m.end() ? kEmpty : it->second;
}

Graph load_edges(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open edge file '" + path + "'");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    Graph g;
    g.set_source_hash(fnv1a64(content));

    size_t line_no = 0;
    size_t start = 0;
    while (start <= content.size()) {
        size_t nl = content.find('\n', start);
        std::string_view line(content.data() + start,
                              (nl == std::string::npos ? content.size() : nl) - start);
        start = (nl == std::string::npos) ? content.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty() || line.front() == '#') continue;

        auto cols = split(line, '\t');
        if (line.rfind("node:", 0) == 0) {
            std::string id(trim(cols[0]).substr(5));
            if (cols.size() < 2 || cols.size() > 3) {
                throw ParseError("node line needs 2 or 3 columns" + std::string(" (line ") +
                                 std::to_string(line_no) + ")");
            }
            std::string name = cols.size() == 3 ? std::string(trim(cols[2])) : "";
            g.add_node(id, std::string(trim(cols[1])), name, line_no);
            continue;
        }
        if (cols.size() < 5 || cols.size() > 7) {
            throw ParseError("expected 5 to 7 tab-separated columns, got " +
                             std::to_string(cols.size()) + " (line " + std::to_string(line_no) +
                             ")");
        }
        Edge e;
        e.source = std::string(trim(cols[0]));
        std::string stype(trim(cols[1]));
        e.relation = std::string(trim(cols[2]));
        e.target = std::string(trim(cols[3]));
        std::string ttype(trim(cols[4]));
        for (size_t c = 5; c < cols.size(); ++c) {
            std::string_view col = trim(cols[c]);
            if (col.empty()) continue;
            if (col.find('=') == std::string_view::npos) {
                double v;
                if (!parse_double(col, v)) {
                    throw ParseError("column " + std::to_string(c + 1) +
                                     " is neither a score nor key=value pairs (line " +
                                     std::to_string(line_no) + ")");
                }
                if (e.score) {
                    throw ParseError("duplicate score column (line " + std::to_string(line_no) +
                                     ")");
                }
                e.score = v;
            } else {
                for (const auto& kv : split(col, ';')) {
                    auto t = trim(kv);
                    if (t.empty()) continue;
                    size_t eq = t.find('=');
                    if (eq == std::string_view::npos || eq == 0) {
                        throw ParseError("malformed attribute '" + std::string(t) + "' (line " +
                                         std::to_string(line_no) + ")");
                    }
                    e.attributes[std::string(t.substr(0, eq))] = std::string(t.substr(eq + 1));
                }
            }
        }
        g.add_edge(std::move(e), stype, ttype, line_no);
    }
    g.finalize();
    return g;
}

void save_edges(const Graph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write edge file '" + path + "'");
    out.precision(17);
    std::set<std::string> touched;
    for (const auto& e : g.edges()) {
        touched.insert(e.source);
        touched.insert(e.target);
    }
    for (const auto& id : g.sorted_ids()) {
        const auto& n = g.node(id);
        if (touched.count(id) && n.name.empty()) continue;
        out << "node:" << id << '\t' << n.type;
        if (!n.name.empty()) out << '\t' << n.name;
        out << '\n';
    }
    for (const auto& e : g.edges()) {
        out << e.source << '\t' << g.node(e.source).type << '\t' << e.relation << '\t' << e.target
            << '\t' << g.node(e.target).type;
        if (e.score) out << '\t' << *e.score;
        if (!e.attributes.empty()) {
            out << '\t';
            bool first = true;
            for (const auto& [k, v] : e.attributes) {
                if (!first) out << ';';
                out << k << '=' << v;
                first = false;
            }
        }
        out << '\n';
    }
    if (!out) throw Error("write failed for '" + path + "'");
}

std::vector<Edge> neighbors(const Graph& g, const std::string& id, Direction d) {
    g.node(id);  // unknown id -> NotFoundError
    std::vector<Edge> out;
    for (size_t i : g.incident(id, d)) out.push_back(g.edge(i));
    return out;
}

std::vector<std::string> relation_types(const Graph& g, const std::string& id) {
    g.node(id);
    std::set<std::string> rels;
    for (size_t i : g.incident(id, Direction::Out)) rels.insert(g.edge(i).relation);
    return {rels.begin(), rels.end()};
}

}  // namespace serenqa

#include "serenqa/embed.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "serenqa/errors.hpp"
#include "serenqa/util.hpp"

namespace serenqa {

namespace {

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

const std::vector<double>& EmbeddingTable::vec(const std::string& id) const {
    auto it = vecs_.find(id);
    if (it == vecs_.end()) throw NotFoundError("no embedding for '" + id + "'");
    return it->second;
}

void EmbeddingTable::put(const std::string& id, std::vector<double> v) {
    if (dim_ == 0) dim_ = v.size();
    if (v.size() != dim_) {
        throw DomainError("embedding for '" + id + "' has dimension " +
                          std::to_string(v.size()) + ", expected " + std::to_string(dim_));
    }
    double n = norm(v);
    if (n == 0.0) {
        throw DegenerateDistributionError("embedding for '" + id + "' is the zero vector");
    }
    for (double& x : v) x /= n;
    auto it = vecs_.find(id);
    if (it == vecs_.end()) {
        vecs_.emplace(id, std::move(v));
        order_.push_back(id);
    } else {
        it->second = std::move(v);
    }
}

EmbeddingTable load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open embedding file '" + path + "'");
    std::string line;
    size_t line_no = 0;

    size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (t.rfind("D=", 0) != 0) {
            throw ParseError("embedding file must start with a D=<dim> header (line " +
                             std::to_string(line_no) + ")");
        }
        try {
            dim = std::stoul(std::string(t.substr(2)));
        } catch (const std::exception&) {
            throw ParseError("bad dimension header '" + std::string(t) + "' (line " +
                             std::to_string(line_no) + ")");
        }
        break;
    }
    if (dim == 0) throw ParseError("embedding file '" + path + "' has no usable header");

    EmbeddingTable table(dim);
    while (std::getline(in, line)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        size_t tab = t.find('\t');
        if (tab == std::string_view::npos) {
            throw ParseError("expected <id><TAB><values> (line " + std::to_string(line_no) + ")");
        }
        std::string id(trim(t.substr(0, tab)));
        std::vector<double> v;
        v.reserve(dim);
        size_t pos = tab + 1;
        while (pos < t.size()) {
            while (pos < t.size() && (t[pos] == ' ' || t[pos] == '\t')) ++pos;
            if (pos >= t.size()) break;
            size_t end = pos;
            while (end < t.size() && t[end] != ' ' && t[end] != '\t') ++end;
            try {
                v.push_back(std::stod(std::string(t.substr(pos, end - pos))));
            } catch (const std::exception&) {
                throw ParseError("bad number '" + std::string(t.substr(pos, end - pos)) +
                                 "' (line " + std::to_string(line_no) + ")");
            }
            pos = end;
        }
        if (v.size() != dim) {
            throw ParseError("embedding for '" + id + "' has " + std::to_string(v.size()) +
                             " values, header says " + std::to_string(dim) + " (line " +
                             std::to_string(line_no) + ")");
        }
        try {
            table.put(id, std::move(v));
        } catch (const DegenerateDistributionError& e) {
            throw ValidationError(std::string(e.what()) + " (line " + std::to_string(line_no) +
                                  ")");
        }
    }
    return table;
}

EmbeddingTable propagate_embeddings(const Graph& g, size_t dim, int layers, uint64_t seed) {
    if (dim == 0) throw DomainError("embedding dimension must be positive");
    if (layers < 0) throw DomainError("layer count must be non-negative");
    const auto& ids = g.sorted_ids();
    if (ids.empty()) throw DomainError("cannot synthesize embeddings for an empty graph");
    size_t v = ids.size();

    std::unordered_map<std::string, size_t> pos;
    pos.reserve(v);
    for (size_t i = 0; i < v; ++i) pos[ids[i]] = i;

    // Undirected simple skeleton with self-loops.
    std::vector<std::set<size_t>> nb(v);
    for (size_t i = 0; i < v; ++i) nb[i].insert(i);
    for (const auto& e : g.edges()) {
        size_t a = pos[e.source], b = pos[e.target];
        nb[a].insert(b);
        nb[b].insert(a);
    }

    // Seeded features; the stream depends only on (seed, dim, node order).
    std::vector<std::vector<double>> x(v, std::vector<double>(dim));
    std::mt19937_64 rng(seed);
    for (size_t i = 0; i < v; ++i) {
        for (size_t d = 0; d < dim; ++d) x[i][d] = uniform_symmetric(rng);
    }

    std::vector<std::vector<double>> y(v, std::vector<double>(dim));
    for (int l = 0; l < layers; ++l) {
        for (size_t i = 0; i < v; ++i) {
            std::fill(y[i].begin(), y[i].end(), 0.0);
            double di = std::sqrt(static_cast<double>(nb[i].size()));
            for (size_t j : nb[i]) {
                double w = 1.0 / (di * std::sqrt(static_cast<double>(nb[j].size())));
                for (size_t d = 0; d < dim; ++d) y[i][d] += w * x[j][d];
            }
        }
        std::swap(x, y);
    }

    EmbeddingTable table(dim);
    for (size_t i = 0; i < v; ++i) table.put(ids[i], x[i]);
    return table;
}

double normalized_distance(const EmbeddingTable& t, const std::string& a, const std::string& b) {
    const auto& va = t.vec(a);
    const auto& vb = t.vec(b);
    double s = 0.0;
    for (size_t i = 0; i < va.size(); ++i) {
        double d = va[i] - vb[i];
        s += d * d;
    }
    return std::sqrt(s) / 2.0;
}

}  // namespace serenqa

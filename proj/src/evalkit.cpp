#include "serenqa/evalkit.hpp"

#include <cmath>
#include <ostream>
#include <set>

namespace serenqa {

using nlohmann::json;

namespace {

std::set<std::string> as_set(const std::vector<std::string>& v) {
    return std::set<std::string>(v.begin(), v.end());
}

size_t intersection_size(const std::set<std::string>& a, const std::set<std::string>& b) {
    size_t n = 0;
    for (const auto& x : a) n += b.count(x);
    return n;
}

bool ident_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

}  // namespace

double hit_rate(const std::vector<std::string>& predicted, const std::vector<std::string>& truth) {
    auto t = as_set(truth);
    if (t.empty()) throw DomainError("hit rate needs a nonempty truth set");
    return static_cast<double>(intersection_size(as_set(predicted), t)) /
           static_cast<double>(t.size());
}

double f1(const std::vector<std::string>& predicted, const std::vector<std::string>& truth) {
    auto t = as_set(truth);
    if (t.empty()) throw DomainError("f1 needs a nonempty truth set");
    auto p = as_set(predicted);
    if (p.empty()) return 0.0;
    double hits = static_cast<double>(intersection_size(p, t));
    if (hits == 0.0) return 0.0;
    double precision = hits / static_cast<double>(p.size());
    double recall = hits / static_cast<double>(t.size());
    return 2.0 * precision * recall / (precision + recall);
}

PathEndpoints parse_path_endpoints(const std::string& path) {
    std::vector<std::string> tokens;
    size_t start = 0;
    for (;;) {
        auto sep = path.find("--", start);
        if (sep == std::string::npos) {
            tokens.push_back(path.substr(start));
            break;
        }
        tokens.push_back(path.substr(start, sep - start));
        start = sep + 2;
    }
    if (tokens.size() < 3 || tokens.size() % 2 == 0) {
        throw FormatError("path has no src--REL--dst shape: '" + path + "'");
    }
    for (const auto& t : tokens) {
        if (t.empty()) throw FormatError("path has an empty segment: '" + path + "'");
    }
    // Destinations render bare; ids may carry colons of their own (DOID:...)
    // so no type stripping is attempted on the last token.
    return {tokens.front(), tokens.back()};
}

bool contains_token(const std::string& text, const std::string& token) {
    if (token.empty()) return false;
    size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !ident_char(text[pos - 1]);
        size_t end = pos + token.size();
        bool right_ok = end == text.size() || !ident_char(text[end]);
        if (left_ok && right_ok) return true;
        pos += 1;
    }
    return false;
}

double seren_cov(const std::map<int, std::string>& summaries,
                 const std::vector<std::string>& gt_paths) {
    if (gt_paths.empty()) return 0.0;
    std::string blob;
    for (const auto& [level, text] : summaries) {
        blob += text;
        blob += '\n';
    }
    size_t covered = 0;
    for (const auto& p : gt_paths) {
        auto ends = parse_path_endpoints(p);
        if (contains_token(blob, ends.source) && contains_token(blob, ends.target)) ++covered;
    }
    return static_cast<double>(covered) / static_cast<double>(gt_paths.size());
}

int type_match(const std::vector<LeafNode>& leaves, const std::vector<std::string>& truth,
               const Graph& g) {
    std::set<std::string> truth_types;
    for (const auto& id : truth) truth_types.insert(g.node(id).type);
    for (const auto& l : leaves) {
        if (truth_types.count(l.type)) return 1;
    }
    return 0;
}

int seren_hit(const std::vector<LeafNode>& leaves, const std::vector<std::string>& truth) {
    auto t = as_set(truth);
    for (const auto& l : leaves) {
        if (t.count(l.id)) return 1;
    }
    return 0;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw DomainError("pearson needs equal-length sequences");
    if (xs.size() < 2) throw DomainError("pearson needs at least two points");
    double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx;
        double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw UndefinedCorrelationError("correlation undefined for a constant sequence");
    }
    return sxy / std::sqrt(sxx * syy);
}

AggregateResult aggregate(const std::vector<std::optional<double>>& values) {
    AggregateResult r;
    double sum = 0.0;
    for (const auto& v : values) {
        if (v) {
            sum += *v;
            ++r.used;
        } else {
            ++r.skipped;
        }
    }
    if (r.used == 0) throw DomainError("no rational samples to aggregate");
    r.mean = sum / static_cast<double>(r.used);
    return r;
}

std::string executability_bucket(int pattern_type) {
    switch (pattern_type) {
        case 1:
        case 2:
            return "one-hop";
        case 3:
            return "two-hop";
        case 4:
        case 5:
        case 6:
            return "multi-hop";
        case 7:
        case 8:
        case 9:
            return "intersection";
        default:
            return "other";
    }
}

std::map<std::string, BucketStat> executability(const std::vector<RetrievalResult>& results,
                                                const std::map<std::string, int>& pattern_types) {
    std::map<std::string, BucketStat> out;
    for (const auto& r : results) {
        auto it = pattern_types.find(r.qid);
        int pt = it == pattern_types.end() ? 0 : it->second;
        auto& stat = out[executability_bucket(pt)];
        ++stat.total;
        if (r.executed_ok) ++stat.ok;
    }
    return out;
}

json CorrelationMatrix::to_json() const {
    json j;
    j["strategies"] = strategies;
    json rows = json::array();
    for (const auto& row : values) {
        json r = json::array();
        for (const auto& v : row) r.push_back(v ? json(*v) : json(nullptr));
        rows.push_back(std::move(r));
    }
    j["values"] = std::move(rows);
    return j;
}

void MetricTable::set(const std::string& strategy, const std::string& metric,
                      const std::string& qid, double value) {
    values_[strategy][metric][qid] = value;
}

void MetricTable::mark_irrational(const std::string& strategy, const std::string& qid,
                                  const std::string& reason) {
    irrational_[strategy].emplace(qid, reason);
    auto s = values_.find(strategy);
    if (s == values_.end()) return;
    for (auto& [metric, per_qid] : s->second) per_qid.erase(qid);
}

std::vector<std::string> MetricTable::strategies() const {
    std::set<std::string> names;
    for (const auto& [s, rest] : values_) names.insert(s);
    for (const auto& [s, rest] : irrational_) names.insert(s);
    return {names.begin(), names.end()};
}

std::vector<std::string> MetricTable::metrics() const {
    std::set<std::string> names;
    for (const auto& [s, per_metric] : values_) {
        for (const auto& [m, rest] : per_metric) names.insert(m);
    }
    return {names.begin(), names.end()};
}

std::optional<double> MetricTable::get(const std::string& strategy, const std::string& metric,
                                       const std::string& qid) const {
    auto s = values_.find(strategy);
    if (s == values_.end()) return std::nullopt;
    auto m = s->second.find(metric);
    if (m == s->second.end()) return std::nullopt;
    auto q = m->second.find(qid);
    if (q == m->second.end()) return std::nullopt;
    return q->second;
}

AggregateResult MetricTable::aggregate_of(const std::string& strategy,
                                          const std::string& metric) const {
    std::vector<std::optional<double>> vals;
    auto s = values_.find(strategy);
    if (s != values_.end()) {
        auto m = s->second.find(metric);
        if (m != s->second.end()) {
            for (const auto& [qid, v] : m->second) vals.emplace_back(v);
        }
    }
    auto irr = irrational_.find(strategy);
    if (irr != irrational_.end()) {
        for (size_t i = 0; i < irr->second.size(); ++i) vals.emplace_back(std::nullopt);
    }
    return aggregate(vals);
}

CorrelationMatrix MetricTable::correlations(const std::string& metric) const {
    CorrelationMatrix m;
    m.strategies = strategies();
    size_t n = m.strategies.size();
    m.values.assign(n, std::vector<std::optional<double>>(n));

    auto rational_values = [&](const std::string& strategy) {
        std::map<std::string, double> out;
        auto s = values_.find(strategy);
        if (s == values_.end()) return out;
        auto it = s->second.find(metric);
        if (it == s->second.end()) return out;
        out = it->second;
        auto irr = irrational_.find(strategy);
        if (irr != irrational_.end()) {
            for (const auto& [qid, reason] : irr->second) out.erase(qid);
        }
        return out;
    };

    std::vector<std::map<std::string, double>> per(n);
    for (size_t i = 0; i < n; ++i) per[i] = rational_values(m.strategies[i]);

    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            std::vector<double> xs, ys;
            for (const auto& [qid, x] : per[i]) {
                auto it = per[j].find(qid);
                if (it == per[j].end()) continue;
                xs.push_back(x);
                ys.push_back(it->second);
            }
            if (xs.size() < 2) continue;
            try {
                m.values[i][j] = pearson(xs, ys);
            } catch (const UndefinedCorrelationError&) {
            }
        }
    }
    return m;
}

void MetricTable::write_csv(std::ostream& os, bool header) const {
    if (header) os << "strategy,qid,metric,value\n";
    for (const auto& [strategy, per_metric] : values_) {
        std::set<std::string> qids;
        for (const auto& [metric, per_qid] : per_metric) {
            for (const auto& [qid, v] : per_qid) qids.insert(qid);
        }
        for (const auto& qid : qids) {
            for (const auto& [metric, per_qid] : per_metric) {
                auto it = per_qid.find(qid);
                if (it == per_qid.end()) continue;
                os << strategy << ',' << qid << ',' << metric << ',' << it->second << '\n';
            }
        }
    }
}

json MetricTable::to_json() const {
    json j = json::object();
    for (const auto& strategy : strategies()) {
        json per_strategy = json::object();
        auto s = values_.find(strategy);
        if (s != values_.end()) {
            for (const auto& [metric, per_qid] : s->second) {
                json entry;
                json vals = json::object();
                for (const auto& [qid, v] : per_qid) vals[qid] = v;
                entry["values"] = std::move(vals);
                try {
                    auto agg = aggregate_of(strategy, metric);
                    entry["mean"] = agg.mean;
                    entry["used"] = agg.used;
                    entry["skipped"] = agg.skipped;
                } catch (const DomainError&) {
                    entry["mean"] = nullptr;
                }
                per_strategy[metric] = std::move(entry);
            }
        }
        auto irr = irrational_.find(strategy);
        if (irr != irrational_.end()) {
            json sk = json::object();
            for (const auto& [qid, reason] : irr->second) sk[qid] = reason;
            per_strategy["irrational"] = std::move(sk);
        }
        j[strategy] = std::move(per_strategy);
    }
    return j;
}

}  // namespace serenqa

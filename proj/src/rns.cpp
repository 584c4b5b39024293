#include "serenqa/rns.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "serenqa/errors.hpp"

namespace serenqa {

RnsWeights RnsWeights::make(double r, double n, double s) {
    if (r < 0.0 || n < 0.0 || s < 0.0) throw DomainError("weights must be non-negative");
    double total = r + n + s;
    if (total <= 0.0) throw DomainError("weights must not all be zero");
    return {r / total, n / total, s / total};
}

namespace {

double mean_pair_distance(const AnswerPartition& p, const EmbeddingTable& t,
                          std::map<std::pair<std::string, std::string>, double>* cache) {
    double sum = 0.0;
    for (const auto& i : p.serendipity) {
        for (const auto& j : p.existing) {
            if (cache) {
                auto key = std::minmax(i, j);
                auto it = cache->find(key);
                if (it == cache->end()) {
                    it = cache->emplace(key, normalized_distance(t, i, j)).first;
                }
                sum += it->second;
            } else {
                sum += normalized_distance(t, i, j);
            }
        }
    }
    return sum / (static_cast<double>(p.serendipity.size()) *
                  static_cast<double>(p.existing.size()));
}

// Renormalized marginal masses of one half, paired with the ids.
std::vector<std::pair<std::string, double>> half_distribution(
    const std::vector<std::string>& ids, const MarginalVector& m, const char* which) {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(ids.size());
    double total = 0.0;
    for (const auto& id : ids) {
        double v = m.at(id);
        out.emplace_back(id, v);
        total += v;
    }
    if (total <= 0.0) {
        throw DegenerateDistributionError(std::string("the ") + which +
                                          " half carries zero marginal mass");
    }
    for (auto& [_, v] : out) v /= total;
    return out;
}

double jsd(const std::vector<double>& a, const std::vector<double>& b) {
    double kl_a = 0.0, kl_b = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double mix = 0.5 * (a[i] + b[i]);
        if (a[i] > 0.0) kl_a += a[i] * std::log(a[i] / mix);
        if (b[i] > 0.0) kl_b += b[i] * std::log(b[i] / mix);
    }
    return 0.5 * kl_a + 0.5 * kl_b;
}

}  // namespace

double relevance(const AnswerPartition& p, const EmbeddingTable& t) {
    validate_partition(p);
    return -mean_pair_distance(p, t, nullptr);
}

double mutual_information(const AnswerPartition& p, const TransitionMatrix& pk,
                          const MarginalVector& m) {
    validate_partition(p);
    double mi = 0.0;
    for (const auto& i : p.existing) {
        double pi = m.at(i);
        double inner = 0.0;
        for (const auto& j : p.serendipity) {
            double cond = pk.prob(i, j);
            if (cond <= 0.0) continue;
            double pj = m.at(j);
            if (pj <= 0.0) {
                throw DegenerateDistributionError("'" + j +
                                                  "' is reachable but has zero marginal mass");
            }
            inner += cond * std::log(cond / pj);
        }
        mi += pi * inner;
    }
    return mi;
}

double novelty(const AnswerPartition& p, const TransitionMatrix& pk, const MarginalVector& m) {
    return 1.0 - mutual_information(p, pk, m);
}

double surprise(const AnswerPartition& p, const MarginalVector& m, JsdSupport support) {
    if (p.existing.empty() || p.serendipity.empty()) {
        throw DomainError("surprise needs both halves non-empty");
    }
    auto de = half_distribution(p.existing, m, "existing");
    auto ds = half_distribution(p.serendipity, m, "serendipity");

    if (support == JsdSupport::Own) {
        // Joint support: the union of both halves' members; a shared id
        // contributes to both sides.
        std::map<std::string, std::pair<double, double>> joint;
        for (const auto& [id, v] : ds) joint[id].first += v;
        for (const auto& [id, v] : de) joint[id].second += v;
        std::vector<double> a, b;
        a.reserve(joint.size());
        b.reserve(joint.size());
        for (const auto& [_, pr] : joint) {
            a.push_back(pr.first);
            b.push_back(pr.second);
        }
        return jsd(a, b);
    }

    // Shared axis: compare the two mass profiles rank by rank.
    auto profile = [](std::vector<std::pair<std::string, double>> d, size_t len) {
        std::sort(d.begin(), d.end(), [](const auto& x, const auto& y) {
            if (x.second != y.second) return x.second > y.second;
            return x.first < y.first;
        });
        std::vector<double> out(len, 0.0);
        for (size_t i = 0; i < d.size(); ++i) out[i] = d[i].second;
        return out;
    };
    size_t len = std::max(de.size(), ds.size());
    return jsd(profile(ds, len), profile(de, len));
}

RnsScorer::RnsScorer(const TransitionMatrix& pk, const MarginalVector& m,
                     const EmbeddingTable& t, RnsWeights w, JsdSupport support)
    : pk_(pk), m_(m), t_(t), w_(w), support_(support) {}

RnsBreakdown RnsScorer::evaluate(const AnswerPartition& p) const {
    validate_partition(p);
    RnsBreakdown b;
    b.relevance = -mean_pair_distance(p, t_, &dist_cache_);
    b.mutual_information = mutual_information(p, pk_, m_);
    b.novelty = 1.0 - b.mutual_information;
    b.surprise = surprise(p, m_, support_);
    b.score = w_.relevance * b.relevance + w_.novelty * b.novelty + w_.surprise * b.surprise;
    return b;
}

RnsBreakdown rns_score(const AnswerPartition& p, const TransitionMatrix& pk,
                       const MarginalVector& m, const EmbeddingTable& t, RnsWeights w,
                       JsdSupport support) {
    return RnsScorer(pk, m, t, w, support).evaluate(p);
}

CalibrationResult calibrate_weights(const std::vector<QaRecord>& records,
                                    const std::string& strategy, const TransitionMatrix& pk,
                                    const MarginalVector& m, const EmbeddingTable& t,
                                    JsdSupport support) {
    if (records.empty()) throw DomainError("no records to calibrate against");

    struct Instance {
        std::vector<std::string> candidates;
        std::set<std::string> reference;
    };
    std::vector<Instance> instances;
    for (const auto& r : records) {
        auto it = r.partitions.find(strategy);
        if (it == r.partitions.end()) continue;
        const auto& ref = it->second;
        if (ref.serendipity_set.empty()) continue;
        Instance inst;
        std::set<std::string> seen;
        for (const auto* v : {&ref.exact_matches, &ref.serendipity_set}) {
            for (const auto& id : *v) {
                if (seen.insert(id).second) inst.candidates.push_back(id);
            }
        }
        if (inst.candidates.size() < 2) continue;
        inst.reference.insert(ref.serendipity_set.begin(), ref.serendipity_set.end());
        std::sort(inst.candidates.begin(), inst.candidates.end());
        instances.push_back(std::move(inst));
    }
    if (instances.empty()) {
        throw DomainError("no record offers a usable '" + strategy + "' reference partition");
    }

    const RnsWeights uniform{};
    std::vector<RnsWeights> grid;
    grid.push_back(uniform);
    constexpr int kSteps = 20;  // 1 / 0.05
    for (int a = 0; a <= kSteps; ++a) {
        for (int n = 0; n + a <= kSteps; ++n) {
            int s = kSteps - a - n;
            grid.push_back(RnsWeights{a / static_cast<double>(kSteps),
                                      n / static_cast<double>(kSteps),
                                      s / static_cast<double>(kSteps)});
        }
    }

    auto dist_to_uniform = [&](const RnsWeights& w) {
        return std::abs(w.relevance - uniform.relevance) +
               std::abs(w.novelty - uniform.novelty) + std::abs(w.surprise - uniform.surprise);
    };

    CalibrationResult best;
    bool first = true;
    for (const auto& w : grid) {
        RnsScorer scorer(pk, m, t, w, support);
        double overlap_sum = 0.0;
        for (const auto& inst : instances) {
            size_t b = budget(inst.candidates.size());
            auto init = initial_partition(inst.candidates, b, InitStrategy::Suffix);
            auto res = greedy_swap(std::move(init), std::cref(scorer));
            size_t hit = 0;
            for (const auto& id : res.partition.serendipity) {
                if (inst.reference.count(id)) ++hit;
            }
            overlap_sum += static_cast<double>(hit) / static_cast<double>(inst.reference.size());
        }
        double mean = overlap_sum / static_cast<double>(instances.size());
        bool better = first || mean > best.mean_overlap + 1e-12;
        if (!better && !first && mean > best.mean_overlap - 1e-12) {
            better = dist_to_uniform(w) < dist_to_uniform(best.weights) - 1e-12;
        }
        if (better) {
            best.weights = w;
            best.mean_overlap = mean;
            first = false;
        }
    }
    best.records_used = instances.size();
    return best;
}

}  // namespace serenqa

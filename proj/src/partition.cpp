#include "serenqa/partition.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "serenqa/errors.hpp"

namespace serenqa {

void validate_partition(const AnswerPartition& p) {
    if (p.existing.empty()) throw DomainError("partition has no existing answers");
    if (p.serendipity.empty()) throw DomainError("partition has no serendipity answers");
    std::set<std::string> seen(p.existing.begin(), p.existing.end());
    if (seen.size() != p.existing.size()) {
        throw DomainError("duplicate id in the existing half");
    }
    for (const auto& id : p.serendipity) {
        if (!seen.insert(id).second) {
            throw DomainError("id '" + id + "' appears in both halves");
        }
    }
}

size_t budget(size_t candidate_count) {
    if (candidate_count < 2) {
        throw DomainError("need at least two candidates to split");
    }
    size_t b = candidate_count / 5;
    return b == 0 ? 1 : b;
}

namespace {

std::vector<std::string> dedupe(const std::vector<std::string>& v) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& id : v) {
        if (seen.insert(id).second) out.push_back(id);
    }
    return out;
}

}  // namespace

AnswerPartition initial_partition(const std::vector<std::string>& candidates, size_t b,
                                  InitStrategy strategy, const std::vector<double>& ranking) {
    auto ids = dedupe(candidates);
    if (ids.size() < 2) throw DomainError("need at least two distinct candidates");
    if (b == 0 || b >= ids.size()) {
        throw DomainError("budget " + std::to_string(b) + " must leave both halves non-empty");
    }

    AnswerPartition p;
    if (strategy == InitStrategy::Suffix) {
        p.existing.assign(ids.begin(), ids.end() - static_cast<ptrdiff_t>(b));
        p.serendipity.assign(ids.end() - static_cast<ptrdiff_t>(b), ids.end());
        return p;
    }
    if (ranking.size() != candidates.size()) {
        throw DomainError("ranked initialization needs one score per candidate");
    }
    // Scores follow the original (pre-dedupe) candidate order; the first
    // occurrence wins.
    std::vector<double> score_of(ids.size());
    {
        std::set<std::string> seen;
        size_t next = 0;
        for (size_t i = 0; i < candidates.size(); ++i) {
            if (seen.insert(candidates[i]).second) score_of[next++] = ranking[i];
        }
    }
    std::vector<size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t c) { return score_of[a] > score_of[c]; });
    std::set<size_t> chosen(order.begin(), order.begin() + static_cast<ptrdiff_t>(b));
    for (size_t i = 0; i < ids.size(); ++i) {
        if (chosen.count(i)) p.serendipity.push_back(ids[i]);
        else p.existing.push_back(ids[i]);
    }
    return p;
}

GreedyResult greedy_swap(AnswerPartition init, const PartitionScorer& score) {
    validate_partition(init);
    constexpr double kTolerance = 1e-12;

    // Keep both halves sorted so the scan order, and therefore tie
    // breaking, is by id.
    std::sort(init.existing.begin(), init.existing.end());
    std::sort(init.serendipity.begin(), init.serendipity.end());

    GreedyResult res;
    res.partition = std::move(init);
    res.tau = score(res.partition);

    // Every swap must strictly improve, so the loop visits each of the
    // C(n, b) serendipity subsets at most once.
    for (size_t iteration = 1;; ++iteration) {
        double best_delta = 0.0;
        size_t best_i = 0, best_j = 0;
        bool found = false;
        for (size_t i = 0; i < res.partition.serendipity.size(); ++i) {
            for (size_t j = 0; j < res.partition.existing.size(); ++j) {
                AnswerPartition trial = res.partition;
                std::swap(trial.serendipity[i], trial.existing[j]);
                std::sort(trial.serendipity.begin(), trial.serendipity.end());
                std::sort(trial.existing.begin(), trial.existing.end());
                double delta = score(trial) - res.tau;
                if (delta > kTolerance && (!found || delta > best_delta)) {
                    best_delta = delta;
                    best_i = i;
                    best_j = j;
                    found = true;
                }
            }
        }
        if (!found) break;

        SwapStep step;
        step.iteration = iteration;
        step.out_of_serendipity = res.partition.serendipity[best_i];
        step.into_serendipity = res.partition.existing[best_j];
        std::swap(res.partition.serendipity[best_i], res.partition.existing[best_j]);
        std::sort(res.partition.serendipity.begin(), res.partition.serendipity.end());
        std::sort(res.partition.existing.begin(), res.partition.existing.end());
        step.delta = best_delta;
        res.tau += best_delta;
        step.tau = res.tau;
        res.trace.push_back(std::move(step));
    }
    return res;
}

BruteForceResult brute_force_partition(const std::vector<std::string>& candidates, size_t b,
                                       const PartitionScorer& score,
                                       uint64_t max_evaluations) {
    auto ids = dedupe(candidates);
    std::sort(ids.begin(), ids.end());
    size_t n = ids.size();
    if (n < 2) throw DomainError("need at least two distinct candidates");
    if (b == 0 || b >= n) {
        throw DomainError("budget " + std::to_string(b) + " must leave both halves non-empty");
    }

    // C(n, b) with overflow guard against the refusal bound.
    uint64_t combos = 1;
    for (size_t i = 0; i < b; ++i) {
        combos = combos * (n - i) / (i + 1);
        if (combos > max_evaluations) {
            throw RefusalError("exhaustive search over C(" + std::to_string(n) + "," +
                               std::to_string(b) + ") subsets exceeds the bound of " +
                               std::to_string(max_evaluations));
        }
    }

    BruteForceResult best;
    std::vector<size_t> pick(b);
    std::iota(pick.begin(), pick.end(), 0);
    bool first = true;
    while (true) {
        AnswerPartition p;
        size_t c = 0;
        for (size_t i = 0; i < n; ++i) {
            if (c < b && pick[c] == i) {
                p.serendipity.push_back(ids[i]);
                ++c;
            } else {
                p.existing.push_back(ids[i]);
            }
        }
        double s = score(p);
        ++best.evaluated;
        // Strictly-greater keeps the lexicographically least serendipity
        // subset on ties, since subsets are generated in that order.
        if (first || s > best.score) {
            best.score = s;
            best.partition = std::move(p);
            first = false;
        }

        // Next combination in lexicographic order.
        size_t i = b;
        while (i > 0 && pick[i - 1] == n - b + (i - 1)) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (size_t j = i; j < b; ++j) pick[j] = pick[j - 1] + 1;
    }
    return best;
}

}  // namespace serenqa

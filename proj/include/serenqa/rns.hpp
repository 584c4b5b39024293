#pragma once

// The three-component answer-partition score. An answer set is split into an
// "existing" half and a "serendipity" half; the score rates how relevant,
// novel, and surprising the serendipity half is relative to the existing
// half, using the k-hop transition matrix, the stationary marginal, and the
// embedding table as the underlying evidence.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "serenqa/benchmark.hpp"
#include "serenqa/embed.hpp"
#include "serenqa/partition.hpp"
#include "serenqa/prob.hpp"

namespace serenqa {

struct RnsWeights {
    double relevance = 1.0 / 3.0;
    double novelty = 1.0 / 3.0;
    double surprise = 1.0 / 3.0;

    // Normalizes non-negative inputs to sum to one.
    static RnsWeights make(double r, double n, double s);
};

enum class JsdSupport {
    // Each half's distribution lives on its own members. Disjoint halves
    // then always sit at the maximal divergence ln 2.
    Own,
    // Both halves are reduced to their mass profiles (renormalized masses
    // sorted descending, zero-padded to a common length) and compared on
    // that shared axis, so the divergence reflects distribution shape.
    Shared,
};

// Mean embedding distance between the halves, negated: 0 when every pair is
// identical, -1 when every pair is antipodal.
double relevance(const AnswerPartition& p, const EmbeddingTable& t);

// sum over i in existing of P(i) * sum over j in serendipity of
// P(j|i) * ln(P(j|i) / P(j)); unreachable pairs (P(j|i) = 0) contribute 0.
double mutual_information(const AnswerPartition& p, const TransitionMatrix& pk,
                          const MarginalVector& m);

double novelty(const AnswerPartition& p, const TransitionMatrix& pk, const MarginalVector& m);

// Jensen-Shannon divergence between the halves' renormalized marginal-mass
// distributions, natural log. Throws DegenerateDistributionError when a
// half carries zero total mass.
double surprise(const AnswerPartition& p, const MarginalVector& m,
                JsdSupport support = JsdSupport::Own);

struct RnsBreakdown {
    double relevance = 0.0;
    double novelty = 0.0;
    double surprise = 0.0;
    double mutual_information = 0.0;
    double score = 0.0;
};

// Bundles the evidence one score evaluation needs. Pairwise distances are
// memoized across calls, which greedy optimization leans on.
class RnsScorer {
public:
    RnsScorer(const TransitionMatrix& pk, const MarginalVector& m, const EmbeddingTable& t,
              RnsWeights w = {}, JsdSupport support = JsdSupport::Own);

    RnsBreakdown evaluate(const AnswerPartition& p) const;
    double operator()(const AnswerPartition& p) const { return evaluate(p).score; }

    const RnsWeights& weights() const { return w_; }
    JsdSupport support() const { return support_; }

private:
    const TransitionMatrix& pk_;
    const MarginalVector& m_;
    const EmbeddingTable& t_;
    RnsWeights w_;
    JsdSupport support_;
    mutable std::map<std::pair<std::string, std::string>, double> dist_cache_;
};

RnsBreakdown rns_score(const AnswerPartition& p, const TransitionMatrix& pk,
                       const MarginalVector& m, const EmbeddingTable& t, RnsWeights w = {},
                       JsdSupport support = JsdSupport::Own);

struct CalibrationResult {
    RnsWeights weights;
    double mean_overlap = 0.0;
    size_t records_used = 0;
};

// Grid search (step 0.05, plus the exact uniform point) over the weight
// simplex, maximizing the mean overlap between the greedy-swap serendipity
// half and each record's reference serendipity half for the given strategy.
// Ties prefer the uniform weights, then the point closest to uniform.
CalibrationResult calibrate_weights(const std::vector<QaRecord>& records,
                                    const std::string& strategy, const TransitionMatrix& pk,
                                    const MarginalVector& m, const EmbeddingTable& t,
                                    JsdSupport support = JsdSupport::Own);

}  // namespace serenqa

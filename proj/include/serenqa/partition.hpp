#pragma once

// Splitting a candidate answer set into an "existing" half and a smaller
// "serendipity" half so a caller-supplied score is maximized: the 20%
// budget rule, two initializers, single-swap greedy ascent, and an
// exhaustive oracle for small instances.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace serenqa {

struct AnswerPartition {
    std::vector<std::string> existing;
    std::vector<std::string> serendipity;
};

// Throws DomainError when the halves overlap or either is empty.
void validate_partition(const AnswerPartition& p);

using PartitionScorer = std::function<double(const AnswerPartition&)>;

// Serendipity budget for a candidate set: a fifth of it, rounded down, and
// never less than one. Throws DomainError below two candidates.
size_t budget(size_t candidate_count);

enum class InitStrategy { Ranked, Suffix };

// First cut of the candidate list (deduplicated, order preserved) into the
// two halves. Suffix takes the last b candidates as the serendipity half;
// Ranked takes the b highest-ranked ones (ranking scores aligned with
// candidates, ties kept in list order).
AnswerPartition initial_partition(const std::vector<std::string>& candidates, size_t b,
                                  InitStrategy strategy,
                                  const std::vector<double>& ranking = {});

struct SwapStep {
    size_t iteration = 0;
    std::string out_of_serendipity;  // moved to the existing half
    std::string into_serendipity;
    double delta = 0.0;
    double tau = 0.0;  // objective after the swap
};

struct GreedyResult {
    AnswerPartition partition;
    double tau = 0.0;
    std::vector<SwapStep> trace;
};

// Steepest-ascent single swaps: evaluates every (serendipity, existing)
// exchange, applies the best strictly improving one (ties to the
// lexicographically least id pair), repeats until none improves by more
// than 1e-12. Set sizes never change and tau never decreases.
GreedyResult greedy_swap(AnswerPartition init, const PartitionScorer& score);

struct BruteForceResult {
    AnswerPartition partition;
    double score = 0.0;
    uint64_t evaluated = 0;
};

// Scores every size-b serendipity subset of the candidates. Refuses with
// RefusalError when there are more than `max_evaluations` subsets. Ties go
// to the lexicographically least serendipity set.
BruteForceResult brute_force_partition(const std::vector<std::string>& candidates, size_t b,
                                       const PartitionScorer& score,
                                       uint64_t max_evaluations = 1000000);

}  // namespace serenqa

#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "kge/trec.hpp"

namespace kge {

// Metric cores over a binary relevance mask for the retrieved list.
// num_relevant counts all relevant items, retrieved or not.
double average_precision(std::span<const char> is_relevant, size_t num_relevant);
double reciprocal_rank(std::span<const char> is_relevant);
double ndcg_at_10(std::span<const char> is_relevant, size_t num_relevant);

// Two-sided paired randomization test: each iteration flips every pair with
// probability 1/2; p is the fraction of assignments (the observed one
// included) whose |mean difference| is at least the observed one.
double fisher_randomization(std::span<const double> a, std::span<const double> b,
                            uint32_t iterations, uint64_t seed);

struct PairMetrics {
    std::string key;
    double ap = 0.0;
    double rr = 0.0;
    double ndcg10 = 0.0;
};

struct MetricsReport {
    std::vector<PairMetrics> per_pair;  // sorted by key
    double map = 0.0;
    double mrr = 0.0;
    double ndcg10 = 0.0;
    size_t pairs = 0;
    size_t skipped_empty = 0;  // judged pairs with no relevant items
};

// Per-pair and aggregate metrics of a run against qrels. Judged pairs
// missing from the run score zero; run entries without judgments are
// ignored.
MetricsReport evaluate_run(const RunFile& run, const QrelsFile& qrels);

}  // namespace kge

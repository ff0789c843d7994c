#include "kge/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kge/rng.hpp"

namespace kge {

double average_precision(std::span<const char> is_relevant, size_t num_relevant) {
    if (num_relevant == 0) throw std::invalid_argument("no relevant items");
    double sum = 0.0;
    size_t hits = 0;
    for (size_t r = 0; r < is_relevant.size(); ++r) {
        if (!is_relevant[r]) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
    return sum / static_cast<double>(num_relevant);
}

double reciprocal_rank(std::span<const char> is_relevant) {
    for (size_t r = 0; r < is_relevant.size(); ++r)
        if (is_relevant[r]) return 1.0 / static_cast<double>(r + 1);
    return 0.0;
}

double ndcg_at_10(std::span<const char> is_relevant, size_t num_relevant) {
    if (num_relevant == 0) throw std::invalid_argument("no relevant items");
    double dcg = 0.0;
    for (size_t r = 0; r < std::min<size_t>(10, is_relevant.size()); ++r)
        if (is_relevant[r]) dcg += 1.0 / std::log2(static_cast<double>(r + 2));
    double idcg = 0.0;
    for (size_t r = 0; r < std::min<size_t>(10, num_relevant); ++r)
        idcg += 1.0 / std::log2(static_cast<double>(r + 2));
    return dcg / idcg;
}

double fisher_randomization(std::span<const double> a, std::span<const double> b,
                            uint32_t iterations, uint64_t seed) {
    if (a.size() != b.size()) throw std::invalid_argument("paired vectors differ in length");
    if (a.empty()) throw std::invalid_argument("empty vectors");
    const size_t n = a.size();
    double observed = 0.0;
    for (size_t i = 0; i < n; ++i) observed += a[i] - b[i];
    observed = std::abs(observed / static_cast<double>(n));

    Rng rng = Rng::child(seed, "fisher");
    uint64_t at_least = 1;  // the observed assignment counts as one iteration
    for (uint32_t it = 0; it < iterations; ++it) {
        double diff = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double d = a[i] - b[i];
            diff += (rng.next_u64() & 1) ? -d : d;
        }
        if (std::abs(diff / static_cast<double>(n)) >= observed - 1e-12) ++at_least;
    }
    return static_cast<double>(at_least) / static_cast<double>(iterations + 1);
}

MetricsReport evaluate_run(const RunFile& run, const QrelsFile& qrels) {
    MetricsReport report;
    for (const auto& [key, relevant] : qrels) {
        if (relevant.empty()) {
            ++report.skipped_empty;
            continue;
        }
        std::vector<char> mask;
        auto it = run.find(key);
        if (it != run.end()) {
            mask.reserve(it->second.size());
            for (const auto& entry : it->second)
                mask.push_back(relevant.contains(entry.item) ? 1 : 0);
        }
        PairMetrics pm;
        pm.key = key;
        pm.ap = average_precision(mask, relevant.size());
        pm.rr = reciprocal_rank(mask);
        pm.ndcg10 = ndcg_at_10(mask, relevant.size());
        report.map += pm.ap;
        report.mrr += pm.rr;
        report.ndcg10 += pm.ndcg10;
        report.per_pair.push_back(std::move(pm));
    }
    report.pairs = report.per_pair.size();
    if (report.pairs > 0) {
        report.map /= static_cast<double>(report.pairs);
        report.mrr /= static_cast<double>(report.pairs);
        report.ndcg10 /= static_cast<double>(report.pairs);
    }
    return report;
}

}  // namespace kge

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kge/corpus.hpp"
#include "kge/retrieval.hpp"

namespace kge {

// Bag-of-words index over per-item documents: title + description + all
// training reviews, tokenized like the rest of the corpus. Immutable after
// build.
class DocStore {
public:
    static DocStore build(const std::vector<Review>& train_reviews,
                          const std::vector<ItemMeta>& metadata,
                          const EntityCatalog& catalog);

    // Documents already assembled, indexed by item id.
    static DocStore from_documents(const std::vector<std::vector<std::string>>& documents);

    uint32_t num_documents() const { return static_cast<uint32_t>(doc_lengths_.size()); }
    uint64_t term_frequency(uint32_t item, std::string_view word) const;   // #(w,d)
    uint64_t doc_length(uint32_t item) const { return doc_lengths_[item]; }
    uint64_t corpus_frequency(std::string_view word) const;                // #(w,C)
    uint64_t corpus_length() const { return corpus_length_; }              // |C|
    uint64_t document_frequency(std::string_view word) const;              // df(w)
    double avg_doc_length() const;

private:
    std::vector<std::unordered_map<std::string, uint64_t>> term_counts_;  // per item
    std::vector<uint64_t> doc_lengths_;
    std::unordered_map<std::string, uint64_t> corpus_counts_;
    std::unordered_map<std::string, uint64_t> doc_frequencies_;
    uint64_t corpus_length_ = 0;
};

struct BaselineParams {
    double mu = 2000.0;
    double k1 = 1.2;
    double b = 0.75;
    // Use the literal printed saturation term #(w,q) instead of #(w,d).
    bool bm25_literal_paper_formula = false;
};

// Query likelihood with Dirichlet smoothing (natural log). Query words with
// zero corpus frequency are skipped with a warning counter.
double ql_score(const DocStore& docs, std::span<const std::string> query_words, uint32_t item,
                double mu, uint64_t* skipped_words = nullptr);

// BM25 with Robertson IDF(w,C) = ln((N - df + 0.5)/(df + 0.5) + 1).
double bm25_score(const DocStore& docs, std::span<const std::string> query_words, uint32_t item,
                  double k1, double b, bool literal_paper_formula = false);

enum class BaselineScorer { kQueryLikelihood, kBm25 };

// Scores all items, sorts descending with ascending-id tie-break, truncates.
RankedList rank_baseline(const DocStore& docs, std::span<const std::string> query_words,
                         BaselineScorer scorer, const BaselineParams& params,
                         uint32_t top_k = 100);

}  // namespace kge

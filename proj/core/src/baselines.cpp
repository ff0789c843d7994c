#include "kge/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kge {

DocStore DocStore::build(const std::vector<Review>& train_reviews,
                         const std::vector<ItemMeta>& metadata,
                         const EntityCatalog& catalog) {
    DocStore store;
    uint32_t n = catalog.count(kItemType);
    store.term_counts_.resize(n);
    store.doc_lengths_.assign(n, 0);

    auto add = [&](uint32_t item, const std::vector<std::string>& tokens) {
        for (const auto& t : tokens) {
            ++store.term_counts_[item][t];
            ++store.doc_lengths_[item];
            ++store.corpus_counts_[t];
            ++store.corpus_length_;
        }
    };
    for (const auto& m : metadata) {
        auto item = catalog.id_of(kItemType, m.item_id);
        if (!item) continue;
        add(*item, m.title_tokens);
        add(*item, m.description_tokens);
    }
    for (const auto& r : train_reviews) {
        auto item = catalog.id_of(kItemType, r.item_id);
        if (!item) continue;
        add(*item, r.tokens);
    }
    for (const auto& counts : store.term_counts_)
        for (const auto& [word, c] : counts) ++store.doc_frequencies_[word];
    return store;
}

DocStore DocStore::from_documents(const std::vector<std::vector<std::string>>& documents) {
    DocStore store;
    store.term_counts_.resize(documents.size());
    store.doc_lengths_.assign(documents.size(), 0);
    for (uint32_t i = 0; i < documents.size(); ++i) {
        for (const auto& t : documents[i]) {
            ++store.term_counts_[i][t];
            ++store.doc_lengths_[i];
            ++store.corpus_counts_[t];
            ++store.corpus_length_;
        }
    }
    for (const auto& counts : store.term_counts_)
        for (const auto& [word, c] : counts) ++store.doc_frequencies_[word];
    return store;
}

uint64_t DocStore::term_frequency(uint32_t item, std::string_view word) const {
    const auto& counts = term_counts_[item];
    auto it = counts.find(std::string(word));
    return it == counts.end() ? 0 : it->second;
}

uint64_t DocStore::corpus_frequency(std::string_view word) const {
    auto it = corpus_counts_.find(std::string(word));
    return it == corpus_counts_.end() ? 0 : it->second;
}

uint64_t DocStore::document_frequency(std::string_view word) const {
    auto it = doc_frequencies_.find(std::string(word));
    return it == doc_frequencies_.end() ? 0 : it->second;
}

double DocStore::avg_doc_length() const {
    if (doc_lengths_.empty()) return 0.0;
    return static_cast<double>(corpus_length_) / static_cast<double>(doc_lengths_.size());
}

double ql_score(const DocStore& docs, std::span<const std::string> query_words, uint32_t item,
                double mu, uint64_t* skipped_words) {
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
    const double corpus_len = static_cast<double>(docs.corpus_length());
    const double doc_len = static_cast<double>(docs.doc_length(item));
    double score = 0.0;
    for (const auto& w : query_words) {
        double cf = static_cast<double>(docs.corpus_frequency(w));
        if (cf == 0.0) {
            if (skipped_words) ++*skipped_words;
            continue;
        }
        double tf = static_cast<double>(docs.term_frequency(item, w));
        score += std::log((tf + mu * cf / corpus_len) / (doc_len + mu));
    }
    return score;
}

double bm25_score(const DocStore& docs, std::span<const std::string> query_words, uint32_t item,
                  double k1, double b, bool literal_paper_formula) {
    const double n_docs = static_cast<double>(docs.num_documents());
    const double avg_len = docs.avg_doc_length();
    const double doc_len = static_cast<double>(docs.doc_length(item));
    const double len_norm = k1 * (1.0 - b + (avg_len > 0.0 ? b * doc_len / avg_len : 0.0));

    std::unordered_map<std::string, uint64_t> query_counts;
    for (const auto& w : query_words) ++query_counts[w];

    double score = 0.0;
    for (const auto& w : query_words) {
        double df = static_cast<double>(docs.document_frequency(w));
        double tf = static_cast<double>(docs.term_frequency(item, w));
        if (tf == 0.0) continue;
        double idf = std::log((n_docs - df + 0.5) / (df + 0.5) + 1.0);
        double sat = literal_paper_formula ? static_cast<double>(query_counts[w]) : tf;
        score += idf * sat * (k1 + 1.0) / (sat + len_norm);
    }
    return score;
}

RankedList rank_baseline(const DocStore& docs, std::span<const std::string> query_words,
                         BaselineScorer scorer, const BaselineParams& params, uint32_t top_k) {
    if (query_words.empty()) throw std::invalid_argument("empty query");
    RankedList out;
    out.items.resize(docs.num_documents());
    for (uint32_t i = 0; i < docs.num_documents(); ++i) {
        double s = scorer == BaselineScorer::kQueryLikelihood
                       ? ql_score(docs, query_words, i, params.mu)
                       : bm25_score(docs, query_words, i, params.k1, params.b,
                                    params.bm25_literal_paper_formula);
        out.items[i] = {i, s};
    }
    auto better = [](const ScoredItem& a, const ScoredItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item < b.item;
    };
    size_t k = std::min<size_t>(top_k, out.items.size());
    std::partial_sort(out.items.begin(), out.items.begin() + k, out.items.end(), better);
    out.items.resize(k);
    return out;
}

}  // namespace kge

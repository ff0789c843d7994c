#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kge/schema.hpp"

namespace kge {

struct Review {
    std::string user_id;
    std::string item_id;
    std::vector<std::string> tokens;
};

struct ItemMeta {
    std::string item_id;
    std::vector<std::string> title_tokens;
    std::vector<std::string> description_tokens;
    std::optional<std::string> brand;
    std::vector<std::vector<std::string>> category_paths;
    std::vector<std::string> also_bought;
    std::vector<std::string> also_viewed;
    std::vector<std::string> bought_together;
};

struct IngestStats {
    uint64_t records = 0;
    uint64_t dropped_empty = 0;
    uint64_t malformed = 0;
    uint64_t skipped_no_id = 0;
};

// Line-delimited JSON with fields reviewerID, asin, reviewText. Malformed
// lines are reported on stderr with their line number and skipped; an
// unreadable file throws.
std::vector<Review> ingest_reviews(const std::string& path, IngestStats* stats = nullptr);

// Line-delimited JSON with fields asin, related.{also_bought, also_viewed,
// bought_together}, brand, categories (list of lists). Self-links and
// duplicates in the related lists are removed.
std::vector<ItemMeta> ingest_metadata(const std::string& path, IngestStats* stats = nullptr);

// Optional filter for raw (non 5-core) data: iteratively drop reviews until
// every remaining user and item has at least min_count reviews.
std::vector<Review> five_core_filter(std::vector<Review> reviews, size_t min_count = 5);

class Vocabulary {
public:
    static Vocabulary build(const std::vector<Review>& reviews, uint64_t min_freq = 5);

    std::optional<uint32_t> id_of(std::string_view word) const;
    const std::string& word(uint32_t id) const { return words_[id]; }
    uint64_t frequency(uint32_t id) const { return freq_[id]; }
    uint32_t size() const { return static_cast<uint32_t>(words_.size()); }

    // Direct constructor for artifact loading and tests. Words must be
    // sorted and unique; ids are positional.
    Vocabulary(std::vector<std::string> words, std::vector<uint64_t> freq);
    Vocabulary() = default;

private:
    std::vector<std::string> words_;   // id -> surface, sorted
    std::vector<uint64_t> freq_;       // id -> corpus frequency
    std::unordered_map<std::string, uint32_t> ids_;
};

// Fixed entity-type order used by the product schema and all artifacts.
inline constexpr uint32_t kUserType = 0;
inline constexpr uint32_t kItemType = 1;
inline constexpr uint32_t kWordType = 2;
inline constexpr uint32_t kBrandType = 3;
inline constexpr uint32_t kCategoryType = 4;
inline constexpr uint32_t kNumEntityTypes = 5;

const char* entity_type_name(uint32_t type);

// Dense per-type id maps. Ids are assigned in sorted surface order, so they
// are independent of input arrival order. Items are the items observed in
// reviews; metadata rows for unknown items are ignored. Category entities
// are distinct category-level names from split_categories; each also gets
// an anonymized symbol "cat_<id>".
class EntityCatalog {
public:
    static EntityCatalog build(const std::vector<Review>& reviews,
                               const std::vector<ItemMeta>& metadata,
                               const Vocabulary& vocabulary);

    uint32_t count(uint32_t type) const { return static_cast<uint32_t>(surfaces_[type].size()); }
    std::optional<uint32_t> id_of(uint32_t type, std::string_view surface) const;
    const std::string& surface(uint32_t type, uint32_t id) const { return surfaces_[type][id]; }
    std::string category_symbol(uint32_t id) const;

    EntityCatalog() = default;
    // Direct constructor for artifact loading; each list must be sorted.
    explicit EntityCatalog(std::vector<std::vector<std::string>> surfaces);

private:
    std::vector<std::vector<std::string>> surfaces_{kNumEntityTypes};
    std::vector<std::unordered_map<std::string, uint32_t>> ids_{kNumEntityTypes};
};

// Splits every hierarchical category path into per-level entities keyed by
// the level's name. Returns the sorted set of distinct level names and, per
// metadata item, the names it links to.
std::vector<std::string> split_categories(const std::vector<ItemMeta>& metadata);

class QuerySet {
public:
    // Extracts one query per >2-level category path: concatenate the level
    // names, tokenize, drop stopwords and words missing from the
    // vocabulary, deduplicate words keeping first occurrence. Identical
    // word sequences collapse to one query id; ids follow the sorted order
    // of the word-id sequences.
    static QuerySet extract(const std::vector<ItemMeta>& metadata,
                            const std::unordered_set<std::string>& stopwords,
                            const Vocabulary& vocabulary,
                            const EntityCatalog& catalog);

    uint32_t size() const { return static_cast<uint32_t>(words_.size()); }
    const std::vector<uint32_t>& words(uint32_t query) const { return words_[query]; }
    const std::vector<uint32_t>& items(uint32_t query) const { return items_[query]; }
    const std::vector<std::string>& source_path(uint32_t query) const { return source_paths_[query]; }
    const std::vector<std::vector<uint32_t>>& word_lists() const { return words_; }

    // Queries relevant to an item (inverse of items()).
    std::vector<uint32_t> queries_of_item(uint32_t item) const;

    QuerySet() = default;
    QuerySet(std::vector<std::vector<uint32_t>> words, std::vector<std::vector<uint32_t>> items);

private:
    std::vector<std::vector<uint32_t>> words_;              // query -> distinct word ids
    std::vector<std::vector<uint32_t>> items_;              // query -> sorted item ids
    std::vector<std::vector<std::string>> source_paths_;    // query -> one source path
};

struct StaticTriple {
    uint32_t relation = 0;
    uint32_t head = 0;
    uint32_t tail = 0;
    uint64_t count = 1;
};

struct DynamicTriple {
    uint32_t user = 0;
    uint32_t query = 0;
    uint32_t item = 0;
    uint64_t count = 1;
};

struct TripleStats {
    uint64_t skipped_unresolved = 0;
};

// Observed relation triples with multiplicities, plus the per-relation tail
// occurrence tables that define the negative-sampling noise distribution.
class TripleStore {
public:
    std::vector<StaticTriple> statics;     // sorted by (relation, head, tail)
    std::vector<DynamicTriple> dynamics;   // sorted by (user, query, item)

    // tail id -> occurrence count, sorted by tail id
    const std::vector<std::pair<uint32_t, uint64_t>>& tail_table(uint32_t relation) const;
    uint64_t relation_occurrences(uint32_t relation) const;
    double tail_probability(uint32_t relation, uint32_t tail) const;  // P_r(y)

    uint64_t static_occurrences() const;
    uint64_t dynamic_occurrences() const;

    // Sorts and aggregates duplicates, then builds the tail tables.
    void finalize(uint32_t num_relations);

private:
    std::vector<std::vector<std::pair<uint32_t, uint64_t>>> tail_tables_;
    std::vector<uint64_t> relation_totals_;
};

// Emits Write triples per word occurrence for both user->word and
// item->word, metadata triples once per observed link, and no dynamic
// triples (those come from the split). Relations absent from the schema are
// skipped entirely; unresolvable tails are counted in stats.
TripleStore build_triples(const std::vector<Review>& reviews,
                          const std::vector<ItemMeta>& metadata,
                          const Vocabulary& vocabulary,
                          const EntityCatalog& catalog,
                          const ModelSchema& schema,
                          TripleStats* stats = nullptr);

struct Judgments {
    // (user, query) -> sorted relevant item ids
    std::map<std::pair<uint32_t, uint32_t>, std::vector<uint32_t>> relevant;
};

struct SplitDataset {
    TripleStore train;
    Judgments test;
    std::vector<uint8_t> review_is_test;   // indexed like the review list
    std::vector<uint8_t> query_is_test;    // indexed by query id
    uint64_t put_back_count = 0;
};

// Hides test_ratio of the reviews (their purchases become test ground
// truth) and test_ratio of the queries. If all queries of an item land in
// the test set, one random query of that item is put back into training.
// Train triples are built from the remaining reviews; dynamic triples pair
// every train purchase with every train query of the purchased item.
SplitDataset train_test_split(const std::vector<Review>& reviews,
                              const std::vector<ItemMeta>& metadata,
                              const Vocabulary& vocabulary,
                              const EntityCatalog& catalog,
                              const ModelSchema& schema,
                              const QuerySet& queries,
                              double test_ratio,
                              uint64_t seed,
                              TripleStats* stats = nullptr);

}  // namespace kge

#include "kge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

#include "kge/rng.hpp"
#include "kge/tokenize.hpp"

namespace kge {

using nlohmann::json;

namespace {

std::vector<std::string> clean_related(const json& arr, const std::string& self) {
    std::vector<std::string> out;
    if (!arr.is_array()) return out;
    for (const auto& v : arr) {
        if (!v.is_string()) continue;
        std::string id = v.get<std::string>();
        if (id == self) continue;
        if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    }
    return out;
}

}  // namespace

std::vector<Review> ingest_reviews(const std::string& path, IngestStats* stats) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open review file: " + path);
    IngestStats local;
    std::vector<Review> reviews;
    std::string line;
    uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ++local.records;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object() || !rec.contains("reviewerID") ||
            !rec.contains("asin")) {
            ++local.malformed;
            std::cerr << "warning: malformed review record at " << path << ":" << line_no
                      << "\n";
            continue;
        }
        Review r;
        r.user_id = rec["reviewerID"].get<std::string>();
        r.item_id = rec["asin"].get<std::string>();
        if (rec.contains("reviewText") && rec["reviewText"].is_string()) {
            r.tokens = tokenize(rec["reviewText"].get<std::string>());
        }
        if (r.tokens.empty()) {
            ++local.dropped_empty;
            continue;
        }
        reviews.push_back(std::move(r));
    }
    if (stats) *stats = local;
    return reviews;
}

std::vector<ItemMeta> ingest_metadata(const std::string& path, IngestStats* stats) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open metadata file: " + path);
    IngestStats local;
    std::vector<ItemMeta> metadata;
    std::string line;
    uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ++local.records;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            ++local.malformed;
            std::cerr << "warning: malformed metadata record at " << path << ":" << line_no
                      << "\n";
            continue;
        }
        if (!rec.contains("asin") || !rec["asin"].is_string()) {
            ++local.skipped_no_id;
            std::cerr << "warning: metadata record without asin at " << path << ":"
                      << line_no << ", skipped\n";
            continue;
        }
        ItemMeta m;
        m.item_id = rec["asin"].get<std::string>();
        if (rec.contains("title") && rec["title"].is_string())
            m.title_tokens = tokenize(rec["title"].get<std::string>());
        if (rec.contains("description") && rec["description"].is_string())
            m.description_tokens = tokenize(rec["description"].get<std::string>());
        if (rec.contains("brand") && rec["brand"].is_string()) {
            std::string b = rec["brand"].get<std::string>();
            if (!b.empty()) m.brand = b;
        }
        if (rec.contains("categories") && rec["categories"].is_array()) {
            for (const auto& path_json : rec["categories"]) {
                if (!path_json.is_array()) continue;
                std::vector<std::string> levels;
                for (const auto& lv : path_json)
                    if (lv.is_string()) levels.push_back(lv.get<std::string>());
                if (!levels.empty()) m.category_paths.push_back(std::move(levels));
            }
        }
        if (rec.contains("related") && rec["related"].is_object()) {
            const auto& rl = rec["related"];
            if (rl.contains("also_bought")) m.also_bought = clean_related(rl["also_bought"], m.item_id);
            if (rl.contains("also_viewed")) m.also_viewed = clean_related(rl["also_viewed"], m.item_id);
            if (rl.contains("bought_together"))
                m.bought_together = clean_related(rl["bought_together"], m.item_id);
        }
        metadata.push_back(std::move(m));
    }
    if (stats) *stats = local;
    return metadata;
}

std::vector<Review> five_core_filter(std::vector<Review> reviews, size_t min_count) {
    for (;;) {
        std::unordered_map<std::string, size_t> users, items;
        for (const auto& r : reviews) {
            ++users[r.user_id];
            ++items[r.item_id];
        }
        std::vector<Review> kept;
        kept.reserve(reviews.size());
        for (auto& r : reviews) {
            if (users[r.user_id] >= min_count && items[r.item_id] >= min_count)
                kept.push_back(std::move(r));
        }
        if (kept.size() == reviews.size()) return kept;
        reviews = std::move(kept);
    }
}

Vocabulary Vocabulary::build(const std::vector<Review>& reviews, uint64_t min_freq) {
    if (reviews.empty()) throw std::invalid_argument("empty review corpus");
    std::unordered_map<std::string, uint64_t> counts;
    for (const auto& r : reviews)
        for (const auto& t : r.tokens) ++counts[t];
    std::vector<std::string> words;
    for (const auto& [w, c] : counts)
        if (c >= min_freq) words.push_back(w);
    std::sort(words.begin(), words.end());
    std::vector<uint64_t> freq(words.size());
    for (size_t i = 0; i < words.size(); ++i) freq[i] = counts[words[i]];
    return Vocabulary(std::move(words), std::move(freq));
}

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<uint64_t> freq)
    : words_(std::move(words)), freq_(std::move(freq)) {
    ids_.reserve(words_.size());
    for (uint32_t i = 0; i < words_.size(); ++i) ids_[words_[i]] = i;
}

std::optional<uint32_t> Vocabulary::id_of(std::string_view word) const {
    auto it = ids_.find(std::string(word));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

const char* entity_type_name(uint32_t type) {
    static const char* const names[] = {"user", "item", "word", "brand", "category"};
    return names[type];
}

EntityCatalog EntityCatalog::build(const std::vector<Review>& reviews,
                                   const std::vector<ItemMeta>& metadata,
                                   const Vocabulary& vocabulary) {
    std::set<std::string> users, items;
    for (const auto& r : reviews) {
        users.insert(r.user_id);
        items.insert(r.item_id);
    }
    std::set<std::string> brands;
    for (const auto& m : metadata) {
        if (!items.contains(m.item_id)) continue;
        if (m.brand) brands.insert(*m.brand);
    }
    std::vector<ItemMeta> known;
    known.reserve(metadata.size());
    for (const auto& m : metadata)
        if (items.contains(m.item_id)) known.push_back(m);
    std::vector<std::string> categories = split_categories(known);

    std::vector<std::vector<std::string>> surfaces(kNumEntityTypes);
    surfaces[kUserType].assign(users.begin(), users.end());
    surfaces[kItemType].assign(items.begin(), items.end());
    surfaces[kWordType].resize(vocabulary.size());
    for (uint32_t i = 0; i < vocabulary.size(); ++i) surfaces[kWordType][i] = vocabulary.word(i);
    surfaces[kBrandType].assign(brands.begin(), brands.end());
    surfaces[kCategoryType] = std::move(categories);
    return EntityCatalog(std::move(surfaces));
}

EntityCatalog::EntityCatalog(std::vector<std::vector<std::string>> surfaces)
    : surfaces_(std::move(surfaces)) {
    if (surfaces_.size() != kNumEntityTypes)
        throw std::invalid_argument("catalog needs one surface list per entity type");
    ids_.assign(kNumEntityTypes, {});
    for (uint32_t t = 0; t < kNumEntityTypes; ++t) {
        ids_[t].reserve(surfaces_[t].size());
        for (uint32_t i = 0; i < surfaces_[t].size(); ++i) ids_[t][surfaces_[t][i]] = i;
    }
}

std::optional<uint32_t> EntityCatalog::id_of(uint32_t type, std::string_view surface) const {
    const auto& m = ids_[type];
    auto it = m.find(std::string(surface));
    if (it == m.end()) return std::nullopt;
    return it->second;
}

std::string EntityCatalog::category_symbol(uint32_t id) const {
    return "cat_" + std::to_string(id);
}

std::vector<std::string> split_categories(const std::vector<ItemMeta>& metadata) {
    std::set<std::string> levels;
    for (const auto& m : metadata)
        for (const auto& path : m.category_paths)
            for (const auto& level : path) levels.insert(level);
    return {levels.begin(), levels.end()};
}

QuerySet QuerySet::extract(const std::vector<ItemMeta>& metadata,
                           const std::unordered_set<std::string>& stopwords,
                           const Vocabulary& vocabulary,
                           const EntityCatalog& catalog) {
    struct Draft {
        std::set<uint32_t> items;
        std::vector<std::string> source_path;
    };
    // keyed by the ordered word-id sequence
    std::map<std::vector<uint32_t>, Draft> drafts;
    for (const auto& m : metadata) {
        auto item = catalog.id_of(kItemType, m.item_id);
        if (!item) continue;
        for (const auto& path : m.category_paths) {
            if (path.size() <= 2) continue;
            std::string joined;
            for (const auto& level : path) {
                joined += level;
                joined += ' ';
            }
            std::vector<uint32_t> word_ids;
            std::set<uint32_t> seen;
            for (const auto& tok : tokenize(joined)) {
                if (stopwords.contains(tok)) continue;
                auto wid = vocabulary.id_of(tok);
                if (!wid) continue;
                if (seen.insert(*wid).second) word_ids.push_back(*wid);
            }
            if (word_ids.empty()) continue;
            auto& d = drafts[word_ids];
            d.items.insert(*item);
            if (d.source_path.empty()) d.source_path = path;
        }
    }
    QuerySet qs;
    for (auto& [words, draft] : drafts) {
        qs.words_.push_back(words);
        qs.items_.emplace_back(draft.items.begin(), draft.items.end());
        qs.source_paths_.push_back(std::move(draft.source_path));
    }
    return qs;
}

QuerySet::QuerySet(std::vector<std::vector<uint32_t>> words,
                   std::vector<std::vector<uint32_t>> items)
    : words_(std::move(words)), items_(std::move(items)) {
    source_paths_.resize(words_.size());
}

std::vector<uint32_t> QuerySet::queries_of_item(uint32_t item) const {
    std::vector<uint32_t> out;
    for (uint32_t q = 0; q < items_.size(); ++q)
        if (std::binary_search(items_[q].begin(), items_[q].end(), item)) out.push_back(q);
    return out;
}

const std::vector<std::pair<uint32_t, uint64_t>>& TripleStore::tail_table(
    uint32_t relation) const {
    return tail_tables_.at(relation);
}

uint64_t TripleStore::relation_occurrences(uint32_t relation) const {
    return relation_totals_.at(relation);
}

double TripleStore::tail_probability(uint32_t relation, uint32_t tail) const {
    const auto& table = tail_tables_.at(relation);
    auto it = std::lower_bound(table.begin(), table.end(), tail,
                               [](const auto& p, uint32_t t) { return p.first < t; });
    if (it == table.end() || it->first != tail) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(relation_totals_[relation]);
}

uint64_t TripleStore::static_occurrences() const {
    uint64_t n = 0;
    for (const auto& t : statics) n += t.count;
    return n;
}

uint64_t TripleStore::dynamic_occurrences() const {
    uint64_t n = 0;
    for (const auto& t : dynamics) n += t.count;
    return n;
}

void TripleStore::finalize(uint32_t num_relations) {
    auto skey = [](const StaticTriple& t) { return std::tuple(t.relation, t.head, t.tail); };
    std::sort(statics.begin(), statics.end(),
              [&](const auto& a, const auto& b) { return skey(a) < skey(b); });
    std::vector<StaticTriple> merged;
    for (const auto& t : statics) {
        if (!merged.empty() && skey(merged.back()) == skey(t))
            merged.back().count += t.count;
        else
            merged.push_back(t);
    }
    statics = std::move(merged);

    auto dkey = [](const DynamicTriple& t) { return std::tuple(t.user, t.query, t.item); };
    std::sort(dynamics.begin(), dynamics.end(),
              [&](const auto& a, const auto& b) { return dkey(a) < dkey(b); });
    std::vector<DynamicTriple> dmerged;
    for (const auto& t : dynamics) {
        if (!dmerged.empty() && dkey(dmerged.back()) == dkey(t))
            dmerged.back().count += t.count;
        else
            dmerged.push_back(t);
    }
    dynamics = std::move(dmerged);

    tail_tables_.assign(num_relations, {});
    relation_totals_.assign(num_relations, 0);
    std::vector<std::map<uint32_t, uint64_t>> tables(num_relations);
    for (const auto& t : statics) {
        tables[t.relation][t.tail] += t.count;
        relation_totals_[t.relation] += t.count;
    }
    for (uint32_t r = 0; r < num_relations; ++r)
        tail_tables_[r].assign(tables[r].begin(), tables[r].end());
}

TripleStore build_triples(const std::vector<Review>& reviews,
                          const std::vector<ItemMeta>& metadata,
                          const Vocabulary& vocabulary,
                          const EntityCatalog& catalog,
                          const ModelSchema& schema,
                          TripleStats* stats) {
    TripleStats local;
    TripleStore store;
    auto rel_id = [&](const char* name) { return schema.relation_by_name(name); };
    auto write_user = rel_id(rel::kWriteUser);
    auto write_item = rel_id(rel::kWriteItem);

    for (const auto& r : reviews) {
        auto user = catalog.id_of(kUserType, r.user_id);
        auto item = catalog.id_of(kItemType, r.item_id);
        if (!user || !item) {
            ++local.skipped_unresolved;
            continue;
        }
        for (const auto& tok : r.tokens) {
            auto word = vocabulary.id_of(tok);
            if (!word) continue;  // below min_freq, not an entity
            if (write_user) store.statics.push_back({*write_user, *user, *word, 1});
            if (write_item) store.statics.push_back({*write_item, *item, *word, 1});
        }
    }

    auto item_link = [&](std::optional<uint32_t> relation, uint32_t head,
                         const std::vector<std::string>& tails) {
        if (!relation) return;
        for (const auto& t : tails) {
            auto tail = catalog.id_of(kItemType, t);
            if (!tail) {
                ++local.skipped_unresolved;
                continue;
            }
            store.statics.push_back({*relation, head, *tail, 1});
        }
    };

    auto also_bought = rel_id(rel::kAlsoBought);
    auto also_viewed = rel_id(rel::kAlsoViewed);
    auto bought_together = rel_id(rel::kBoughtTogether);
    auto is_brand = rel_id(rel::kIsBrand);
    auto is_category = rel_id(rel::kIsCategory);

    for (const auto& m : metadata) {
        auto item = catalog.id_of(kItemType, m.item_id);
        if (!item) continue;
        item_link(also_bought, *item, m.also_bought);
        item_link(also_viewed, *item, m.also_viewed);
        item_link(bought_together, *item, m.bought_together);
        if (is_brand && m.brand) {
            auto brand = catalog.id_of(kBrandType, *m.brand);
            if (brand)
                store.statics.push_back({*is_brand, *item, *brand, 1});
            else
                ++local.skipped_unresolved;
        }
        if (is_category) {
            std::set<uint32_t> cats;
            for (const auto& path : m.category_paths)
                for (const auto& level : path) {
                    auto c = catalog.id_of(kCategoryType, level);
                    if (c)
                        cats.insert(*c);
                    else
                        ++local.skipped_unresolved;
                }
            for (uint32_t c : cats) store.statics.push_back({*is_category, *item, c, 1});
        }
    }

    store.finalize(schema.num_relations());
    if (stats) *stats = local;
    return store;
}

SplitDataset train_test_split(const std::vector<Review>& reviews,
                              const std::vector<ItemMeta>& metadata,
                              const Vocabulary& vocabulary,
                              const EntityCatalog& catalog,
                              const ModelSchema& schema,
                              const QuerySet& queries,
                              double test_ratio,
                              uint64_t seed,
                              TripleStats* stats) {
    if (!(test_ratio > 0.0 && test_ratio < 1.0))
        throw std::invalid_argument("test_ratio must lie in (0,1)");

    SplitDataset split;
    split.review_is_test.assign(reviews.size(), 0);
    split.query_is_test.assign(queries.size(), 0);

    Rng review_rng = Rng::child(seed, "split/reviews");
    std::vector<uint32_t> review_order(reviews.size());
    for (uint32_t i = 0; i < reviews.size(); ++i) review_order[i] = i;
    review_rng.shuffle(review_order);
    size_t num_test_reviews = static_cast<size_t>(test_ratio * reviews.size() + 0.5);
    for (size_t i = 0; i < num_test_reviews; ++i) split.review_is_test[review_order[i]] = 1;

    Rng query_rng = Rng::child(seed, "split/queries");
    std::vector<uint32_t> query_order(queries.size());
    for (uint32_t i = 0; i < queries.size(); ++i) query_order[i] = i;
    query_rng.shuffle(query_order);
    size_t num_test_queries = static_cast<size_t>(test_ratio * queries.size() + 0.5);
    for (size_t i = 0; i < num_test_queries; ++i) split.query_is_test[query_order[i]] = 1;

    // Put-back rule: an item whose queries all went to test gets one of
    // them returned to training.
    Rng put_back_rng = Rng::child(seed, "split/put-back");
    for (uint32_t item = 0; item < catalog.count(kItemType); ++item) {
        auto qs = queries.queries_of_item(item);
        if (qs.empty()) continue;
        bool all_test = std::all_of(qs.begin(), qs.end(),
                                    [&](uint32_t q) { return split.query_is_test[q]; });
        if (!all_test) continue;
        uint32_t back = qs[put_back_rng.next_below(qs.size())];
        split.query_is_test[back] = 0;
        ++split.put_back_count;
    }

    std::vector<Review> train_reviews;
    train_reviews.reserve(reviews.size());
    for (size_t i = 0; i < reviews.size(); ++i)
        if (!split.review_is_test[i]) train_reviews.push_back(reviews[i]);

    split.train = build_triples(train_reviews, metadata, vocabulary, catalog, schema, stats);

    // Dynamic train triples: every train purchase paired with every train
    // query of the purchased item.
    for (size_t i = 0; i < reviews.size(); ++i) {
        if (split.review_is_test[i]) continue;
        auto user = catalog.id_of(kUserType, reviews[i].user_id);
        auto item = catalog.id_of(kItemType, reviews[i].item_id);
        if (!user || !item) continue;
        for (uint32_t q : queries.queries_of_item(*item))
            if (!split.query_is_test[q]) split.train.dynamics.push_back({*user, q, *item, 1});
    }
    split.train.finalize(schema.num_relations());

    // Test judgments: hidden purchases crossed with matching test queries.
    for (size_t i = 0; i < reviews.size(); ++i) {
        if (!split.review_is_test[i]) continue;
        auto user = catalog.id_of(kUserType, reviews[i].user_id);
        auto item = catalog.id_of(kItemType, reviews[i].item_id);
        if (!user || !item) continue;
        for (uint32_t q : queries.queries_of_item(*item)) {
            if (!split.query_is_test[q]) continue;
            auto& rel = split.test.relevant[{*user, q}];
            if (std::find(rel.begin(), rel.end(), *item) == rel.end()) rel.push_back(*item);
        }
    }
    for (auto& [key, items] : split.test.relevant) std::sort(items.begin(), items.end());
    return split;
}

}  // namespace kge

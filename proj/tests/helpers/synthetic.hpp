#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "kge/corpus.hpp"
#include "kge/model.hpp"

namespace kge::testing {

struct SyntheticSpec {
    uint32_t users = 50;
    uint32_t items = 100;
    uint32_t words = 200;
    uint32_t brands = 5;
    uint32_t categories = 10;
    uint32_t alpha = 64;

    uint32_t num_queries = 20;
    uint32_t words_per_query = 3;
    uint32_t queries_per_user = 3;
    uint32_t purchases_per_pair = 5;

    uint32_t words_per_user = 30;
    uint32_t words_per_item = 30;
    uint32_t ab_per_item = 3;
    uint32_t av_per_item = 2;
    uint32_t bt_per_item = 1;
    uint32_t cats_per_item = 2;

    double embed_scale = 0.9;      // half-width of ground-truth embedding components
    double projector_gain = 3.0;   // diagonal of the ground-truth W
    double brand_strength = 0.0;   // shared brand offset added to users and items
    double hold_out_ratio = 0.0;   // per-pair fraction of purchases moved to test

    // When nonzero, the last cold_items items never receive training
    // purchases; instead every (u, q) pair draws test_purchases_per_pair
    // test judgments from the cold range. Their static triples remain, so
    // only the knowledge-graph side can place them.
    uint32_t cold_items = 0;
    uint32_t test_purchases_per_pair = 2;

    uint64_t seed = 7;
};

struct SyntheticData {
    ModelParams truth;  // the generating parameters; schema inside
    std::vector<std::vector<uint32_t>> query_words;
    TripleStore train;
    Judgments test;
    // (user, query) -> distinct items purchased in training
    std::map<std::pair<uint32_t, uint32_t>, std::vector<uint32_t>> held_in;
};

// Samples a product graph from random ground-truth embeddings: every tail
// is drawn proportional to exp((x + r) . y), with the dynamic relation
// using r = f(q) of the ground-truth projector. brand_strength > 0 plants
// a shared offset per brand into its items and loyal users, which makes
// purchases brand-predictable.
SyntheticData make_synthetic(const SyntheticSpec& spec);

}  // namespace kge::testing

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kge/model.hpp"

namespace kge {

struct ScoredItem {
    uint32_t item = 0;
    double score = 0.0;
};

struct RankedList {
    uint32_t user = 0;
    std::vector<ScoredItem> items;  // scores non-increasing, ties by ascending id
};

// Scores every item with (u + f(q)) . i and keeps the top_k highest.
// Unknown users and empty queries are errors; cold start is out of scope.
RankedList rank_items(const ModelParams& params, uint32_t user_id,
                      std::span<const uint32_t> query_word_ids, uint32_t top_k = 100);

}  // namespace kge

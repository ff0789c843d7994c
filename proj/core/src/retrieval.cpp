#include "kge/retrieval.hpp"

#include <algorithm>
#include <stdexcept>

namespace kge {

RankedList rank_items(const ModelParams& params, uint32_t user_id,
                      std::span<const uint32_t> query_word_ids, uint32_t top_k) {
    const auto& schema = params.schema();
    if (user_id >= schema.type(schema.user_type()).count)
        throw std::out_of_range("unknown user id");
    if (query_word_ids.empty()) throw std::invalid_argument("empty query");

    auto v = project_query(params, query_word_ids);
    auto translated = translate(params, schema.user_type(), user_id, v);
    const uint32_t item_type = schema.item_type();
    const uint32_t num_items = schema.type(item_type).count;

    RankedList out;
    out.user = user_id;
    out.items.resize(num_items);
    for (uint32_t i = 0; i < num_items; ++i)
        out.items[i] = {i, score_tail(params, translated, item_type, i)};

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

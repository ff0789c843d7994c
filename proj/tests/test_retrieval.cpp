#include <doctest.h>

#include <algorithm>
#include <set>

#include "kge/retrieval.hpp"
#include "kge/rng.hpp"

using namespace kge;

namespace {

ModelSchema retrieval_schema(uint32_t items) {
    return ModelSchema({{"user", 3}, {"item", items}, {"word", 6}},
                       {{rel::kSearchPurchase, 0, 1, true},
                        {rel::kWriteUser, 0, 2, false},
                        {rel::kWriteItem, 1, 2, false}},
                       2);
}

}  // namespace

TEST_CASE("rank_items breaks ties by ascending item id") {
    auto params = ModelParams::init(retrieval_schema(5), 4, 1);
    auto a = params.embedding(1, 1);
    auto b = params.embedding(1, 3);
    for (uint32_t j = 0; j < 4; ++j) b[j] = a[j];  // identical embeddings
    std::vector<uint32_t> query{0, 1};
    auto ranked = rank_items(params, 0, query, 5);
    size_t pos1 = 0, pos3 = 0;
    for (size_t r = 0; r < ranked.items.size(); ++r) {
        if (ranked.items[r].item == 1) pos1 = r;
        if (ranked.items[r].item == 3) pos3 = r;
    }
    CHECK(pos3 == pos1 + 1);  // adjacent, lower id first
}

TEST_CASE("an aligned item dominates anti-aligned ones") {
    auto params = ModelParams(retrieval_schema(3), 4);
    params.embedding(0, 0)[0] = 1.0f;
    params.embedding(1, 1)[0] = 2.0f;   // aligned with u + f(q) ~ u
    params.embedding(1, 2)[0] = -1.0f;  // negative projection
    std::vector<uint32_t> query{0};
    auto ranked = rank_items(params, 0, query, 3);
    CHECK(ranked.items[0].item == 1);
    CHECK(ranked.items.back().item == 2);
}

TEST_CASE("rank_items equals a full descending sort") {
    auto params = ModelParams::init(retrieval_schema(200), 16, 9);
    Rng rng(2);
    auto table = params.type_table(1);
    for (auto& v : table) v = static_cast<float>(rng.uniform(-1, 1));
    std::vector<uint32_t> query{1, 4};

    auto ranked = rank_items(params, 1, query, 100);
    REQUIRE(ranked.items.size() == 100);

    // brute-force oracle: score everything, sort fully
    auto v = project_query(params, query);
    auto translated = translate(params, 0, 1, v);
    std::vector<ScoredItem> all(200);
    for (uint32_t i = 0; i < 200; ++i) all[i] = {i, score_tail(params, translated, 1, i)};
    std::sort(all.begin(), all.end(), [](const ScoredItem& a, const ScoredItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item < b.item;
    });
    for (size_t r = 0; r < 100; ++r) {
        CHECK(ranked.items[r].item == all[r].item);
        CHECK(ranked.items[r].score == all[r].score);  // bit-for-bit
    }

    SUBCASE("scores equal the model primitives exactly") {
        for (const auto& s : ranked.items)
            CHECK(s.score == score_tail(params, translated, 1, s.item));
    }

    SUBCASE("scores are non-increasing and items distinct") {
        std::set<uint32_t> seen;
        for (size_t r = 0; r < ranked.items.size(); ++r) {
            CHECK(seen.insert(ranked.items[r].item).second);
            if (r) CHECK(ranked.items[r - 1].score >= ranked.items[r].score);
        }
    }
}

TEST_CASE("rank_items rejects unknown users and empty queries") {
    auto params = ModelParams::init(retrieval_schema(4), 4, 3);
    std::vector<uint32_t> query{0};
    CHECK_THROWS(rank_items(params, 99, query, 4));
    std::vector<uint32_t> empty;
    CHECK_THROWS(rank_items(params, 0, empty, 4));
}

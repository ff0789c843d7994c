#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kge/model.hpp"
#include "kge/rng.hpp"

using namespace kge;

namespace {

ModelSchema tiny_schema(uint32_t users = 4, uint32_t items = 6, uint32_t words = 5) {
    return ModelSchema({{"user", users}, {"item", items}, {"word", words}},
                       {{rel::kSearchPurchase, 0, 1, true},
                        {rel::kWriteUser, 0, 2, false},
                        {rel::kWriteItem, 1, 2, false}},
                       2);
}

}  // namespace

TEST_CASE("init_params is deterministic, bounded and correctly shaped") {
    auto a = ModelParams::init(tiny_schema(), 300, 9);
    auto b = ModelParams::init(tiny_schema(), 300, 9);
    CHECK(a.type_table(0).size() == 4 * 300);

    for (uint32_t t = 0; t < 3; ++t) {
        auto ta = a.type_table(t);
        auto tb = b.type_table(t);
        REQUIRE(ta.size() == tb.size());
        for (size_t i = 0; i < ta.size(); ++i) CHECK(ta[i] == tb[i]);
        for (float v : ta) CHECK(std::abs(v) <= 0.5f / 300);
    }
    for (float v : a.projector_w()) CHECK(std::abs(v) <= 0.5f / 300);
    for (float v : a.relation_vector(1)) CHECK(v == 0.0f);
    for (float v : a.projector_b()) CHECK(v == 0.0f);

    auto c = ModelParams::init(tiny_schema(), 300, 10);
    CHECK(a.type_table(0)[0] != c.type_table(0)[0]);
    CHECK_THROWS(ModelParams::init(tiny_schema(), 0, 1));
}

TEST_CASE("project_query applies tanh(W mean + b)") {
    auto params = ModelParams::init(tiny_schema(), 4, 1);

    SUBCASE("identity projector reduces to tanh of the word embedding") {
        auto w = params.projector_w();
        std::fill(w.begin(), w.end(), 0.0f);
        for (uint32_t j = 0; j < 4; ++j) w[j * 4 + j] = 1.0f;
        auto emb = params.embedding(2, 3);
        std::vector<uint32_t> q{3};
        auto v = project_query(params, q);
        for (uint32_t j = 0; j < 4; ++j)
            CHECK(v.v[j] == doctest::Approx(std::tanh(static_cast<double>(emb[j]))));
    }

    SUBCASE("all-zero words with zero bias give the zero vector") {
        auto table = params.type_table(2);
        std::fill(table.begin(), table.end(), 0.0f);
        std::vector<uint32_t> q{0, 1};
        auto v = project_query(params, q);
        for (double x : v.v) CHECK(x == 0.0);
    }

    SUBCASE("outputs stay strictly inside (-1, 1)") {
        Rng rng(5);
        auto w = params.projector_w();
        for (auto& x : w) x = static_cast<float>(rng.uniform(-3, 3));
        auto table = params.type_table(2);
        for (auto& x : table) x = static_cast<float>(rng.uniform(-3, 3));
        std::vector<uint32_t> q{0, 2, 4};
        auto v = project_query(params, q);
        for (double x : v.v) {
            CHECK(x > -1.0);
            CHECK(x < 1.0);
        }
    }

    SUBCASE("empty queries are rejected") {
        std::vector<uint32_t> q;
        CHECK_THROWS(project_query(params, q));
    }
}

TEST_CASE("translate adds the relation vector") {
    auto params = ModelParams::init(tiny_schema(), 4, 2);

    SUBCASE("zero relation vector returns the head unchanged") {
        auto head = params.embedding(0, 1);
        auto t = translate(params, 0, 1, 1);  // Write_user starts zeroed
        for (uint32_t j = 0; j < 4; ++j) CHECK(t[j] == static_cast<double>(head[j]));
    }

    SUBCASE("dynamic translation scores equal (u+v).i") {
        std::vector<uint32_t> q{0, 1};
        auto v = project_query(params, q);
        auto t = translate(params, 0, 2, v);
        auto u = params.embedding(0, 2);
        auto i = params.embedding(1, 3);
        double expected = 0.0;
        for (uint32_t j = 0; j < 4; ++j)
            expected += (static_cast<double>(u[j]) + v.v[j]) * static_cast<double>(i[j]);
        CHECK(score_tail(params, t, 1, 3) == doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("chained translation is plain vector addition") {
        auto rv = params.relation_vector(1);
        for (uint32_t j = 0; j < 4; ++j) rv[j] = 0.25f * static_cast<float>(j + 1);
        auto once = translate(params, 0, 0, 1);
        auto head = params.embedding(0, 0);
        for (uint32_t j = 0; j < 4; ++j)
            CHECK(once[j] ==
                  doctest::Approx(static_cast<double>(head[j]) + static_cast<double>(rv[j])));
    }

    SUBCASE("type mismatch is rejected") {
        CHECK_THROWS(translate(params, 1, 0, 1));  // Write_user heads at user
    }
}

TEST_CASE("score_tail is a plain dot product") {
    auto params = ModelParams(tiny_schema(), 3);
    auto emb = params.embedding(1, 0);
    emb[0] = 1.0f;
    std::vector<double> orth{0.0, 1.0, 0.0};
    CHECK(score_tail(params, orth, 1, 0) == 0.0);
    std::vector<double> same{1.0, 0.0, 0.0};
    CHECK(score_tail(params, same, 1, 0) == 1.0);
    CHECK_THROWS(score_tail(params, same, 1, 99));
}

TEST_CASE("softmax_prob matches direct evaluation and its invariants") {
    SUBCASE("frozen three-candidate values") {
        auto params = ModelParams(tiny_schema(4, 3, 5), 1);
        params.embedding(1, 0)[0] = 1.0f;
        params.embedding(1, 1)[0] = 0.0f;
        params.embedding(1, 2)[0] = -1.0f;
        std::vector<double> t{1.0};
        std::vector<uint32_t> candidates{0, 1, 2};
        CHECK(softmax_prob(params, t, 1, 0, candidates) ==
              doctest::Approx(0.665241).epsilon(1e-5));
        CHECK(softmax_prob(params, t, 1, 1, candidates) ==
              doctest::Approx(0.244728).epsilon(1e-5));
        CHECK(softmax_prob(params, t, 1, 2, candidates) ==
              doctest::Approx(0.090031).epsilon(1e-5));
    }

    auto params = ModelParams::init(tiny_schema(4, 8, 5), 6, 3);
    std::vector<double> t(6);
    Rng rng(11);
    for (auto& x : t) x = rng.uniform(-2, 2);

    SUBCASE("singleton candidate set gives probability one") {
        std::vector<uint32_t> one{5};
        CHECK(softmax_prob(params, t, 1, 5, one) == doctest::Approx(1.0));
    }

    SUBCASE("equal logits split evenly") {
        auto table = params.type_table(1);
        std::fill(table.begin(), table.end(), 0.0f);
        std::vector<uint32_t> four{0, 1, 2, 3};
        CHECK(softmax_prob(params, t, 1, 2, four) == doctest::Approx(0.25));
    }

    SUBCASE("probabilities sum to one over any candidate set") {
        std::vector<uint32_t> candidates{0, 2, 3, 5, 7};
        double total = 0.0;
        for (uint32_t c : candidates) total += softmax_prob(params, t, 1, c, candidates);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("shifting every logit by a constant changes nothing") {
        // tails share a unit last coordinate so a last-coordinate bump adds
        // the same constant to every logit
        auto params2 = ModelParams::init(tiny_schema(4, 6, 5), 4, 5);
        for (uint32_t e = 0; e < 6; ++e) params2.embedding(1, e)[3] = 1.0f;
        std::vector<double> base{0.3, -0.8, 0.5, 0.1};
        std::vector<double> shifted = base;
        shifted[3] += 17.0;
        std::vector<uint32_t> candidates{0, 1, 2, 3, 4, 5};
        for (uint32_t c : candidates)
            CHECK(softmax_prob(params2, base, 1, c, candidates) ==
                  doctest::Approx(softmax_prob(params2, shifted, 1, c, candidates))
                      .epsilon(1e-9));
    }

    SUBCASE("tail outside the candidate set is an error") {
        std::vector<uint32_t> candidates{0, 1};
        CHECK_THROWS(softmax_prob(params, t, 1, 5, candidates));
    }

    SUBCASE("softmax ranking equals dot-product ranking") {
        std::vector<uint32_t> all(8);
        std::iota(all.begin(), all.end(), 0);
        std::vector<std::pair<double, uint32_t>> by_score, by_prob;
        for (uint32_t e : all) {
            by_score.push_back({score_tail(params, t, 1, e), e});
            by_prob.push_back({softmax_prob(params, t, 1, e, all), e});
        }
        auto order = [](auto& v) {
            std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first > b.first;
                return a.second < b.second;
            });
        };
        order(by_score);
        order(by_prob);
        for (size_t i = 0; i < 8; ++i) CHECK(by_score[i].second == by_prob[i].second);
    }
}

#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "kge/rng.hpp"

namespace kge::testing {

namespace {

// categorical draw proportional to exp(logit)
uint32_t sample_softmax(const std::vector<double>& logits, Rng& rng) {
    double max_logit = *std::max_element(logits.begin(), logits.end());
    std::vector<double> cum(logits.size());
    double total = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        total += std::exp(logits[i] - max_logit);
        cum[i] = total;
    }
    double u = rng.next_double() * total;
    return static_cast<uint32_t>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
}

std::vector<double> tail_logits(const ModelParams& truth, std::span<const double> translated,
                                uint32_t tail_type) {
    uint32_t n = truth.schema().type(tail_type).count;
    std::vector<double> logits(n);
    for (uint32_t e = 0; e < n; ++e) logits[e] = score_tail(truth, translated, tail_type, e);
    return logits;
}

}  // namespace

SyntheticData make_synthetic(const SyntheticSpec& spec) {
    std::vector<EntityTypeInfo> types = {
        {"user", spec.users},   {"item", spec.items},         {"word", spec.words},
        {"brand", spec.brands}, {"category", spec.categories},
    };
    std::vector<RelationInfo> relations = {
        {rel::kSearchPurchase, 0, 1, true}, {rel::kWriteUser, 0, 2, false},
        {rel::kWriteItem, 1, 2, false},     {rel::kAlsoBought, 1, 1, false},
        {rel::kAlsoViewed, 1, 1, false},    {rel::kBoughtTogether, 1, 1, false},
        {rel::kIsBrand, 1, 3, false},       {rel::kIsCategory, 1, 4, false},
    };
    ModelSchema schema(types, relations, 2);

    Rng rng = Rng::child(spec.seed, "synthetic");
    ModelParams truth(schema, spec.alpha);
    const double a = spec.embed_scale;
    for (uint32_t t = 0; t < schema.num_types(); ++t) {
        auto table = truth.type_table(t);
        for (auto& v : table) v = static_cast<float>(rng.uniform(-a, a));
    }
    for (uint32_t r = 0; r < schema.num_relations(); ++r) {
        if (schema.relation(r).dynamic) continue;
        auto rv = truth.relation_vector(r);
        for (auto& v : rv) v = static_cast<float>(rng.uniform(-a / 2, a / 2));
    }
    auto w = truth.projector_w();
    for (uint32_t row = 0; row < spec.alpha; ++row)
        for (uint32_t col = 0; col < spec.alpha; ++col)
            w[static_cast<size_t>(row) * spec.alpha + col] = static_cast<float>(
                (row == col ? spec.projector_gain : 0.0) + rng.uniform(-0.1, 0.1));

    if (spec.brand_strength > 0.0 && spec.brands > 0) {
        // shared per-brand offset: items carry their brand's, users their
        // preferred brand's
        std::vector<std::vector<double>> offsets(spec.brands, std::vector<double>(spec.alpha));
        for (auto& o : offsets)
            for (auto& v : o) v = rng.uniform(-a, a);
        for (uint32_t i = 0; i < spec.items; ++i) {
            auto e = truth.embedding(1, i);
            const auto& o = offsets[i % spec.brands];
            for (uint32_t j = 0; j < spec.alpha; ++j)
                e[j] = static_cast<float>(e[j] + spec.brand_strength * o[j]);
        }
        for (uint32_t u = 0; u < spec.users; ++u) {
            auto e = truth.embedding(0, u);
            const auto& o = offsets[u % spec.brands];
            for (uint32_t j = 0; j < spec.alpha; ++j)
                e[j] = static_cast<float>(e[j] + spec.brand_strength * o[j]);
        }
        // brand entities sit at their offset so Is_brand sampling recovers
        // the planted assignment
        for (uint32_t b = 0; b < spec.brands; ++b) {
            auto e = truth.embedding(3, b);
            for (uint32_t j = 0; j < spec.alpha; ++j) e[j] = static_cast<float>(offsets[b][j]);
        }
    }

    SyntheticData data{std::move(truth), {}, {}, {}, {}};
    const ModelParams& gt = data.truth;

    data.query_words.resize(spec.num_queries);
    for (auto& words : data.query_words) {
        std::set<uint32_t> chosen;
        while (chosen.size() < spec.words_per_query)
            chosen.insert(static_cast<uint32_t>(rng.next_below(spec.words)));
        words.assign(chosen.begin(), chosen.end());
    }

    auto sample_static = [&](uint32_t relation, uint32_t head, uint32_t n_draws) {
        const auto& r = schema.relation(relation);
        auto translated = translate(gt, r.head_type, head, relation);
        auto logits = tail_logits(gt, translated, r.tail_type);
        for (uint32_t d = 0; d < n_draws; ++d)
            data.train.statics.push_back({relation, head, sample_softmax(logits, rng), 1});
    };

    for (uint32_t u = 0; u < spec.users; ++u) sample_static(1, u, spec.words_per_user);
    for (uint32_t i = 0; i < spec.items; ++i) {
        sample_static(2, i, spec.words_per_item);
        sample_static(3, i, spec.ab_per_item);
        sample_static(4, i, spec.av_per_item);
        sample_static(5, i, spec.bt_per_item);
        sample_static(6, i, 1);
        sample_static(7, i, spec.cats_per_item);
    }

    for (uint32_t u = 0; u < spec.users; ++u) {
        std::set<uint32_t> user_queries;
        while (user_queries.size() < spec.queries_per_user)
            user_queries.insert(static_cast<uint32_t>(rng.next_below(spec.num_queries)));
        for (uint32_t q : user_queries) {
            auto v = project_query(gt, data.query_words[q]);
            auto translated = translate(gt, 0, u, v);
            auto logits = tail_logits(gt, translated, 1);
            std::set<uint32_t> bought;
            for (uint32_t d = 0; d < spec.purchases_per_pair; ++d)
                bought.insert(sample_softmax(logits, rng));
            std::vector<uint32_t> train_items, test_items;
            for (uint32_t item : bought) {
                if (spec.hold_out_ratio > 0.0 && rng.next_double() < spec.hold_out_ratio)
                    test_items.push_back(item);
                else
                    train_items.push_back(item);
            }
            // a pair that lost everything to the split keeps one purchase
            if (train_items.empty() && !test_items.empty()) {
                train_items.push_back(test_items.back());
                test_items.pop_back();
            }
            for (uint32_t item : train_items) data.train.dynamics.push_back({u, q, item, 1});
            if (!train_items.empty()) {
                auto& held = data.held_in[{u, q}];
                held.insert(held.end(), train_items.begin(), train_items.end());
                std::sort(held.begin(), held.end());
                held.erase(std::unique(held.begin(), held.end()), held.end());
            }
            if (!test_items.empty()) {
                auto& rel = data.test.relevant[{u, q}];
                rel.insert(rel.end(), test_items.begin(), test_items.end());
                std::sort(rel.begin(), rel.end());
                rel.erase(std::unique(rel.begin(), rel.end()), rel.end());
            }
        }
    }

    data.train.finalize(schema.num_relations());
    return data;
}

}  // namespace kge::testing

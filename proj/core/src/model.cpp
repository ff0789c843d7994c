#include "kge/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kge/rng.hpp"

namespace kge {

ModelParams::ModelParams(ModelSchema schema, uint32_t alpha)
    : schema_(std::move(schema)), alpha_(alpha) {
    if (alpha == 0) throw std::invalid_argument("embedding dimension must be >= 1");
    embeddings_.resize(schema_.num_types());
    for (uint32_t t = 0; t < schema_.num_types(); ++t)
        embeddings_[t].assign(static_cast<size_t>(schema_.type(t).count) * alpha_, 0.0f);
    relation_vectors_.resize(schema_.num_relations());
    for (uint32_t r = 0; r < schema_.num_relations(); ++r)
        if (!schema_.relation(r).dynamic) relation_vectors_[r].assign(alpha_, 0.0f);
    w_.assign(static_cast<size_t>(alpha_) * alpha_, 0.0f);
    b_.assign(alpha_, 0.0f);
}

ModelParams ModelParams::init(ModelSchema schema, uint32_t alpha, uint64_t seed) {
    ModelParams p(std::move(schema), alpha);
    const double bound = 0.5 / alpha;
    Rng rng = Rng::child(seed, "init");
    for (auto& table : p.embeddings_)
        for (auto& v : table) v = static_cast<float>(rng.uniform(-bound, bound));
    for (auto& v : p.w_) v = static_cast<float>(rng.uniform(-bound, bound));
    // relation vectors and b stay zero
    return p;
}

std::span<float> ModelParams::embedding(uint32_t type, uint32_t id) {
    return {embeddings_[type].data() + static_cast<size_t>(id) * alpha_, alpha_};
}

std::span<const float> ModelParams::embedding(uint32_t type, uint32_t id) const {
    return {embeddings_[type].data() + static_cast<size_t>(id) * alpha_, alpha_};
}

std::span<float> ModelParams::relation_vector(uint32_t relation) {
    if (schema_.relation(relation).dynamic)
        throw std::invalid_argument("dynamic relation has no stored vector");
    return relation_vectors_[relation];
}

std::span<const float> ModelParams::relation_vector(uint32_t relation) const {
    if (schema_.relation(relation).dynamic)
        throw std::invalid_argument("dynamic relation has no stored vector");
    return relation_vectors_[relation];
}

bool ModelParams::all_finite() const {
    auto ok = [](const std::vector<float>& v) {
        return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
    };
    for (const auto& t : embeddings_)
        if (!ok(t)) return false;
    for (const auto& r : relation_vectors_)
        if (!ok(r)) return false;
    return ok(w_) && ok(b_);
}

QueryVector project_query(const ModelParams& params, std::span<const uint32_t> word_ids) {
    if (word_ids.empty()) throw std::invalid_argument("query has no words");
    const uint32_t alpha = params.alpha();
    const uint32_t word_type = params.schema().word_type();
    std::vector<double> mean(alpha, 0.0);
    for (uint32_t id : word_ids) {
        auto w = params.embedding(word_type, id);
        for (uint32_t j = 0; j < alpha; ++j) mean[j] += w[j];
    }
    const double inv = 1.0 / static_cast<double>(word_ids.size());
    for (auto& m : mean) m *= inv;

    QueryVector q;
    q.v.resize(alpha);
    auto w = params.projector_w();
    auto b = params.projector_b();
    for (uint32_t row = 0; row < alpha; ++row) {
        double z = b[row];
        const float* wrow = w.data() + static_cast<size_t>(row) * alpha;
        for (uint32_t j = 0; j < alpha; ++j) z += static_cast<double>(wrow[j]) * mean[j];
        q.v[row] = std::tanh(z);
    }
    return q;
}

std::vector<double> translate(const ModelParams& params, uint32_t head_type, uint32_t head_id,
                              uint32_t relation) {
    const auto& rel = params.schema().relation(relation);
    if (rel.dynamic)
        throw std::invalid_argument("dynamic relation requires a query vector");
    if (rel.head_type != head_type)
        throw std::invalid_argument("head type does not match relation " + rel.name);
    auto head = params.embedding(head_type, head_id);
    auto r = params.relation_vector(relation);
    std::vector<double> out(params.alpha());
    for (uint32_t j = 0; j < params.alpha(); ++j)
        out[j] = static_cast<double>(head[j]) + static_cast<double>(r[j]);
    return out;
}

std::vector<double> translate(const ModelParams& params, uint32_t head_type, uint32_t head_id,
                              const QueryVector& query) {
    const auto& rel = params.schema().relation(params.schema().dynamic_relation());
    if (rel.head_type != head_type)
        throw std::invalid_argument("head type does not match relation " + rel.name);
    if (query.v.size() != params.alpha())
        throw std::invalid_argument("query vector dimension mismatch");
    auto head = params.embedding(head_type, head_id);
    std::vector<double> out(params.alpha());
    for (uint32_t j = 0; j < params.alpha(); ++j)
        out[j] = static_cast<double>(head[j]) + query.v[j];
    return out;
}

double score_tail(const ModelParams& params, std::span<const double> translated,
                  uint32_t tail_type, uint32_t tail_id) {
    if (tail_id >= params.schema().type(tail_type).count)
        throw std::out_of_range("tail id out of range");
    auto tail = params.embedding(tail_type, tail_id);
    double s = 0.0;
    for (uint32_t j = 0; j < params.alpha(); ++j) s += translated[j] * static_cast<double>(tail[j]);
    return s;
}

double softmax_prob(const ModelParams& params, std::span<const double> translated,
                    uint32_t tail_type, uint32_t tail,
                    std::span<const uint32_t> candidates) {
    if (candidates.empty()) throw std::invalid_argument("empty candidate set");
    double max_logit = -std::numeric_limits<double>::infinity();
    double tail_logit = 0.0;
    bool found = false;
    std::vector<double> logits;
    logits.reserve(candidates.size());
    for (uint32_t c : candidates) {
        double s = score_tail(params, translated, tail_type, c);
        logits.push_back(s);
        max_logit = std::max(max_logit, s);
        if (c == tail && !found) {
            tail_logit = s;
            found = true;
        }
    }
    if (!found) throw std::invalid_argument("tail not in candidate set");
    double denom = 0.0;
    for (double s : logits) denom += std::exp(s - max_logit);
    return std::exp(tail_logit - max_logit) / denom;
}

double softmax_prob(const ModelParams& params, uint32_t head_type, uint32_t head,
                    uint32_t relation, uint32_t tail, std::span<const uint32_t> candidates) {
    auto translated = translate(params, head_type, head, relation);
    return softmax_prob(params, translated, params.schema().relation(relation).tail_type, tail,
                        candidates);
}

}  // namespace kge

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kge/schema.hpp"

namespace kge {

// Session-dependent embedding of the dynamic relation, v = f(q).
// Components lie strictly inside (-1, 1).
struct QueryVector {
    std::vector<double> v;
};

// All learnable parameters: one embedding table per entity type, one
// translation vector per static relation, and the query projector (W, b).
// Stored as 32-bit floats (the serialized form); all arithmetic on top of
// them runs in double.
class ModelParams {
public:
    ModelParams() = default;
    ModelParams(ModelSchema schema, uint32_t alpha);  // zero-initialized

    // Embeddings uniform in [-0.5/alpha, +0.5/alpha]; W entries uniform in
    // the same range; relation vectors and b zero.
    static ModelParams init(ModelSchema schema, uint32_t alpha, uint64_t seed);

    uint32_t alpha() const { return alpha_; }
    const ModelSchema& schema() const { return schema_; }

    std::span<float> embedding(uint32_t type, uint32_t id);
    std::span<const float> embedding(uint32_t type, uint32_t id) const;
    std::span<float> relation_vector(uint32_t relation);
    std::span<const float> relation_vector(uint32_t relation) const;
    std::span<float> projector_w() { return w_; }
    std::span<const float> projector_w() const { return w_; }
    std::span<float> projector_b() { return b_; }
    std::span<const float> projector_b() const { return b_; }

    std::span<float> type_table(uint32_t type) { return embeddings_[type]; }
    std::span<const float> type_table(uint32_t type) const { return embeddings_[type]; }

    bool all_finite() const;

private:
    ModelSchema schema_;
    uint32_t alpha_ = 0;
    std::vector<std::vector<float>> embeddings_;        // per type, row-major
    std::vector<std::vector<float>> relation_vectors_;  // per relation; empty for the dynamic one
    std::vector<float> w_;                              // alpha x alpha, row-major
    std::vector<float> b_;                              // alpha
};

// v = tanh(W * mean(word embeddings) + b). Repeated ids contribute once per
// occurrence; extracted queries are already deduplicated.
QueryVector project_query(const ModelParams& params, std::span<const uint32_t> word_ids);

// head + relation vector. The relation must be static and its head type
// must match head_type.
std::vector<double> translate(const ModelParams& params, uint32_t head_type, uint32_t head_id,
                              uint32_t relation);

// head + query vector, for the dynamic relation. head_type must be the
// dynamic relation's head type.
std::vector<double> translate(const ModelParams& params, uint32_t head_type, uint32_t head_id,
                              const QueryVector& query);

// Dot product of a translated vector and a tail embedding.
double score_tail(const ModelParams& params, std::span<const double> translated,
                  uint32_t tail_type, uint32_t tail_id);

// exp((x+r).y) / sum over the candidate set, with max-logit subtraction.
// The tail must be a member of the candidate set.
double softmax_prob(const ModelParams& params, std::span<const double> translated,
                    uint32_t tail_type, uint32_t tail,
                    std::span<const uint32_t> candidates);
double softmax_prob(const ModelParams& params, uint32_t head_type, uint32_t head,
                    uint32_t relation, uint32_t tail, std::span<const uint32_t> candidates);

}  // namespace kge

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "kge/corpus.hpp"
#include "kge/model.hpp"
#include "kge/rng.hpp"

namespace kge {

// Thrown when training detects non-finite values; the CLI maps it to exit
// code 3.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainConfig {
    uint32_t alpha = 300;
    double lambda = 0.5;        // dynamic relation weight
    uint32_t negatives = 5;     // k
    uint32_t epochs = 20;
    double lr_start = 0.5;
    uint32_t batch_size = 64;
    double grad_clip_norm = 5.0;
    uint64_t seed = 1;
    uint32_t threads = 1;       // >1 enables relaxed (non-deterministic) mode

    void validate() const;
};

// Negative-sampling noise distributions: tail-frequency-proportional P_r
// for static relations, uniform over items for the dynamic relation.
class NoiseTable {
public:
    NoiseTable(const ModelSchema& schema, const TripleStore& triples);

    void sample(uint32_t relation, uint32_t k, Rng& rng, std::vector<uint32_t>& out) const;
    double probability(uint32_t relation, uint32_t tail) const;

private:
    struct Table {
        std::vector<uint32_t> tails;
        std::vector<uint64_t> cumulative;
        uint64_t total = 0;
    };
    std::vector<Table> tables_;
    uint32_t dynamic_relation_ = 0;
    uint32_t num_items_ = 0;
};

struct GradKey {
    uint8_t kind = 0;    // 0 = entity table, 1 = relation vector
    uint32_t index = 0;  // entity type or relation id
    uint32_t row = 0;    // entity id; 0 for relation vectors
    auto operator<=>(const GradKey&) const = default;
};

// Sparse gradient accumulator for one batch. Rows are kept in a sorted map
// so that norm computation and application are order-deterministic.
class GradientSet {
public:
    explicit GradientSet(uint32_t alpha) : alpha_(alpha) {}

    std::vector<double>& row(const GradKey& key);
    std::vector<double>& projector_w();
    std::vector<double>& projector_b();

    const std::map<GradKey, std::vector<double>>& rows() const { return rows_; }
    const std::vector<double>& w() const { return w_; }
    const std::vector<double>& b() const { return b_; }
    uint32_t alpha() const { return alpha_; }

    double l2_norm() const;
    void scale(double factor);
    void clear();

private:
    uint32_t alpha_;
    std::map<GradKey, std::vector<double>> rows_;
    std::vector<double> w_, b_;
};

// log sigma((x+r).y) + sum_j log sigma(-(x+r).y'_j)
double triple_objective(const ModelParams& params, const StaticTriple& triple,
                        std::span<const uint32_t> negatives);
double triple_objective(const ModelParams& params, uint32_t user,
                        std::span<const uint32_t> query_words, uint32_t item,
                        std::span<const uint32_t> negatives);

// Accumulates the analytic ascent gradients of the objective, scaled by
// weight, into grads. Returns the (unweighted) objective value. Dynamic
// triples propagate through tanh into W, b and the query word embeddings.
double triple_gradients(const ModelParams& params, const StaticTriple& triple,
                        std::span<const uint32_t> negatives, double weight,
                        GradientSet& grads);
double triple_gradients(const ModelParams& params, uint32_t user,
                        std::span<const uint32_t> query_words, uint32_t item,
                        std::span<const uint32_t> negatives, double weight,
                        GradientSet& grads);

// Rescales so the global L2 norm is at most max_norm; returns the pre-clip norm.
double clip_gradients(GradientSet& grads, double max_norm);

// Adds lr * grads into the parameters.
void apply_gradients(ModelParams& params, const GradientSet& grads, double lr);

struct LossTraceRow {
    uint32_t epoch = 0;
    double mean_objective_static = 0.0;
    double mean_objective_dynamic = 0.0;
    double lr = 0.0;
};

struct TrainResult {
    std::vector<LossTraceRow> trace;
    uint64_t steps = 0;
};

// SGD ascent on the weighted static+dynamic objective: per epoch the
// occurrence-expanded triple stream is shuffled and consumed in batches;
// dynamic gradients weighed by lambda, static by (1-lambda); the batch
// gradient is norm-clipped; the learning rate decays linearly to zero over
// all steps. Throws on non-finite parameters.
TrainResult train(ModelParams& params, const TripleStore& triples,
                  const std::vector<std::vector<uint32_t>>& query_words,
                  const TrainConfig& config);

// 1-D numerical maximization (golden section) of
//   l(t) = count_xry * log sigma(t) + k * count_xr * p_r_y * log sigma(-t).
// The maximizer equals log(count_xry / (count_xr * p_r_y)) - log k.
double scalar_optimum(double count_xry, double count_xr, double p_r_y, double k);

}  // namespace kge

#include "kge/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace kge {

namespace {

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

double log_sigmoid(double x) {
    if (x >= 0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

double dot(std::span<const double> a, std::span<const float> b) {
    double s = 0.0;
    for (size_t j = 0; j < a.size(); ++j) s += a[j] * static_cast<double>(b[j]);
    return s;
}

void axpy(std::vector<double>& out, double c, std::span<const float> v) {
    for (size_t j = 0; j < out.size(); ++j) out[j] += c * static_cast<double>(v[j]);
}

void axpy(std::vector<double>& out, double c, std::span<const double> v) {
    for (size_t j = 0; j < out.size(); ++j) out[j] += c * v[j];
}

}  // namespace

void TrainConfig::validate() const {
    if (alpha == 0) throw std::invalid_argument("alpha must be >= 1");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must be in [0,1]");
    if (negatives == 0) throw std::invalid_argument("negatives must be >= 1");
    if (!(lr_start > 0.0)) throw std::invalid_argument("lr_start must be > 0");
    if (epochs == 0) throw std::invalid_argument("epochs must be >= 1");
    if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
    if (!(grad_clip_norm > 0.0)) throw std::invalid_argument("grad_clip_norm must be > 0");
}

NoiseTable::NoiseTable(const ModelSchema& schema, const TripleStore& triples)
    : dynamic_relation_(schema.dynamic_relation()),
      num_items_(schema.type(schema.item_type()).count) {
    tables_.resize(schema.num_relations());
    for (uint32_t r = 0; r < schema.num_relations(); ++r) {
        if (schema.relation(r).dynamic) continue;
        const auto& table = triples.tail_table(r);
        auto& t = tables_[r];
        t.tails.reserve(table.size());
        t.cumulative.reserve(table.size());
        for (const auto& [tail, count] : table) {
            t.total += count;
            t.tails.push_back(tail);
            t.cumulative.push_back(t.total);
        }
    }
}

void NoiseTable::sample(uint32_t relation, uint32_t k, Rng& rng,
                        std::vector<uint32_t>& out) const {
    out.clear();
    if (relation == dynamic_relation_) {
        if (num_items_ == 0) throw std::runtime_error("no items to sample");
        for (uint32_t i = 0; i < k; ++i)
            out.push_back(static_cast<uint32_t>(rng.next_below(num_items_)));
        return;
    }
    const auto& t = tables_[relation];
    if (t.total == 0) throw std::runtime_error("relation has no observed tails");
    for (uint32_t i = 0; i < k; ++i) {
        uint64_t u = rng.next_below(t.total);
        auto it = std::upper_bound(t.cumulative.begin(), t.cumulative.end(), u);
        out.push_back(t.tails[it - t.cumulative.begin()]);
    }
}

double NoiseTable::probability(uint32_t relation, uint32_t tail) const {
    if (relation == dynamic_relation_)
        return num_items_ ? 1.0 / static_cast<double>(num_items_) : 0.0;
    const auto& t = tables_[relation];
    if (t.total == 0) return 0.0;
    auto it = std::lower_bound(t.tails.begin(), t.tails.end(), tail);
    if (it == t.tails.end() || *it != tail) return 0.0;
    size_t i = it - t.tails.begin();
    uint64_t count = t.cumulative[i] - (i ? t.cumulative[i - 1] : 0);
    return static_cast<double>(count) / static_cast<double>(t.total);
}

std::vector<double>& GradientSet::row(const GradKey& key) {
    auto [it, inserted] = rows_.try_emplace(key);
    if (inserted) it->second.assign(alpha_, 0.0);
    return it->second;
}

std::vector<double>& GradientSet::projector_w() {
    if (w_.empty()) w_.assign(static_cast<size_t>(alpha_) * alpha_, 0.0);
    return w_;
}

std::vector<double>& GradientSet::projector_b() {
    if (b_.empty()) b_.assign(alpha_, 0.0);
    return b_;
}

double GradientSet::l2_norm() const {
    double s = 0.0;
    for (const auto& [key, g] : rows_)
        for (double v : g) s += v * v;
    for (double v : w_) s += v * v;
    for (double v : b_) s += v * v;
    return std::sqrt(s);
}

void GradientSet::scale(double factor) {
    for (auto& [key, g] : rows_)
        for (double& v : g) v *= factor;
    for (double& v : w_) v *= factor;
    for (double& v : b_) v *= factor;
}

void GradientSet::clear() {
    rows_.clear();
    w_.clear();
    b_.clear();
}

double triple_objective(const ModelParams& params, const StaticTriple& triple,
                        std::span<const uint32_t> negatives) {
    const auto& rel = params.schema().relation(triple.relation);
    auto t = translate(params, rel.head_type, triple.head, triple.relation);
    double obj = log_sigmoid(score_tail(params, t, rel.tail_type, triple.tail));
    for (uint32_t neg : negatives)
        obj += log_sigmoid(-score_tail(params, t, rel.tail_type, neg));
    return obj;
}

double triple_objective(const ModelParams& params, uint32_t user,
                        std::span<const uint32_t> query_words, uint32_t item,
                        std::span<const uint32_t> negatives) {
    const auto& schema = params.schema();
    auto v = project_query(params, query_words);
    auto t = translate(params, schema.user_type(), user, v);
    double obj = log_sigmoid(score_tail(params, t, schema.item_type(), item));
    for (uint32_t neg : negatives)
        obj += log_sigmoid(-score_tail(params, t, schema.item_type(), neg));
    return obj;
}

double triple_gradients(const ModelParams& params, const StaticTriple& triple,
                        std::span<const uint32_t> negatives, double weight,
                        GradientSet& grads) {
    const auto& rel = params.schema().relation(triple.relation);
    const uint32_t alpha = params.alpha();
    auto t = translate(params, rel.head_type, triple.head, triple.relation);

    double s_pos = score_tail(params, t, rel.tail_type, triple.tail);
    double obj = log_sigmoid(s_pos);
    double c_pos = sigmoid(-s_pos);

    // d/d(x+r), built up across the positive and the negatives
    std::vector<double> g_t(alpha, 0.0);
    axpy(g_t, c_pos, params.embedding(rel.tail_type, triple.tail));
    axpy(grads.row({0, rel.tail_type, triple.tail}), weight * c_pos, std::span<const double>(t));

    for (uint32_t neg : negatives) {
        double s_neg = score_tail(params, t, rel.tail_type, neg);
        obj += log_sigmoid(-s_neg);
        double c_neg = sigmoid(s_neg);
        axpy(g_t, -c_neg, params.embedding(rel.tail_type, neg));
        axpy(grads.row({0, rel.tail_type, neg}), -weight * c_neg, std::span<const double>(t));
    }

    axpy(grads.row({0, rel.head_type, triple.head}), weight, std::span<const double>(g_t));
    axpy(grads.row({1, triple.relation, 0}), weight, std::span<const double>(g_t));
    return obj;
}

double triple_gradients(const ModelParams& params, uint32_t user,
                        std::span<const uint32_t> query_words, uint32_t item,
                        std::span<const uint32_t> negatives, double weight,
                        GradientSet& grads) {
    const auto& schema = params.schema();
    const uint32_t alpha = params.alpha();
    const uint32_t user_type = schema.user_type();
    const uint32_t item_type = schema.item_type();
    const uint32_t word_type = schema.word_type();

    // forward: m -> z = Wm + b -> v = tanh(z) -> t = u + v
    std::vector<double> mean(alpha, 0.0);
    for (uint32_t id : query_words) axpy(mean, 1.0, params.embedding(word_type, id));
    const double inv_len = 1.0 / static_cast<double>(query_words.size());
    for (auto& m : mean) m *= inv_len;

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
    auto t = translate(params, user_type, user, q);

    double s_pos = score_tail(params, t, item_type, item);
    double obj = log_sigmoid(s_pos);
    double c_pos = sigmoid(-s_pos);

    std::vector<double> g_t(alpha, 0.0);
    axpy(g_t, c_pos, params.embedding(item_type, item));
    axpy(grads.row({0, item_type, item}), weight * c_pos, std::span<const double>(t));

    for (uint32_t neg : negatives) {
        double s_neg = score_tail(params, t, item_type, neg);
        obj += log_sigmoid(-s_neg);
        double c_neg = sigmoid(s_neg);
        axpy(g_t, -c_neg, params.embedding(item_type, neg));
        axpy(grads.row({0, item_type, neg}), -weight * c_neg, std::span<const double>(t));
    }

    axpy(grads.row({0, user_type, user}), weight, std::span<const double>(g_t));

    // back through v = tanh(z)
    std::vector<double> dz(alpha);
    for (uint32_t j = 0; j < alpha; ++j) dz[j] = (1.0 - q.v[j] * q.v[j]) * g_t[j];

    auto& gb = grads.projector_b();
    for (uint32_t j = 0; j < alpha; ++j) gb[j] += weight * dz[j];

    auto& gw = grads.projector_w();
    for (uint32_t row = 0; row < alpha; ++row) {
        double c = weight * dz[row];
        double* grow = gw.data() + static_cast<size_t>(row) * alpha;
        for (uint32_t j = 0; j < alpha; ++j) grow[j] += c * mean[j];
    }

    // d/dm = W^T dz, shared across the query's words
    std::vector<double> dm(alpha, 0.0);
    for (uint32_t row = 0; row < alpha; ++row) {
        const float* wrow = w.data() + static_cast<size_t>(row) * alpha;
        double c = dz[row];
        for (uint32_t j = 0; j < alpha; ++j) dm[j] += c * static_cast<double>(wrow[j]);
    }
    for (uint32_t id : query_words)
        axpy(grads.row({0, word_type, id}), weight * inv_len, std::span<const double>(dm));

    return obj;
}

double clip_gradients(GradientSet& grads, double max_norm) {
    double norm = grads.l2_norm();
    if (norm > max_norm && norm > 0.0) grads.scale(max_norm / norm);
    return norm;
}

void apply_gradients(ModelParams& params, const GradientSet& grads, double lr) {
    for (const auto& [key, g] : grads.rows()) {
        std::span<float> p = key.kind == 0 ? params.embedding(key.index, key.row)
                                           : params.relation_vector(key.index);
        for (size_t j = 0; j < p.size(); ++j)
            p[j] = static_cast<float>(static_cast<double>(p[j]) + lr * g[j]);
    }
    if (!grads.w().empty()) {
        auto w = params.projector_w();
        const auto& gw = grads.w();
        for (size_t j = 0; j < w.size(); ++j)
            w[j] = static_cast<float>(static_cast<double>(w[j]) + lr * gw[j]);
    }
    if (!grads.b().empty()) {
        auto b = params.projector_b();
        const auto& gb = grads.b();
        for (size_t j = 0; j < b.size(); ++j)
            b[j] = static_cast<float>(static_cast<double>(b[j]) + lr * gb[j]);
    }
}

namespace {

struct StreamEntry {
    uint8_t is_dynamic;
    uint32_t index;
};

std::vector<StreamEntry> expand_stream(const TripleStore& triples) {
    std::vector<StreamEntry> stream;
    stream.reserve(triples.static_occurrences() + triples.dynamic_occurrences());
    for (uint32_t i = 0; i < triples.statics.size(); ++i)
        for (uint64_t c = 0; c < triples.statics[i].count; ++c) stream.push_back({0, i});
    for (uint32_t i = 0; i < triples.dynamics.size(); ++i)
        for (uint64_t c = 0; c < triples.dynamics[i].count; ++c) stream.push_back({1, i});
    return stream;
}

struct EpochSums {
    double static_sum = 0.0, dynamic_sum = 0.0;
    uint64_t static_count = 0, dynamic_count = 0;
};

}  // namespace

TrainResult train(ModelParams& params, const TripleStore& triples,
                  const std::vector<std::vector<uint32_t>>& query_words,
                  const TrainConfig& config) {
    config.validate();
    auto stream = expand_stream(triples);
    if (stream.empty()) throw std::invalid_argument("triple store is empty");

    const auto& schema = params.schema();
    NoiseTable noise(schema, triples);
    const uint64_t steps_per_epoch = (stream.size() + config.batch_size - 1) / config.batch_size;
    const uint64_t total_steps = steps_per_epoch * config.epochs;

    Rng shuffle_rng = Rng::child(config.seed, "train/shuffle");
    TrainResult result;
    std::atomic<uint64_t> global_step{0};

    auto process_range = [&](size_t begin, size_t end, Rng& neg_rng, EpochSums& sums) {
        GradientSet grads(params.alpha());
        std::vector<uint32_t> negatives;
        for (size_t batch_start = begin; batch_start < end;
             batch_start += config.batch_size) {
            size_t batch_end = std::min(batch_start + config.batch_size, end);
            grads.clear();
            for (size_t s = batch_start; s < batch_end; ++s) {
                const auto& entry = stream[s];
                if (entry.is_dynamic) {
                    const auto& d = triples.dynamics[entry.index];
                    noise.sample(schema.dynamic_relation(), config.negatives, neg_rng,
                                 negatives);
                    const auto& words = query_words.at(d.query);
                    double obj =
                        config.lambda == 0.0
                            ? triple_objective(params, d.user, words, d.item, negatives)
                            : triple_gradients(params, d.user, words, d.item, negatives,
                                               config.lambda, grads);
                    sums.dynamic_sum += obj;
                    ++sums.dynamic_count;
                } else {
                    const auto& st = triples.statics[entry.index];
                    noise.sample(st.relation, config.negatives, neg_rng, negatives);
                    double obj =
                        config.lambda == 1.0
                            ? triple_objective(params, st, negatives)
                            : triple_gradients(params, st, negatives, 1.0 - config.lambda,
                                               grads);
                    sums.static_sum += obj;
                    ++sums.static_count;
                }
            }
            double norm = clip_gradients(grads, config.grad_clip_norm);
            if (!std::isfinite(norm))
                throw numerical_error("non-finite batch gradient; aborting training");
            uint64_t step = global_step.fetch_add(1);
            double lr = config.lr_start *
                        (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
            apply_gradients(params, grads, lr);
        }
    };

    for (uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(stream);
        EpochSums sums;
        if (config.threads <= 1) {
            Rng neg_rng = Rng::child(config.seed, "train/negatives/" + std::to_string(epoch));
            process_range(0, stream.size(), neg_rng, sums);
        } else {
            // Relaxed mode: unsynchronized row updates, no determinism guarantee.
            std::vector<std::thread> workers;
            std::vector<EpochSums> thread_sums(config.threads);
            std::vector<Rng> rngs;
            for (uint32_t w = 0; w < config.threads; ++w)
                rngs.push_back(Rng::child(config.seed, "train/negatives/" +
                                                           std::to_string(epoch) + "/" +
                                                           std::to_string(w)));
            size_t chunk = (stream.size() + config.threads - 1) / config.threads;
            for (uint32_t w = 0; w < config.threads; ++w) {
                size_t begin = std::min(stream.size(), w * chunk);
                size_t end = std::min(stream.size(), begin + chunk);
                workers.emplace_back([&, w, begin, end] {
                    process_range(begin, end, rngs[w], thread_sums[w]);
                });
            }
            for (auto& t : workers) t.join();
            for (const auto& s : thread_sums) {
                sums.static_sum += s.static_sum;
                sums.dynamic_sum += s.dynamic_sum;
                sums.static_count += s.static_count;
                sums.dynamic_count += s.dynamic_count;
            }
        }
        if (!params.all_finite())
            throw numerical_error("non-finite parameter detected after epoch " +
                                  std::to_string(epoch));
        double lr_now = config.lr_start *
                        (1.0 - static_cast<double>(global_step.load()) /
                                   static_cast<double>(total_steps));
        result.trace.push_back(
            {epoch, sums.static_count ? sums.static_sum / sums.static_count : 0.0,
             sums.dynamic_count ? sums.dynamic_sum / sums.dynamic_count : 0.0, lr_now});
    }
    result.steps = global_step.load();
    return result;
}

double scalar_optimum(double count_xry, double count_xr, double p_r_y, double k) {
    if (!(count_xry > 0.0) || !(count_xr > 0.0))
        throw std::invalid_argument("counts must be positive");
    if (!(p_r_y > 0.0 && p_r_y <= 1.0)) throw std::invalid_argument("p_r_y must be in (0,1]");
    if (!(k > 0.0)) throw std::invalid_argument("k must be positive");

    auto objective = [&](double t) {
        return count_xry * log_sigmoid(t) + k * count_xr * p_r_y * log_sigmoid(-t);
    };
    // golden-section search on the concave objective
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = -50.0, hi = 50.0;
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = objective(x1), f2 = objective(x2);
    for (int i = 0; i < 200 && (hi - lo) > 1e-12; ++i) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = objective(x1);
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace kge

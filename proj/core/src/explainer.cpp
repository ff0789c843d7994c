#include "kge/explainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace kge {

namespace {

// true when a's relation-name sequence precedes b's
bool name_seq_less(const ModelSchema& schema, const std::vector<uint32_t>& a,
                   const std::vector<uint32_t>& b) {
    size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) {
        const auto& na = schema.relation(a[i]).name;
        const auto& nb = schema.relation(b[i]).name;
        if (na != nb) return na < nb;
    }
    return a.size() < b.size();
}

}  // namespace

SchemaGraph::SchemaGraph(const ModelSchema& schema) : schema_(&schema) {
    const uint32_t n = schema.num_types();
    best_path_.assign(n, std::vector<std::optional<std::vector<uint32_t>>>(n));

    // Dijkstra from each source over unit-weight edges; the priority order
    // (hops, relation-name sequence) makes equal-hop ties deterministic.
    for (uint32_t src = 0; src < n; ++src) {
        auto& best = best_path_[src];
        best[src] = std::vector<uint32_t>{};
        auto worse = [&](const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
            if (a.size() != b.size()) return a.size() > b.size();
            return name_seq_less(schema, b, a);
        };
        using Item = std::pair<std::vector<uint32_t>, uint32_t>;  // path, node
        auto cmp = [&](const Item& a, const Item& b) { return worse(a.first, b.first); };
        std::priority_queue<Item, std::vector<Item>, decltype(cmp)> queue(cmp);
        queue.push({{}, src});
        while (!queue.empty()) {
            auto [path, node] = queue.top();
            queue.pop();
            if (best[node] && worse(path, *best[node])) continue;
            for (uint32_t r = 0; r < schema.num_relations(); ++r) {
                const auto& rel = schema.relation(r);
                if (rel.head_type != node) continue;
                std::vector<uint32_t> next = path;
                next.push_back(r);
                auto& slot = best[rel.tail_type];
                if (!slot || worse(*slot, next)) {
                    slot = next;
                    queue.push({std::move(next), rel.tail_type});
                }
            }
        }
    }
}

std::optional<std::vector<uint32_t>> SchemaGraph::shortest_type_path(uint32_t from_type,
                                                                     uint32_t to_type) const {
    if (from_type >= best_path_.size() || to_type >= best_path_.size())
        throw std::out_of_range("unknown entity type");
    return best_path_[from_type][to_type];
}

namespace {

// u or i translated along a relation path; the dynamic relation contributes
// the session's f(q).
std::vector<double> translate_path(const ModelParams& params, uint32_t start_type,
                                   uint32_t start_id, std::span<const uint32_t> path,
                                   uint32_t end_type, const QueryVector& query_vec) {
    const auto& schema = params.schema();
    auto start = params.embedding(start_type, start_id);
    std::vector<double> out(start.begin(), start.end());
    uint32_t at = start_type;
    for (uint32_t r : path) {
        const auto& rel = schema.relation(r);
        if (rel.head_type != at)
            throw std::invalid_argument("path breaks type compatibility at " + rel.name);
        if (rel.dynamic) {
            for (uint32_t j = 0; j < params.alpha(); ++j) out[j] += query_vec.v[j];
        } else {
            auto rv = params.relation_vector(r);
            for (uint32_t j = 0; j < params.alpha(); ++j) out[j] += static_cast<double>(rv[j]);
        }
        at = rel.tail_type;
    }
    if (at != end_type) throw std::invalid_argument("path does not end at the bridge type");
    return out;
}

// log sum_e exp(v . e) over a whole entity table
double log_partition(const ModelParams& params, uint32_t type, std::span<const double> v,
                     std::vector<double>& logits) {
    const uint32_t count = params.schema().type(type).count;
    logits.resize(count);
    double max_logit = -std::numeric_limits<double>::infinity();
    for (uint32_t e = 0; e < count; ++e) {
        logits[e] = score_tail(params, v, type, e);
        max_logit = std::max(max_logit, logits[e]);
    }
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - max_logit);
    return max_logit + std::log(sum);
}

}  // namespace

std::vector<BridgeScore> soft_match(const ModelParams& params, uint32_t user,
                                    std::span<const uint32_t> query_words, uint32_t item,
                                    uint32_t bridge_type, std::span<const uint32_t> path_u,
                                    std::span<const uint32_t> path_i, double beta) {
    const auto& schema = params.schema();
    bool has_dynamic = std::any_of(path_u.begin(), path_u.end(), [&](uint32_t r) {
        return schema.relation(r).dynamic;
    });
    QueryVector qv;
    if (has_dynamic)
        qv = project_query(params, query_words);
    else
        qv.v.assign(params.alpha(), 0.0);

    auto e_u = translate_path(params, schema.user_type(), user, path_u, bridge_type, qv);
    auto e_i = translate_path(params, schema.item_type(), item, path_i, bridge_type, qv);

    const double n_hops = static_cast<double>(path_u.size());
    const double m_hops = static_cast<double>(path_i.size());

    std::vector<double> logits_u, logits_i;
    double log_z_u = log_partition(params, bridge_type, e_u, logits_u);
    double log_z_i = log_partition(params, bridge_type, e_i, logits_i);

    std::vector<BridgeScore> scores(logits_u.size());
    for (uint32_t e = 0; e < logits_u.size(); ++e) {
        double lpu = logits_u[e] - beta * n_hops - log_z_u;
        double lpi = logits_i[e] - beta * m_hops - log_z_i;
        scores[e] = {e, lpu + lpi, lpu, lpi};
    }
    std::sort(scores.begin(), scores.end(), [](const BridgeScore& a, const BridgeScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.entity < b.entity;
    });
    return scores;
}

std::vector<Explanation> extract_explanations(const ModelParams& params,
                                              const SchemaGraph& graph, uint32_t user,
                                              std::span<const uint32_t> query_words,
                                              uint32_t item, uint32_t max_hops,
                                              uint32_t top_per_type, double beta) {
    const auto& schema = params.schema();
    if (user >= schema.type(schema.user_type()).count) throw std::out_of_range("unknown user");
    if (item >= schema.type(schema.item_type()).count) throw std::out_of_range("unknown item");

    std::vector<Explanation> out;
    for (uint32_t bridge = 0; bridge < schema.num_types(); ++bridge) {
        auto p_u = graph.shortest_type_path(schema.user_type(), bridge);
        auto p_i = graph.shortest_type_path(schema.item_type(), bridge);
        if (!p_u || !p_i) continue;
        if (p_u->size() + p_i->size() > max_hops) continue;
        // a bare Search&Purchase hop explains nothing
        if (p_i->empty() && p_u->size() == 1 &&
            schema.relation((*p_u)[0]).dynamic)
            continue;
        if (schema.type(bridge).count == 0) continue;
        auto scores = soft_match(params, user, query_words, item, bridge, *p_u, *p_i, beta);
        for (uint32_t rank = 0; rank < std::min<size_t>(top_per_type, scores.size()); ++rank) {
            Explanation e;
            e.user = user;
            e.item = item;
            e.path_u = *p_u;
            e.path_i = *p_i;
            e.bridge_type = bridge;
            e.bridge_entity = scores[rank].entity;
            e.score = scores[rank].score;
            out.push_back(std::move(e));
        }
    }
    std::sort(out.begin(), out.end(), [](const Explanation& a, const Explanation& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.bridge_type != b.bridge_type) return a.bridge_type < b.bridge_type;
        return a.bridge_entity < b.bridge_entity;
    });
    return out;
}

std::string render_template(const Explanation& explanation, const ModelSchema& schema,
                            const std::string& bridge_surface, const std::string& item_name) {
    const std::string& type_name = schema.type(explanation.bridge_type).name;
    if (type_name == "brand")
        return "Based on your profile and query, you may like to see somethings by " +
               bridge_surface + ", and " + item_name + " is a top product of this brand.";
    if (type_name == "category")
        return "Based on your profile and query, you may like to see somethings in " +
               bridge_surface + ", and " + item_name + " is a top product in this category.";
    if (type_name == "word")
        return "Based on your profile and query, you often mention " + bridge_surface +
               ", which is frequently used to describe " + item_name + ".";
    auto join = [&](const std::vector<uint32_t>& path) {
        if (path.empty()) return std::string("itself");
        std::string s;
        for (size_t i = 0; i < path.size(); ++i) {
            if (i) s += "+";
            s += schema.relation(path[i]).name;
        }
        return s;
    };
    return "Based on your profile and query, you reach " + bridge_surface + " through " +
           join(explanation.path_u) + " while " + item_name + " reaches it through " +
           join(explanation.path_i) + ".";
}

}  // namespace kge

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kge/model.hpp"

namespace kge {

// The graph of entity types with one directed unit-weight edge per
// relation, over which explanation paths are routed before entity-level
// scoring.
class SchemaGraph {
public:
    explicit SchemaGraph(const ModelSchema& schema);

    // Minimal-hop forward path as a relation-id list; the empty list is the
    // identity path when from == to. Among equal-hop paths the
    // lexicographically smallest relation-name sequence wins. nullopt when
    // unreachable.
    std::optional<std::vector<uint32_t>> shortest_type_path(uint32_t from_type,
                                                            uint32_t to_type) const;

    const ModelSchema& schema() const { return *schema_; }

private:
    const ModelSchema* schema_;
    // best_path_[from][to]; unreachable entries are nullopt
    std::vector<std::vector<std::optional<std::vector<uint32_t>>>> best_path_;
};

struct BridgeScore {
    uint32_t entity = 0;
    double score = 0.0;     // S(e|u,i)
    double log_p_u = 0.0;   // log P(e|e_u)
    double log_p_i = 0.0;   // log P(e|e_i)
};

// Soft matching over one bridge subspace: e_u = u + sum of relation vectors
// along p_u (a dynamic hop contributes f(q)), e_i likewise from i, and
// P(e|e_u) = exp(e_u.e - beta*n) / sum_e' exp(e_u.e'). Scores are returned
// for the whole subspace, sorted descending, ties by ascending entity id.
std::vector<BridgeScore> soft_match(const ModelParams& params, uint32_t user,
                                    std::span<const uint32_t> query_words, uint32_t item,
                                    uint32_t bridge_type, std::span<const uint32_t> path_u,
                                    std::span<const uint32_t> path_i, double beta = 1.0);

struct Explanation {
    uint32_t user = 0;
    uint32_t item = 0;
    std::vector<uint32_t> path_u;  // relation ids, user side
    std::vector<uint32_t> path_i;  // relation ids, item side
    uint32_t bridge_type = 0;
    uint32_t bridge_entity = 0;
    double score = 0.0;
};

// Runs the soft matching algorithm: per bridge type, route both endpoints
// with shortest_type_path, skip unreachable types, types beyond max_hops
// combined, and the path made of the dynamic relation alone; keep the
// top_per_type entities of each surviving type. Sorted by score descending.
std::vector<Explanation> extract_explanations(const ModelParams& params,
                                              const SchemaGraph& graph, uint32_t user,
                                              std::span<const uint32_t> query_words,
                                              uint32_t item, uint32_t max_hops = 4,
                                              uint32_t top_per_type = 6, double beta = 1.0);

// Fixed sentences keyed by the bridge type's name (brand, category, word);
// other types fall back to a generic sentence naming the path relations.
std::string render_template(const Explanation& explanation, const ModelSchema& schema,
                            const std::string& bridge_surface, const std::string& item_name);

}  // namespace kge

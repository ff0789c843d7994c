#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kge {

class EntityCatalog;

struct EntityTypeInfo {
    std::string name;
    uint32_t count = 0;
};

struct RelationInfo {
    std::string name;
    uint32_t head_type = 0;
    uint32_t tail_type = 0;
    bool dynamic = false;
};

// Entity types with cardinalities and typed relation signatures. Exactly
// one relation is dynamic (Search&Purchase); its embedding is computed per
// query from the designated word type's embeddings.
class ModelSchema {
public:
    ModelSchema() = default;
    ModelSchema(std::vector<EntityTypeInfo> types, std::vector<RelationInfo> relations,
                uint32_t word_type);

    uint32_t num_types() const { return static_cast<uint32_t>(types_.size()); }
    uint32_t num_relations() const { return static_cast<uint32_t>(relations_.size()); }
    const EntityTypeInfo& type(uint32_t t) const { return types_[t]; }
    const RelationInfo& relation(uint32_t r) const { return relations_[r]; }
    uint32_t dynamic_relation() const { return dynamic_relation_; }
    uint32_t word_type() const { return word_type_; }
    uint32_t user_type() const { return relations_[dynamic_relation_].head_type; }
    uint32_t item_type() const { return relations_[dynamic_relation_].tail_type; }

    std::optional<uint32_t> relation_by_name(std::string_view name) const;
    std::optional<uint32_t> type_by_name(std::string_view name) const;

private:
    std::vector<EntityTypeInfo> types_;
    std::vector<RelationInfo> relations_;
    uint32_t dynamic_relation_ = 0;
    uint32_t word_type_ = 0;
};

// Relation names of the standard product-search schema.
namespace rel {
inline constexpr const char* kSearchPurchase = "Search&Purchase";
inline constexpr const char* kWriteUser = "Write_user";
inline constexpr const char* kWriteItem = "Write_item";
inline constexpr const char* kAlsoBought = "Also_bought";
inline constexpr const char* kAlsoViewed = "Also_viewed";
inline constexpr const char* kBoughtTogether = "Bought_together";
inline constexpr const char* kIsBrand = "Is_brand";
inline constexpr const char* kIsCategory = "Is_category";
}  // namespace rel

// Builds the product schema from catalog cardinalities: user, item, word
// always; brand and category only when entities of that type exist (their
// relations are dropped with them).
ModelSchema product_schema(const EntityCatalog& catalog);

}  // namespace kge

#include "kge/schema.hpp"

#include <stdexcept>

#include "kge/corpus.hpp"

namespace kge {

ModelSchema::ModelSchema(std::vector<EntityTypeInfo> types, std::vector<RelationInfo> relations,
                         uint32_t word_type)
    : types_(std::move(types)), relations_(std::move(relations)), word_type_(word_type) {
    if (word_type_ >= types_.size()) throw std::invalid_argument("word type out of range");
    int dynamic_count = 0;
    for (uint32_t r = 0; r < relations_.size(); ++r) {
        const auto& rel = relations_[r];
        if (rel.head_type >= types_.size() || rel.tail_type >= types_.size())
            throw std::invalid_argument("relation " + rel.name + " references unknown type");
        if (rel.dynamic) {
            dynamic_relation_ = r;
            ++dynamic_count;
        }
    }
    if (dynamic_count != 1)
        throw std::invalid_argument("schema requires exactly one dynamic relation");
}

std::optional<uint32_t> ModelSchema::relation_by_name(std::string_view name) const {
    for (uint32_t r = 0; r < relations_.size(); ++r)
        if (relations_[r].name == name) return r;
    return std::nullopt;
}

std::optional<uint32_t> ModelSchema::type_by_name(std::string_view name) const {
    for (uint32_t t = 0; t < types_.size(); ++t)
        if (types_[t].name == name) return t;
    return std::nullopt;
}

ModelSchema product_schema(const EntityCatalog& catalog) {
    std::vector<EntityTypeInfo> types;
    std::vector<uint32_t> index(kNumEntityTypes, UINT32_MAX);
    for (uint32_t t : {kUserType, kItemType, kWordType}) {
        index[t] = static_cast<uint32_t>(types.size());
        types.push_back({entity_type_name(t), catalog.count(t)});
    }
    for (uint32_t t : {kBrandType, kCategoryType}) {
        if (catalog.count(t) == 0) continue;
        index[t] = static_cast<uint32_t>(types.size());
        types.push_back({entity_type_name(t), catalog.count(t)});
    }

    std::vector<RelationInfo> relations;
    relations.push_back({rel::kSearchPurchase, index[kUserType], index[kItemType], true});
    relations.push_back({rel::kWriteUser, index[kUserType], index[kWordType], false});
    relations.push_back({rel::kWriteItem, index[kItemType], index[kWordType], false});
    relations.push_back({rel::kAlsoBought, index[kItemType], index[kItemType], false});
    relations.push_back({rel::kAlsoViewed, index[kItemType], index[kItemType], false});
    relations.push_back({rel::kBoughtTogether, index[kItemType], index[kItemType], false});
    if (index[kBrandType] != UINT32_MAX)
        relations.push_back({rel::kIsBrand, index[kItemType], index[kBrandType], false});
    if (index[kCategoryType] != UINT32_MAX)
        relations.push_back({rel::kIsCategory, index[kItemType], index[kCategoryType], false});

    return ModelSchema(std::move(types), std::move(relations), index[kWordType]);
}

}  // namespace kge

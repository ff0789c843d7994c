#include "kge/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace kge {

static_assert(sizeof(float) == 4);
static_assert(std::endian::native == std::endian::little,
              "model format is little-endian; byte swapping is not implemented");

namespace {

constexpr char kMagic[4] = {'D', 'R', 'E', 'M'};

template <typename T>
void write_scalar(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_scalar(std::ifstream& in) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("truncated model file");
    return value;
}

void write_string(std::ofstream& out, const std::string& s) {
    write_scalar<uint32_t>(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
    uint32_t len = read_scalar<uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw std::runtime_error("truncated model file");
    return s;
}

void write_floats(std::ofstream& out, std::span<const float> v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(float)));
}

void read_floats(std::ifstream& in, std::span<float> v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
    if (!in) throw std::runtime_error("truncated model file");
}

}  // namespace

void save_model(const std::string& path, const ModelParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out.write(kMagic, 4);
    write_scalar<uint32_t>(out, kModelFormatVersion);
    write_scalar<uint32_t>(out, params.alpha());

    const auto& schema = params.schema();
    write_scalar<uint32_t>(out, schema.num_types());
    for (uint32_t t = 0; t < schema.num_types(); ++t) {
        write_string(out, schema.type(t).name);
        write_scalar<uint64_t>(out, schema.type(t).count);
    }
    write_scalar<uint32_t>(out, schema.num_relations());
    for (uint32_t r = 0; r < schema.num_relations(); ++r) {
        const auto& rel = schema.relation(r);
        write_string(out, rel.name);
        write_scalar<uint32_t>(out, rel.head_type);
        write_scalar<uint32_t>(out, rel.tail_type);
        write_scalar<uint8_t>(out, rel.dynamic ? 1 : 0);
    }
    write_scalar<uint32_t>(out, schema.word_type());

    for (uint32_t t = 0; t < schema.num_types(); ++t) write_floats(out, params.type_table(t));
    for (uint32_t r = 0; r < schema.num_relations(); ++r)
        if (!schema.relation(r).dynamic) write_floats(out, params.relation_vector(r));
    write_floats(out, params.projector_w());
    write_floats(out, params.projector_b());
    if (!out) throw std::runtime_error("write failed: " + path);
}

ModelParams load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a model file (bad magic): " + path);
    uint32_t version = read_scalar<uint32_t>(in);
    if (version != kModelFormatVersion)
        throw std::runtime_error("unsupported model format version " +
                                 std::to_string(version) + " (expected " +
                                 std::to_string(kModelFormatVersion) + ")");
    uint32_t alpha = read_scalar<uint32_t>(in);

    uint32_t num_types = read_scalar<uint32_t>(in);
    std::vector<EntityTypeInfo> types(num_types);
    for (auto& t : types) {
        t.name = read_string(in);
        t.count = static_cast<uint32_t>(read_scalar<uint64_t>(in));
    }
    uint32_t num_relations = read_scalar<uint32_t>(in);
    std::vector<RelationInfo> relations(num_relations);
    for (auto& r : relations) {
        r.name = read_string(in);
        r.head_type = read_scalar<uint32_t>(in);
        r.tail_type = read_scalar<uint32_t>(in);
        r.dynamic = read_scalar<uint8_t>(in) != 0;
    }
    uint32_t word_type = read_scalar<uint32_t>(in);

    ModelParams params(ModelSchema(std::move(types), std::move(relations), word_type), alpha);
    const auto& schema = params.schema();
    for (uint32_t t = 0; t < schema.num_types(); ++t) read_floats(in, params.type_table(t));
    for (uint32_t r = 0; r < schema.num_relations(); ++r)
        if (!schema.relation(r).dynamic) read_floats(in, params.relation_vector(r));
    read_floats(in, params.projector_w());
    read_floats(in, params.projector_b());
    return params;
}

}  // namespace kge

#include "kge/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "kge/trec.hpp"

namespace kge {

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::vector<uint32_t> parse_id_list(const std::string& field) {
    std::vector<uint32_t> ids;
    std::istringstream ss(field);
    uint32_t v;
    while (ss >> v) ids.push_back(v);
    return ids;
}

}  // namespace

void write_catalogs(const std::string& path, const EntityCatalog& catalog) {
    auto out = open_out(path);
    for (uint32_t t = 0; t < kNumEntityTypes; ++t)
        for (uint32_t i = 0; i < catalog.count(t); ++i)
            out << entity_type_name(t) << '\t' << catalog.surface(t, i) << '\t' << i << '\n';
}

EntityCatalog read_catalogs(const std::string& path) {
    auto in = open_in(path);
    std::vector<std::vector<std::string>> surfaces(kNumEntityTypes);
    std::string line;
    uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto tab1 = line.find('\t');
        auto tab2 = line.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos)
            throw std::runtime_error("malformed catalog line " + std::to_string(line_no));
        std::string type_name = line.substr(0, tab1);
        std::string surface = line.substr(tab1 + 1, tab2 - tab1 - 1);
        uint32_t type = kNumEntityTypes;
        for (uint32_t t = 0; t < kNumEntityTypes; ++t)
            if (type_name == entity_type_name(t)) type = t;
        if (type == kNumEntityTypes)
            throw std::runtime_error("unknown entity type in catalog: " + type_name);
        surfaces[type].push_back(surface);
    }
    return EntityCatalog(std::move(surfaces));
}

void write_vocabulary(const std::string& path, const Vocabulary& vocabulary) {
    auto out = open_out(path);
    for (uint32_t i = 0; i < vocabulary.size(); ++i)
        out << vocabulary.word(i) << '\t' << vocabulary.frequency(i) << '\n';
}

void write_queries(const std::string& path, const QuerySet& queries,
                   const std::vector<uint8_t>& query_is_test) {
    auto out = open_out(path);
    for (uint32_t q = 0; q < queries.size(); ++q) {
        out << q << '\t';
        const auto& words = queries.words(q);
        for (size_t i = 0; i < words.size(); ++i) out << (i ? " " : "") << words[i];
        out << '\t';
        const auto& items = queries.items(q);
        for (size_t i = 0; i < items.size(); ++i) out << (i ? " " : "") << items[i];
        out << '\t' << (q < query_is_test.size() && query_is_test[q] ? 1 : 0) << '\n';
    }
}

std::pair<QuerySet, std::vector<uint8_t>> read_queries(const std::string& path) {
    auto in = open_in(path);
    std::vector<std::vector<uint32_t>> words, items;
    std::vector<uint8_t> is_test;
    std::string line;
    uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        size_t start = 0;
        for (;;) {
            auto tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() != 4)
            throw std::runtime_error("malformed query line " + std::to_string(line_no));
        words.push_back(parse_id_list(fields[1]));
        items.push_back(parse_id_list(fields[2]));
        is_test.push_back(fields[3] == "1" ? 1 : 0);
    }
    return {QuerySet(std::move(words), std::move(items)), std::move(is_test)};
}

void write_judgments(const std::string& path, const Judgments& judgments) {
    auto out = open_out(path);
    for (const auto& [key, items] : judgments.relevant)
        for (uint32_t item : items)
            out << key.first << '\t' << key.second << '\t' << item << '\n';
}

Judgments read_judgments(const std::string& path) {
    auto in = open_in(path);
    Judgments judgments;
    std::string line;
    uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        uint32_t user, query, item;
        if (!(ss >> user >> query >> item))
            throw std::runtime_error("malformed judgment line " + std::to_string(line_no));
        judgments.relevant[{user, query}].push_back(item);
    }
    for (auto& [key, items] : judgments.relevant) std::sort(items.begin(), items.end());
    return judgments;
}

void write_qrels_file(const std::string& path, const Judgments& judgments,
                      const EntityCatalog& catalog) {
    auto out = open_out(path);
    for (const auto& [key, items] : judgments.relevant) {
        std::string query_key = make_query_key(catalog.surface(kUserType, key.first), key.second);
        for (uint32_t item : items)
            write_qrels_line(out, query_key, catalog.surface(kItemType, item));
    }
}

namespace {

constexpr char kTripleMagic[4] = {'D', 'R', 'T', 'R'};
constexpr uint32_t kTripleFormatVersion = 1;

static_assert(std::endian::native == std::endian::little);

}  // namespace

void write_triples(const std::string& path, const TripleStore& triples) {
    auto out = open_out(path, std::ios::binary);
    out.write(kTripleMagic, 4);
    uint32_t version = kTripleFormatVersion;
    out.write(reinterpret_cast<const char*>(&version), 4);
    uint64_t n = triples.statics.size();
    out.write(reinterpret_cast<const char*>(&n), 8);
    for (const auto& t : triples.statics) {
        out.write(reinterpret_cast<const char*>(&t.relation), 4);
        out.write(reinterpret_cast<const char*>(&t.head), 4);
        out.write(reinterpret_cast<const char*>(&t.tail), 4);
        out.write(reinterpret_cast<const char*>(&t.count), 8);
    }
    n = triples.dynamics.size();
    out.write(reinterpret_cast<const char*>(&n), 8);
    for (const auto& t : triples.dynamics) {
        out.write(reinterpret_cast<const char*>(&t.user), 4);
        out.write(reinterpret_cast<const char*>(&t.query), 4);
        out.write(reinterpret_cast<const char*>(&t.item), 4);
        out.write(reinterpret_cast<const char*>(&t.count), 8);
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

TripleStore read_triples(const std::string& path, uint32_t num_relations) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kTripleMagic, 4) != 0)
        throw std::runtime_error("not a triple file (bad magic): " + path);
    uint32_t version;
    in.read(reinterpret_cast<char*>(&version), 4);
    if (version != kTripleFormatVersion)
        throw std::runtime_error("unsupported triple format version " +
                                 std::to_string(version));
    TripleStore triples;
    uint64_t n;
    in.read(reinterpret_cast<char*>(&n), 8);
    triples.statics.resize(n);
    for (auto& t : triples.statics) {
        in.read(reinterpret_cast<char*>(&t.relation), 4);
        in.read(reinterpret_cast<char*>(&t.head), 4);
        in.read(reinterpret_cast<char*>(&t.tail), 4);
        in.read(reinterpret_cast<char*>(&t.count), 8);
    }
    in.read(reinterpret_cast<char*>(&n), 8);
    triples.dynamics.resize(n);
    for (auto& t : triples.dynamics) {
        in.read(reinterpret_cast<char*>(&t.user), 4);
        in.read(reinterpret_cast<char*>(&t.query), 4);
        in.read(reinterpret_cast<char*>(&t.item), 4);
        in.read(reinterpret_cast<char*>(&t.count), 8);
    }
    if (!in) throw std::runtime_error("truncated triple file: " + path);
    triples.finalize(num_relations);
    return triples;
}

void write_documents(const std::string& path,
                     const std::vector<std::vector<std::string>>& documents) {
    auto out = open_out(path);
    for (size_t i = 0; i < documents.size(); ++i) {
        out << i << '\t';
        for (size_t j = 0; j < documents[i].size(); ++j)
            out << (j ? " " : "") << documents[i][j];
        out << '\n';
    }
}

std::vector<std::vector<std::string>> read_documents(const std::string& path) {
    auto in = open_in(path);
    std::vector<std::vector<std::string>> documents;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw std::runtime_error("malformed document line");
        std::vector<std::string> tokens;
        std::istringstream ss(line.substr(tab + 1));
        std::string tok;
        while (ss >> tok) tokens.push_back(tok);
        documents.push_back(std::move(tokens));
    }
    return documents;
}

void write_loss_trace(const std::string& path, const std::vector<LossTraceRow>& trace) {
    auto out = open_out(path);
    out << "epoch,mean_objective_static,mean_objective_dynamic,lr\n";
    for (const auto& row : trace)
        out << row.epoch << ',' << row.mean_objective_static << ','
            << row.mean_objective_dynamic << ',' << row.lr << '\n';
}

DatasetArtifacts load_dataset(const std::string& dir) {
    DatasetArtifacts data;
    data.catalog = read_catalogs(dir + "/catalogs.tsv");
    std::vector<std::string> words;
    std::vector<uint64_t> freqs;
    {
        auto in = open_in(dir + "/vocabulary.tsv");
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto tab = line.find('\t');
            words.push_back(line.substr(0, tab));
            freqs.push_back(std::stoull(line.substr(tab + 1)));
        }
    }
    data.vocabulary = Vocabulary(std::move(words), std::move(freqs));
    data.schema = product_schema(data.catalog);
    auto [queries, is_test] = read_queries(dir + "/queries.tsv");
    data.queries = std::move(queries);
    data.query_is_test = std::move(is_test);
    data.train = read_triples(dir + "/triples.bin", data.schema.num_relations());
    data.judgments = read_judgments(dir + "/judgments.tsv");
    return data;
}

}  // namespace kge

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kge/dataset_io.hpp"
#include "kge/model_io.hpp"
#include "kge/trec.hpp"

using namespace kge;

namespace {

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ModelSchema io_schema() {
    return ModelSchema({{"user", 3}, {"item", 4}, {"word", 5}},
                       {{rel::kSearchPurchase, 0, 1, true},
                        {rel::kWriteUser, 0, 2, false},
                        {rel::kWriteItem, 1, 2, false}},
                       2);
}

}  // namespace

TEST_CASE("model files round-trip bit-exactly") {
    auto params = ModelParams::init(io_schema(), 6, 99);
    auto path = temp_file("kge_model.drem");
    save_model(path, params);
    auto loaded = load_model(path);

    CHECK(loaded.alpha() == params.alpha());
    CHECK(loaded.schema().num_types() == 3);
    CHECK(loaded.schema().relation(0).dynamic);
    for (uint32_t t = 0; t < 3; ++t) {
        auto a = params.type_table(t);
        auto b = loaded.type_table(t);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
    }
    for (uint32_t r = 1; r <= 2; ++r) {
        auto a = params.relation_vector(r);
        auto b = loaded.relation_vector(r);
        for (size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
    }
    for (size_t i = 0; i < params.projector_w().size(); ++i)
        REQUIRE(params.projector_w()[i] == loaded.projector_w()[i]);

    SUBCASE("save, load, save produces identical bytes") {
        auto path2 = temp_file("kge_model2.drem");
        save_model(path2, loaded);
        CHECK(slurp(path) == slurp(path2));
        std::remove(path2.c_str());
    }

    SUBCASE("a version mismatch is rejected with a clear error") {
        auto bytes = slurp(path);
        bytes[4] = 99;  // version field follows the magic
        auto path3 = temp_file("kge_model_badver.drem");
        std::ofstream(path3, std::ios::binary).write(bytes.data(), bytes.size());
        CHECK_THROWS_WITH(load_model(path3), doctest::Contains("version"));
        std::remove(path3.c_str());
    }

    SUBCASE("garbage magic is rejected") {
        auto path4 = temp_file("kge_model_badmagic.drem");
        std::ofstream(path4, std::ios::binary) << "not a model";
        CHECK_THROWS_WITH(load_model(path4), doctest::Contains("magic"));
        std::remove(path4.c_str());
    }

    std::remove(path.c_str());
}

TEST_CASE("catalog, query, judgment and triple artifacts round-trip") {
    EntityCatalog catalog({{"u1", "u2"},
                           {"iA", "iB", "iC"},
                           {"alpha", "beta"},
                           {"Acme"},
                           {"Cat One", "Cat Two"}});
    auto cpath = temp_file("kge_catalogs.tsv");
    write_catalogs(cpath, catalog);
    auto cat2 = read_catalogs(cpath);
    CHECK(cat2.count(kItemType) == 3);
    CHECK(*cat2.id_of(kItemType, "iB") == 1);
    CHECK(cat2.surface(kCategoryType, 0) == "Cat One");
    std::remove(cpath.c_str());

    QuerySet queries({{0, 1}, {1}}, {{0, 2}, {1}});
    std::vector<uint8_t> is_test{0, 1};
    auto qpath = temp_file("kge_queries.tsv");
    write_queries(qpath, queries, is_test);
    auto [q2, t2] = read_queries(qpath);
    CHECK(q2.size() == 2);
    CHECK(q2.words(0) == std::vector<uint32_t>{0, 1});
    CHECK(q2.items(0) == std::vector<uint32_t>{0, 2});
    CHECK(t2 == is_test);
    std::remove(qpath.c_str());

    Judgments judgments;
    judgments.relevant[{0, 1}] = {2};
    judgments.relevant[{1, 0}] = {0, 1};
    auto jpath = temp_file("kge_judgments.tsv");
    write_judgments(jpath, judgments);
    auto j2 = read_judgments(jpath);
    CHECK(j2.relevant == judgments.relevant);
    std::remove(jpath.c_str());

    TripleStore store;
    store.statics = {{1, 0, 1, 2}, {1, 0, 1, 1}, {2, 2, 0, 1}};
    store.dynamics = {{0, 1, 2, 3}};
    store.finalize(3);
    CHECK(store.statics.size() == 2);  // duplicates merged
    CHECK(store.statics[0].count == 3);
    auto tpath = temp_file("kge_triples.bin");
    write_triples(tpath, store);
    auto s2 = read_triples(tpath, 3);
    REQUIRE(s2.statics.size() == store.statics.size());
    CHECK(s2.statics[0].count == 3);
    CHECK(s2.dynamics[0].item == 2);
    CHECK(s2.tail_probability(1, 1) == doctest::Approx(1.0));
    CHECK_THROWS(read_triples(cpath, 3));  // deleted/garbage path
    std::remove(tpath.c_str());

    std::vector<std::vector<std::string>> docs = {{"a", "b"}, {}, {"c"}};
    auto dpath = temp_file("kge_docs.tsv");
    write_documents(dpath, docs);
    auto d2 = read_documents(dpath);
    REQUIRE(d2.size() == 3);
    CHECK(d2[0] == docs[0]);
    CHECK(d2[1].empty());
    std::remove(dpath.c_str());
}

TEST_CASE("qrels and query keys survive the TREC round trip") {
    EntityCatalog catalog(
        {{"A17V9XL4CWTQ6G"}, {"B00BKEQBI0"}, {"w"}, {}, {}});
    Judgments judgments;
    judgments.relevant[{0, 7}] = {0};
    auto path = temp_file("kge_judgments.qrels");
    write_qrels_file(path, judgments, catalog);
    std::ifstream in(path);
    auto qrels = read_qrels(in);
    REQUIRE(qrels.size() == 1);
    CHECK(qrels.count("A17V9XL4CWTQ6G_7") == 1);
    CHECK(qrels["A17V9XL4CWTQ6G_7"].contains("B00BKEQBI0"));
    auto [user, query] = parse_query_key("A17V9XL4CWTQ6G_7");
    CHECK(user == "A17V9XL4CWTQ6G");
    CHECK(query == 7);
    auto [user2, query2] = parse_query_key("user_with_underscores_12");
    CHECK(user2 == "user_with_underscores");
    CHECK(query2 == 12);
    std::remove(path.c_str());
}

TEST_CASE("loss traces serialize as the four-column csv") {
    std::vector<LossTraceRow> trace = {{0, -4.1, -3.2, 0.5}, {1, -3.9, -3.0, 0.25}};
    auto path = temp_file("kge_trace.csv");
    write_loss_trace(path, trace);
    std::ifstream in(path);
    std::string header, row0;
    std::getline(in, header);
    std::getline(in, row0);
    CHECK(header == "epoch,mean_objective_static,mean_objective_dynamic,lr");
    CHECK(row0 == "0,-4.1,-3.2,0.5");
    std::remove(path.c_str());
}

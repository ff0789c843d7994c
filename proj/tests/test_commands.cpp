#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kge/commands.hpp"
#include "kge/model_io.hpp"
#include "kge/trec.hpp"

using namespace kge;
namespace fs = std::filesystem;

namespace {

struct PipelineFixture {
    fs::path root;
    RunConfig config;

    PipelineFixture() {
        root = fs::temp_directory_path() / "kge_pipeline_test";
        fs::remove_all(root);
        fs::create_directories(root);

        // word pool doubles as review text and category-name vocabulary
        const std::vector<std::string> pool = {"gadgets", "pro",  "phone", "gear",
                                               "case",    "kit",  "band",  "solid",
                                               "cheap",   "nice", "fast",  "slow"};
        std::ofstream reviews(root / "reviews.jsonl");
        int k = 0;
        for (int u = 0; u < 12; ++u) {
            for (int i = 0; i < 8; ++i) {
                if ((u + i) % 3 == 0) continue;
                std::string text;
                for (int w = 0; w < 6; ++w) text += pool[(k + w) % pool.size()] + " ";
                ++k;
                reviews << R"({"reviewerID":"user)" << u << R"(","asin":"item)" << i
                        << R"(","reviewText":")" << text << "\"}\n";
            }
        }
        reviews.close();

        std::ofstream metadata(root / "metadata.jsonl");
        for (int i = 0; i < 8; ++i) {
            metadata << R"({"asin":"item)" << i << R"(","title":"nice item )" << i
                     << R"(","brand":")" << (i % 2 ? "BrandA" : "BrandB")
                     << R"(","categories":[["Gadgets Pro","Phone Gear","Case Kit"],)"
                     << R"(["Gadgets Pro","Phone Gear","Band Kit"]],)"
                     << R"("related":{"also_bought":["item)" << ((i + 1) % 8)
                     << R"("],"also_viewed":["item)" << ((i + 2) % 8) << R"("]}})" << "\n";
        }
        metadata.close();

        config.reviews_path = (root / "reviews.jsonl").string();
        config.metadata_path = (root / "metadata.jsonl").string();
        config.data_dir = (root / "data").string();
        config.min_freq = 5;
        config.alpha = 8;
        config.epochs = 2;
        config.seed = 5;
        config.top_k = 20;
    }

    ~PipelineFixture() { fs::remove_all(root); }

    std::string data(const std::string& name) const {
        return (fs::path(config.data_dir) / name).string();
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(KGE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("the full command pipeline runs end to end") {
    PipelineFixture fx;
    run_ingest(fx.config);

    for (const char* name : {"vocabulary.tsv", "catalogs.tsv", "queries.tsv", "triples.bin",
                             "judgments.tsv", "judgments.qrels", "documents.tsv"})
        CHECK(fs::exists(fx.data(name)));

    auto data = load_dataset(fx.config.data_dir);
    CHECK(data.catalog.count(kUserType) == 12);
    CHECK(data.catalog.count(kItemType) == 8);
    CHECK(data.queries.size() == 2);
    REQUIRE_FALSE(data.judgments.relevant.empty());

    SUBCASE("ingest is reproducible byte for byte") {
        auto triples_before = slurp(fx.data("triples.bin"));
        auto queries_before = slurp(fx.data("queries.tsv"));
        run_ingest(fx.config);
        CHECK(slurp(fx.data("triples.bin")) == triples_before);
        CHECK(slurp(fx.data("queries.tsv")) == queries_before);
    }

    SUBCASE("training honors the relation subset") {
        auto config = fx.config;
        config.relations = "nometa";
        run_train(config);
        auto params = load_model(fx.data("model.drem"));
        for (const char* excluded : {rel::kAlsoBought, rel::kAlsoViewed, rel::kIsBrand,
                                     rel::kIsCategory}) {
            auto r = params.schema().relation_by_name(excluded);
            REQUIRE(r.has_value());
            for (float v : params.relation_vector(*r)) CHECK(v == 0.0f);
        }
        // Write relations did train
        auto wu = *params.schema().relation_by_name(rel::kWriteUser);
        bool any_nonzero = false;
        for (float v : params.relation_vector(wu))
            if (v != 0.0f) any_nonzero = true;
        CHECK(any_nonzero);
        CHECK(fs::exists(fx.data("model.drem.trace.csv")));
    }

    SUBCASE("retrieve, evaluate and explain consume the artifacts") {
        run_train(fx.config);

        auto drem_config = fx.config;
        drem_config.system = "drem";
        run_retrieve(drem_config);
        auto ql_config = fx.config;
        ql_config.system = "ql";
        run_retrieve(ql_config);
        auto bm_config = fx.config;
        bm_config.system = "bm25";
        run_retrieve(bm_config);

        std::ifstream rin(fx.data("run_drem.trec"));
        auto run = read_run(rin);
        CHECK(run.size() == data.judgments.relevant.size());
        for (const auto& [key, entries] : run) {
            CHECK(entries.size() == std::min<size_t>(fx.config.top_k, 8));
            CHECK(entries[0].rank == 1);
        }

        auto eval_config = fx.config;
        eval_config.run_paths = {fx.data("run_drem.trec"), fx.data("run_ql.trec")};
        eval_config.output_path = fx.data("report.json");
        run_evaluate(eval_config);
        auto report = nlohmann::json::parse(slurp(fx.data("report.json")));
        REQUIRE(report["runs"].size() == 2);
        CHECK(report["runs"][0].contains("map"));
        REQUIRE(report["significance"].size() == 1);
        double p = report["significance"][0]["p"].get<double>();
        CHECK(p > 0.0);
        CHECK(p <= 1.0);

        auto explain_config = fx.config;
        explain_config.explain_limit = 2;
        run_explain(explain_config);
        std::ifstream ein(fx.data("explanations.jsonl"));
        std::string line;
        size_t lines = 0;
        while (std::getline(ein, line)) {
            if (line.empty()) continue;
            ++lines;
            auto j = nlohmann::json::parse(line);
            CHECK(j.contains("bridge_type"));
            CHECK(j.contains("score"));
            CHECK(j.contains("text"));
            CHECK(j["path_u"].size() + j["path_i"].size() <= 4);
        }
        CHECK(lines > 0);
    }

    SUBCASE("sweep writes one row per grid point and records failures") {
        auto sweep_config = fx.config;
        sweep_config.lambda_grid = {0.0, 0.5};
        sweep_config.alpha_grid = {8};
        sweep_config.epochs = 1;
        run_sweep(sweep_config);
        std::ifstream in(fx.data("sweep.csv"));
        std::string line;
        std::getline(in, line);
        CHECK(line == "lambda,alpha,map,mrr,ndcg10,status");
        size_t rows = 0, ok = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            ++rows;
            if (line.find(",ok") != std::string::npos) ++ok;
        }
        CHECK(rows == 2);
        CHECK(ok == 2);

        auto bad = sweep_config;
        bad.alpha_grid = {8, 0};  // alpha 0 fails per point, sweep continues
        run_sweep(bad);
        std::ifstream in2(fx.data("sweep.csv"));
        size_t errors = 0;
        rows = 0;
        std::getline(in2, line);
        while (std::getline(in2, line)) {
            if (line.empty()) continue;
            ++rows;
            if (line.find("error") != std::string::npos) ++errors;
        }
        CHECK(rows == 4);
        CHECK(errors == 2);
    }

    SUBCASE("unknown system names and relation subsets are usage errors") {
        auto bad = fx.config;
        bad.system = "nosuch";
        CHECK_THROWS_AS(run_retrieve(bad), std::invalid_argument);
        auto bad2 = fx.config;
        bad2.relations = "everything";
        CHECK_THROWS_AS(run_train(bad2), std::invalid_argument);
    }
}

TEST_CASE("the cli maps failures to the documented exit codes") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("ingest") == 2);                      // missing required flags
    CHECK(run_cli("nosuchcommand") == 2);
    CHECK(run_cli("evaluate --data-dir /nonexistent --run missing.trec") == 2);
}

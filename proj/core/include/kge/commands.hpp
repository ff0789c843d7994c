#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "kge/dataset_io.hpp"
#include "kge/evaluation.hpp"
#include "kge/model.hpp"

namespace kge {

struct RunConfig {
    // paths
    std::string reviews_path;
    std::string metadata_path;
    std::string data_dir;      // ingest output, downstream input
    std::string model_path;
    std::string output_path;   // run file / report / explanation / sweep csv
    std::vector<std::string> run_paths;  // evaluate
    std::string stopwords_path;          // optional override
    std::string triples_path;            // explain: requested (u,q,i) triples

    // corpus
    uint64_t min_freq = 5;
    double test_ratio = 0.30;
    bool five_core = false;

    // model / training
    uint32_t alpha = 300;
    double lambda = 0.5;
    uint32_t negatives = 5;
    uint32_t epochs = 20;
    double lr_start = 0.5;
    uint32_t batch_size = 64;
    double grad_clip_norm = 5.0;
    uint32_t threads = 1;
    std::string relations = "all";  // all|nometa|ab|av|bt|bnd|cat

    // retrieval / explanation
    uint32_t top_k = 100;
    double beta = 1.0;
    uint32_t max_hops = 4;
    uint32_t top_per_type = 6;
    uint32_t explain_limit = 0;  // 0 = all judged pairs
    std::string system = "drem";  // drem|ql|bm25
    std::string run_tag;

    // baselines
    double mu = 2000.0;
    double k1 = 1.2;
    double b = 0.75;
    bool bm25_literal_paper_formula = false;

    // sweep grids
    std::vector<double> lambda_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<uint32_t> alpha_grid = {100, 200, 300, 400, 500};

    uint64_t seed = 1;
};

void run_ingest(const RunConfig& config);
void run_train(const RunConfig& config);
void run_retrieve(const RunConfig& config);
void run_evaluate(const RunConfig& config);
void run_explain(const RunConfig& config);
void run_sweep(const RunConfig& config);

// Keeps Write and Search&Purchase, plus the metadata relations selected by
// the subset name.
std::vector<uint32_t> relation_subset(const ModelSchema& schema, const std::string& name);
TripleStore filter_relations(const TripleStore& triples, const ModelSchema& schema,
                             const std::vector<uint32_t>& keep);

// In-memory evaluation of a trained model over judged pairs.
MetricsReport evaluate_model(const ModelParams& params, const DatasetArtifacts& data,
                             uint32_t top_k = 100);

}  // namespace kge

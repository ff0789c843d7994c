#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kge/commands.hpp"
#include "kge/trainer.hpp"

namespace {

void add_common(CLI::App* cmd, kge::RunConfig& config) {
    cmd->add_option("--data-dir", config.data_dir, "Dataset artifact directory");
    cmd->add_option("--seed", config.seed, "Master random seed");
    cmd->set_config("--config", "", "Read options from a key = value file");
}

void add_train_flags(CLI::App* cmd, kge::RunConfig& config) {
    cmd->add_option("--alpha", config.alpha, "Embedding dimension");
    cmd->add_option("--lambda", config.lambda, "Dynamic relation weight in [0,1]");
    cmd->add_option("--negatives", config.negatives, "Negative samples per positive");
    cmd->add_option("--epochs", config.epochs, "Training epochs");
    cmd->add_option("--lr-start", config.lr_start, "Initial learning rate");
    cmd->add_option("--batch-size", config.batch_size, "SGD batch size");
    cmd->add_option("--grad-clip-norm", config.grad_clip_norm, "Batch gradient norm cap");
    cmd->add_option("--threads", config.threads,
                    "Worker threads; >1 gives up update determinism");
    cmd->add_option("--relations", config.relations,
                    "Relation subset: all|nometa|ab|av|bt|bnd|cat");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-graph embeddings for explainable product search"};
    app.require_subcommand(1);
    kge::RunConfig config;

    auto* ingest = app.add_subcommand("ingest", "Build dataset artifacts from raw files");
    ingest->add_option("--reviews", config.reviews_path, "Line-delimited JSON review file")
        ->required();
    ingest->add_option("--metadata", config.metadata_path, "Line-delimited JSON metadata file")
        ->required();
    ingest->add_option("--min-freq", config.min_freq, "Vocabulary frequency cutoff");
    ingest->add_option("--test-ratio", config.test_ratio, "Held-out review/query fraction");
    ingest->add_flag("--five-core", config.five_core, "Apply the 5-core filter to raw reviews");
    ingest->add_option("--stopwords", config.stopwords_path, "Replacement stopword list file");
    add_common(ingest, config);

    auto* train = app.add_subcommand("train", "Train embeddings on ingested artifacts");
    train->add_option("--model", config.model_path, "Output model path");
    add_train_flags(train, config);
    add_common(train, config);

    auto* retrieve = app.add_subcommand("retrieve", "Write a TREC run over the judged pairs");
    retrieve->add_option("--system", config.system, "drem|ql|bm25");
    retrieve->add_option("--model", config.model_path, "Model path (drem)");
    retrieve->add_option("--top-k", config.top_k, "List depth");
    retrieve->add_option("--mu", config.mu, "QL Dirichlet smoothing");
    retrieve->add_option("--k1", config.k1, "BM25 k1");
    retrieve->add_option("--b", config.b, "BM25 b");
    retrieve->add_flag("--bm25-literal-paper-formula", config.bm25_literal_paper_formula,
                       "Saturate BM25 on query frequency instead of document frequency");
    retrieve->add_option("--output", config.output_path, "Run file path");
    retrieve->add_option("--run-tag", config.run_tag, "Run tag column");
    add_common(retrieve, config);

    auto* evaluate = app.add_subcommand("evaluate", "Score run files against the qrels");
    evaluate->add_option("--run", config.run_paths, "Run file (repeatable)")->required();
    evaluate->add_option("--output", config.output_path, "JSON report path");
    add_common(evaluate, config);

    auto* explain = app.add_subcommand("explain", "Extract explanation paths");
    explain->add_option("--model", config.model_path, "Model path");
    explain->add_option("--triples", config.triples_path,
                        "File of 'user query item' id triples to explain");
    explain->add_option("--max-hops", config.max_hops, "Combined path hop cap");
    explain->add_option("--top-per-type", config.top_per_type, "Entities kept per bridge type");
    explain->add_option("--beta", config.beta, "Per-hop decay factor");
    explain->add_option("--limit", config.explain_limit, "Judged pairs to explain (0 = all)");
    explain->add_option("--output", config.output_path, "JSONL output path");
    add_common(explain, config);

    auto* sweep = app.add_subcommand("sweep", "Grid over lambda and alpha");
    sweep->add_option("--lambda-grid", config.lambda_grid, "Lambda values");
    sweep->add_option("--alpha-grid", config.alpha_grid, "Alpha values");
    sweep->add_option("--output", config.output_path, "CSV output path");
    add_train_flags(sweep, config);
    add_common(sweep, config);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (ingest->parsed()) kge::run_ingest(config);
        if (train->parsed()) kge::run_train(config);
        if (retrieve->parsed()) kge::run_retrieve(config);
        if (evaluate->parsed()) kge::run_evaluate(config);
        if (explain->parsed()) kge::run_explain(config);
        if (sweep->parsed()) kge::run_sweep(config);
    } catch (const kge::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

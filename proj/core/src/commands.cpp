#include "kge/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "kge/baselines.hpp"
#include "kge/explainer.hpp"
#include "kge/model_io.hpp"
#include "kge/retrieval.hpp"
#include "kge/tokenize.hpp"

namespace kge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct MeanStd {
    double mean = 0.0, std = 0.0;
};

MeanStd mean_std(const std::vector<double>& values) {
    if (values.empty()) return {};
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    return {mean, std::sqrt(var)};
}

std::string fmt(const MeanStd& ms) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f +/- %.2f", ms.mean, ms.std);
    return buf;
}

uint32_t catalog_type_of(const ModelSchema& schema, uint32_t schema_type) {
    const auto& name = schema.type(schema_type).name;
    for (uint32_t t = 0; t < kNumEntityTypes; ++t)
        if (name == entity_type_name(t)) return t;
    throw std::runtime_error("schema type has no catalog table: " + name);
}

std::unordered_set<std::string> stopwords_for(const RunConfig& config) {
    if (!config.stopwords_path.empty()) return load_stopwords(config.stopwords_path);
    return english_stopwords();
}

std::string default_path(const RunConfig& config, const std::string& name) {
    return (fs::path(config.data_dir) / name).string();
}

std::string model_path_of(const RunConfig& config) {
    return config.model_path.empty() ? default_path(config, "model.drem") : config.model_path;
}

}  // namespace

void run_ingest(const RunConfig& config) {
    if (config.reviews_path.empty()) throw std::invalid_argument("--reviews is required");
    if (config.metadata_path.empty()) throw std::invalid_argument("--metadata is required");
    if (config.data_dir.empty()) throw std::invalid_argument("--data-dir is required");
    fs::create_directories(config.data_dir);

    IngestStats review_stats, meta_stats;
    auto reviews = ingest_reviews(config.reviews_path, &review_stats);
    if (config.five_core) reviews = five_core_filter(reviews);
    auto metadata = ingest_metadata(config.metadata_path, &meta_stats);

    auto vocabulary = Vocabulary::build(reviews, config.min_freq);
    auto catalog = EntityCatalog::build(reviews, metadata, vocabulary);
    auto schema = product_schema(catalog);
    auto queries = QuerySet::extract(metadata, stopwords_for(config), vocabulary, catalog);
    TripleStats triple_stats;
    auto split = train_test_split(reviews, metadata, vocabulary, catalog, schema, queries,
                                  config.test_ratio, config.seed, &triple_stats);

    write_vocabulary(default_path(config, "vocabulary.tsv"), vocabulary);
    write_catalogs(default_path(config, "catalogs.tsv"), catalog);
    write_queries(default_path(config, "queries.tsv"), queries, split.query_is_test);
    write_triples(default_path(config, "triples.bin"), split.train);
    write_judgments(default_path(config, "judgments.tsv"), split.test);
    write_qrels_file(default_path(config, "judgments.qrels"), split.test, catalog);

    // per-item documents for the text baselines (training reviews only)
    std::vector<std::vector<std::string>> documents(catalog.count(kItemType));
    for (const auto& m : metadata) {
        auto item = catalog.id_of(kItemType, m.item_id);
        if (!item) continue;
        auto& d = documents[*item];
        d.insert(d.end(), m.title_tokens.begin(), m.title_tokens.end());
        d.insert(d.end(), m.description_tokens.begin(), m.description_tokens.end());
    }
    for (size_t i = 0; i < reviews.size(); ++i) {
        if (split.review_is_test[i]) continue;
        auto item = catalog.id_of(kItemType, reviews[i].item_id);
        if (!item) continue;
        auto& d = documents[*item];
        d.insert(d.end(), reviews[i].tokens.begin(), reviews[i].tokens.end());
    }
    write_documents(default_path(config, "documents.tsv"), documents);

    // summary statistics
    std::unordered_map<std::string, double> write_by_user, write_by_item;
    for (const auto& r : reviews) {
        double n = 0;
        for (const auto& t : r.tokens)
            if (vocabulary.id_of(t)) ++n;
        write_by_user[r.user_id] += n;
        write_by_item[r.item_id] += n;
    }
    auto collect = [](const std::unordered_map<std::string, double>& m, size_t total) {
        std::vector<double> v;
        v.reserve(total);
        for (const auto& [k, n] : m) v.push_back(n);
        v.resize(total, 0.0);
        return v;
    };
    uint32_t num_items = catalog.count(kItemType);
    std::vector<double> ab(num_items, 0), av(num_items, 0), bt(num_items, 0),
        brand(num_items, 0), cats(num_items, 0);
    for (const auto& m : metadata) {
        auto item = catalog.id_of(kItemType, m.item_id);
        if (!item) continue;
        auto resolved = [&](const std::vector<std::string>& ids) {
            double n = 0;
            for (const auto& id : ids)
                if (catalog.id_of(kItemType, id)) ++n;
            return n;
        };
        ab[*item] = resolved(m.also_bought);
        av[*item] = resolved(m.also_viewed);
        bt[*item] = resolved(m.bought_together);
        if (m.brand && catalog.id_of(kBrandType, *m.brand)) brand[*item] = 1;
        std::set<uint32_t> cset;
        for (const auto& path : m.category_paths)
            for (const auto& level : path)
                if (auto c = catalog.id_of(kCategoryType, level)) cset.insert(*c);
        cats[*item] = static_cast<double>(cset.size());
    }

    size_t test_reviews = 0;
    for (auto f : split.review_is_test) test_reviews += f;
    size_t test_queries = 0;
    for (auto f : split.query_is_test) test_queries += f;
    std::set<std::pair<uint32_t, uint32_t>> train_pairs;
    std::map<std::pair<uint32_t, uint32_t>, std::set<uint32_t>> train_pair_items;
    for (const auto& d : split.train.dynamics) {
        train_pairs.insert({d.user, d.query});
        train_pair_items[{d.user, d.query}].insert(d.item);
    }
    std::vector<double> train_rel, test_rel;
    for (const auto& [k, items] : train_pair_items)
        train_rel.push_back(static_cast<double>(items.size()));
    for (const auto& [k, items] : split.test.relevant)
        test_rel.push_back(static_cast<double>(items.size()));

    std::ostream& os = std::cout;
    os << "Corpus\n";
    os << "  Vocabulary size        " << vocabulary.size() << "\n";
    os << "  Number of reviews      " << reviews.size() << "\n";
    os << "  Number of users        " << catalog.count(kUserType) << "\n";
    os << "  Number of items        " << catalog.count(kItemType) << "\n";
    os << "  Number of brands       " << catalog.count(kBrandType) << "\n";
    os << "  Number of categories   " << catalog.count(kCategoryType) << "\n";
    os << "Relationships\n";
    os << "  Write per user         " << fmt(mean_std(collect(write_by_user, catalog.count(kUserType)))) << "\n";
    os << "  Write per item         " << fmt(mean_std(collect(write_by_item, num_items))) << "\n";
    os << "  Also_bought per item   " << fmt(mean_std(ab)) << "\n";
    os << "  Also_viewed per item   " << fmt(mean_std(av)) << "\n";
    os << "  Bought_together per item " << fmt(mean_std(bt)) << "\n";
    os << "  Is_brand per item      " << fmt(mean_std(brand)) << "\n";
    os << "  Is_category per item   " << fmt(mean_std(cats)) << "\n";
    os << "Train/Test\n";
    os << "  Number of reviews      " << (reviews.size() - test_reviews) << "/" << test_reviews
       << "\n";
    os << "  Number of queries      " << (queries.size() - test_queries) << "/" << test_queries
       << "\n";
    os << "  Number of user-query pairs " << train_pairs.size() << "/"
       << split.test.relevant.size() << "\n";
    os << "  Relevant items per pair " << fmt(mean_std(train_rel)) << "/" << fmt(mean_std(test_rel))
       << "\n";
    if (review_stats.malformed || meta_stats.malformed || triple_stats.skipped_unresolved) {
        os << "Warnings\n";
        os << "  Malformed review records   " << review_stats.malformed << "\n";
        os << "  Malformed metadata records " << meta_stats.malformed << "\n";
        os << "  Unresolved triple tails    " << triple_stats.skipped_unresolved << "\n";
    }
}

std::vector<uint32_t> relation_subset(const ModelSchema& schema, const std::string& name) {
    std::vector<uint32_t> keep;
    auto require = [&](const char* rel_name) {
        auto r = schema.relation_by_name(rel_name);
        if (!r)
            throw std::invalid_argument(std::string("relation not available in this dataset: ") +
                                        rel_name);
        keep.push_back(*r);
    };
    require(rel::kWriteUser);
    require(rel::kWriteItem);
    if (name == "nometa") return keep;
    if (name == "all") {
        keep.clear();
        for (uint32_t r = 0; r < schema.num_relations(); ++r)
            if (!schema.relation(r).dynamic) keep.push_back(r);
        return keep;
    }
    if (name == "ab") require(rel::kAlsoBought);
    else if (name == "av") require(rel::kAlsoViewed);
    else if (name == "bt") require(rel::kBoughtTogether);
    else if (name == "bnd") require(rel::kIsBrand);
    else if (name == "cat") require(rel::kIsCategory);
    else throw std::invalid_argument("unknown relation subset: " + name +
                                     " (expected all|nometa|ab|av|bt|bnd|cat)");
    return keep;
}

TripleStore filter_relations(const TripleStore& triples, const ModelSchema& schema,
                             const std::vector<uint32_t>& keep) {
    TripleStore out;
    for (const auto& t : triples.statics)
        if (std::find(keep.begin(), keep.end(), t.relation) != keep.end())
            out.statics.push_back(t);
    out.dynamics = triples.dynamics;
    out.finalize(schema.num_relations());
    return out;
}

void run_train(const RunConfig& config) {
    if (config.data_dir.empty()) throw std::invalid_argument("--data-dir is required");
    auto data = load_dataset(config.data_dir);
    auto keep = relation_subset(data.schema, config.relations);
    auto filtered = filter_relations(data.train, data.schema, keep);

    auto params = ModelParams::init(data.schema, config.alpha, config.seed);
    TrainConfig tc;
    tc.alpha = config.alpha;
    tc.lambda = config.lambda;
    tc.negatives = config.negatives;
    tc.epochs = config.epochs;
    tc.lr_start = config.lr_start;
    tc.batch_size = config.batch_size;
    tc.grad_clip_norm = config.grad_clip_norm;
    tc.seed = config.seed;
    tc.threads = config.threads;

    auto result = train(params, filtered, data.queries.word_lists(), tc);
    std::string path = model_path_of(config);
    save_model(path, params);
    write_loss_trace(path + ".trace.csv", result.trace);
    std::cout << "trained " << result.steps << " steps; model written to " << path << "\n";
}

void run_retrieve(const RunConfig& config) {
    if (config.data_dir.empty()) throw std::invalid_argument("--data-dir is required");
    auto data = load_dataset(config.data_dir);
    std::string out_path = config.output_path.empty()
                               ? default_path(config, "run_" + config.system + ".trec")
                               : config.output_path;
    std::string tag = config.run_tag.empty() ? config.system : config.run_tag;
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);

    auto emit = [&](uint32_t user, uint32_t query, const std::vector<ScoredItem>& items) {
        std::string key = make_query_key(data.catalog.surface(kUserType, user), query);
        for (uint32_t r = 0; r < items.size(); ++r)
            write_run_line(out, key,
                           {data.catalog.surface(kItemType, items[r].item), r + 1,
                            items[r].score},
                           tag);
    };

    if (config.system == "drem") {
        auto params = load_model(model_path_of(config));
        for (const auto& [pair, rel] : data.judgments.relevant) {
            auto ranked =
                rank_items(params, pair.first, data.queries.words(pair.second), config.top_k);
            emit(pair.first, pair.second, ranked.items);
        }
    } else if (config.system == "ql" || config.system == "bm25") {
        auto docs = DocStore::from_documents(read_documents(default_path(config, "documents.tsv")));
        BaselineParams bp{config.mu, config.k1, config.b, config.bm25_literal_paper_formula};
        auto scorer = config.system == "ql" ? BaselineScorer::kQueryLikelihood
                                            : BaselineScorer::kBm25;
        for (const auto& [pair, rel] : data.judgments.relevant) {
            std::vector<std::string> words;
            for (uint32_t w : data.queries.words(pair.second))
                words.push_back(data.vocabulary.word(w));
            auto ranked = rank_baseline(docs, words, scorer, bp, config.top_k);
            emit(pair.first, pair.second, ranked.items);
        }
    } else {
        throw std::invalid_argument("unknown system: " + config.system +
                                    " (expected drem|ql|bm25)");
    }
    std::cout << "run written to " << out_path << "\n";
}

void run_evaluate(const RunConfig& config) {
    if (config.run_paths.empty()) throw std::invalid_argument("--run is required");
    std::ifstream qin(default_path(config, "judgments.qrels"));
    if (!qin) throw std::runtime_error("cannot open qrels in " + config.data_dir);
    auto qrels = read_qrels(qin);

    std::vector<MetricsReport> reports;
    for (const auto& path : config.run_paths) {
        std::ifstream rin(path);
        if (!rin) throw std::runtime_error("cannot open run file: " + path);
        reports.push_back(evaluate_run(read_run(rin), qrels));
    }

    json out;
    out["runs"] = json::array();
    std::cout << "system                         pairs      MAP      MRR  NDCG@10\n";
    for (size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        char line[160];
        std::snprintf(line, sizeof(line), "%-30s %5zu %8.4f %8.4f %8.4f",
                      config.run_paths[i].c_str(), r.pairs, r.map, r.mrr, r.ndcg10);
        std::cout << line << "\n";
        json jr;
        jr["path"] = config.run_paths[i];
        jr["pairs"] = r.pairs;
        jr["map"] = r.map;
        jr["mrr"] = r.mrr;
        jr["ndcg10"] = r.ndcg10;
        jr["per_pair"] = json::array();
        for (const auto& p : r.per_pair)
            jr["per_pair"].push_back({{"key", p.key}, {"ap", p.ap}, {"rr", p.rr},
                                      {"ndcg10", p.ndcg10}});
        out["runs"].push_back(std::move(jr));
    }

    out["significance"] = json::array();
    for (size_t i = 0; i < reports.size(); ++i) {
        for (size_t j = i + 1; j < reports.size(); ++j) {
            std::vector<double> a, b;
            for (size_t p = 0; p < reports[i].per_pair.size(); ++p) {
                a.push_back(reports[i].per_pair[p].ap);
                b.push_back(reports[j].per_pair[p].ap);
            }
            double p_value = fisher_randomization(a, b, 10000, config.seed);
            std::cout << "fisher(" << config.run_paths[i] << ", " << config.run_paths[j]
                      << ") on AP: p = " << p_value << "\n";
            out["significance"].push_back({{"a", config.run_paths[i]},
                                           {"b", config.run_paths[j]},
                                           {"metric", "ap"},
                                           {"p", p_value}});
        }
    }
    if (!config.output_path.empty()) {
        std::ofstream jout(config.output_path);
        if (!jout) throw std::runtime_error("cannot write " + config.output_path);
        jout << out.dump(2) << "\n";
    }
}

void run_explain(const RunConfig& config) {
    if (config.data_dir.empty()) throw std::invalid_argument("--data-dir is required");
    auto data = load_dataset(config.data_dir);
    auto params = load_model(model_path_of(config));
    SchemaGraph graph(params.schema());

    std::vector<std::tuple<uint32_t, uint32_t, uint32_t>> requests;
    if (!config.triples_path.empty()) {
        std::ifstream in(config.triples_path);
        if (!in) throw std::runtime_error("cannot open " + config.triples_path);
        uint32_t u, q, i;
        while (in >> u >> q >> i) requests.emplace_back(u, q, i);
    } else {
        // default: explain the top retrieved item of each judged pair
        size_t limit = config.explain_limit ? config.explain_limit
                                            : data.judgments.relevant.size();
        for (const auto& [pair, rel] : data.judgments.relevant) {
            if (requests.size() >= limit) break;
            auto ranked = rank_items(params, pair.first, data.queries.words(pair.second), 1);
            if (!ranked.items.empty())
                requests.emplace_back(pair.first, pair.second, ranked.items[0].item);
        }
    }

    std::string out_path = config.output_path.empty()
                               ? default_path(config, "explanations.jsonl")
                               : config.output_path;
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    const auto& schema = params.schema();
    for (const auto& [user, query, item] : requests) {
        auto explanations =
            extract_explanations(params, graph, user, data.queries.words(query), item,
                                 config.max_hops, config.top_per_type, config.beta);
        for (const auto& e : explanations) {
            uint32_t cat_type = catalog_type_of(schema, e.bridge_type);
            std::string bridge_surface = data.catalog.surface(cat_type, e.bridge_entity);
            std::string item_name = data.catalog.surface(kItemType, item);
            json j;
            j["user_id"] = data.catalog.surface(kUserType, user);
            j["query_id"] = query;
            j["item_id"] = item_name;
            j["bridge_type"] = schema.type(e.bridge_type).name;
            j["bridge_entity"] = bridge_surface;
            j["path_u"] = json::array();
            for (uint32_t r : e.path_u) j["path_u"].push_back(schema.relation(r).name);
            j["path_i"] = json::array();
            for (uint32_t r : e.path_i) j["path_i"].push_back(schema.relation(r).name);
            j["score"] = e.score;
            j["text"] = render_template(e, schema, bridge_surface, item_name);
            out << j.dump() << "\n";
        }
    }
    std::cout << "explanations written to " << out_path << "\n";
}

MetricsReport evaluate_model(const ModelParams& params, const DatasetArtifacts& data,
                             uint32_t top_k) {
    MetricsReport report;
    for (const auto& [pair, relevant] : data.judgments.relevant) {
        if (relevant.empty()) {
            ++report.skipped_empty;
            continue;
        }
        auto ranked = rank_items(params, pair.first, data.queries.words(pair.second), top_k);
        std::vector<char> mask;
        mask.reserve(ranked.items.size());
        for (const auto& s : ranked.items)
            mask.push_back(std::binary_search(relevant.begin(), relevant.end(), s.item) ? 1 : 0);
        PairMetrics pm;
        pm.key = make_query_key(data.catalog.surface(kUserType, pair.first), pair.second);
        pm.ap = average_precision(mask, relevant.size());
        pm.rr = reciprocal_rank(mask);
        pm.ndcg10 = ndcg_at_10(mask, relevant.size());
        report.map += pm.ap;
        report.mrr += pm.rr;
        report.ndcg10 += pm.ndcg10;
        report.per_pair.push_back(std::move(pm));
    }
    report.pairs = report.per_pair.size();
    if (report.pairs) {
        report.map /= static_cast<double>(report.pairs);
        report.mrr /= static_cast<double>(report.pairs);
        report.ndcg10 /= static_cast<double>(report.pairs);
    }
    return report;
}

void run_sweep(const RunConfig& config) {
    if (config.data_dir.empty()) throw std::invalid_argument("--data-dir is required");
    auto data = load_dataset(config.data_dir);
    auto keep = relation_subset(data.schema, config.relations);
    auto filtered = filter_relations(data.train, data.schema, keep);

    std::string out_path = config.output_path.empty() ? default_path(config, "sweep.csv")
                                                      : config.output_path;
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << "lambda,alpha,map,mrr,ndcg10,status\n";
    for (double lambda : config.lambda_grid) {
        for (uint32_t alpha : config.alpha_grid) {
            try {
                auto params = ModelParams::init(data.schema, alpha, config.seed);
                TrainConfig tc;
                tc.alpha = alpha;
                tc.lambda = lambda;
                tc.negatives = config.negatives;
                tc.epochs = config.epochs;
                tc.lr_start = config.lr_start;
                tc.batch_size = config.batch_size;
                tc.grad_clip_norm = config.grad_clip_norm;
                tc.seed = config.seed;
                tc.threads = config.threads;
                train(params, filtered, data.queries.word_lists(), tc);
                auto report = evaluate_model(params, data, config.top_k);
                out << lambda << ',' << alpha << ',' << report.map << ',' << report.mrr << ','
                    << report.ndcg10 << ",ok\n";
            } catch (const std::exception& e) {
                std::string msg = e.what();
                std::replace(msg.begin(), msg.end(), ',', ';');
                out << lambda << ',' << alpha << ",,,," << "error: " << msg << "\n";
            }
            out.flush();
        }
    }
    std::cout << "sweep written to " << out_path << "\n";
}

}  // namespace kge

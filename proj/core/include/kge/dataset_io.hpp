#pragma once

#include <string>

#include "kge/corpus.hpp"
#include "kge/trainer.hpp"

namespace kge {

// On-disk dataset artifacts produced by ingest and consumed by the other
// commands. All ids in the files are the dense catalog ids; catalogs.tsv
// carries the surface forms.
struct DatasetArtifacts {
    Vocabulary vocabulary;
    EntityCatalog catalog;
    ModelSchema schema;
    QuerySet queries;
    TripleStore train;
    Judgments judgments;
    std::vector<uint8_t> query_is_test;
};

// catalogs.tsv: <type-name> \t <surface> \t <id>
void write_catalogs(const std::string& path, const EntityCatalog& catalog);
EntityCatalog read_catalogs(const std::string& path);

// vocabulary.tsv: <word> \t <frequency>, ordered by word id
void write_vocabulary(const std::string& path, const Vocabulary& vocabulary);

// queries.tsv: <query_id> \t <space-separated word ids> \t <space-separated
// item ids> \t <test flag>
void write_queries(const std::string& path, const QuerySet& queries,
                   const std::vector<uint8_t>& query_is_test);
std::pair<QuerySet, std::vector<uint8_t>> read_queries(const std::string& path);

// judgments.tsv: <user id> \t <query id> \t <item id>
void write_judgments(const std::string& path, const Judgments& judgments);
Judgments read_judgments(const std::string& path);

// qrels: "<user-surface>_<query id> 0 <item-surface> 1"
void write_qrels_file(const std::string& path, const Judgments& judgments,
                      const EntityCatalog& catalog);

// triples.bin: magic "DRTR", u32 version, u64 count + records per section
void write_triples(const std::string& path, const TripleStore& triples);
TripleStore read_triples(const std::string& path, uint32_t num_relations);

// documents.tsv: <item id> \t <space-separated tokens>; one line per item,
// the concatenated title + description + training reviews for that item.
void write_documents(const std::string& path,
                     const std::vector<std::vector<std::string>>& documents);
std::vector<std::vector<std::string>> read_documents(const std::string& path);

// loss_trace.csv: epoch,mean_objective_static,mean_objective_dynamic,lr
void write_loss_trace(const std::string& path, const std::vector<LossTraceRow>& trace);

DatasetArtifacts load_dataset(const std::string& dir);

}  // namespace kge

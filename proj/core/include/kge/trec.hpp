#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace kge {

struct RunEntry {
    std::string item;
    uint32_t rank = 0;
    double score = 0.0;
};

// query_key -> entries ordered by ascending rank
using RunFile = std::map<std::string, std::vector<RunEntry>>;

// query_key -> relevant item ids
using QrelsFile = std::map<std::string, std::set<std::string>>;

// "<query_key> Q0 <item> <rank> <score> <tag>" per line
void write_run_line(std::ostream& out, const std::string& query_key, const RunEntry& entry,
                    const std::string& tag);
RunFile read_run(std::istream& in);  // throws with the offending line number

// "<query_key> 0 <item> 1" per line
void write_qrels_line(std::ostream& out, const std::string& query_key, const std::string& item);
QrelsFile read_qrels(std::istream& in);

std::string make_query_key(const std::string& user_surface, uint32_t query_id);
// splits on the last '_'
std::pair<std::string, uint32_t> parse_query_key(const std::string& key);

}  // namespace kge

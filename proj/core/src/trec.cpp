#include "kge/trec.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace kge {

void write_run_line(std::ostream& out, const std::string& query_key, const RunEntry& entry,
                    const std::string& tag) {
    out << query_key << " Q0 " << entry.item << ' ' << entry.rank << ' ' << entry.score << ' '
        << tag << '\n';
}

RunFile read_run(std::istream& in) {
    RunFile run;
    std::string line;
    uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string key, q0, item, tag;
        uint32_t rank;
        double score;
        if (!(ss >> key >> q0 >> item >> rank >> score >> tag))
            throw std::runtime_error("malformed run line " + std::to_string(line_no) + ": " +
                                     line);
        run[key].push_back({item, rank, score});
    }
    for (auto& [key, entries] : run)
        std::sort(entries.begin(), entries.end(),
                  [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
    return run;
}

void write_qrels_line(std::ostream& out, const std::string& query_key, const std::string& item) {
    out << query_key << " 0 " << item << " 1\n";
}

QrelsFile read_qrels(std::istream& in) {
    QrelsFile qrels;
    std::string line;
    uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string key, zero, item;
        int rel;
        if (!(ss >> key >> zero >> item >> rel))
            throw std::runtime_error("malformed qrels line " + std::to_string(line_no) + ": " +
                                     line);
        if (rel > 0) qrels[key].insert(item);
    }
    return qrels;
}

std::string make_query_key(const std::string& user_surface, uint32_t query_id) {
    return user_surface + "_" + std::to_string(query_id);
}

std::pair<std::string, uint32_t> parse_query_key(const std::string& key) {
    auto pos = key.rfind('_');
    if (pos == std::string::npos || pos + 1 >= key.size())
        throw std::runtime_error("malformed query key: " + key);
    return {key.substr(0, pos), static_cast<uint32_t>(std::stoul(key.substr(pos + 1)))};
}

}  // namespace kge

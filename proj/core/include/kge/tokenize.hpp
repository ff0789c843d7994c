#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace kge {

// Lowercases and splits on any run of non-alphanumeric bytes. No stemming.
std::vector<std::string> tokenize(std::string_view text);

// The fixed English stopword list shipped with the project (~300 entries).
const std::unordered_set<std::string>& english_stopwords();

// One word per line; '#' comments and blank lines ignored.
std::unordered_set<std::string> load_stopwords(const std::string& path);

}  // namespace kge

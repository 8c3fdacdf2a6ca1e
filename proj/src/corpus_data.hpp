#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace mtlc::stdlib::detail {

// (path relative to corpus/, contents)
const std::vector<std::pair<std::string_view, std::string_view>> &corpus_files();

}  // namespace mtlc::stdlib::detail

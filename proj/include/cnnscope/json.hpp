#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace cnnscope {

/// JSON document type used for every file and message this project writes.
///
/// Objects are std::map (keys always sorted) and numbers are binary32, so
/// dump() prints each float in its shortest round-trip form. Parsing a dump
/// and dumping it again reproduces the same bytes.
using Json = nlohmann::basic_json<std::map, std::vector, std::string, bool, std::int64_t,
                                  std::uint64_t, float>;

}  // namespace cnnscope

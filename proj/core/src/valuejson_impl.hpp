#pragma once

// Internal: nlohmann-typed value codec shared by contracts.cpp and the trace
// tooling. Not installed; public API is webverbs/valuejson.hpp.

#include <nlohmann/json.hpp>

#include "webverbs/types.hpp"

namespace webverbs {

nlohmann::json value_to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);

}  // namespace webverbs

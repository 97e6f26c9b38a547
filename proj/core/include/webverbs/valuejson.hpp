#pragma once

#include <string>

#include "webverbs/types.hpp"

namespace webverbs {

// Tagged JSON encoding used inside trace files, one key per kind:
//   {"i": 123} {"f": 1.5} {"b": true} {"s": "text"} {"m": [minor, "USD"]}
//   {"e": "variant"} {"r": [["field", v], ...]} {"l": [v, ...]} {"o": v|null}
// Tags keep decoding type-free so trace verification can re-check logged
// values against the verb specs honestly.
std::string value_to_json_text(const Value& v);

// Throws std::invalid_argument on malformed input.
Value value_from_json_text(const std::string& text);

}  // namespace webverbs

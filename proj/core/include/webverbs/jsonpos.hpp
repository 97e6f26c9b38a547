#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "webverbs/diag.hpp"

namespace webverbs::jsonpos {

// A JSON tree whose every node remembers where it came from, so manifest and
// site-pack validation can point at the offending line. nlohmann::json does
// not retain positions, hence this small reader for the schema-checked inputs.

enum class JKind { object, array, string, integer, number, boolean, null };

struct JNode;
using JNodePtr = std::unique_ptr<JNode>;

struct JNode {
    JKind kind = JKind::null;
    SourcePos pos;

    std::string str;
    std::int64_t int_val = 0;
    double num_val = 0.0;
    bool bool_val = false;
    std::vector<std::pair<std::string, JNodePtr>> members;  // source order
    std::vector<JNodePtr> elements;

    const JNode* get(const std::string& key) const;
    bool is_string() const { return kind == JKind::string; }
    bool is_int() const { return kind == JKind::integer; }
    bool is_object() const { return kind == JKind::object; }
    bool is_array() const { return kind == JKind::array; }
};

struct JsonParseResult {
    JNodePtr root;                      // null on failure
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return root != nullptr && diagnostics.empty(); }
};

JsonParseResult parse_json(const std::string& text);

}  // namespace webverbs::jsonpos

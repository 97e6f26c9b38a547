#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "webverbs/ast.hpp"
#include "webverbs/diag.hpp"
#include "webverbs/types.hpp"

namespace webverbs::idl {

enum class PolicyTag { read_only, side_effecting, requires_auth, payment };

const char* to_string(PolicyTag t);
std::optional<PolicyTag> policy_tag_from_string(const std::string& s);

using TagSet = std::set<PolicyTag>;

std::string render_tags(const TagSet& tags);

enum class ParseMode { as_string, as_int, as_money, as_distance };

const char* to_string(ParseMode m);
std::optional<ParseMode> parse_mode_from_string(const std::string& s);

// "<int> m" or "<decimal> km" (up to 3 decimals) -> meters. Throws
// std::invalid_argument on any other shape.
std::int64_t parse_distance_text(const std::string& text);

// A fill/select/query input: either a verb parameter by name or a literal.
struct ValueSource {
    bool is_param = false;
    std::string text;
};

struct ActionStep {
    enum class Op { navigate, fill, click, select_option, wait_for, read, read_list };

    Op op;
    SourcePos pos;
    std::string path;     // navigate
    std::string locator;  // all others
    ValueSource source;   // fill / select_option
    std::string capture;  // read / read_list
    ParseMode parse = ParseMode::as_string;

    // read_list row extraction: `item` for primitive rows, `item_fields` for
    // record rows (result field -> spl within the row subtree).
    struct ItemField {
        std::string field;
        std::string spl;
        ParseMode parse = ParseMode::as_string;
    };
    std::vector<ItemField> item_fields;
    std::optional<ItemField> item;
};

const char* to_string(ActionStep::Op op);

struct ApiBinding {
    std::string method;  // GET | POST
    std::string path_template;
    std::vector<std::pair<std::string, ValueSource>> query;  // key -> source
    std::vector<std::pair<std::string, ValueSource>> body;   // key -> source
    // response document path -> result record field
    std::vector<std::pair<std::string, std::string>> response_map;
};

struct BrowserBinding {
    std::vector<ActionStep> script;
    // capture name -> result record field
    std::vector<std::pair<std::string, std::string>> output_map;
};

struct Predicate {
    std::string source;
    std::shared_ptr<wfl::Expr> expr;
    SourcePos pos;  // position of the predicate string in the manifest
};

struct VerbSpec {
    std::string site_id;
    std::string name;
    std::string doc;
    std::vector<std::pair<std::string, TypePtr>> params;
    TypePtr result;  // always a record type
    std::vector<Predicate> preconditions;
    std::vector<Predicate> postconditions;
    TagSet policy_tags;
    std::optional<ApiBinding> api;
    std::optional<BrowserBinding> browser;

    std::string source_file;
    SourcePos pos;

    std::string qname() const { return site_id + "::" + name; }
    const TypePtr* param_type(const std::string& name) const;
    bool side_effecting() const { return policy_tags.count(PolicyTag::side_effecting) > 0; }
};

struct SiteMeta {
    std::string site_id;
    std::string category;  // ecommerce | travel | knowledge | media | other
    std::string display_name;
};

bool valid_site_category(const std::string& c);
bool valid_snake_ident(const std::string& s);

struct ManifestParseResult {
    SiteMeta site;
    std::vector<std::pair<std::string, TypePtr>> types;  // declared, qualified names
    std::vector<VerbSpec> verbs;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return !has_errors(diagnostics); }
};

// Parses and fully resolves a verb manifest. Any error rejects the whole
// manifest: ok() is false and diagnostics carry line/column positions.
ManifestParseResult parse_manifest(const std::string& text, const std::string& filename = "");

// Re-checks every VerbSpec invariant plus the cross-checks (predicate
// references, binding placeholder resolution, output-map coverage).
// parse_manifest runs this on each spec before accepting a manifest.
std::vector<Diagnostic> validate_spec(const VerbSpec& spec);

// Canonical JSON form; parse(serialize(parse(m))) is a fixed point.
std::string serialize_manifest(const SiteMeta& site,
                               const std::vector<std::pair<std::string, TypePtr>>& types,
                               const std::vector<VerbSpec>& verbs);

}  // namespace webverbs::idl

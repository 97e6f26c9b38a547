#include "webverbs/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "webverbs/jsonpos.hpp"
#include "webverbs/parser.hpp"
#include "webverbs/printer.hpp"
#include "webverbs/typecheck.hpp"

namespace webverbs::idl {

using jsonpos::JKind;
using jsonpos::JNode;

const char* to_string(PolicyTag t) {
    switch (t) {
        case PolicyTag::read_only: return "read_only";
        case PolicyTag::side_effecting: return "side_effecting";
        case PolicyTag::requires_auth: return "requires_auth";
        case PolicyTag::payment: return "payment";
    }
    return "?";
}

std::optional<PolicyTag> policy_tag_from_string(const std::string& s) {
    if (s == "read_only") return PolicyTag::read_only;
    if (s == "side_effecting") return PolicyTag::side_effecting;
    if (s == "requires_auth") return PolicyTag::requires_auth;
    if (s == "payment") return PolicyTag::payment;
    return std::nullopt;
}

std::string render_tags(const TagSet& tags) {
    std::string out;
    for (auto t : tags) {
        if (!out.empty()) out += ", ";
        out += to_string(t);
    }
    return out.empty() ? "(none)" : out;
}

const char* to_string(ParseMode m) {
    switch (m) {
        case ParseMode::as_string: return "as_string";
        case ParseMode::as_int: return "as_int";
        case ParseMode::as_money: return "as_money";
        case ParseMode::as_distance: return "as_distance";
    }
    return "?";
}

std::optional<ParseMode> parse_mode_from_string(const std::string& s) {
    if (s == "as_string") return ParseMode::as_string;
    if (s == "as_int") return ParseMode::as_int;
    if (s == "as_money") return ParseMode::as_money;
    if (s == "as_distance") return ParseMode::as_distance;
    return std::nullopt;
}

const char* to_string(ActionStep::Op op) {
    switch (op) {
        case ActionStep::Op::navigate: return "navigate";
        case ActionStep::Op::fill: return "fill";
        case ActionStep::Op::click: return "click";
        case ActionStep::Op::select_option: return "select";
        case ActionStep::Op::wait_for: return "wait_for";
        case ActionStep::Op::read: return "read";
        case ActionStep::Op::read_list: return "read_list";
    }
    return "?";
}

std::int64_t parse_distance_text(const std::string& text) {
    auto bad = [&]() -> std::int64_t {
        throw std::invalid_argument("not a distance: '" + text + "'");
    };
    auto sp = text.rfind(' ');
    if (sp == std::string::npos) return bad();
    std::string num = text.substr(0, sp);
    std::string unit = text.substr(sp + 1);
    bool neg = !num.empty() && num[0] == '-';
    std::string digits = neg ? num.substr(1) : num;
    if (digits.empty()) return bad();

    if (unit == "m") {
        for (char c : digits)
            if (!std::isdigit(static_cast<unsigned char>(c))) return bad();
        std::int64_t v = std::stoll(digits);
        return neg ? -v : v;
    }
    if (unit == "km") {
        auto dot = digits.find('.');
        std::string whole = dot == std::string::npos ? digits : digits.substr(0, dot);
        std::string frac = dot == std::string::npos ? "" : digits.substr(dot + 1);
        if (whole.empty() || frac.size() > 3) return bad();
        for (char c : whole)
            if (!std::isdigit(static_cast<unsigned char>(c))) return bad();
        for (char c : frac)
            if (!std::isdigit(static_cast<unsigned char>(c))) return bad();
        while (frac.size() < 3) frac += '0';
        std::int64_t v = std::stoll(whole) * 1000 + (frac.empty() ? 0 : std::stoll(frac));
        return neg ? -v : v;
    }
    return bad();
}

const TypePtr* VerbSpec::param_type(const std::string& pname) const {
    for (const auto& [n, t] : params)
        if (n == pname) return &t;
    return nullptr;
}

bool valid_site_category(const std::string& c) {
    return c == "ecommerce" || c == "travel" || c == "knowledge" || c == "media" || c == "other";
}

bool valid_snake_ident(const std::string& s) {
    if (s.empty()) return false;
    if (s[0] < 'a' || s[0] > 'z') return false;
    for (char c : s)
        if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
    return true;
}

namespace {

bool valid_locator_path(const std::string& path) {
    if (path.empty() || path.front() == '/' || path.back() == '/') return false;
    bool seg = false;
    for (char c : path) {
        if (c == '/') {
            if (!seg) return false;
            seg = false;
        } else {
            seg = true;
        }
    }
    return seg;
}

// Resolves TypeKind::named references against the manifest's declared types.
TypePtr resolve_type(const TypePtr& t, const std::map<std::string, TypePtr>& table,
                     const std::string& site_id, std::string& missing) {
    switch (t->kind) {
        case TypeKind::named: {
            std::string key = t->qname;
            // A qualified reference must belong to this manifest's site.
            auto sep = key.find("::");
            if (sep != std::string::npos) {
                if (key.substr(0, sep) != site_id) {
                    missing = t->qname;
                    return nullptr;
                }
                key = key.substr(sep + 2);
            }
            auto it = table.find(key);
            if (it == table.end()) {
                missing = t->qname;
                return nullptr;
            }
            return it->second;
        }
        case TypeKind::t_list:
        case TypeKind::t_optional: {
            auto elem = resolve_type(t->element, table, site_id, missing);
            if (!elem) return nullptr;
            return t->kind == TypeKind::t_list ? TypeExpr::list_of(elem)
                                               : TypeExpr::optional_of(elem);
        }
        default:
            return t;
    }
}

class ManifestReader {
public:
    ManifestReader(const std::string& text, const std::string& filename)
        : text_(text), filename_(filename) {}

    ManifestParseResult run() {
        // An empty document is a valid, empty manifest.
        if (text_.find_first_not_of(" \t\r\n") == std::string::npos) return std::move(result_);

        auto parsed = jsonpos::parse_json(text_);
        if (!parsed.ok()) {
            for (auto& d : parsed.diagnostics) result_.diagnostics.push_back(std::move(d));
            return std::move(result_);
        }
        root_ = std::move(parsed.root);
        if (!root_->is_object()) {
            error(root_->pos, "manifest root must be an object");
            return std::move(result_);
        }

        read_site();
        if (has_errors(result_.diagnostics)) return std::move(result_);
        read_types();
        if (has_errors(result_.diagnostics)) return std::move(result_);
        read_verbs();

        if (has_errors(result_.diagnostics)) {
            // Reject the whole manifest: no partial spec lists.
            result_.verbs.clear();
            result_.types.clear();
        }
        return std::move(result_);
    }

private:
    void error(SourcePos pos, const std::string& msg) {
        result_.diagnostics.push_back({pos, Severity::error, msg});
    }

    const JNode* require(const JNode& obj, const std::string& key, JKind kind, const char* what) {
        const JNode* n = obj.get(key);
        if (!n) {
            error(obj.pos, std::string("missing '") + key + "' (" + what + ")");
            return nullptr;
        }
        bool ok = n->kind == kind || (kind == JKind::integer && n->kind == JKind::integer);
        if (!ok) {
            error(n->pos, std::string("'") + key + "' must be " + what);
            return nullptr;
        }
        return n;
    }

    void read_site() {
        const JNode* site = root_->get("site");
        if (!site || !site->is_object()) {
            error(root_->pos, "missing 'site' object");
            return;
        }
        const JNode* id = require(*site, "id", JKind::string, "a string");
        const JNode* cat = require(*site, "category", JKind::string, "a string");
        const JNode* disp = site->get("display_name");
        if (!id || !cat) return;
        if (!valid_snake_ident(id->str))
            error(id->pos, "site id must match [a-z][a-z0-9_]*: '" + id->str + "'");
        if (!valid_site_category(cat->str))
            error(cat->pos,
                  "unknown site category '" + cat->str +
                      "' (expected ecommerce|travel|knowledge|media|other)");
        result_.site.site_id = id->str;
        result_.site.category = cat->str;
        result_.site.display_name = disp && disp->is_string() ? disp->str : id->str;
    }

    TypePtr parse_type_ref(const JNode& n) {
        if (!n.is_string()) {
            error(n.pos, "type must be a string");
            return nullptr;
        }
        try {
            return wfl::parse_type_text(n.str);
        } catch (const wfl::SyntaxError& e) {
            error(n.pos, "bad type syntax '" + n.str + "': " + e.message());
            return nullptr;
        }
    }

    TypePtr resolve_or_report(const TypePtr& t, SourcePos pos) {
        if (!t) return nullptr;
        std::string missing;
        auto resolved = resolve_type(t, local_types_, result_.site.site_id, missing);
        if (!resolved) {
            error(pos, "unknown type '" + missing + "'");
            return nullptr;
        }
        return resolved;
    }

    void read_types() {
        const JNode* types = root_->get("types");
        if (!types) return;
        if (!types->is_array()) {
            error(types->pos, "'types' must be an array");
            return;
        }

        // Pass 1: declare names. Pass 2: resolve bodies in declaration order;
        // forward references are therefore rejected, which also rules out
        // recursive types.
        struct Decl {
            std::string local_name;
            const JNode* node;
            bool is_enum;
        };
        std::vector<Decl> decls;
        for (const auto& entry : types->elements) {
            if (!entry->is_object()) {
                error(entry->pos, "type declaration must be an object");
                continue;
            }
            const JNode* rec = entry->get("record");
            const JNode* en = entry->get("enum");
            if ((rec == nullptr) == (en == nullptr)) {
                error(entry->pos, "type declaration needs exactly one of 'record' or 'enum'");
                continue;
            }
            const JNode* name = rec ? rec : en;
            if (!name->is_string() || name->str.empty()) {
                error(name->pos, "type name must be a nonempty string");
                continue;
            }
            if (local_types_.count(name->str)) {
                error(name->pos, "duplicate type '" + name->str + "'");
                continue;
            }
            local_types_[name->str] = nullptr;  // reserve the name
            decls.push_back({name->str, entry.get(), en != nullptr});
        }

        for (const auto& d : decls) {
            std::string qualified = result_.site.site_id + "::" + d.local_name;
            if (d.is_enum) {
                const JNode* variants = require(*d.node, "variants", JKind::array, "an array");
                if (!variants) continue;
                std::vector<std::string> vs;
                for (const auto& v : variants->elements) {
                    if (!v->is_string() || v->str.empty()) {
                        error(v->pos, "enum variant must be a nonempty string");
                        continue;
                    }
                    if (std::find(vs.begin(), vs.end(), v->str) != vs.end()) {
                        error(v->pos, "duplicate enum variant '" + v->str + "'");
                        continue;
                    }
                    vs.push_back(v->str);
                }
                if (vs.empty()) {
                    error(d.node->pos, "enum '" + d.local_name + "' has no variants");
                    continue;
                }
                auto t = TypeExpr::enum_of(qualified, std::move(vs));
                local_types_[d.local_name] = t;
                result_.types.emplace_back(qualified, t);
            } else {
                const JNode* fields = require(*d.node, "fields", JKind::array, "an array");
                if (!fields) continue;
                std::vector<RecordField> fs;
                bool bad = false;
                for (const auto& f : fields->elements) {
                    if (!f->is_object()) {
                        error(f->pos, "record field must be an object");
                        bad = true;
                        continue;
                    }
                    const JNode* fname = require(*f, "name", JKind::string, "a string");
                    const JNode* ftype = f->get("type");
                    if (!fname || !ftype) {
                        bad = true;
                        continue;
                    }
                    if (fname->str.empty() || !valid_snake_ident(fname->str)) {
                        error(fname->pos, "field name must match [a-z][a-z0-9_]*");
                        bad = true;
                        continue;
                    }
                    for (const auto& prev : fs)
                        if (prev.name == fname->str) {
                            error(fname->pos, "duplicate field '" + fname->str + "' in record '" +
                                                  d.local_name + "'");
                            bad = true;
                        }
                    auto t = resolve_or_report(parse_type_ref(*ftype), ftype->pos);
                    if (!t) {
                        bad = true;
                        continue;
                    }
                    fs.push_back({fname->str, t});
                }
                if (bad) continue;
                auto t = TypeExpr::record_of(qualified, std::move(fs));
                local_types_[d.local_name] = t;
                result_.types.emplace_back(qualified, t);
            }
        }
    }

    ValueSource read_source(const JNode& n, bool& ok) {
        ok = false;
        if (!n.is_object()) {
            error(n.pos, "value source must be an object with 'param' or 'literal'");
            return {};
        }
        const JNode* param = n.get("param");
        const JNode* literal = n.get("literal");
        if ((param == nullptr) == (literal == nullptr)) {
            error(n.pos, "value source needs exactly one of 'param' or 'literal'");
            return {};
        }
        const JNode* v = param ? param : literal;
        if (!v->is_string()) {
            error(v->pos, "value source must be a string");
            return {};
        }
        ok = true;
        return {param != nullptr, v->str};
    }

    std::optional<ApiBinding> read_api(const JNode& n) {
        ApiBinding b;
        const JNode* method = require(n, "method", JKind::string, "a string");
        const JNode* path = require(n, "path", JKind::string, "a string");
        if (!method || !path) return std::nullopt;
        b.method = method->str;
        b.path_template = path->str;
        if (b.method != "GET" && b.method != "POST") {
            error(method->pos, "method must be GET or POST");
            return std::nullopt;
        }
        for (const char* section : {"query", "body"}) {
            const JNode* sec = n.get(section);
            if (!sec) continue;
            if (!sec->is_object()) {
                error(sec->pos, std::string("'") + section + "' must be an object");
                return std::nullopt;
            }
            for (const auto& [key, src] : sec->members) {
                bool ok = false;
                ValueSource vs = read_source(*src, ok);
                if (!ok) return std::nullopt;
                if (std::string(section) == "query")
                    b.query.emplace_back(key, vs);
                else
                    b.body.emplace_back(key, vs);
            }
        }
        const JNode* rmap = require(n, "response_map", JKind::object, "an object");
        if (!rmap) return std::nullopt;
        for (const auto& [respath, field] : rmap->members) {
            if (!field->is_string()) {
                error(field->pos, "response_map values must be result field names");
                return std::nullopt;
            }
            if (respath.empty()) {
                error(field->pos, "response path must be nonempty");
                return std::nullopt;
            }
            b.response_map.emplace_back(respath, field->str);
        }
        return b;
    }

    std::optional<ActionStep::ItemField> read_item_field(const std::string& field,
                                                         const JNode& n) {
        if (!n.is_object()) {
            error(n.pos, "item field spec must be an object");
            return std::nullopt;
        }
        ActionStep::ItemField f;
        f.field = field;
        const JNode* spl = n.get("spl");
        if (spl) {
            if (!spl->is_string() || !valid_locator_path(spl->str)) {
                error(spl->pos, "item 'spl' must be a locator path");
                return std::nullopt;
            }
            f.spl = spl->str;
        }
        const JNode* parse = n.get("parse");
        if (parse) {
            if (!parse->is_string()) {
                error(parse->pos, "'parse' must be a string");
                return std::nullopt;
            }
            auto m = parse_mode_from_string(parse->str);
            if (!m) {
                error(parse->pos, "unknown parse mode '" + parse->str + "'");
                return std::nullopt;
            }
            f.parse = *m;
        }
        return f;
    }

    std::optional<ActionStep> read_step(const JNode& n) {
        if (!n.is_object()) {
            error(n.pos, "action step must be an object");
            return std::nullopt;
        }
        const JNode* op = require(n, "op", JKind::string, "a string");
        if (!op) return std::nullopt;
        ActionStep s;
        s.pos = n.pos;
        const std::string& o = op->str;

        auto need_locator = [&]() -> bool {
            const JNode* loc = require(n, "locator", JKind::string, "a string");
            if (!loc) return false;
            if (!valid_locator_path(loc->str)) {
                error(loc->pos, "locator must be nonempty slash-separated segments: '" +
                                    loc->str + "'");
                return false;
            }
            s.locator = loc->str;
            return true;
        };

        if (o == "navigate") {
            s.op = ActionStep::Op::navigate;
            const JNode* path = require(n, "path", JKind::string, "a string");
            if (!path) return std::nullopt;
            s.path = path->str;
            return s;
        }
        if (o == "fill" || o == "select") {
            s.op = o == "fill" ? ActionStep::Op::fill : ActionStep::Op::select_option;
            if (!need_locator()) return std::nullopt;
            const JNode* param = n.get("param");
            const JNode* literal = n.get("literal");
            if ((param == nullptr) == (literal == nullptr)) {
                error(n.pos, "'" + o + "' needs exactly one of 'param' or 'literal'");
                return std::nullopt;
            }
            const JNode* v = param ? param : literal;
            if (!v->is_string()) {
                error(v->pos, "'" + o + "' source must be a string");
                return std::nullopt;
            }
            s.source = {param != nullptr, v->str};
            return s;
        }
        if (o == "click" || o == "wait_for") {
            s.op = o == "click" ? ActionStep::Op::click : ActionStep::Op::wait_for;
            if (!need_locator()) return std::nullopt;
            return s;
        }
        if (o == "read") {
            s.op = ActionStep::Op::read;
            if (!need_locator()) return std::nullopt;
            const JNode* cap = require(n, "capture", JKind::string, "a string");
            if (!cap) return std::nullopt;
            s.capture = cap->str;
            const JNode* parse = n.get("parse");
            if (parse && parse->is_string()) {
                auto m = parse_mode_from_string(parse->str);
                if (!m) {
                    error(parse->pos, "unknown parse mode '" + parse->str + "'");
                    return std::nullopt;
                }
                s.parse = *m;
            }
            return s;
        }
        if (o == "read_list") {
            s.op = ActionStep::Op::read_list;
            if (!need_locator()) return std::nullopt;
            const JNode* cap = require(n, "capture", JKind::string, "a string");
            if (!cap) return std::nullopt;
            s.capture = cap->str;
            const JNode* item = n.get("item");
            const JNode* item_fields = n.get("item_fields");
            if ((item == nullptr) == (item_fields == nullptr)) {
                error(n.pos, "'read_list' needs exactly one of 'item' or 'item_fields'");
                return std::nullopt;
            }
            if (item) {
                auto f = read_item_field("", *item);
                if (!f) return std::nullopt;
                s.item = *f;
            } else {
                if (!item_fields->is_object()) {
                    error(item_fields->pos, "'item_fields' must be an object");
                    return std::nullopt;
                }
                for (const auto& [field, fspec] : item_fields->members) {
                    auto f = read_item_field(field, *fspec);
                    if (!f) return std::nullopt;
                    s.item_fields.push_back(*f);
                }
            }
            return s;
        }
        error(op->pos, "unknown action op '" + o + "'");
        return std::nullopt;
    }

    std::optional<BrowserBinding> read_browser(const JNode& n) {
        BrowserBinding b;
        const JNode* script = require(n, "script", JKind::array, "an array");
        if (!script) return std::nullopt;
        for (const auto& stepn : script->elements) {
            auto s = read_step(*stepn);
            if (!s) return std::nullopt;
            b.script.push_back(std::move(*s));
        }
        const JNode* omap = require(n, "output_map", JKind::object, "an object");
        if (!omap) return std::nullopt;
        for (const auto& [capture, field] : omap->members) {
            if (!field->is_string()) {
                error(field->pos, "output_map values must be result field names");
                return std::nullopt;
            }
            b.output_map.emplace_back(capture, field->str);
        }
        return b;
    }

    void read_predicates(const JNode& verb, const char* key, std::vector<Predicate>& out) {
        const JNode* arr = verb.get(key);
        if (!arr) return;
        if (!arr->is_array()) {
            error(arr->pos, std::string("'") + key + "' must be an array of strings");
            return;
        }
        for (const auto& p : arr->elements) {
            if (!p->is_string()) {
                error(p->pos, "predicate must be a string");
                continue;
            }
            try {
                auto expr = wfl::parse_expression_text(p->str);
                out.push_back({p->str, std::shared_ptr<wfl::Expr>(expr.release()), p->pos});
            } catch (const wfl::SyntaxError& e) {
                error(p->pos, std::string("predicate syntax error: ") + e.message());
            }
        }
    }

    void read_verbs() {
        const JNode* verbs = root_->get("verbs");
        if (!verbs) return;
        if (!verbs->is_array()) {
            error(verbs->pos, "'verbs' must be an array");
            return;
        }
        for (const auto& vn : verbs->elements) {
            if (!vn->is_object()) {
                error(vn->pos, "verb declaration must be an object");
                continue;
            }
            VerbSpec spec;
            spec.site_id = result_.site.site_id;
            spec.source_file = filename_;
            spec.pos = vn->pos;

            const JNode* name = require(*vn, "name", JKind::string, "a string");
            const JNode* doc = require(*vn, "doc", JKind::string, "a string");
            if (!name || !doc) continue;
            spec.name = name->str;
            spec.doc = doc->str;

            for (const auto& v : result_.verbs)
                if (v.name == spec.name)
                    error(name->pos, "duplicate verb '" + spec.qname() + "'");

            const JNode* params = vn->get("params");
            if (params) {
                if (!params->is_array()) {
                    error(params->pos, "'params' must be an array");
                    continue;
                }
                for (const auto& p : params->elements) {
                    if (!p->is_object()) {
                        error(p->pos, "param must be an object");
                        continue;
                    }
                    const JNode* pname = require(*p, "name", JKind::string, "a string");
                    const JNode* ptype = p->get("type");
                    if (!pname || !ptype) continue;
                    auto t = resolve_or_report(parse_type_ref(*ptype), ptype->pos);
                    if (!t) continue;
                    spec.params.emplace_back(pname->str, t);
                }
            }

            const JNode* resultn = require(*vn, "result", JKind::string, "a type name");
            if (!resultn) continue;
            spec.result = resolve_or_report(parse_type_ref(*resultn), resultn->pos);
            if (!spec.result) continue;
            if (spec.result->kind != TypeKind::t_record) {
                error(resultn->pos, "verb result must be a record type, got '" +
                                        render_type(*spec.result) + "'");
                continue;
            }

            read_predicates(*vn, "preconditions", spec.preconditions);
            read_predicates(*vn, "postconditions", spec.postconditions);

            const JNode* tags = require(*vn, "policy_tags", JKind::array, "an array");
            if (!tags) continue;
            for (const auto& t : tags->elements) {
                if (!t->is_string()) {
                    error(t->pos, "policy tag must be a string");
                    continue;
                }
                auto tag = policy_tag_from_string(t->str);
                if (!tag) {
                    error(t->pos, "unknown policy tag '" + t->str + "'");
                    continue;
                }
                spec.policy_tags.insert(*tag);
            }

            const JNode* api = vn->get("api");
            if (api) {
                if (!api->is_object()) {
                    error(api->pos, "'api' must be an object");
                    continue;
                }
                spec.api = read_api(*api);
                if (!spec.api) continue;
            }
            const JNode* browser = vn->get("browser");
            if (browser) {
                if (!browser->is_object()) {
                    error(browser->pos, "'browser' must be an object");
                    continue;
                }
                spec.browser = read_browser(*browser);
                if (!spec.browser) continue;
            }

            for (auto& d : validate_spec(spec)) {
                if (!d.pos.valid()) d.pos = vn->pos;
                result_.diagnostics.push_back(std::move(d));
            }
            result_.verbs.push_back(std::move(spec));
        }
    }

    const std::string& text_;
    std::string filename_;
    jsonpos::JNodePtr root_;
    std::map<std::string, TypePtr> local_types_;
    ManifestParseResult result_;
};

}  // namespace

ManifestParseResult parse_manifest(const std::string& text, const std::string& filename) {
    return ManifestReader(text, filename).run();
}

std::vector<Diagnostic> validate_spec(const VerbSpec& spec) {
    std::vector<Diagnostic> ds;
    auto err = [&](SourcePos pos, const std::string& msg) {
        ds.push_back({pos.valid() ? pos : spec.pos, Severity::error, msg});
    };

    if (!valid_snake_ident(spec.site_id))
        err({}, "site id must match [a-z][a-z0-9_]*: '" + spec.site_id + "'");
    if (!valid_snake_ident(spec.name))
        err({}, "verb name must match [a-z][a-z0-9_]*: '" + spec.name + "'");
    if (spec.doc.empty()) err({}, "verb '" + spec.qname() + "' has an empty doc string");

    for (size_t i = 0; i < spec.params.size(); ++i) {
        if (!valid_snake_ident(spec.params[i].first))
            err({}, "param name must match [a-z][a-z0-9_]*: '" + spec.params[i].first + "'");
        for (size_t j = i + 1; j < spec.params.size(); ++j)
            if (spec.params[i].first == spec.params[j].first)
                err({}, "duplicate param '" + spec.params[i].first + "'");
    }

    if (!spec.result || spec.result->kind != TypeKind::t_record)
        err({}, "verb result must be a record type");

    int effect_tags = static_cast<int>(spec.policy_tags.count(PolicyTag::read_only)) +
                      static_cast<int>(spec.policy_tags.count(PolicyTag::side_effecting));
    if (effect_tags != 1)
        err({}, "policy tags must contain exactly one of read_only/side_effecting, got {" +
                    render_tags(spec.policy_tags) + "}");

    if (!spec.api && !spec.browser) err({}, "verb '" + spec.qname() + "' declares no binding");

    auto check_preds = [&](const std::vector<Predicate>& preds, bool is_post, const char* what) {
        for (const auto& p : preds) {
            if (!p.expr) continue;
            for (const auto& e : wfl::check_predicate(*p.expr, spec, is_post))
                err(p.pos, std::string(what) + " '" + p.source + "': " + e.message);
        }
    };
    check_preds(spec.preconditions, false, "precondition");
    check_preds(spec.postconditions, true, "postcondition");

    if (!spec.result || spec.result->kind != TypeKind::t_record) return ds;
    const auto& result_fields = spec.result->fields;

    auto field_type = [&](const std::string& f) -> const TypePtr* {
        for (const auto& rf : result_fields)
            if (rf.name == f) return &rf.type;
        return nullptr;
    };

    auto check_coverage = [&](const std::vector<std::pair<std::string, std::string>>& map,
                              const char* what) {
        std::map<std::string, int> seen;
        for (const auto& [src, field] : map) {
            if (!field_type(field)) {
                err({}, std::string(what) + " targets unknown result field '" + field + "'");
                continue;
            }
            seen[field]++;
        }
        for (const auto& rf : result_fields) {
            int n = seen.count(rf.name) ? seen[rf.name] : 0;
            if (n == 0)
                err({}, std::string(what) + " does not produce result field '" + rf.name + "'");
            else if (n > 1)
                err({}, std::string(what) + " produces result field '" + rf.name + "' " +
                            std::to_string(n) + " times");
        }
    };

    if (spec.api) {
        const auto& api = *spec.api;
        // {param} placeholders in the path template must name declared params.
        const std::string& pt = api.path_template;
        for (size_t i = 0; i < pt.size(); ++i) {
            if (pt[i] != '{') continue;
            auto close = pt.find('}', i);
            if (close == std::string::npos) {
                err({}, "unterminated '{' in path template '" + pt + "'");
                break;
            }
            std::string ph = pt.substr(i + 1, close - i - 1);
            if (!spec.param_type(ph))
                err({}, "path placeholder '{" + ph + "}' names no declared param");
            i = close;
        }
        for (const auto& [key, src] : api.query)
            if (src.is_param && !spec.param_type(src.text))
                err({}, "api query '" + key + "' references undeclared param '" + src.text + "'");
        for (const auto& [key, src] : api.body)
            if (src.is_param && !spec.param_type(src.text))
                err({}, "api body '" + key + "' references undeclared param '" + src.text + "'");
        check_coverage(api.response_map, "api response_map");
    }

    if (spec.browser) {
        const auto& b = *spec.browser;
        if (b.script.empty()) {
            err({}, "browser script is empty");
        } else if (b.script.front().op != ActionStep::Op::navigate) {
            err(b.script.front().pos, "browser script must start with navigate");
        }

        std::map<std::string, const ActionStep*> captures;
        for (const auto& s : b.script) {
            if (s.op == ActionStep::Op::fill || s.op == ActionStep::Op::select_option) {
                if (s.source.is_param && !spec.param_type(s.source.text))
                    err(s.pos, std::string(to_string(s.op)) + " references undeclared param '" +
                                   s.source.text + "'");
            }
            if (s.op == ActionStep::Op::read || s.op == ActionStep::Op::read_list) {
                if (s.capture.empty()) {
                    err(s.pos, "capture name must be nonempty");
                } else if (captures.count(s.capture)) {
                    err(s.pos, "duplicate capture '" + s.capture + "'");
                } else {
                    captures[s.capture] = &s;
                }
            }
        }

        check_coverage(b.output_map, "browser output_map");
        std::set<std::string> used;
        for (const auto& [capture, field] : b.output_map) {
            auto it = captures.find(capture);
            if (it == captures.end()) {
                err({}, "output_map references unknown capture '" + capture + "'");
                continue;
            }
            used.insert(capture);
            // Parse-mode / field-type agreement.
            const TypePtr* ft = field_type(field);
            if (!ft) continue;
            const ActionStep& s = *it->second;
            auto mode_kind = [](ParseMode m) {
                switch (m) {
                    case ParseMode::as_string: return TypeKind::t_string;
                    case ParseMode::as_int: return TypeKind::t_int;
                    case ParseMode::as_money: return TypeKind::t_money;
                    case ParseMode::as_distance: return TypeKind::t_int;
                }
                return TypeKind::t_string;
            };
            if (s.op == ActionStep::Op::read) {
                TypeKind want = (*ft)->kind;
                TypeKind got = mode_kind(s.parse);
                bool ok = want == got || (want == TypeKind::t_enum && got == TypeKind::t_string);
                if (!ok)
                    err(s.pos, "capture '" + s.capture + "' parses " + to_string(s.parse) +
                                   " but result field '" + field + "' has type " +
                                   render_type(**ft));
            } else if (s.op == ActionStep::Op::read_list) {
                if ((*ft)->kind != TypeKind::t_list) {
                    err(s.pos, "read_list capture '" + s.capture +
                                   "' mapped to non-list result field '" + field + "'");
                    continue;
                }
                const TypeExpr& elem = *(*ft)->element;
                if (s.item) {
                    TypeKind got = mode_kind(s.item->parse);
                    bool ok = elem.kind == got ||
                              (elem.kind == TypeKind::t_enum && got == TypeKind::t_string);
                    if (!ok)
                        err(s.pos, "read_list item parse mode does not produce element type " +
                                       render_type(elem));
                } else {
                    if (elem.kind != TypeKind::t_record) {
                        err(s.pos, "read_list with item_fields needs a list<record> field");
                        continue;
                    }
                    std::set<std::string> covered;
                    for (const auto& f : s.item_fields) {
                        const RecordField* rf = elem.find_field(f.field);
                        if (!rf) {
                            err(s.pos, "item_fields names unknown element field '" + f.field + "'");
                            continue;
                        }
                        covered.insert(f.field);
                    }
                    for (const auto& rf : elem.fields)
                        if (!covered.count(rf.name))
                            err(s.pos, "item_fields misses element field '" + rf.name + "'");
                }
            }
        }
        for (const auto& [name, step] : captures)
            if (!used.count(name))
                err(step->pos, "capture '" + name + "' is never mapped to a result field");
    }

    return ds;
}

namespace {

void json_escape(const std::string& s, std::string& out) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void emit_source(const ValueSource& src, std::string& out) {
    out += src.is_param ? "{\"param\": " : "{\"literal\": ";
    json_escape(src.text, out);
    out += '}';
}

}  // namespace

std::string serialize_manifest(const SiteMeta& site,
                               const std::vector<std::pair<std::string, TypePtr>>& types,
                               const std::vector<VerbSpec>& verbs) {
    std::string o;
    o += "{\n  \"site\": {\"id\": ";
    json_escape(site.site_id, o);
    o += ", \"category\": ";
    json_escape(site.category, o);
    o += ", \"display_name\": ";
    json_escape(site.display_name, o);
    o += "},\n";

    auto sorted_types = types;
    std::sort(sorted_types.begin(), sorted_types.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    o += "  \"types\": [";
    bool first_type = true;
    for (const auto& [qname, t] : sorted_types) {
        if (!first_type) o += ',';
        first_type = false;
        std::string local = qname.substr(qname.find("::") + 2);
        o += "\n    {";
        if (t->kind == TypeKind::t_enum) {
            o += "\"enum\": ";
            json_escape(local, o);
            o += ", \"variants\": [";
            bool fv = true;
            for (const auto& v : t->variants) {
                if (!fv) o += ", ";
                fv = false;
                json_escape(v, o);
            }
            o += "]";
        } else {
            o += "\"record\": ";
            json_escape(local, o);
            o += ", \"fields\": [";
            bool ff = true;
            for (const auto& f : t->fields) {
                if (!ff) o += ", ";
                ff = false;
                o += "{\"name\": ";
                json_escape(f.name, o);
                o += ", \"type\": ";
                json_escape(render_type(*f.type), o);
                o += '}';
            }
            o += "]";
        }
        o += '}';
    }
    o += "\n  ],\n";

    auto sorted_verbs_idx = std::vector<const VerbSpec*>();
    for (const auto& v : verbs) sorted_verbs_idx.push_back(&v);
    std::sort(sorted_verbs_idx.begin(), sorted_verbs_idx.end(),
              [](const VerbSpec* a, const VerbSpec* b) { return a->name < b->name; });

    o += "  \"verbs\": [";
    bool first_verb = true;
    for (const VerbSpec* vp : sorted_verbs_idx) {
        const VerbSpec& v = *vp;
        if (!first_verb) o += ',';
        first_verb = false;
        o += "\n    {\"name\": ";
        json_escape(v.name, o);
        o += ", \"doc\": ";
        json_escape(v.doc, o);
        o += ",\n     \"params\": [";
        bool fp = true;
        for (const auto& [pn, pt] : v.params) {
            if (!fp) o += ", ";
            fp = false;
            o += "{\"name\": ";
            json_escape(pn, o);
            o += ", \"type\": ";
            json_escape(render_type(*pt), o);
            o += '}';
        }
        o += "],\n     \"result\": ";
        json_escape(render_type(*v.result), o);

        auto emit_preds = [&](const char* key, const std::vector<Predicate>& preds) {
            o += ",\n     \"";
            o += key;
            o += "\": [";
            bool f = true;
            for (const auto& p : preds) {
                if (!f) o += ", ";
                f = false;
                json_escape(p.expr ? wfl::print_expr(*p.expr) : p.source, o);
            }
            o += ']';
        };
        emit_preds("preconditions", v.preconditions);
        emit_preds("postconditions", v.postconditions);

        o += ",\n     \"policy_tags\": [";
        bool ft = true;
        for (auto t : v.policy_tags) {
            if (!ft) o += ", ";
            ft = false;
            json_escape(to_string(t), o);
        }
        o += ']';

        if (v.api) {
            const auto& a = *v.api;
            o += ",\n     \"api\": {\"method\": ";
            json_escape(a.method, o);
            o += ", \"path\": ";
            json_escape(a.path_template, o);
            auto emit_kv = [&](const char* key,
                               const std::vector<std::pair<std::string, ValueSource>>& kvs) {
                if (kvs.empty()) return;
                o += ", \"";
                o += key;
                o += "\": {";
                bool f = true;
                for (const auto& [k, src] : kvs) {
                    if (!f) o += ", ";
                    f = false;
                    json_escape(k, o);
                    o += ": ";
                    emit_source(src, o);
                }
                o += '}';
            };
            emit_kv("query", a.query);
            emit_kv("body", a.body);
            o += ", \"response_map\": {";
            bool f = true;
            for (const auto& [path, field] : a.response_map) {
                if (!f) o += ", ";
                f = false;
                json_escape(path, o);
                o += ": ";
                json_escape(field, o);
            }
            o += "}}";
        }

        if (v.browser) {
            const auto& b = *v.browser;
            o += ",\n     \"browser\": {\"script\": [";
            bool fs = true;
            for (const auto& s : b.script) {
                if (!fs) o += ',';
                fs = false;
                o += "\n       {\"op\": ";
                json_escape(s.op == ActionStep::Op::select_option ? "select" : to_string(s.op), o);
                if (s.op == ActionStep::Op::navigate) {
                    o += ", \"path\": ";
                    json_escape(s.path, o);
                } else {
                    o += ", \"locator\": ";
                    json_escape(s.locator, o);
                }
                if (s.op == ActionStep::Op::fill || s.op == ActionStep::Op::select_option) {
                    o += s.source.is_param ? ", \"param\": " : ", \"literal\": ";
                    json_escape(s.source.text, o);
                }
                if (s.op == ActionStep::Op::read) {
                    o += ", \"capture\": ";
                    json_escape(s.capture, o);
                    o += ", \"parse\": ";
                    json_escape(to_string(s.parse), o);
                }
                if (s.op == ActionStep::Op::read_list) {
                    o += ", \"capture\": ";
                    json_escape(s.capture, o);
                    if (s.item) {
                        o += ", \"item\": {";
                        if (!s.item->spl.empty()) {
                            o += "\"spl\": ";
                            json_escape(s.item->spl, o);
                            o += ", ";
                        }
                        o += "\"parse\": ";
                        json_escape(to_string(s.item->parse), o);
                        o += '}';
                    } else {
                        o += ", \"item_fields\": {";
                        bool ff = true;
                        for (const auto& f : s.item_fields) {
                            if (!ff) o += ", ";
                            ff = false;
                            json_escape(f.field, o);
                            o += ": {";
                            if (!f.spl.empty()) {
                                o += "\"spl\": ";
                                json_escape(f.spl, o);
                                o += ", ";
                            }
                            o += "\"parse\": ";
                            json_escape(to_string(f.parse), o);
                            o += '}';
                        }
                        o += '}';
                    }
                }
                o += '}';
            }
            o += "\n     ], \"output_map\": {";
            bool f = true;
            for (const auto& [capture, field] : b.output_map) {
                if (!f) o += ", ";
                f = false;
                json_escape(capture, o);
                o += ": ";
                json_escape(field, o);
            }
            o += "}}";
        }
        o += '}';
    }
    o += "\n  ]\n}\n";
    return o;
}

}  // namespace webverbs::idl

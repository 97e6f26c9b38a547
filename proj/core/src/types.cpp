#include "webverbs/types.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace webverbs {

TypePtr TypeExpr::prim(TypeKind k) {
    auto t = std::make_shared<TypeExpr>();
    t->kind = k;
    return t;
}

TypePtr TypeExpr::list_of(TypePtr elem) {
    auto t = std::make_shared<TypeExpr>();
    t->kind = TypeKind::t_list;
    t->element = std::move(elem);
    return t;
}

TypePtr TypeExpr::optional_of(TypePtr elem) {
    auto t = std::make_shared<TypeExpr>();
    t->kind = TypeKind::t_optional;
    t->element = std::move(elem);
    return t;
}

TypePtr TypeExpr::record_of(std::string qname, std::vector<RecordField> fields) {
    auto t = std::make_shared<TypeExpr>();
    t->kind = TypeKind::t_record;
    t->qname = std::move(qname);
    t->fields = std::move(fields);
    return t;
}

TypePtr TypeExpr::enum_of(std::string qname, std::vector<std::string> variants) {
    auto t = std::make_shared<TypeExpr>();
    t->kind = TypeKind::t_enum;
    t->qname = std::move(qname);
    t->variants = std::move(variants);
    return t;
}

TypePtr TypeExpr::named_ref(std::string name) {
    auto t = std::make_shared<TypeExpr>();
    t->kind = TypeKind::named;
    t->qname = std::move(name);
    return t;
}

const RecordField* TypeExpr::find_field(const std::string& name) const {
    for (const auto& f : fields)
        if (f.name == name) return &f;
    return nullptr;
}

bool TypeExpr::has_variant(const std::string& v) const {
    return std::find(variants.begin(), variants.end(), v) != variants.end();
}

bool valid_currency(const std::string& c) {
    if (c.size() != 3) return false;
    for (char ch : c)
        if (ch < 'A' || ch > 'Z') return false;
    return true;
}

Value Value::of_int(std::int64_t v) {
    Value r;
    r.kind = Kind::v_int;
    r.i = v;
    return r;
}

Value Value::of_float(double v) {
    Value r;
    r.kind = Kind::v_float;
    r.f = v;
    return r;
}

Value Value::of_bool(bool v) {
    Value r;
    r.kind = Kind::v_bool;
    r.b = v;
    return r;
}

Value Value::of_string(std::string v) {
    Value r;
    r.kind = Kind::v_string;
    r.s = std::move(v);
    return r;
}

Value Value::of_money(std::int64_t amount_minor, std::string currency) {
    if (!valid_currency(currency))
        throw std::invalid_argument("invalid currency code: " + currency);
    Value r;
    r.kind = Kind::v_money;
    r.money = Money{amount_minor, std::move(currency)};
    return r;
}

Value Value::of_record(std::vector<std::pair<std::string, Value>> fields) {
    Value r;
    r.kind = Kind::v_record;
    r.record = std::make_shared<RecordValue>(RecordValue{std::move(fields)});
    return r;
}

Value Value::of_list(std::vector<Value> elems) {
    Value r;
    r.kind = Kind::v_list;
    r.list = std::make_shared<ValueList>(std::move(elems));
    return r;
}

Value Value::absent() {
    Value r;
    r.kind = Kind::v_optional;
    r.opt = nullptr;
    return r;
}

Value Value::present(Value inner) {
    Value r;
    r.kind = Kind::v_optional;
    r.opt = std::make_shared<Value>(std::move(inner));
    return r;
}

Value Value::of_enum(std::string variant) {
    Value r;
    r.kind = Kind::v_enum;
    r.s = std::move(variant);
    return r;
}

const Value* Value::field(const std::string& name) const {
    if (kind != Kind::v_record || !record) return nullptr;
    for (const auto& [n, v] : record->fields)
        if (n == name) return &v;
    return nullptr;
}

bool Value::equals(const Value& other) const {
    if (kind != other.kind) return false;
    switch (kind) {
        case Kind::v_int: return i == other.i;
        case Kind::v_float: return f == other.f;
        case Kind::v_bool: return b == other.b;
        case Kind::v_string:
        case Kind::v_enum: return s == other.s;
        case Kind::v_money: return money == other.money;
        case Kind::v_record: {
            if (record->fields.size() != other.record->fields.size()) return false;
            for (size_t k = 0; k < record->fields.size(); ++k) {
                if (record->fields[k].first != other.record->fields[k].first) return false;
                if (!record->fields[k].second.equals(other.record->fields[k].second)) return false;
            }
            return true;
        }
        case Kind::v_list: {
            if (list->size() != other.list->size()) return false;
            for (size_t k = 0; k < list->size(); ++k)
                if (!(*list)[k].equals((*other.list)[k])) return false;
            return true;
        }
        case Kind::v_optional: {
            if (!opt && !other.opt) return true;
            if (!opt || !other.opt) return false;
            return opt->equals(*other.opt);
        }
    }
    return false;
}

namespace {

bool check_value_rec(const Value& v, const TypeExpr& t, int depth) {
    if (depth > kMaxNestingDepth) throw DepthError("value/type nesting exceeds depth 64");
    switch (t.kind) {
        case TypeKind::named: throw UnresolvedType(t.qname);
        case TypeKind::t_int: return v.kind == Value::Kind::v_int;
        case TypeKind::t_float: return v.kind == Value::Kind::v_float;
        case TypeKind::t_bool: return v.kind == Value::Kind::v_bool;
        case TypeKind::t_string: return v.kind == Value::Kind::v_string;
        case TypeKind::t_money:
            return v.kind == Value::Kind::v_money && valid_currency(v.money.currency);
        case TypeKind::t_enum:
            return v.kind == Value::Kind::v_enum && t.has_variant(v.s);
        case TypeKind::t_list: {
            if (v.kind != Value::Kind::v_list) return false;
            for (const auto& e : *v.list)
                if (!check_value_rec(e, *t.element, depth + 1)) return false;
            return true;
        }
        case TypeKind::t_optional: {
            if (v.kind != Value::Kind::v_optional) return false;
            if (!v.opt) return true;
            return check_value_rec(*v.opt, *t.element, depth + 1);
        }
        case TypeKind::t_record: {
            if (v.kind != Value::Kind::v_record) return false;
            if (v.record->fields.size() != t.fields.size()) return false;
            for (size_t k = 0; k < t.fields.size(); ++k) {
                if (v.record->fields[k].first != t.fields[k].name) return false;
                if (!check_value_rec(v.record->fields[k].second, *t.fields[k].type, depth + 1))
                    return false;
            }
            return true;
        }
    }
    return false;
}

bool type_equal_rec(const TypeExpr& a, const TypeExpr& b, int depth) {
    if (depth > kMaxNestingDepth) throw DepthError("type nesting exceeds depth 64");
    if (a.kind == TypeKind::named) throw UnresolvedType(a.qname);
    if (b.kind == TypeKind::named) throw UnresolvedType(b.qname);
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case TypeKind::t_record:
        case TypeKind::t_enum:
            return a.qname == b.qname;  // nominal
        case TypeKind::t_list:
        case TypeKind::t_optional:
            return type_equal_rec(*a.element, *b.element, depth + 1);
        default:
            return true;
    }
}

void render_rec(const Value& v, std::string& out, int depth) {
    if (depth > kMaxNestingDepth) throw DepthError("value nesting exceeds depth 64");
    switch (v.kind) {
        case Value::Kind::v_int:
            out += std::to_string(v.i);
            break;
        case Value::Kind::v_float: {
            char buf[64];
            auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v.f);
            std::string s(buf, p);
            // Keep floats visibly floats: shortest round-trip form of 5.0 is "5".
            if (s.find_first_of(".eE") == std::string::npos &&
                s.find_first_of("na") == std::string::npos)
                s += ".0";
            out += s;
            break;
        }
        case Value::Kind::v_bool:
            out += v.b ? "true" : "false";
            break;
        case Value::Kind::v_string: {
            out += '"';
            for (char c : v.s) {
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
            break;
        }
        case Value::Kind::v_enum:
            out += v.s;
            break;
        case Value::Kind::v_money:
            out += render_money(v.money);
            break;
        case Value::Kind::v_record: {
            out += '{';
            bool first = true;
            for (const auto& [n, fv] : v.record->fields) {
                if (!first) out += ", ";
                first = false;
                out += n;
                out += ": ";
                render_rec(fv, out, depth + 1);
            }
            out += '}';
            break;
        }
        case Value::Kind::v_list: {
            out += '[';
            bool first = true;
            for (const auto& e : *v.list) {
                if (!first) out += ", ";
                first = false;
                render_rec(e, out, depth + 1);
            }
            out += ']';
            break;
        }
        case Value::Kind::v_optional:
            if (!v.opt) {
                out += "none";
            } else {
                render_rec(*v.opt, out, depth + 1);
            }
            break;
    }
}

int depth_rec(const Value& v, int depth) {
    if (depth > kMaxNestingDepth) throw DepthError("value nesting exceeds depth 64");
    int d = depth;
    switch (v.kind) {
        case Value::Kind::v_record:
            for (const auto& [n, fv] : v.record->fields) d = std::max(d, depth_rec(fv, depth + 1));
            break;
        case Value::Kind::v_list:
            for (const auto& e : *v.list) d = std::max(d, depth_rec(e, depth + 1));
            break;
        case Value::Kind::v_optional:
            if (v.opt) d = std::max(d, depth_rec(*v.opt, depth + 1));
            break;
        default:
            break;
    }
    return d;
}

}  // namespace

bool check_value(const Value& v, const TypeExpr& t) { return check_value_rec(v, t, 1); }

bool type_equal(const TypeExpr& a, const TypeExpr& b) { return type_equal_rec(a, b, 1); }

std::string render_money(const Money& m) {
    std::int64_t a = m.amount_minor;
    bool neg = a < 0;
    if (neg) a = -a;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s%" PRId64 ".%02" PRId64 " %s", neg ? "-" : "", a / 100,
                  a % 100, m.currency.c_str());
    return buf;
}

std::string render_value(const Value& v) {
    std::string out;
    render_rec(v, out, 1);
    return out;
}

int value_depth(const Value& v) { return depth_rec(v, 1); }

std::string render_type(const TypeExpr& t) {
    switch (t.kind) {
        case TypeKind::t_int: return "int";
        case TypeKind::t_float: return "float";
        case TypeKind::t_bool: return "bool";
        case TypeKind::t_string: return "string";
        case TypeKind::t_money: return "money";
        case TypeKind::t_record: return t.qname;
        case TypeKind::t_enum: return t.qname;
        case TypeKind::t_list: return "list<" + render_type(*t.element) + ">";
        case TypeKind::t_optional: return "optional<" + render_type(*t.element) + ">";
        case TypeKind::named: return t.qname;
    }
    return "?";
}

Value parse_scalar(const std::string& text, const TypeExpr& t) {
    auto fail = [&](const char* why) {
        throw std::invalid_argument(std::string(why) + ": '" + text + "'");
    };
    switch (t.kind) {
        case TypeKind::t_int: {
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc() || p != text.data() + text.size()) fail("not an int");
            return Value::of_int(v);
        }
        case TypeKind::t_float: {
            char* end = nullptr;
            double v = std::strtod(text.c_str(), &end);
            if (end != text.c_str() + text.size() || text.empty()) fail("not a float");
            return Value::of_float(v);
        }
        case TypeKind::t_bool: {
            if (text == "true") return Value::of_bool(true);
            if (text == "false") return Value::of_bool(false);
            fail("not a bool");
        }
        case TypeKind::t_string: {
            // Quoted, escaped form as produced by render_value.
            if (text.size() < 2 || text.front() != '"' || text.back() != '"')
                fail("not a quoted string");
            std::string out;
            for (size_t k = 1; k + 1 < text.size(); ++k) {
                char c = text[k];
                if (c != '\\') {
                    out += c;
                    continue;
                }
                if (k + 2 >= text.size() + 1) fail("dangling escape");
                char e = text[++k];
                switch (e) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    case 'u': {
                        if (k + 4 >= text.size()) fail("bad \\u escape");
                        out += static_cast<char>(std::strtol(text.substr(k + 1, 4).c_str(), nullptr, 16));
                        k += 4;
                        break;
                    }
                    default: fail("unknown escape");
                }
            }
            return Value::of_string(out);
        }
        case TypeKind::t_money: {
            // "<units>.<mm> <CUR>"
            auto sp = text.rfind(' ');
            if (sp == std::string::npos) fail("not a money value");
            std::string num = text.substr(0, sp);
            std::string cur = text.substr(sp + 1);
            if (!valid_currency(cur)) fail("bad currency");
            auto dot = num.find('.');
            if (dot == std::string::npos || num.size() - dot != 3) fail("money needs 2 decimals");
            bool neg = !num.empty() && num[0] == '-';
            std::string units = num.substr(neg ? 1 : 0, dot - (neg ? 1 : 0));
            std::string cents = num.substr(dot + 1);
            if (units.empty() || cents.size() != 2) fail("malformed money amount");
            for (char c : units)
                if (!std::isdigit(static_cast<unsigned char>(c))) fail("malformed money amount");
            for (char c : cents)
                if (!std::isdigit(static_cast<unsigned char>(c))) fail("malformed money amount");
            std::int64_t minor = std::stoll(units) * 100 + std::stoll(cents);
            return Value::of_money(neg ? -minor : minor, cur);
        }
        case TypeKind::t_enum: {
            if (!t.has_variant(text)) fail("unknown enum variant");
            return Value::of_enum(text);
        }
        default:
            fail("parse_scalar supports primitive, money and enum types only");
    }
    return Value::of_int(0);  // unreachable
}

}  // namespace webverbs

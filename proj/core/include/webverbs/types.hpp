#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace webverbs {

// Nesting bound shared by types and values. Deeper structures are rejected
// with DepthError rather than risking unbounded recursion.
inline constexpr int kMaxNestingDepth = 64;

class DepthError : public std::runtime_error {
public:
    explicit DepthError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an operation meets a type that still contains unresolved
// record/enum references (TypeKind::named).
class UnresolvedType : public std::runtime_error {
public:
    explicit UnresolvedType(const std::string& name)
        : std::runtime_error("unresolved type reference: " + name), name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

enum class TypeKind {
    t_int,
    t_float,
    t_bool,
    t_string,
    t_money,
    t_record,
    t_list,
    t_optional,
    t_enum,
    named,  // unresolved reference; only present before manifest resolution
};

struct TypeExpr;
using TypePtr = std::shared_ptr<const TypeExpr>;

struct RecordField {
    std::string name;
    TypePtr type;
};

// Immutable after construction; shared freely across threads.
struct TypeExpr {
    TypeKind kind = TypeKind::t_int;

    // record / enum: fully qualified "site_id::TypeName"; named: the reference text.
    std::string qname;
    std::vector<RecordField> fields;    // record
    std::vector<std::string> variants;  // enum, declaration order
    TypePtr element;                    // list / optional

    static TypePtr prim(TypeKind k);
    static TypePtr list_of(TypePtr elem);
    static TypePtr optional_of(TypePtr elem);
    static TypePtr record_of(std::string qname, std::vector<RecordField> fields);
    static TypePtr enum_of(std::string qname, std::vector<std::string> variants);
    static TypePtr named_ref(std::string name);

    const RecordField* find_field(const std::string& name) const;
    bool has_variant(const std::string& v) const;
};

struct Money {
    std::int64_t amount_minor = 0;
    std::string currency;  // 3 uppercase letters

    bool operator==(const Money&) const = default;
};

bool valid_currency(const std::string& c);

struct Value;
using ValueList = std::vector<Value>;

struct RecordValue {
    // Fields in the record type's declaration order.
    std::vector<std::pair<std::string, Value>> fields;
};

struct Value {
    enum class Kind { v_int, v_float, v_bool, v_string, v_money, v_record, v_list, v_optional, v_enum };

    Kind kind = Kind::v_int;
    std::int64_t i = 0;
    double f = 0.0;
    bool b = false;
    std::string s;  // string payload or enum variant
    Money money;
    std::shared_ptr<RecordValue> record;
    std::shared_ptr<ValueList> list;
    std::shared_ptr<Value> opt;  // nullptr = absent

    static Value of_int(std::int64_t v);
    static Value of_float(double v);
    static Value of_bool(bool v);
    static Value of_string(std::string v);
    static Value of_money(std::int64_t amount_minor, std::string currency);
    static Value of_record(std::vector<std::pair<std::string, Value>> fields);
    static Value of_list(std::vector<Value> elems);
    static Value absent();
    static Value present(Value inner);
    static Value of_enum(std::string variant);

    const Value* field(const std::string& name) const;
    bool equals(const Value& other) const;
};

// True iff v inhabits t. Recursive over records/lists/optionals; enum values
// must name a declared variant. Throws UnresolvedType on TypeKind::named and
// DepthError past kMaxNestingDepth.
bool check_value(const Value& v, const TypeExpr& t);

// Structural for primitives/lists/optionals, nominal (by qname) for
// records/enums. Throws UnresolvedType / DepthError like check_value.
bool type_equal(const TypeExpr& a, const TypeExpr& b);

// Canonical deterministic rendering. Records print fields in declaration
// order, money as "<units>.<2-digit minor> <CUR>", lists bracketed.
std::string render_value(const Value& v);

std::string render_type(const TypeExpr& t);

std::string render_money(const Money& m);

// Inverse of render_value for primitive and money types; used by tests and
// display-string parsing. Throws std::invalid_argument on malformed text.
Value parse_scalar(const std::string& text, const TypeExpr& t);

int value_depth(const Value& v);

}  // namespace webverbs

#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "webverbs/ast.hpp"
#include "webverbs/registry.hpp"
#include "webverbs/types.hpp"

namespace webverbs::eval {

// Dynamic error classes a well-typed program may still hit. Anything else
// surfaces as `internal_type`, which the static checker is supposed to make
// unreachable (property-tested).
class EvalError : public std::runtime_error {
public:
    enum class Kind { div_zero, empty_extremal, mixed_currency, internal_type };

    EvalError(Kind kind, SourcePos pos, const std::string& message)
        : std::runtime_error(message), kind_(kind), pos_(pos) {}

    Kind kind() const { return kind_; }
    SourcePos pos() const { return pos_; }

private:
    Kind kind_;
    SourcePos pos_;
};

const char* to_string(EvalError::Kind k);

// Lexically scoped variable environment. Values copy shallowly but are never
// mutated in place; mutation rebuilds the spine (see assign_path), so
// sharing is unobservable and assignment behaves like a deep copy.
class Env {
public:
    void push_scope() { scopes_.emplace_back(); }
    void pop_scope() { scopes_.pop_back(); }
    void bind(const std::string& name, Value v) { scopes_.back()[name] = std::move(v); }

    Value* find(const std::string& name);
    const Value* find(const std::string& name) const;

private:
    std::vector<std::map<std::string, Value>> scopes_;
};

// Rebuilds `root` with the record field at `path[start..]` replaced; shared
// substructure is cloned along the way.
Value assign_path(const Value& root, const std::vector<std::string>& path, std::size_t start,
                  Value replacement, SourcePos pos);

// Returns a copy of `list_value` with `element` appended.
Value list_append(const Value& list_value, Value element, SourcePos pos);

// Invoked for VerbCall nodes with arguments already evaluated left-to-right
// in source order.
using VerbInvoker =
    std::function<Value(const wfl::Expr& call,
                        const std::vector<std::pair<std::string, Value>>& args)>;

class Evaluator {
public:
    // `reg` resolves record literal types; may be null when the expression
    // contains none (contract predicates). `invoker` likewise may be null.
    Evaluator(Env& env, const Registry* reg, VerbInvoker invoker)
        : env_(env), reg_(reg), invoker_(std::move(invoker)) {}

    Value eval(const wfl::Expr& e);

private:
    Value eval_binary(const wfl::Expr& e);
    Value eval_builtin(const wfl::Expr& e);

    Env& env_;
    const Registry* reg_;
    VerbInvoker invoker_;
};

}  // namespace webverbs::eval

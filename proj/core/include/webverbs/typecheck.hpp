#pragma once

#include <optional>
#include <string>
#include <vector>

#include "webverbs/ast.hpp"
#include "webverbs/manifest.hpp"
#include "webverbs/registry.hpp"

namespace webverbs::wfl {

struct TypeErrorInfo {
    SourcePos pos;
    std::string message;
    TypePtr expected;  // may be null when not a simple mismatch
    TypePtr found;
};

std::string format_type_error(const TypeErrorInfo& e);

struct CheckResult {
    std::vector<TypeErrorInfo> errors;
    // Type of the program's Return expressions; null when the program returns
    // unit (no Return or bare `return;`).
    TypePtr return_type;

    bool ok() const { return errors.empty(); }
};

// Static checker: verb signatures against the registry, builtin typing,
// grant-header tags, binding-before-use, return-path analysis. An empty
// error list guarantees the interpreter never hits a type mismatch.
CheckResult type_check(const WorkflowProgram& prog, const Registry& reg);

// Contract predicates: restricted expressions over `params.*` (and
// `result.*` for postconditions) that must type-check to bool. Used by
// manifest validation; no registry needed because verb calls are banned.
std::vector<TypeErrorInfo> check_predicate(const Expr& pred, const idl::VerbSpec& spec,
                                           bool is_postcondition);

}  // namespace webverbs::wfl

#pragma once

#include <stdexcept>
#include <string>

#include "webverbs/ast.hpp"
#include "webverbs/diag.hpp"

namespace webverbs::wfl {

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(SourcePos pos, const std::string& message)
        : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " +
                             message),
          pos_(pos),
          message_(message) {}

    SourcePos pos() const { return pos_; }
    const std::string& message() const { return message_; }

private:
    SourcePos pos_;
    std::string message_;
};

// Parses a workflow source file. Single-pass recursive descent; throws
// SyntaxError with the position and expected-token set on the first error.
WorkflowProgram parse_workflow(const std::string& text);

// Parses a single expression (used for contract predicates). The whole input
// must be consumed.
ExprPtr parse_expression_text(const std::string& text);

// Parses the textual type syntax used by manifests and `let` annotations:
// int | float | bool | string | money | list<T> | optional<T> | Name |
// site::Name. Record/enum names come back as TypeKind::named references.
TypePtr parse_type_text(const std::string& text);

}  // namespace webverbs::wfl

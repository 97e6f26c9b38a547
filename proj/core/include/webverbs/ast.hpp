#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "webverbs/diag.hpp"
#include "webverbs/types.hpp"

namespace webverbs::wfl {

enum class BinOp { add, sub, mul, div, lt, le, gt, ge, eq, ne, logical_and, logical_or };
enum class UnOp { logical_not, negate };

const char* to_string(BinOp op);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    enum class Kind {
        literal,         // int/float/bool/string literal, or enum literal site::type::variant
        var,             // name
        field_access,    // lhs . name
        verb_call,       // name = "site::verb", named_args
        builtin_call,    // name, args
        binary,          // bin_op, lhs, rhs
        unary,           // un_op, lhs
        list_literal,    // args
        record_literal,  // name = "site::Type", named_args
    };

    Kind kind;
    SourcePos pos;

    Value literal;          // Kind::literal
    std::string enum_type;  // qualified enum type when literal is an enum value
    std::string name;
    BinOp bin_op = BinOp::add;
    UnOp un_op = UnOp::logical_not;
    ExprPtr lhs;
    ExprPtr rhs;
    std::vector<std::pair<std::string, ExprPtr>> named_args;
    std::vector<ExprPtr> args;
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
    enum class Kind { let_decl, assign, for_loop, if_branch, return_stmt, expr_stmt };

    Kind kind;
    SourcePos pos;

    std::string name;                      // let / for variable
    TypePtr declared_type;                 // optional `let x: T = ...` annotation
    std::vector<std::string> target_path;  // assign: var(.field)*
    ExprPtr expr;  // let init / assign rhs / for iterable / if cond / return value (may be null)
    std::vector<StmtPtr> body;
    std::vector<StmtPtr> else_body;
};

struct WorkflowProgram {
    std::vector<std::string> grants;  // raw tag names from the `grant` header
    SourcePos grants_pos;
    std::vector<StmtPtr> statements;
    std::string source;  // original text, for digests and error reporting
};

}  // namespace webverbs::wfl

#pragma once

#include <string>

#include "webverbs/ast.hpp"

namespace webverbs::wfl {

// Canonical source form: parse(print(parse(text))) == parse(text).
std::string print_program(const WorkflowProgram& prog);
std::string print_expr(const Expr& e);

}  // namespace webverbs::wfl

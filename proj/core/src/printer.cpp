#include "webverbs/printer.hpp"

namespace webverbs::wfl {

namespace {

int precedence(BinOp op) {
    switch (op) {
        case BinOp::logical_or: return 1;
        case BinOp::logical_and: return 2;
        case BinOp::lt:
        case BinOp::le:
        case BinOp::gt:
        case BinOp::ge:
        case BinOp::eq:
        case BinOp::ne: return 3;
        case BinOp::add:
        case BinOp::sub: return 4;
        case BinOp::mul:
        case BinOp::div: return 5;
    }
    return 0;
}

constexpr int kUnaryPrec = 6;

void print_expr_prec(const Expr& e, int parent_prec, std::string& out);

void print_args(const std::vector<std::pair<std::string, ExprPtr>>& args, std::string& out) {
    bool first = true;
    for (const auto& [name, value] : args) {
        if (!first) out += ", ";
        first = false;
        out += name;
        out += " = ";
        print_expr_prec(*value, 0, out);
    }
}

void print_expr_prec(const Expr& e, int parent_prec, std::string& out) {
    switch (e.kind) {
        case Expr::Kind::literal:
            if (!e.enum_type.empty()) {
                out += e.enum_type + "::" + e.literal.s;
            } else {
                out += render_value(e.literal);
            }
            break;
        case Expr::Kind::var:
            out += e.name;
            break;
        case Expr::Kind::field_access:
            print_expr_prec(*e.lhs, kUnaryPrec + 1, out);
            out += '.';
            out += e.name;
            break;
        case Expr::Kind::verb_call:
        case Expr::Kind::builtin_call: {
            if (e.kind == Expr::Kind::verb_call) {
                out += e.name;
                out += '(';
                print_args(e.named_args, out);
            } else {
                out += e.name;
                out += '(';
                bool first = true;
                for (const auto& a : e.args) {
                    if (!first) out += ", ";
                    first = false;
                    print_expr_prec(*a, 0, out);
                }
            }
            out += ')';
            break;
        }
        case Expr::Kind::record_literal:
            out += e.name;
            out += '{';
            print_args(e.named_args, out);
            out += '}';
            break;
        case Expr::Kind::list_literal: {
            out += '[';
            bool first = true;
            for (const auto& a : e.args) {
                if (!first) out += ", ";
                first = false;
                print_expr_prec(*a, 0, out);
            }
            out += ']';
            break;
        }
        case Expr::Kind::unary: {
            bool paren = parent_prec > kUnaryPrec;
            if (paren) out += '(';
            out += e.un_op == UnOp::logical_not ? "!" : "-";
            print_expr_prec(*e.lhs, kUnaryPrec, out);
            if (paren) out += ')';
            break;
        }
        case Expr::Kind::binary: {
            int prec = precedence(e.bin_op);
            bool paren = prec < parent_prec;
            if (paren) out += '(';
            print_expr_prec(*e.lhs, prec, out);
            out += ' ';
            out += to_string(e.bin_op);
            out += ' ';
            // Comparisons are non-associative and +,-,*,/ are left-associative,
            // so the right operand always needs one level more binding.
            print_expr_prec(*e.rhs, prec + 1, out);
            if (paren) out += ')';
            break;
        }
    }
}

void print_stmt(const Stmt& s, int indent, std::string& out);

void print_block(const std::vector<StmtPtr>& stmts, int indent, std::string& out) {
    out += "{\n";
    for (const auto& st : stmts) print_stmt(*st, indent + 1, out);
    out.append(static_cast<std::size_t>(indent) * 4, ' ');
    out += "}";
}

void print_stmt(const Stmt& s, int indent, std::string& out) {
    out.append(static_cast<std::size_t>(indent) * 4, ' ');
    switch (s.kind) {
        case Stmt::Kind::let_decl:
            out += "let " + s.name;
            if (s.declared_type) out += ": " + render_type(*s.declared_type);
            out += " = ";
            print_expr_prec(*s.expr, 0, out);
            out += ";\n";
            break;
        case Stmt::Kind::assign: {
            bool first = true;
            for (const auto& seg : s.target_path) {
                if (!first) out += '.';
                first = false;
                out += seg;
            }
            out += " = ";
            print_expr_prec(*s.expr, 0, out);
            out += ";\n";
            break;
        }
        case Stmt::Kind::for_loop:
            out += "for " + s.name + " in ";
            print_expr_prec(*s.expr, 0, out);
            out += ' ';
            print_block(s.body, indent, out);
            out += '\n';
            break;
        case Stmt::Kind::if_branch:
            out += "if ";
            print_expr_prec(*s.expr, 0, out);
            out += ' ';
            print_block(s.body, indent, out);
            if (!s.else_body.empty()) {
                out += " else ";
                if (s.else_body.size() == 1 && s.else_body[0]->kind == Stmt::Kind::if_branch) {
                    // else-if chain: print inline without re-indenting
                    std::string chained;
                    print_stmt(*s.else_body[0], indent, chained);
                    // strip the leading indent the nested call added
                    out += chained.substr(static_cast<std::size_t>(indent) * 4);
                    return;
                }
                print_block(s.else_body, indent, out);
            }
            out += '\n';
            break;
        case Stmt::Kind::return_stmt:
            out += "return";
            if (s.expr) {
                out += ' ';
                print_expr_prec(*s.expr, 0, out);
            }
            out += ";\n";
            break;
        case Stmt::Kind::expr_stmt:
            print_expr_prec(*s.expr, 0, out);
            out += ";\n";
            break;
    }
}

}  // namespace

std::string print_program(const WorkflowProgram& prog) {
    std::string out;
    if (!prog.grants.empty()) {
        out += "grant ";
        bool first = true;
        for (const auto& g : prog.grants) {
            if (!first) out += ", ";
            first = false;
            out += g;
        }
        out += ";\n\n";
    }
    for (const auto& s : prog.statements) print_stmt(*s, 0, out);
    return out;
}

std::string print_expr(const Expr& e) {
    std::string out;
    print_expr_prec(e, 0, out);
    return out;
}

}  // namespace webverbs::wfl

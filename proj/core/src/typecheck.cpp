#include "webverbs/typecheck.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace webverbs::wfl {

std::string format_type_error(const TypeErrorInfo& e) {
    std::string out = std::to_string(e.pos.line) + ":" + std::to_string(e.pos.col) + ": " +
                      e.message;
    return out;
}

namespace {

const TypePtr kInt = TypeExpr::prim(TypeKind::t_int);
const TypePtr kFloat = TypeExpr::prim(TypeKind::t_float);
const TypePtr kBool = TypeExpr::prim(TypeKind::t_bool);
const TypePtr kString = TypeExpr::prim(TypeKind::t_string);
const TypePtr kMoney = TypeExpr::prim(TypeKind::t_money);

bool orderable(const TypeExpr& t) {
    switch (t.kind) {
        case TypeKind::t_int:
        case TypeKind::t_float:
        case TypeKind::t_string:
        case TypeKind::t_money:
            return true;
        default:
            return false;
    }
}

class Checker {
public:
    // Program mode.
    Checker(const Registry* reg) : reg_(reg) {}

    // Predicate mode: verbs banned, only `len` among builtins, variables are
    // exactly `params` (+ `result` for postconditions).
    Checker(const idl::VerbSpec& spec, bool is_post) : predicate_mode_(true) {
        std::vector<RecordField> pfields;
        for (const auto& [n, t] : spec.params) pfields.push_back({n, t});
        predicate_vars_["params"] = TypeExpr::record_of("<params>", std::move(pfields));
        if (is_post && spec.result) predicate_vars_["result"] = spec.result;
    }

    std::vector<TypeErrorInfo> take_errors() { return std::move(errors_); }

    CheckResult check_program(const WorkflowProgram& prog) {
        for (const auto& g : prog.grants)
            if (!idl::policy_tag_from_string(g))
                error(prog.grants_pos, "grant header names unknown policy tag '" + g + "'");

        push_scope();
        check_stmts(prog.statements);
        pop_scope();

        if (saw_valued_return_ && saw_bare_return_)
            error(first_return_pos_, "program mixes `return;` and `return <expr>;`");

        if (saw_valued_return_ && !returns_always(prog.statements)) {
            SourcePos p = prog.statements.empty() ? SourcePos{1, 1}
                                                  : prog.statements.back()->pos;
            error(p, "not every path through the program returns a value");
        }

        CheckResult res;
        res.errors = std::move(errors_);
        res.return_type = saw_valued_return_ ? return_type_ : nullptr;
        return res;
    }

    TypePtr check_predicate_expr(const Expr& e) {
        TypePtr t = check_expr(e, nullptr);
        if (t && t->kind != TypeKind::t_bool)
            mismatch(e.pos, "predicate must be bool", kBool, t);
        return t;
    }

private:
    struct Binding {
        TypePtr type;
        bool is_let;
    };

    void push_scope() { scopes_.emplace_back(); }
    void pop_scope() { scopes_.pop_back(); }

    Binding* find_binding(const std::string& name) {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto b = it->find(name);
            if (b != it->end()) return &b->second;
        }
        return nullptr;
    }

    void error(SourcePos pos, const std::string& msg, TypePtr expected = nullptr,
               TypePtr found = nullptr) {
        errors_.push_back({pos, msg, std::move(expected), std::move(found)});
    }

    void mismatch(SourcePos pos, const std::string& context, const TypePtr& expected,
                  const TypePtr& found) {
        error(pos,
              context + ": expected " + render_type(*expected) + ", found " +
                  render_type(*found),
              expected, found);
    }

    bool same(const TypePtr& a, const TypePtr& b) {
        if (!a || !b) return true;  // error already reported upstream
        return type_equal(*a, *b);
    }

    // ----- statements -----

    void check_stmts(const std::vector<StmtPtr>& stmts) {
        for (size_t i = 0; i < stmts.size(); ++i) {
            check_stmt(*stmts[i]);
            if (i + 1 < stmts.size() && returns_always_one(*stmts[i]))
                error(stmts[i + 1]->pos, "unreachable statement");
        }
    }

    void check_stmt(const Stmt& s) {
        switch (s.kind) {
            case Stmt::Kind::let_decl: {
                TypePtr declared;
                if (s.declared_type) {
                    declared = resolve_annotation(s.declared_type, s.pos);
                    if (!declared) break;
                }
                TypePtr init = check_expr(*s.expr, declared);
                if (declared && init && !same(declared, init))
                    mismatch(s.expr->pos, "let initializer", declared, init);
                if (scopes_.back().count(s.name)) {
                    error(s.pos, "variable '" + s.name + "' already bound in this scope");
                    break;
                }
                scopes_.back()[s.name] = {declared ? declared : init, true};
                break;
            }
            case Stmt::Kind::assign: {
                Binding* b = find_binding(s.target_path[0]);
                if (!b) {
                    error(s.pos, "assignment to undeclared variable '" + s.target_path[0] + "'");
                    check_expr(*s.expr, nullptr);
                    break;
                }
                if (!b->is_let) {
                    error(s.pos, "cannot assign to loop variable '" + s.target_path[0] + "'");
                    check_expr(*s.expr, nullptr);
                    break;
                }
                TypePtr target = b->type;
                for (size_t i = 1; i < s.target_path.size() && target; ++i) {
                    if (target->kind != TypeKind::t_record) {
                        error(s.pos, "cannot assign into field '" + s.target_path[i] +
                                         "' of non-record type " + render_type(*target));
                        target = nullptr;
                        break;
                    }
                    const RecordField* f = target->find_field(s.target_path[i]);
                    if (!f) {
                        error(s.pos, "record " + render_type(*target) + " has no field '" +
                                         s.target_path[i] + "'");
                        target = nullptr;
                        break;
                    }
                    target = f->type;
                }
                TypePtr rhs = check_expr(*s.expr, target);
                if (target && rhs && !same(target, rhs))
                    mismatch(s.expr->pos, "assignment", target, rhs);
                break;
            }
            case Stmt::Kind::for_loop: {
                TypePtr iter = check_expr_no_effects(*s.expr, "loop iterable");
                TypePtr elem;
                if (iter) {
                    if (iter->kind != TypeKind::t_list) {
                        mismatch(s.expr->pos, "for loop iterable",
                                 TypeExpr::list_of(iter), iter);
                    } else {
                        elem = iter->element;
                    }
                }
                push_scope();
                scopes_.back()[s.name] = {elem, false};
                check_stmts(s.body);
                pop_scope();
                break;
            }
            case Stmt::Kind::if_branch: {
                TypePtr cond = check_expr_no_effects(*s.expr, "if condition");
                if (cond && cond->kind != TypeKind::t_bool)
                    mismatch(s.expr->pos, "if condition", kBool, cond);
                push_scope();
                check_stmts(s.body);
                pop_scope();
                push_scope();
                check_stmts(s.else_body);
                pop_scope();
                break;
            }
            case Stmt::Kind::return_stmt: {
                if (!first_return_pos_.valid()) first_return_pos_ = s.pos;
                if (!s.expr) {
                    saw_bare_return_ = true;
                    break;
                }
                TypePtr t = check_expr(*s.expr, return_type_);
                if (!saw_valued_return_) {
                    saw_valued_return_ = true;
                    return_type_ = t;
                } else if (t && return_type_ && !same(return_type_, t)) {
                    mismatch(s.expr->pos, "return value", return_type_, t);
                }
                break;
            }
            case Stmt::Kind::expr_stmt: {
                if (s.expr->kind == Expr::Kind::builtin_call && s.expr->name == "push") {
                    check_push(*s.expr);
                    break;
                }
                check_expr(*s.expr, nullptr);
                break;
            }
        }
    }

    bool returns_always_one(const Stmt& s) {
        switch (s.kind) {
            case Stmt::Kind::return_stmt: return true;
            case Stmt::Kind::if_branch:
                return !s.else_body.empty() && returns_always(s.body) &&
                       returns_always(s.else_body);
            default:
                return false;  // loops may iterate zero times
        }
    }

    bool returns_always(const std::vector<StmtPtr>& stmts) {
        for (const auto& s : stmts)
            if (returns_always_one(*s)) return true;
        return false;
    }

    // ----- expressions -----

    TypePtr resolve_annotation(const TypePtr& t, SourcePos pos) {
        switch (t->kind) {
            case TypeKind::named: {
                if (predicate_mode_ || !reg_) {
                    error(pos, "named types are not allowed here");
                    return nullptr;
                }
                TypePtr found = reg_->find_type(t->qname);
                if (!found) {
                    error(pos, "unknown type '" + t->qname + "'");
                    return nullptr;
                }
                return found;
            }
            case TypeKind::t_list:
            case TypeKind::t_optional: {
                TypePtr elem = resolve_annotation(t->element, pos);
                if (!elem) return nullptr;
                return t->kind == TypeKind::t_list ? TypeExpr::list_of(elem)
                                                   : TypeExpr::optional_of(elem);
            }
            default:
                return t;
        }
    }

    // Conditions and iterables must not trigger side effects.
    TypePtr check_expr_no_effects(const Expr& e, const char* where) {
        bool prev = ban_side_effect_calls_;
        ban_side_effect_calls_ = true;
        ban_reason_ = where;
        TypePtr t = check_expr(e, nullptr);
        ban_side_effect_calls_ = prev;
        return t;
    }

    TypePtr check_expr(const Expr& e, TypePtr expected) {
        switch (e.kind) {
            case Expr::Kind::literal: return check_literal(e);
            case Expr::Kind::var: return check_var(e);
            case Expr::Kind::field_access: return check_field_access(e);
            case Expr::Kind::verb_call: return check_verb_call(e);
            case Expr::Kind::builtin_call: return check_builtin(e);
            case Expr::Kind::binary: return check_binary(e);
            case Expr::Kind::unary: return check_unary(e);
            case Expr::Kind::list_literal: return check_list_literal(e, expected);
            case Expr::Kind::record_literal: return check_record_literal(e);
        }
        return nullptr;
    }

    TypePtr check_literal(const Expr& e) {
        if (!e.enum_type.empty()) {
            if (predicate_mode_) {
                error(e.pos, "enum literals are not allowed in contract predicates");
                return nullptr;
            }
            TypePtr t = reg_ ? reg_->find_type(e.enum_type) : nullptr;
            if (!t) {
                error(e.pos, "unknown type '" + e.enum_type + "'");
                return nullptr;
            }
            if (t->kind != TypeKind::t_enum) {
                error(e.pos, "'" + e.enum_type + "' is not an enum type");
                return nullptr;
            }
            if (!t->has_variant(e.literal.s)) {
                error(e.pos,
                      "enum " + e.enum_type + " has no variant '" + e.literal.s + "'");
                return nullptr;
            }
            return t;
        }
        switch (e.literal.kind) {
            case Value::Kind::v_int: return kInt;
            case Value::Kind::v_float: return kFloat;
            case Value::Kind::v_bool: return kBool;
            case Value::Kind::v_string: return kString;
            default:
                error(e.pos, "unsupported literal");
                return nullptr;
        }
    }

    TypePtr check_var(const Expr& e) {
        if (predicate_mode_) {
            auto it = predicate_vars_.find(e.name);
            if (it == predicate_vars_.end()) {
                error(e.pos, "predicates may reference only " +
                                 std::string(predicate_vars_.count("result")
                                                 ? "'params' and 'result'"
                                                 : "'params'") +
                                 ", found '" + e.name + "'");
                return nullptr;
            }
            return it->second;
        }
        Binding* b = find_binding(e.name);
        if (!b) {
            error(e.pos, "use of undeclared variable '" + e.name + "'");
            return nullptr;
        }
        return b->type;
    }

    TypePtr check_field_access(const Expr& e) {
        TypePtr base = check_expr(*e.lhs, nullptr);
        if (!base) return nullptr;
        if (base->kind == TypeKind::t_money) {
            if (e.name == "amount_minor") return kInt;
            if (e.name == "currency") return kString;
            error(e.pos, "money has no field '" + e.name + "' (amount_minor, currency)");
            return nullptr;
        }
        if (base->kind != TypeKind::t_record) {
            error(e.pos,
                  "field access on non-record type " + render_type(*base), nullptr, base);
            return nullptr;
        }
        const RecordField* f = base->find_field(e.name);
        if (!f) {
            error(e.pos, "record " + render_type(*base) + " has no field '" + e.name + "'");
            return nullptr;
        }
        return f->type;
    }

    TypePtr check_verb_call(const Expr& e) {
        if (predicate_mode_) {
            error(e.pos, "verb calls are not allowed in contract predicates");
            return nullptr;
        }
        if (!reg_) {
            error(e.pos, "no registry available for verb resolution");
            return nullptr;
        }
        const idl::VerbSpec* spec = reg_->try_lookup(e.name);
        if (!spec) {
            error(e.pos, "unknown verb '" + e.name + "'");
            for (const auto& [n, a] : e.named_args) check_expr(*a, nullptr);
            return nullptr;
        }
        if (spec->side_effecting() && ban_side_effect_calls_)
            error(e.pos, "side_effecting verb '" + e.name + "' is not allowed in a " +
                             ban_reason_);

        std::set<std::string> given;
        for (const auto& [n, a] : e.named_args) {
            given.insert(n);
            const TypePtr* pt = spec->param_type(n);
            if (!pt) {
                error(a->pos, "verb '" + e.name + "' has no parameter '" + n + "'");
                check_expr(*a, nullptr);
                continue;
            }
            TypePtr at = check_expr(*a, *pt);
            if (at && !same(*pt, at))
                mismatch(a->pos, "argument '" + n + "'", *pt, at);
        }
        for (const auto& [n, t] : spec->params)
            if (!given.count(n))
                error(e.pos, "verb '" + e.name + "' missing argument '" + n + "'");
        return spec->result;
    }

    void check_push(const Expr& e) {
        if (e.args.size() != 2) {
            error(e.pos, "push takes (list, element)");
            return;
        }
        const Expr& target = *e.args[0];
        if (target.kind != Expr::Kind::var) {
            error(target.pos, "push target must be a let-bound list variable");
            return;
        }
        Binding* b = find_binding(target.name);
        if (!b) {
            error(target.pos, "use of undeclared variable '" + target.name + "'");
            return;
        }
        if (!b->is_let) {
            error(target.pos, "cannot push into loop variable '" + target.name + "'");
            return;
        }
        if (!b->type) return;
        if (b->type->kind != TypeKind::t_list) {
            mismatch(target.pos, "push target", TypeExpr::list_of(kInt), b->type);
            return;
        }
        TypePtr et = check_expr(*e.args[1], b->type->element);
        if (et && !same(b->type->element, et))
            mismatch(e.args[1]->pos, "pushed element", b->type->element, et);
    }

    TypePtr field_name_arg(const Expr& call, size_t idx, const TypePtr& list_type,
                           std::string* out_name) {
        const Expr& a = *call.args[idx];
        if (a.kind != Expr::Kind::literal || a.literal.kind != Value::Kind::v_string ||
            !a.enum_type.empty()) {
            error(a.pos, call.name + " needs a string literal field name");
            return nullptr;
        }
        if (!list_type || list_type->kind != TypeKind::t_list) return nullptr;
        const TypeExpr& elem = *list_type->element;
        if (elem.kind != TypeKind::t_record) {
            error(a.pos, call.name + " needs a list of records, found " +
                             render_type(*list_type));
            return nullptr;
        }
        const RecordField* f = elem.find_field(a.literal.s);
        if (!f) {
            error(a.pos, "record " + render_type(elem) + " has no field '" + a.literal.s + "'");
            return nullptr;
        }
        if (out_name) *out_name = a.literal.s;
        return f->type;
    }

    TypePtr check_builtin(const Expr& e) {
        const std::string& n = e.name;

        if (predicate_mode_ && n != "len") {
            error(e.pos, "builtin '" + n + "' is not allowed in contract predicates");
            return nullptr;
        }

        auto arity = [&](size_t want) {
            if (e.args.size() != want) {
                error(e.pos, n + " takes " + std::to_string(want) + " argument" +
                                 (want == 1 ? "" : "s") + ", got " +
                                 std::to_string(e.args.size()));
                return false;
            }
            return true;
        };

        if (n == "len") {
            if (!arity(1)) return nullptr;
            TypePtr t = check_expr(*e.args[0], nullptr);
            if (t && t->kind != TypeKind::t_list)
                mismatch(e.args[0]->pos, "len argument", TypeExpr::list_of(kInt), t);
            return kInt;
        }
        if (n == "sum") {
            if (!arity(1)) return nullptr;
            TypePtr t = check_expr(*e.args[0], TypeExpr::list_of(kInt));
            if (t && !same(t, TypeExpr::list_of(kInt)))
                mismatch(e.args[0]->pos, "sum argument", TypeExpr::list_of(kInt), t);
            return kInt;
        }
        if (n == "sum_money") {
            if (!arity(1)) return nullptr;
            TypePtr t = check_expr(*e.args[0], TypeExpr::list_of(kMoney));
            if (t && !same(t, TypeExpr::list_of(kMoney)))
                mismatch(e.args[0]->pos, "sum_money argument", TypeExpr::list_of(kMoney), t);
            return kMoney;
        }
        if (n == "push") {
            error(e.pos, "push is only valid as a statement");
            return nullptr;
        }
        if (n == "sort_by" || n == "sort_by_desc") {
            if (!arity(2)) return nullptr;
            TypePtr lt = check_expr(*e.args[0], nullptr);
            TypePtr ft = field_name_arg(e, 1, lt, nullptr);
            if (ft && !orderable(*ft))
                error(e.args[1]->pos,
                      n + " field must be orderable (int/float/string/money), found " +
                          render_type(*ft));
            return lt;
        }
        if (n == "min_by" || n == "max_by") {
            if (!arity(2)) return nullptr;
            TypePtr lt = check_expr(*e.args[0], nullptr);
            TypePtr ft = field_name_arg(e, 1, lt, nullptr);
            if (ft && !orderable(*ft))
                error(e.args[1]->pos,
                      n + " field must be orderable (int/float/string/money), found " +
                          render_type(*ft));
            return lt && lt->kind == TypeKind::t_list ? lt->element : nullptr;
        }
        if (n == "map_field") {
            if (!arity(2)) return nullptr;
            TypePtr lt = check_expr(*e.args[0], nullptr);
            TypePtr ft = field_name_arg(e, 1, lt, nullptr);
            return ft ? TypeExpr::list_of(ft) : nullptr;
        }
        if (n == "cartesian") {
            if (!arity(1)) return nullptr;
            TypePtr t = check_expr(*e.args[0], nullptr);
            if (!t) return nullptr;
            if (t->kind != TypeKind::t_list || t->element->kind != TypeKind::t_list) {
                error(e.args[0]->pos, "cartesian needs list<list<T>>, found " + render_type(*t));
                return nullptr;
            }
            return t;
        }
        if (n == "range") {
            if (!arity(2)) return nullptr;
            for (int i = 0; i < 2; ++i) {
                TypePtr t = check_expr(*e.args[i], kInt);
                if (t && t->kind != TypeKind::t_int)
                    mismatch(e.args[i]->pos, "range bound", kInt, t);
            }
            return TypeExpr::list_of(kInt);
        }
        if (n == "concat") {
            if (!arity(2)) return nullptr;
            for (int i = 0; i < 2; ++i) {
                TypePtr t = check_expr(*e.args[i], kString);
                if (t && t->kind != TypeKind::t_string)
                    mismatch(e.args[i]->pos, "concat argument", kString, t);
            }
            return kString;
        }
        if (n == "money") {
            if (!arity(2)) return nullptr;
            TypePtr at = check_expr(*e.args[0], kInt);
            if (at && at->kind != TypeKind::t_int)
                mismatch(e.args[0]->pos, "money amount", kInt, at);
            const Expr& cur = *e.args[1];
            if (cur.kind != Expr::Kind::literal ||
                cur.literal.kind != Value::Kind::v_string || !cur.enum_type.empty()) {
                error(cur.pos, "money currency must be a string literal");
            } else if (!valid_currency(cur.literal.s)) {
                error(cur.pos, "invalid currency code '" + cur.literal.s + "'");
            }
            return kMoney;
        }
        error(e.pos, "unknown builtin '" + n + "'");
        for (const auto& a : e.args) check_expr(*a, nullptr);
        return nullptr;
    }

    TypePtr check_binary(const Expr& e) {
        if (e.bin_op == BinOp::logical_and || e.bin_op == BinOp::logical_or) {
            // Short-circuit operands may be skipped at runtime, so
            // side_effecting calls are banned inside them.
            bool prev = ban_side_effect_calls_;
            const char* prev_reason = ban_reason_;
            if (!predicate_mode_) {
                ban_side_effect_calls_ = true;
                ban_reason_ = "short-circuit operand";
            }
            TypePtr lt = check_expr(*e.lhs, kBool);
            TypePtr rt = check_expr(*e.rhs, kBool);
            ban_side_effect_calls_ = prev;
            ban_reason_ = prev_reason;
            if (lt && lt->kind != TypeKind::t_bool)
                mismatch(e.lhs->pos, "logical operand", kBool, lt);
            if (rt && rt->kind != TypeKind::t_bool)
                mismatch(e.rhs->pos, "logical operand", kBool, rt);
            return kBool;
        }

        TypePtr lt = check_expr(*e.lhs, nullptr);
        TypePtr rt = check_expr(*e.rhs, lt);
        if (!lt || !rt) return comparison(e.bin_op) ? kBool : nullptr;
        if (!same(lt, rt)) {
            mismatch(e.rhs->pos,
                     std::string("operands of '") + to_string(e.bin_op) + "'", lt, rt);
            return comparison(e.bin_op) ? kBool : nullptr;
        }

        switch (e.bin_op) {
            case BinOp::eq:
            case BinOp::ne:
                return kBool;
            case BinOp::lt:
            case BinOp::le:
            case BinOp::gt:
            case BinOp::ge:
                if (!orderable(*lt))
                    error(e.pos, std::string("'") + to_string(e.bin_op) +
                                     "' not defined for " + render_type(*lt));
                return kBool;
            case BinOp::add:
            case BinOp::sub:
                if (lt->kind != TypeKind::t_int && lt->kind != TypeKind::t_float &&
                    lt->kind != TypeKind::t_money)
                    error(e.pos, std::string("'") + to_string(e.bin_op) +
                                     "' not defined for " + render_type(*lt));
                return lt;
            case BinOp::mul:
            case BinOp::div:
                if (lt->kind != TypeKind::t_int && lt->kind != TypeKind::t_float)
                    error(e.pos, std::string("'") + to_string(e.bin_op) +
                                     "' not defined for " + render_type(*lt));
                return lt;
            default:
                return nullptr;
        }
    }

    static bool comparison(BinOp op) {
        switch (op) {
            case BinOp::lt:
            case BinOp::le:
            case BinOp::gt:
            case BinOp::ge:
            case BinOp::eq:
            case BinOp::ne:
                return true;
            default:
                return false;
        }
    }

    TypePtr check_unary(const Expr& e) {
        TypePtr t = check_expr(*e.lhs, nullptr);
        if (!t) return nullptr;
        if (e.un_op == UnOp::logical_not) {
            if (t->kind != TypeKind::t_bool) mismatch(e.pos, "'!' operand", kBool, t);
            return kBool;
        }
        if (t->kind != TypeKind::t_int && t->kind != TypeKind::t_float)
            error(e.pos, "unary '-' not defined for " + render_type(*t));
        return t;
    }

    TypePtr check_list_literal(const Expr& e, const TypePtr& expected) {
        if (predicate_mode_) {
            error(e.pos, "list literals are not allowed in contract predicates");
            return nullptr;
        }
        TypePtr elem_expected;
        if (expected && expected->kind == TypeKind::t_list) elem_expected = expected->element;

        if (e.args.empty()) {
            if (!elem_expected) {
                error(e.pos, "cannot infer the element type of an empty list here; "
                             "annotate the let binding");
                return nullptr;
            }
            return TypeExpr::list_of(elem_expected);
        }
        TypePtr elem;
        for (const auto& a : e.args) {
            TypePtr t = check_expr(*a, elem ? elem : elem_expected);
            if (!t) return nullptr;
            if (!elem) {
                elem = t;
            } else if (!same(elem, t)) {
                error(a->pos, "heterogeneous list literal: expected " + render_type(*elem) +
                                  ", found " + render_type(*t),
                      elem, t);
                return nullptr;
            }
        }
        if (elem_expected && elem && !same(elem_expected, elem)) {
            mismatch(e.pos, "list literal", TypeExpr::list_of(elem_expected),
                     TypeExpr::list_of(elem));
        }
        return TypeExpr::list_of(elem);
    }

    TypePtr check_record_literal(const Expr& e) {
        if (predicate_mode_ || !reg_) {
            error(e.pos, "record literals are not allowed here");
            return nullptr;
        }
        TypePtr t = reg_->find_type(e.name);
        if (!t) {
            error(e.pos, "unknown type '" + e.name + "'");
            return nullptr;
        }
        if (t->kind != TypeKind::t_record) {
            error(e.pos, "'" + e.name + "' is not a record type");
            return nullptr;
        }
        std::set<std::string> given;
        for (const auto& [n, a] : e.named_args) {
            given.insert(n);
            const RecordField* f = t->find_field(n);
            if (!f) {
                error(a->pos, "record " + e.name + " has no field '" + n + "'");
                check_expr(*a, nullptr);
                continue;
            }
            TypePtr at = check_expr(*a, f->type);
            if (at && !same(f->type, at)) mismatch(a->pos, "field '" + n + "'", f->type, at);
        }
        for (const auto& f : t->fields)
            if (!given.count(f.name))
                error(e.pos, "record literal misses field '" + f.name + "'");
        return t;
    }

    const Registry* reg_ = nullptr;
    bool predicate_mode_ = false;
    std::map<std::string, TypePtr> predicate_vars_;
    std::vector<std::map<std::string, Binding>> scopes_;
    std::vector<TypeErrorInfo> errors_;

    bool ban_side_effect_calls_ = false;
    const char* ban_reason_ = "";

    TypePtr return_type_;
    bool saw_valued_return_ = false;
    bool saw_bare_return_ = false;
    SourcePos first_return_pos_;
};

}  // namespace

CheckResult type_check(const WorkflowProgram& prog, const Registry& reg) {
    Checker c(&reg);
    return c.check_program(prog);
}

std::vector<TypeErrorInfo> check_predicate(const Expr& pred, const idl::VerbSpec& spec,
                                           bool is_postcondition) {
    Checker c(spec, is_postcondition);
    c.check_predicate_expr(pred);
    return c.take_errors();
}

}  // namespace webverbs::wfl

#include "webverbs/eval.hpp"

#include <algorithm>

namespace webverbs::eval {

using wfl::BinOp;
using wfl::Expr;
using wfl::UnOp;

const char* to_string(EvalError::Kind k) {
    switch (k) {
        case EvalError::Kind::div_zero: return "div_zero";
        case EvalError::Kind::empty_extremal: return "empty_extremal";
        case EvalError::Kind::mixed_currency: return "mixed_currency";
        case EvalError::Kind::internal_type: return "internal_type";
    }
    return "?";
}

Value* Env::find(const std::string& name) {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
        auto b = it->find(name);
        if (b != it->end()) return &b->second;
    }
    return nullptr;
}

const Value* Env::find(const std::string& name) const {
    return const_cast<Env*>(this)->find(name);
}

namespace {

[[noreturn]] void type_bug(SourcePos pos, const std::string& what) {
    throw EvalError(EvalError::Kind::internal_type, pos, "runtime type mismatch: " + what);
}

void require_same_currency(const Money& a, const Money& b, SourcePos pos, const char* op) {
    if (a.currency != b.currency)
        throw EvalError(EvalError::Kind::mixed_currency, pos,
                        std::string(op) + " over mixed currencies " + a.currency + " and " +
                            b.currency);
}

// -1 / 0 / 1 ordering for the orderable kinds.
int compare_values(const Value& a, const Value& b, SourcePos pos) {
    if (a.kind != b.kind) type_bug(pos, "comparison of unlike kinds");
    switch (a.kind) {
        case Value::Kind::v_int: return a.i < b.i ? -1 : a.i > b.i ? 1 : 0;
        case Value::Kind::v_float: return a.f < b.f ? -1 : a.f > b.f ? 1 : 0;
        case Value::Kind::v_string: return a.s < b.s ? -1 : a.s > b.s ? 1 : 0;
        case Value::Kind::v_money:
            require_same_currency(a.money, b.money, pos, "comparison");
            return a.money.amount_minor < b.money.amount_minor   ? -1
                   : a.money.amount_minor > b.money.amount_minor ? 1
                                                                 : 0;
        default:
            type_bug(pos, "ordering not defined for this kind");
    }
}

const Value& record_field_or_bug(const Value& rec, const std::string& name, SourcePos pos) {
    const Value* f = rec.field(name);
    if (!f) type_bug(pos, "record has no field '" + name + "'");
    return *f;
}

}  // namespace

Value assign_path(const Value& root, const std::vector<std::string>& path, std::size_t start,
                  Value replacement, SourcePos pos) {
    if (start >= path.size()) return replacement;
    if (root.kind != Value::Kind::v_record)
        type_bug(pos, "field assignment into non-record value");
    auto fields = root.record->fields;  // clone the spine
    for (auto& [name, value] : fields) {
        if (name == path[start]) {
            value = assign_path(value, path, start + 1, std::move(replacement), pos);
            return Value::of_record(std::move(fields));
        }
    }
    type_bug(pos, "record has no field '" + path[start] + "'");
}

Value list_append(const Value& list_value, Value element, SourcePos pos) {
    if (list_value.kind != Value::Kind::v_list) type_bug(pos, "push target is not a list");
    auto elems = *list_value.list;  // copy
    elems.push_back(std::move(element));
    return Value::of_list(std::move(elems));
}

Value Evaluator::eval(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::literal:
            return e.literal;
        case Expr::Kind::var: {
            const Value* v = env_.find(e.name);
            if (!v) type_bug(e.pos, "unbound variable '" + e.name + "'");
            return *v;
        }
        case Expr::Kind::field_access: {
            Value base = eval(*e.lhs);
            if (base.kind == Value::Kind::v_money) {
                if (e.name == "amount_minor") return Value::of_int(base.money.amount_minor);
                if (e.name == "currency") return Value::of_string(base.money.currency);
                type_bug(e.pos, "money has no field '" + e.name + "'");
            }
            if (base.kind != Value::Kind::v_record)
                type_bug(e.pos, "field access on non-record value");
            return record_field_or_bug(base, e.name, e.pos);
        }
        case Expr::Kind::verb_call: {
            if (!invoker_)
                type_bug(e.pos, "verb call '" + e.name + "' in a pure context");
            std::vector<std::pair<std::string, Value>> args;
            for (const auto& [name, arg] : e.named_args) args.emplace_back(name, eval(*arg));
            return invoker_(e, args);
        }
        case Expr::Kind::builtin_call:
            return eval_builtin(e);
        case Expr::Kind::binary:
            return eval_binary(e);
        case Expr::Kind::unary: {
            Value v = eval(*e.lhs);
            if (e.un_op == UnOp::logical_not) {
                if (v.kind != Value::Kind::v_bool) type_bug(e.pos, "'!' on non-bool");
                return Value::of_bool(!v.b);
            }
            if (v.kind == Value::Kind::v_int) return Value::of_int(-v.i);
            if (v.kind == Value::Kind::v_float) return Value::of_float(-v.f);
            type_bug(e.pos, "unary '-' on non-numeric");
        }
        case Expr::Kind::list_literal: {
            std::vector<Value> elems;
            elems.reserve(e.args.size());
            for (const auto& a : e.args) elems.push_back(eval(*a));
            return Value::of_list(std::move(elems));
        }
        case Expr::Kind::record_literal: {
            if (!reg_) type_bug(e.pos, "record literal without a registry");
            TypePtr t = reg_->find_type(e.name);
            if (!t || t->kind != TypeKind::t_record)
                type_bug(e.pos, "unknown record type '" + e.name + "'");
            // Evaluate in source order, assemble in declaration order.
            std::map<std::string, Value> by_name;
            for (const auto& [n, a] : e.named_args) by_name[n] = eval(*a);
            std::vector<std::pair<std::string, Value>> fields;
            for (const auto& f : t->fields) {
                auto it = by_name.find(f.name);
                if (it == by_name.end()) type_bug(e.pos, "record literal missing '" + f.name + "'");
                fields.emplace_back(f.name, std::move(it->second));
            }
            return Value::of_record(std::move(fields));
        }
    }
    type_bug(e.pos, "unhandled expression kind");
}

Value Evaluator::eval_binary(const Expr& e) {
    if (e.bin_op == BinOp::logical_and || e.bin_op == BinOp::logical_or) {
        Value l = eval(*e.lhs);
        if (l.kind != Value::Kind::v_bool) type_bug(e.lhs->pos, "logical op on non-bool");
        if (e.bin_op == BinOp::logical_and && !l.b) return Value::of_bool(false);
        if (e.bin_op == BinOp::logical_or && l.b) return Value::of_bool(true);
        Value r = eval(*e.rhs);
        if (r.kind != Value::Kind::v_bool) type_bug(e.rhs->pos, "logical op on non-bool");
        return r;
    }

    Value l = eval(*e.lhs);
    Value r = eval(*e.rhs);

    switch (e.bin_op) {
        case BinOp::eq: return Value::of_bool(l.equals(r));
        case BinOp::ne: return Value::of_bool(!l.equals(r));
        case BinOp::lt: return Value::of_bool(compare_values(l, r, e.pos) < 0);
        case BinOp::le: return Value::of_bool(compare_values(l, r, e.pos) <= 0);
        case BinOp::gt: return Value::of_bool(compare_values(l, r, e.pos) > 0);
        case BinOp::ge: return Value::of_bool(compare_values(l, r, e.pos) >= 0);
        case BinOp::add:
        case BinOp::sub: {
            bool add = e.bin_op == BinOp::add;
            if (l.kind == Value::Kind::v_int && r.kind == Value::Kind::v_int)
                return Value::of_int(add ? l.i + r.i : l.i - r.i);
            if (l.kind == Value::Kind::v_float && r.kind == Value::Kind::v_float)
                return Value::of_float(add ? l.f + r.f : l.f - r.f);
            if (l.kind == Value::Kind::v_money && r.kind == Value::Kind::v_money) {
                require_same_currency(l.money, r.money, e.pos, add ? "'+'" : "'-'");
                return Value::of_money(add ? l.money.amount_minor + r.money.amount_minor
                                           : l.money.amount_minor - r.money.amount_minor,
                                       l.money.currency);
            }
            type_bug(e.pos, "arithmetic on unsupported kinds");
        }
        case BinOp::mul: {
            if (l.kind == Value::Kind::v_int && r.kind == Value::Kind::v_int)
                return Value::of_int(l.i * r.i);
            if (l.kind == Value::Kind::v_float && r.kind == Value::Kind::v_float)
                return Value::of_float(l.f * r.f);
            type_bug(e.pos, "'*' on unsupported kinds");
        }
        case BinOp::div: {
            if (l.kind == Value::Kind::v_int && r.kind == Value::Kind::v_int) {
                if (r.i == 0)
                    throw EvalError(EvalError::Kind::div_zero, e.pos, "division by zero");
                return Value::of_int(l.i / r.i);  // truncates toward zero
            }
            if (l.kind == Value::Kind::v_float && r.kind == Value::Kind::v_float) {
                if (r.f == 0.0)
                    throw EvalError(EvalError::Kind::div_zero, e.pos, "division by zero");
                return Value::of_float(l.f / r.f);
            }
            type_bug(e.pos, "'/' on unsupported kinds");
        }
        default:
            type_bug(e.pos, "unhandled binary operator");
    }
}

Value Evaluator::eval_builtin(const Expr& e) {
    const std::string& n = e.name;
    auto list_arg = [&](size_t idx) -> Value {
        Value v = eval(*e.args[idx]);
        if (v.kind != Value::Kind::v_list) type_bug(e.args[idx]->pos, n + " on non-list");
        return v;
    };

    if (n == "len") return Value::of_int(static_cast<std::int64_t>(list_arg(0).list->size()));

    if (n == "sum") {
        Value l = list_arg(0);
        std::int64_t acc = 0;
        for (const auto& v : *l.list) {
            if (v.kind != Value::Kind::v_int) type_bug(e.pos, "sum over non-int element");
            acc += v.i;
        }
        return Value::of_int(acc);
    }

    if (n == "sum_money") {
        Value l = list_arg(0);
        if (l.list->empty())
            throw EvalError(EvalError::Kind::empty_extremal, e.pos, "sum_money over empty list");
        std::int64_t acc = 0;
        std::string currency;
        for (const auto& v : *l.list) {
            if (v.kind != Value::Kind::v_money) type_bug(e.pos, "sum_money over non-money");
            if (currency.empty())
                currency = v.money.currency;
            else
                require_same_currency(Money{0, currency}, v.money, e.pos, "sum_money");
            acc += v.money.amount_minor;
        }
        return Value::of_money(acc, currency);
    }

    if (n == "sort_by" || n == "sort_by_desc" || n == "min_by" || n == "max_by" ||
        n == "map_field") {
        Value l = list_arg(0);
        Value fname = eval(*e.args[1]);
        if (fname.kind != Value::Kind::v_string) type_bug(e.args[1]->pos, "field name not a string");
        const std::string& field = fname.s;

        if (n == "map_field") {
            std::vector<Value> out;
            out.reserve(l.list->size());
            for (const auto& row : *l.list)
                out.push_back(record_field_or_bug(row, field, e.pos));
            return Value::of_list(std::move(out));
        }

        if (n == "sort_by" || n == "sort_by_desc") {
            bool desc = n == "sort_by_desc";
            auto elems = *l.list;
            std::stable_sort(elems.begin(), elems.end(), [&](const Value& a, const Value& b) {
                int c = compare_values(record_field_or_bug(a, field, e.pos),
                                       record_field_or_bug(b, field, e.pos), e.pos);
                return desc ? c > 0 : c < 0;
            });
            return Value::of_list(std::move(elems));
        }

        // min_by / max_by: first extremal element wins ties.
        if (l.list->empty())
            throw EvalError(EvalError::Kind::empty_extremal, e.pos, n + " over empty list");
        const Value* best = &(*l.list)[0];
        for (size_t i = 1; i < l.list->size(); ++i) {
            const Value& cand = (*l.list)[i];
            int c = compare_values(record_field_or_bug(cand, field, e.pos),
                                   record_field_or_bug(*best, field, e.pos), e.pos);
            if ((n == "min_by" && c < 0) || (n == "max_by" && c > 0)) best = &cand;
        }
        return *best;
    }

    if (n == "cartesian") {
        Value l = list_arg(0);
        const auto& lists = *l.list;
        for (const auto& inner : lists)
            if (inner.kind != Value::Kind::v_list) type_bug(e.pos, "cartesian over non-lists");
        // Row-major: the last list varies fastest. Product of zero lists is
        // one empty combination.
        std::vector<Value> combos;
        std::vector<size_t> idx(lists.size(), 0);
        for (const auto& inner : lists)
            if (inner.list->empty()) return Value::of_list({});
        while (true) {
            std::vector<Value> combo;
            combo.reserve(lists.size());
            for (size_t k = 0; k < lists.size(); ++k)
                combo.push_back((*lists[k].list)[idx[k]]);
            combos.push_back(Value::of_list(std::move(combo)));
            size_t k = lists.size();
            while (k > 0) {
                --k;
                if (++idx[k] < lists[k].list->size()) break;
                idx[k] = 0;
                if (k == 0) return Value::of_list(std::move(combos));
            }
            if (lists.empty()) return Value::of_list(std::move(combos));
        }
    }

    if (n == "range") {
        Value a = eval(*e.args[0]);
        Value b = eval(*e.args[1]);
        if (a.kind != Value::Kind::v_int || b.kind != Value::Kind::v_int)
            type_bug(e.pos, "range on non-int");
        std::vector<Value> out;
        for (std::int64_t v = a.i; v < b.i; ++v) out.push_back(Value::of_int(v));
        return Value::of_list(std::move(out));
    }

    if (n == "concat") {
        Value a = eval(*e.args[0]);
        Value b = eval(*e.args[1]);
        if (a.kind != Value::Kind::v_string || b.kind != Value::Kind::v_string)
            type_bug(e.pos, "concat on non-string");
        return Value::of_string(a.s + b.s);
    }

    if (n == "money") {
        Value amount = eval(*e.args[0]);
        Value cur = eval(*e.args[1]);
        if (amount.kind != Value::Kind::v_int || cur.kind != Value::Kind::v_string)
            type_bug(e.pos, "money(amount_minor, currency) argument kinds");
        if (!valid_currency(cur.s)) type_bug(e.pos, "invalid currency '" + cur.s + "'");
        return Value::of_money(amount.i, cur.s);
    }

    type_bug(e.pos, "unknown builtin '" + n + "' at runtime");
}

}  // namespace webverbs::eval

#include "webverbs/exec.hpp"

#include <algorithm>
#include <chrono>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "webverbs/eval.hpp"
#include "webverbs/sha256.hpp"

namespace webverbs::exec {

using contracts::AuditEntry;
using contracts::EntryStatus;
using nlohmann::json;

const char* to_string(BindingPreference p) {
    switch (p) {
        case BindingPreference::api_first: return "api_first";
        case BindingPreference::browser_first: return "browser_first";
        case BindingPreference::api_only: return "api_only";
        case BindingPreference::browser_only: return "browser_only";
    }
    return "?";
}

std::optional<BindingPreference> binding_preference_from_string(const std::string& s) {
    if (s == "api_first") return BindingPreference::api_first;
    if (s == "browser_first") return BindingPreference::browser_first;
    if (s == "api_only") return BindingPreference::api_only;
    if (s == "browser_only") return BindingPreference::browser_only;
    return std::nullopt;
}

const char* to_string(FailureKind k) {
    switch (k) {
        case FailureKind::policy: return "policy";
        case FailureKind::contract_pre: return "contract_pre";
        case FailureKind::contract_post: return "contract_post";
        case FailureKind::div_zero: return "div_zero";
        case FailureKind::empty_extremal: return "empty_extremal";
        case FailureKind::mixed_currency: return "mixed_currency";
        case FailureKind::verb_execution: return "verb_execution";
        case FailureKind::binding_unavailable: return "binding_unavailable";
        case FailureKind::internal_type: return "internal_type";
    }
    return "?";
}

Clock system_clock_ms() {
    return [] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    };
}

Clock deterministic_clock(std::int64_t start) {
    auto counter = std::make_shared<std::int64_t>(start);
    return [counter] { return (*counter)++; };
}

namespace {

struct BindingFailure : std::runtime_error {
    explicit BindingFailure(const std::string& what, std::int64_t steps_executed = 0)
        : std::runtime_error(what), steps(steps_executed) {}
    std::int64_t steps;  // primitive steps that ran before the failure
};

std::string param_text(const Value& v) {
    switch (v.kind) {
        case Value::Kind::v_string: return v.s;
        case Value::Kind::v_enum: return v.s;
        case Value::Kind::v_int: return std::to_string(v.i);
        case Value::Kind::v_bool: return v.b ? "true" : "false";
        case Value::Kind::v_money: return render_money(v.money);
        default: return render_value(v);
    }
}

std::string url_encode(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
            c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xf];
        }
    }
    return out;
}

// JSON -> typed Value guided by the expected TypeExpr. Throws
// std::invalid_argument with a path for diagnostics.
Value decode_response(const json& j, const TypeExpr& t, const std::string& path) {
    auto bad = [&](const std::string& why) -> Value {
        throw std::invalid_argument("at '" + path + "': " + why);
    };
    switch (t.kind) {
        case TypeKind::t_int:
            if (!j.is_number_integer()) return bad("expected an integer");
            return Value::of_int(j.get<std::int64_t>());
        case TypeKind::t_float:
            if (!j.is_number()) return bad("expected a number");
            return Value::of_float(j.get<double>());
        case TypeKind::t_bool:
            if (!j.is_boolean()) return bad("expected a boolean");
            return Value::of_bool(j.get<bool>());
        case TypeKind::t_string:
            if (!j.is_string()) return bad("expected a string");
            return Value::of_string(j.get<std::string>());
        case TypeKind::t_money: {
            if (!j.is_object() || !j.contains("amount_minor") || !j.contains("currency"))
                return bad("expected {amount_minor, currency}");
            if (!j["amount_minor"].is_number_integer() || !j["currency"].is_string())
                return bad("malformed money object");
            return Value::of_money(j["amount_minor"].get<std::int64_t>(),
                                   j["currency"].get<std::string>());
        }
        case TypeKind::t_enum: {
            if (!j.is_string()) return bad("expected an enum string");
            std::string v = j.get<std::string>();
            if (!t.has_variant(v))
                return bad("'" + v + "' is not a variant of " + t.qname);
            return Value::of_enum(v);
        }
        case TypeKind::t_list: {
            if (!j.is_array()) return bad("expected an array");
            std::vector<Value> elems;
            for (size_t i = 0; i < j.size(); ++i)
                elems.push_back(
                    decode_response(j[i], *t.element, path + "[" + std::to_string(i) + "]"));
            return Value::of_list(std::move(elems));
        }
        case TypeKind::t_optional: {
            if (j.is_null()) return Value::absent();
            return Value::present(decode_response(j, *t.element, path));
        }
        case TypeKind::t_record: {
            if (!j.is_object()) return bad("expected an object for " + t.qname);
            std::vector<std::pair<std::string, Value>> fields;
            for (const auto& f : t.fields) {
                if (!j.contains(f.name)) return bad("missing field '" + f.name + "'");
                fields.emplace_back(f.name,
                                    decode_response(j[f.name], *f.type, path + "." + f.name));
            }
            return Value::of_record(std::move(fields));
        }
        case TypeKind::named:
            return bad("unresolved type");
    }
    return bad("unhandled type kind");
}

const json* walk_path(const json& doc, const std::string& dotted) {
    const json* cur = &doc;
    std::string seg;
    size_t start = 0;
    while (start <= dotted.size()) {
        auto dot = dotted.find('.', start);
        seg = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!cur->is_object() || !cur->contains(seg)) return nullptr;
        cur = &(*cur)[seg];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return cur;
}

}  // namespace

Executor::Executor(const Registry& reg, ExecOptions options, std::string program_digest)
    : reg_(reg), options_(std::move(options)) {
    if (!options_.clock) options_.clock = system_clock_ms();
    trace_.program_digest = std::move(program_digest);
    for (auto t : options_.grants) trace_.grants.push_back(idl::to_string(t));
    std::sort(trace_.grants.begin(), trace_.grants.end());
}

const std::string& Executor::session() {
    if (!session_.empty()) return session_;
    if (!options_.api_base.empty()) {
        httplib::Client client(options_.api_base);
        client.set_connection_timeout(5);
        // Session creation is site-agnostic; any site prefix works.
        std::string site = reg_.verbs().empty() ? std::string("site")
                                                : reg_.verbs().begin()->second.site_id;
        auto res = client.Post("/" + site + "/session", "{}", "application/json");
        if (!res || res->status != 200)
            throw BindingFailure("cannot create a session over HTTP");
        json doc = json::parse(res->body, nullptr, false);
        if (doc.is_discarded() || !doc.contains("session"))
            throw BindingFailure("malformed session response");
        session_ = doc["session"].get<std::string>();
    } else {
        if (!options_.runtime) throw BindingFailure("no mock web runtime configured");
        session_ = options_.runtime->create_session();
    }
    return session_;
}

Executor::BindingResult Executor::run_api_binding(
    const idl::VerbSpec& spec, const idl::ApiBinding& binding,
    const std::vector<std::pair<std::string, Value>>& args) {
    auto arg_value = [&](const std::string& name) -> const Value& {
        for (const auto& [n, v] : args)
            if (n == name) return v;
        throw BindingFailure("missing argument '" + name + "'");
    };
    auto source_text = [&](const idl::ValueSource& src) {
        return src.is_param ? param_text(arg_value(src.text)) : src.text;
    };

    // Expand {param} placeholders.
    std::string path;
    const std::string& pt = binding.path_template;
    for (size_t i = 0; i < pt.size(); ++i) {
        if (pt[i] == '{') {
            auto close = pt.find('}', i);
            std::string name = pt.substr(i + 1, close - i - 1);
            path += url_encode(param_text(arg_value(name)));
            i = close;
        } else {
            path += pt[i];
        }
    }

    std::map<std::string, std::string> params;
    for (const auto& [key, src] : binding.query) params[key] = source_text(src);
    json body = json::object();
    for (const auto& [key, src] : binding.body) {
        if (src.is_param) {
            const Value& v = arg_value(src.text);
            if (v.kind == Value::Kind::v_int)
                body[key] = v.i;
            else if (v.kind == Value::Kind::v_bool)
                body[key] = v.b;
            else
                body[key] = param_text(v);
        } else {
            body[key] = src.text;
        }
    }
    body["session"] = session();

    int status = 0;
    std::string response_body;
    if (!options_.api_base.empty()) {
        httplib::Client client(options_.api_base);
        client.set_connection_timeout(5);
        std::string full = "/" + spec.site_id + path;
        if (binding.method == "GET") {
            std::string qs;
            params["session"] = session();
            for (const auto& [k, v] : params)
                qs += (qs.empty() ? "?" : "&") + url_encode(k) + "=" + url_encode(v);
            auto res = client.Get(full + qs);
            if (!res) throw BindingFailure("HTTP request failed (no response)");
            status = res->status;
            response_body = res->body;
        } else {
            for (const auto& [k, v] : params) body[k] = v;
            auto res = client.Post(full, body.dump(), "application/json");
            if (!res) throw BindingFailure("HTTP request failed (no response)");
            status = res->status;
            response_body = res->body;
        }
    } else {
        if (!options_.runtime) throw BindingFailure("no mock web runtime configured");
        std::map<std::string, std::string> all = params;
        for (const auto& [k, v] : body.items())
            all[k] = v.is_string() ? v.get<std::string>()
                     : v.is_number_integer()
                         ? std::to_string(v.get<std::int64_t>())
                         : v.is_boolean() ? (v.get<bool>() ? "true" : "false") : v.dump();
        mockweb::ApiResponse res =
            options_.runtime->api_call(spec.site_id, binding.method, path, all, session());
        status = res.status;
        response_body = res.body;
    }

    if (status != 200) {
        std::string detail = response_body;
        json err = json::parse(response_body, nullptr, false);
        if (err.is_object() && err.contains("error")) detail = err["error"].get<std::string>();
        throw BindingFailure("API returned " + std::to_string(status) + ": " + detail, 1);
    }

    json doc = json::parse(response_body, nullptr, false);
    if (doc.is_discarded()) throw BindingFailure("API response is not valid JSON", 1);

    std::vector<std::pair<std::string, Value>> fields;
    for (const auto& f : spec.result->fields) {
        const std::string* respath = nullptr;
        for (const auto& [rp, field] : binding.response_map)
            if (field == f.name) respath = &rp;
        if (!respath) throw BindingFailure("response_map misses field '" + f.name + "'", 1);
        const json* node = walk_path(doc, *respath);
        if (!node) throw BindingFailure("response lacks path '" + *respath + "'", 1);
        try {
            fields.emplace_back(f.name, decode_response(*node, *f.type, *respath));
        } catch (const std::invalid_argument& e) {
            throw BindingFailure(std::string("response decoding failed ") + e.what(), 1);
        }
    }
    return {Value::of_record(std::move(fields)), 1};
}

Executor::BindingResult Executor::run_browser_binding(
    const idl::VerbSpec& spec, const idl::BrowserBinding& binding,
    const std::vector<std::pair<std::string, Value>>& args) {
    if (!options_.runtime) throw BindingFailure("no mock web runtime configured");
    mockweb::SiteRuntime& rt = *options_.runtime;
    const std::string& sess = session();

    auto arg_value = [&](const std::string& name) -> const Value& {
        for (const auto& [n, v] : args)
            if (n == name) return v;
        throw BindingFailure("missing argument '" + name + "'");
    };

    std::map<std::string, Value> captures;
    std::int64_t steps = 0;
    try {
        for (const auto& step : binding.script) {
            std::string fill;
            if (step.op == idl::ActionStep::Op::fill ||
                step.op == idl::ActionStep::Op::select_option)
                fill = step.source.is_param ? param_text(arg_value(step.source.text))
                                            : step.source.text;
            std::optional<Value> captured = rt.act(sess, spec.site_id, step, fill);
            ++steps;
            if (!step.capture.empty() && captured) captures[step.capture] = std::move(*captured);
        }
    } catch (const mockweb::MockWebError& e) {
        // Steps executed before the failure stay counted.
        throw BindingFailure(std::string(e.what()) + " [after " + std::to_string(steps) +
                                 " steps]",
                             steps);
    }

    std::vector<std::pair<std::string, Value>> fields;
    for (const auto& f : spec.result->fields) {
        const std::string* capture = nullptr;
        for (const auto& [cap, field] : binding.output_map)
            if (field == f.name) capture = &cap;
        if (!capture) throw BindingFailure("output_map misses field '" + f.name + "'");
        auto it = captures.find(*capture);
        if (it == captures.end()) throw BindingFailure("capture '" + *capture + "' missing");
        Value v = it->second;

        // Reconcile captured shapes with the declared field type: enum
        // variants arrive as page text, list<record> rows in item_fields
        // order.
        std::function<Value(const Value&, const TypeExpr&)> adapt =
            [&](const Value& val, const TypeExpr& t) -> Value {
            if (t.kind == TypeKind::t_enum) {
                if (val.kind != Value::Kind::v_string || !t.has_variant(val.s))
                    throw BindingFailure("captured text '" +
                                         (val.kind == Value::Kind::v_string ? val.s : "?") +
                                         "' is not a variant of " + t.qname);
                return Value::of_enum(val.s);
            }
            if (t.kind == TypeKind::t_list && val.kind == Value::Kind::v_list) {
                std::vector<Value> out;
                for (const auto& e : *val.list) out.push_back(adapt(e, *t.element));
                return Value::of_list(std::move(out));
            }
            if (t.kind == TypeKind::t_record && val.kind == Value::Kind::v_record) {
                std::vector<std::pair<std::string, Value>> rf;
                for (const auto& tf : t.fields) {
                    const Value* fv = val.field(tf.name);
                    if (!fv) throw BindingFailure("captured row misses field '" + tf.name + "'");
                    rf.emplace_back(tf.name, adapt(*fv, *tf.type));
                }
                return Value::of_record(std::move(rf));
            }
            return val;
        };
        fields.emplace_back(f.name, adapt(v, *f.type));
    }
    return {Value::of_record(std::move(fields)), steps};
}

VerbOutcome Executor::invoke_verb(const idl::VerbSpec& spec,
                                  const std::vector<std::pair<std::string, Value>>& args) {
    std::int64_t started = options_.clock();

    AuditEntry entry;
    entry.verb = spec.qname();
    entry.binding_used = "none";
    entry.inputs = args;
    entry.started_ms = started;

    Value params_record = [&] {
        std::vector<std::pair<std::string, Value>> fields;
        for (const auto& [pn, pt] : spec.params)
            for (const auto& [n, v] : args)
                if (n == pn) fields.emplace_back(n, v);
        return Value::of_record(std::move(fields));
    }();

    auto finish_failure = [&](EntryStatus status, int failed_index, FailureKind kind,
                              const std::string& message) -> VerbOutcome {
        entry.status = status;
        entry.failed_index = failed_index;
        entry.ended_ms = options_.clock();
        contracts::append_entry(trace_, std::move(entry));
        throw VerbAbort(kind, message, static_cast<int>(trace_.entries.size()));
    };

    // 1. Policy gate, before anything can execute.
    if (!contracts::check_policy(spec.policy_tags, options_.grants))
        finish_failure(EntryStatus::policy_denied, -1, FailureKind::policy,
                       "verb '" + spec.qname() + "' requires tags {" +
                           idl::render_tags(spec.policy_tags) + "} beyond the granted set");

    // 2. Preconditions over params.
    for (size_t i = 0; i < spec.preconditions.size(); ++i) {
        const auto& p = spec.preconditions[i];
        if (!p.expr) continue;
        contracts::PredicateOutcome o = contracts::eval_predicate(*p.expr, params_record, nullptr);
        if (!o.passed)
            finish_failure(EntryStatus::pre_failed, static_cast<int>(i),
                           FailureKind::contract_pre,
                           "precondition " + std::to_string(i) + " of '" + spec.qname() +
                               "' failed: " + p.source);
    }

    // 3. Binding selection. Fallback to the other binding only in *_first modes.
    const idl::ApiBinding* api = spec.api ? &*spec.api : nullptr;
    const idl::BrowserBinding* browser = spec.browser ? &*spec.browser : nullptr;
    bool use_api = false;
    switch (options_.binding) {
        case BindingPreference::api_first: use_api = api != nullptr; break;
        case BindingPreference::browser_first: use_api = browser == nullptr; break;
        case BindingPreference::api_only: use_api = true; break;
        case BindingPreference::browser_only: use_api = false; break;
    }
    if ((use_api && !api) || (!use_api && !browser))
        finish_failure(EntryStatus::binding_error, -1, FailureKind::binding_unavailable,
                       "verb '" + spec.qname() + "' has no " + (use_api ? "api" : "browser") +
                           " binding and preference is " + to_string(options_.binding));

    // 4-5. Execute and type the result.
    entry.binding_used = use_api ? "api" : "browser";
    entry.effect_committed = spec.side_effecting();
    BindingResult result;
    try {
        result = use_api ? run_api_binding(spec, *api, args)
                         : run_browser_binding(spec, *browser, args);
        entry.primitive_steps = result.steps;
    } catch (const BindingFailure& e) {
        entry.primitive_steps = e.steps;
        finish_failure(EntryStatus::binding_error, -1, FailureKind::verb_execution,
                       "verb '" + spec.qname() + "' " + std::string(use_api ? "api" : "browser") +
                           " binding failed: " + e.what());
    }

    if (!check_value(result.result, *spec.result))
        finish_failure(EntryStatus::binding_error, -1, FailureKind::verb_execution,
                       "binding produced an ill-typed result for '" + spec.qname() + "'");

    // 6. Postconditions over params and result. Side effects stay committed.
    entry.output = result.result;
    for (size_t i = 0; i < spec.postconditions.size(); ++i) {
        const auto& p = spec.postconditions[i];
        if (!p.expr) continue;
        contracts::PredicateOutcome o =
            contracts::eval_predicate(*p.expr, params_record, &result.result);
        if (!o.passed)
            finish_failure(EntryStatus::post_failed, static_cast<int>(i),
                           FailureKind::contract_post,
                           "postcondition " + std::to_string(i) + " of '" + spec.qname() +
                               "' failed: " + p.source);
    }

    // 7. Trace append.
    entry.status = EntryStatus::ok;
    entry.ended_ms = options_.clock();
    std::int64_t duration = entry.ended_ms - entry.started_ms;
    std::int64_t steps = entry.primitive_steps;
    contracts::append_entry(trace_, std::move(entry));

    return {result.result, steps, use_api ? "api" : "browser", duration};
}

namespace {

struct ReturnSignal {
    std::optional<Value> value;
};

class ProgramRunner {
public:
    ProgramRunner(const wfl::WorkflowProgram& prog, const Registry& reg, Executor& executor)
        : prog_(prog), reg_(reg), executor_(executor) {}

    RunOutcome run() {
        RunOutcome out;
        eval::Env env;
        env.push_scope();
        eval::Evaluator ev(env, &reg_,
                           [this](const wfl::Expr& call,
                                  const std::vector<std::pair<std::string, Value>>& args) {
                               const idl::VerbSpec& spec = reg_.lookup(call.name);
                               return executor_.invoke_verb(spec, args).result;
                           });
        try {
            exec_block(prog_.statements, env, ev);
        } catch (const ReturnSignal& r) {
            out.value = r.value;
        } catch (const VerbAbort& e) {
            out.failure = RunFailure{e.kind(), e.what(), current_pos_, e.seq()};
        } catch (const eval::EvalError& e) {
            FailureKind kind;
            switch (e.kind()) {
                case eval::EvalError::Kind::div_zero: kind = FailureKind::div_zero; break;
                case eval::EvalError::Kind::empty_extremal:
                    kind = FailureKind::empty_extremal;
                    break;
                case eval::EvalError::Kind::mixed_currency:
                    kind = FailureKind::mixed_currency;
                    break;
                default: kind = FailureKind::internal_type; break;
            }
            out.failure = RunFailure{kind, e.what(), e.pos(), 0};
        }
        out.trace = executor_.take_trace();
        if (out.failure)
            out.trace.error = contracts::RunErrorInfo{to_string(out.failure->kind),
                                                      out.failure->message, out.failure->pos,
                                                      out.failure->seq};
        return out;
    }

private:
    void exec_block(const std::vector<wfl::StmtPtr>& stmts, eval::Env& env,
                    eval::Evaluator& ev) {
        for (const auto& s : stmts) exec_stmt(*s, env, ev);
    }

    void exec_stmt(const wfl::Stmt& s, eval::Env& env, eval::Evaluator& ev) {
        current_pos_ = s.pos;
        switch (s.kind) {
            case wfl::Stmt::Kind::let_decl:
                env.bind(s.name, ev.eval(*s.expr));
                break;
            case wfl::Stmt::Kind::assign: {
                Value rhs = ev.eval(*s.expr);
                Value* slot = env.find(s.target_path[0]);
                if (!slot)
                    throw eval::EvalError(eval::EvalError::Kind::internal_type, s.pos,
                                          "assignment to unbound variable");
                *slot = s.target_path.size() == 1
                            ? std::move(rhs)
                            : eval::assign_path(*slot, s.target_path, 1, std::move(rhs), s.pos);
                break;
            }
            case wfl::Stmt::Kind::for_loop: {
                Value iterable = ev.eval(*s.expr);
                if (iterable.kind != Value::Kind::v_list)
                    throw eval::EvalError(eval::EvalError::Kind::internal_type, s.pos,
                                          "for over non-list");
                // Iterate a snapshot; the loop variable is a per-iteration copy.
                auto elems = *iterable.list;
                for (const auto& elem : elems) {
                    env.push_scope();
                    env.bind(s.name, elem);
                    try {
                        exec_block(s.body, env, ev);
                    } catch (...) {
                        env.pop_scope();
                        throw;
                    }
                    env.pop_scope();
                }
                break;
            }
            case wfl::Stmt::Kind::if_branch: {
                Value cond = ev.eval(*s.expr);
                if (cond.kind != Value::Kind::v_bool)
                    throw eval::EvalError(eval::EvalError::Kind::internal_type, s.pos,
                                          "if condition is not a bool");
                const auto& branch = cond.b ? s.body : s.else_body;
                env.push_scope();
                try {
                    exec_block(branch, env, ev);
                } catch (...) {
                    env.pop_scope();
                    throw;
                }
                env.pop_scope();
                break;
            }
            case wfl::Stmt::Kind::return_stmt: {
                ReturnSignal r;
                if (s.expr) r.value = ev.eval(*s.expr);
                throw r;
            }
            case wfl::Stmt::Kind::expr_stmt: {
                const wfl::Expr& e = *s.expr;
                if (e.kind == wfl::Expr::Kind::builtin_call && e.name == "push") {
                    Value elem = ev.eval(*e.args[1]);
                    Value* slot = env.find(e.args[0]->name);
                    if (!slot)
                        throw eval::EvalError(eval::EvalError::Kind::internal_type, e.pos,
                                              "push into unbound variable");
                    *slot = eval::list_append(*slot, std::move(elem), e.pos);
                    break;
                }
                ev.eval(e);
                break;
            }
        }
    }

    const wfl::WorkflowProgram& prog_;
    const Registry& reg_;
    Executor& executor_;
    SourcePos current_pos_{1, 1};
};

}  // namespace

RunOutcome run(const wfl::WorkflowProgram& prog, const Registry& reg, ExecOptions options) {
    Executor executor(reg, std::move(options), sha256_hex(prog.source));
    ProgramRunner runner(prog, reg, executor);
    return runner.run();
}

}  // namespace webverbs::exec

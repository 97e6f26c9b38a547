#include "webverbs/contracts.hpp"

#include <algorithm>

#include "valuejson_impl.hpp"
#include "webverbs/eval.hpp"

namespace webverbs::contracts {

using nlohmann::json;

PredicateOutcome eval_predicate(const wfl::Expr& pred, const Value& params_record,
                                const Value* result_record) {
    eval::Env env;
    env.push_scope();
    env.bind("params", params_record);
    if (result_record) env.bind("result", *result_record);
    eval::Evaluator ev(env, nullptr, nullptr);
    try {
        Value v = ev.eval(pred);
        if (v.kind != Value::Kind::v_bool)
            return {false, "predicate evaluated to a non-bool value"};
        if (!v.b) return {false, "predicate evaluated to false"};
        return {true, ""};
    } catch (const eval::EvalError& e) {
        return {false, std::string("predicate raised ") + eval::to_string(e.kind()) + ": " +
                           e.what()};
    }
}

bool check_policy(const idl::TagSet& tags, const idl::TagSet& grants) {
    return std::includes(grants.begin(), grants.end(), tags.begin(), tags.end());
}

const char* to_string(EntryStatus s) {
    switch (s) {
        case EntryStatus::ok: return "ok";
        case EntryStatus::policy_denied: return "policy_denied";
        case EntryStatus::pre_failed: return "pre_failed";
        case EntryStatus::post_failed: return "post_failed";
        case EntryStatus::binding_error: return "binding_error";
    }
    return "?";
}

namespace {

std::optional<EntryStatus> status_from_string(const std::string& s) {
    if (s == "ok") return EntryStatus::ok;
    if (s == "policy_denied") return EntryStatus::policy_denied;
    if (s == "pre_failed") return EntryStatus::pre_failed;
    if (s == "post_failed") return EntryStatus::post_failed;
    if (s == "binding_error") return EntryStatus::binding_error;
    return std::nullopt;
}

std::string status_with_index(const AuditEntry& e) {
    std::string s = to_string(e.status);
    if (e.status == EntryStatus::pre_failed || e.status == EntryStatus::post_failed)
        s += ":" + std::to_string(e.failed_index);
    return s;
}

}  // namespace

std::string canonical_entry_bytes(const AuditEntry& e) {
    std::string b;
    b += "seq:" + std::to_string(e.seq) + "\n";
    b += "verb:" + e.verb + "\n";
    b += "binding:" + e.binding_used + "\n";
    for (const auto& [name, v] : e.inputs) b += "input:" + name + "=" + render_value(v) + "\n";
    b += "output:" + (e.output ? render_value(*e.output) : std::string("-")) + "\n";
    b += "status:" + status_with_index(e) + "\n";
    b += "effect_committed:" + std::string(e.effect_committed ? "1" : "0") + "\n";
    b += "primitive_steps:" + std::to_string(e.primitive_steps) + "\n";
    b += "started:" + std::to_string(e.started_ms) + "\n";
    b += "ended:" + std::to_string(e.ended_ms) + "\n";
    b += "prev:" + to_hex(e.prev_hash) + "\n";
    return b;
}

void append_entry(AuditTrace& trace, AuditEntry entry) {
    entry.seq = static_cast<int>(trace.entries.size()) + 1;
    entry.prev_hash = trace.entries.empty() ? Digest256{} : trace.entries.back().entry_hash;
    std::sort(entry.inputs.begin(), entry.inputs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    entry.entry_hash = sha256(canonical_entry_bytes(entry));
    trace.entries.push_back(std::move(entry));
}

std::vector<Violation> verify_trace(const AuditTrace& trace, const Registry& reg) {
    std::vector<Violation> out;
    auto flag = [&](int seq, const std::string& what) { out.push_back({seq, what}); };

    idl::TagSet grants;
    for (const auto& g : trace.grants) {
        auto t = idl::policy_tag_from_string(g);
        if (!t)
            flag(0, "trace grants name unknown policy tag '" + g + "'");
        else
            grants.insert(*t);
    }

    Digest256 expect_prev{};
    for (size_t i = 0; i < trace.entries.size(); ++i) {
        const AuditEntry& e = trace.entries[i];
        int seq = static_cast<int>(i) + 1;

        if (e.seq != seq)
            flag(seq, "sequence number " + std::to_string(e.seq) + " at position " +
                          std::to_string(seq));
        if (e.prev_hash != expect_prev) flag(seq, "hash chain broken: prev_hash mismatch");
        Digest256 recomputed = sha256(canonical_entry_bytes(e));
        if (recomputed != e.entry_hash) flag(seq, "entry_hash does not match entry contents");
        expect_prev = e.entry_hash;

        const idl::VerbSpec& spec = reg.lookup(e.verb);  // throws UnknownVerb

        // Input typing: every declared param logged exactly once, well-typed.
        if (e.inputs.size() != spec.params.size())
            flag(seq, "logged " + std::to_string(e.inputs.size()) + " inputs, verb declares " +
                          std::to_string(spec.params.size()) + " params");
        for (const auto& [name, v] : e.inputs) {
            const TypePtr* pt = spec.param_type(name);
            if (!pt) {
                flag(seq, "logged input '" + name + "' is not a declared param");
                continue;
            }
            if (!check_value(v, **pt))
                flag(seq, "input '" + name + "' is ill-typed for " + render_type(**pt));
        }

        // Output presence/typing per status.
        bool expect_output =
            e.status == EntryStatus::ok || e.status == EntryStatus::post_failed;
        if (expect_output && !e.output)
            flag(seq, std::string("status ") + to_string(e.status) + " but no output logged");
        if (!expect_output && e.output)
            flag(seq, std::string("status ") + to_string(e.status) + " but an output is logged");
        if (e.output && spec.result && !check_value(*e.output, *spec.result))
            flag(seq, "output is ill-typed for " + render_type(*spec.result));

        // Policy replay.
        bool policy_ok = check_policy(spec.policy_tags, grants);
        if (e.status == EntryStatus::policy_denied) {
            if (policy_ok)
                flag(seq, "status policy_denied but tags {" + render_tags(spec.policy_tags) +
                              "} are within the recorded grants");
            if (e.primitive_steps != 0)
                flag(seq, "policy_denied entry records primitive steps");
            if (e.effect_committed) flag(seq, "policy_denied entry claims a committed effect");
        } else if (!policy_ok) {
            flag(seq, "verb tags {" + render_tags(spec.policy_tags) +
                          "} exceed the recorded grants {" + [&] {
                              std::string s;
                              for (const auto& g : trace.grants) s += (s.empty() ? "" : ", ") + g;
                              return s;
                          }() + "}");
        }

        // Contract replay on the logged values.
        Value params_record = [&] {
            std::vector<std::pair<std::string, Value>> fields;
            for (const auto& [pn, pt] : spec.params)
                for (const auto& [n, v] : e.inputs)
                    if (n == pn) fields.emplace_back(n, v);
            return Value::of_record(std::move(fields));
        }();

        auto replay = [&](const std::vector<idl::Predicate>& preds, const Value* result,
                          int upto_true, int expect_false_at, const char* which) {
            for (int k = 0; k < static_cast<int>(preds.size()); ++k) {
                if (!preds[k].expr) continue;
                if (k > upto_true && expect_false_at < 0) break;
                PredicateOutcome o = eval_predicate(*preds[k].expr, params_record, result);
                if (k == expect_false_at) {
                    if (o.passed)
                        flag(seq, std::string(which) + " " + std::to_string(k) +
                                      " recorded as failed but replays true");
                    break;
                }
                if (k <= upto_true && !o.passed)
                    flag(seq, std::string(which) + " " + std::to_string(k) +
                                  " replays false on the logged values: " + o.failure_reason);
                if (k == upto_true && expect_false_at < 0) break;
            }
        };

        int npre = static_cast<int>(spec.preconditions.size());
        int npost = static_cast<int>(spec.postconditions.size());
        switch (e.status) {
            case EntryStatus::policy_denied:
                break;  // nothing past the policy gate
            case EntryStatus::pre_failed:
                if (e.failed_index < 0 || e.failed_index >= npre) {
                    flag(seq, "pre_failed index out of range");
                    break;
                }
                replay(spec.preconditions, nullptr, e.failed_index - 1, e.failed_index, "pre");
                if (e.primitive_steps != 0) flag(seq, "pre_failed entry records primitive steps");
                break;
            case EntryStatus::binding_error:
                replay(spec.preconditions, nullptr, npre - 1, -1, "pre");
                break;
            case EntryStatus::post_failed:
                if (e.failed_index < 0 || e.failed_index >= npost) {
                    flag(seq, "post_failed index out of range");
                    break;
                }
                replay(spec.preconditions, nullptr, npre - 1, -1, "pre");
                if (e.output)
                    replay(spec.postconditions, &*e.output, e.failed_index - 1, e.failed_index,
                           "post");
                break;
            case EntryStatus::ok:
                replay(spec.preconditions, nullptr, npre - 1, -1, "pre");
                if (e.output) replay(spec.postconditions, &*e.output, npost - 1, -1, "post");
                if (e.primitive_steps < 1) flag(seq, "ok entry records no primitive steps");
                break;
        }

        // Effect bookkeeping. A binding_error with binding "none" never
        // started executing (the preferred binding was absent).
        bool executed = e.status == EntryStatus::ok || e.status == EntryStatus::post_failed ||
                        (e.status == EntryStatus::binding_error && e.binding_used != "none");
        bool expect_effect = spec.side_effecting() && executed;
        if (e.effect_committed != expect_effect)
            flag(seq, std::string("effect_committed is ") +
                          (e.effect_committed ? "true" : "false") + " but should be " +
                          (expect_effect ? "true" : "false"));
    }
    return out;
}

std::string trace_to_json_text(const AuditTrace& trace) {
    json doc;
    doc["program_digest"] = trace.program_digest;
    doc["grants"] = trace.grants;
    json entries = json::array();
    for (const auto& e : trace.entries) {
        json je;
        je["seq"] = e.seq;
        je["verb"] = e.verb;
        je["binding"] = e.binding_used;
        json inputs = json::array();
        for (const auto& [n, v] : e.inputs) inputs.push_back(json::array({n, value_to_json(v)}));
        je["inputs"] = inputs;
        je["output"] = e.output ? value_to_json(*e.output) : json(nullptr);
        je["status"] = to_string(e.status);
        if (e.status == EntryStatus::pre_failed || e.status == EntryStatus::post_failed)
            je["failed_index"] = e.failed_index;
        je["effect_committed"] = e.effect_committed;
        je["primitive_steps"] = e.primitive_steps;
        je["started"] = e.started_ms;
        je["ended"] = e.ended_ms;
        je["prev_hash"] = to_hex(e.prev_hash);
        je["entry_hash"] = to_hex(e.entry_hash);
        entries.push_back(std::move(je));
    }
    doc["entries"] = entries;
    if (trace.error) {
        doc["error"] = {{"kind", trace.error->kind},
                        {"message", trace.error->message},
                        {"line", trace.error->pos.line},
                        {"col", trace.error->pos.col},
                        {"seq", trace.error->seq}};
    }
    return doc.dump(1) + "\n";
}

AuditTrace trace_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("trace is not valid JSON: ") + e.what());
    }
    auto need = [&](const json& obj, const char* key) -> const json& {
        auto it = obj.find(key);
        if (it == obj.end())
            throw std::invalid_argument(std::string("trace missing '") + key + "'");
        return *it;
    };

    AuditTrace t;
    t.program_digest = need(doc, "program_digest").get<std::string>();
    for (const auto& g : need(doc, "grants")) t.grants.push_back(g.get<std::string>());
    for (const auto& je : need(doc, "entries")) {
        AuditEntry e;
        e.seq = need(je, "seq").get<int>();
        e.verb = need(je, "verb").get<std::string>();
        e.binding_used = need(je, "binding").get<std::string>();
        for (const auto& pair : need(je, "inputs")) {
            if (!pair.is_array() || pair.size() != 2)
                throw std::invalid_argument("trace inputs must be [name, value] pairs");
            e.inputs.emplace_back(pair[0].get<std::string>(), value_from_json(pair[1]));
        }
        const json& output = need(je, "output");
        if (!output.is_null()) e.output = value_from_json(output);
        auto status = status_from_string(need(je, "status").get<std::string>());
        if (!status) throw std::invalid_argument("unknown entry status");
        e.status = *status;
        if (je.contains("failed_index")) e.failed_index = je["failed_index"].get<int>();
        e.effect_committed = need(je, "effect_committed").get<bool>();
        e.primitive_steps = need(je, "primitive_steps").get<std::int64_t>();
        e.started_ms = need(je, "started").get<std::int64_t>();
        e.ended_ms = need(je, "ended").get<std::int64_t>();
        if (!from_hex(need(je, "prev_hash").get<std::string>(), e.prev_hash))
            throw std::invalid_argument("malformed prev_hash");
        if (!from_hex(need(je, "entry_hash").get<std::string>(), e.entry_hash))
            throw std::invalid_argument("malformed entry_hash");
        t.entries.push_back(std::move(e));
    }
    if (doc.contains("error")) {
        const json& err = doc["error"];
        RunErrorInfo info;
        info.kind = err.value("kind", "");
        info.message = err.value("message", "");
        info.pos = {err.value("line", 0), err.value("col", 0)};
        info.seq = err.value("seq", 0);
        t.error = info;
    }
    return t;
}

}  // namespace webverbs::contracts

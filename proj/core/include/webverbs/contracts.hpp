#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "webverbs/ast.hpp"
#include "webverbs/manifest.hpp"
#include "webverbs/registry.hpp"
#include "webverbs/sha256.hpp"
#include "webverbs/types.hpp"

namespace webverbs::contracts {

struct PredicateOutcome {
    bool passed = false;
    std::string failure_reason;  // set when !passed; dynamic errors land here too
};

// Pure evaluation of a contract predicate over the invocation's typed
// values. Dynamic errors (division by zero inside a predicate) count as
// failure with a reason, never as a crash.
PredicateOutcome eval_predicate(const wfl::Expr& pred, const Value& params_record,
                                const Value* result_record);

// tags ⊆ grants.
bool check_policy(const idl::TagSet& tags, const idl::TagSet& grants);

enum class EntryStatus { ok, policy_denied, pre_failed, post_failed, binding_error };

const char* to_string(EntryStatus s);

struct AuditEntry {
    int seq = 0;  // assigned by append_entry, starting at 1
    std::string verb;
    std::string binding_used;  // "api" | "browser" | "none"
    std::vector<std::pair<std::string, Value>> inputs;  // sorted by name
    std::optional<Value> output;
    EntryStatus status = EntryStatus::ok;
    int failed_index = -1;  // pre_failed / post_failed
    bool effect_committed = false;
    std::int64_t primitive_steps = 0;
    std::int64_t started_ms = 0;
    std::int64_t ended_ms = 0;
    Digest256 prev_hash{};   // assigned by append_entry
    Digest256 entry_hash{};  // assigned by append_entry
};

struct RunErrorInfo {
    std::string kind;
    std::string message;
    SourcePos pos;
    int seq = 0;  // failing invocation, 0 when none
};

struct AuditTrace {
    std::string program_digest;       // sha256 hex of the workflow source
    std::vector<std::string> grants;  // sorted tag names
    std::vector<AuditEntry> entries;
    std::optional<RunErrorInfo> error;  // set when the run aborted
};

// The byte layout that entry_hash covers; documented in docs/trace_format.md
// and stable across releases. Values are rendered with render_value.
std::string canonical_entry_bytes(const AuditEntry& entry);

// Assigns seq and prev_hash, computes entry_hash, appends. Entry 1 links to
// 32 zero bytes.
void append_entry(AuditTrace& trace, AuditEntry entry);

struct Violation {
    int seq = 0;  // 0 = trace-level
    std::string what;
};

// Full replay verification: hash chain, seq monotonicity, value typing
// against the registry's specs, contract re-evaluation vs recorded status,
// policy subset vs recorded grants. Throws UnknownVerb if the trace names a
// verb the registry lacks.
std::vector<Violation> verify_trace(const AuditTrace& trace, const Registry& reg);

std::string trace_to_json_text(const AuditTrace& trace);

// Throws std::invalid_argument on malformed documents.
AuditTrace trace_from_json_text(const std::string& text);

}  // namespace webverbs::contracts

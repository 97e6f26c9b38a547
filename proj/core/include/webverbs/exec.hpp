#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "webverbs/ast.hpp"
#include "webverbs/contracts.hpp"
#include "webverbs/registry.hpp"
#include "webverbs/runtime.hpp"

namespace webverbs::exec {

enum class BindingPreference { api_first, browser_first, api_only, browser_only };

const char* to_string(BindingPreference p);
std::optional<BindingPreference> binding_preference_from_string(const std::string& s);

// Millisecond timestamps for audit entries. Injectable so golden traces are
// byte-stable; the default reads the system clock.
using Clock = std::function<std::int64_t()>;

Clock system_clock_ms();
Clock deterministic_clock(std::int64_t start = 1000);

struct ExecOptions {
    BindingPreference binding = BindingPreference::api_first;
    idl::TagSet grants;                    // effective grant set for this run
    mockweb::SiteRuntime* runtime = nullptr;
    // When set, API bindings go over HTTP/1.1 to this base URL (the facade
    // must wrap the same runtime). When empty, API calls run in-process.
    std::string api_base;
    Clock clock;
};

enum class FailureKind {
    policy,
    contract_pre,
    contract_post,
    div_zero,
    empty_extremal,
    mixed_currency,
    verb_execution,
    binding_unavailable,
    internal_type,
};

const char* to_string(FailureKind k);

struct RunFailure {
    FailureKind kind;
    std::string message;
    SourcePos pos;
    int seq = 0;  // failing invocation, 0 when none
};

struct RunOutcome {
    std::optional<Value> value;  // set on success when the program returns one
    contracts::AuditTrace trace;
    std::optional<RunFailure> failure;

    bool ok() const { return !failure.has_value(); }
};

struct VerbOutcome {
    Value result;
    std::int64_t primitive_steps = 0;
    std::string binding_used;
    std::int64_t duration_ms = 0;
};

// Thrown by Executor::invoke_verb after the audit entry is appended.
class VerbAbort : public std::runtime_error {
public:
    VerbAbort(FailureKind kind, const std::string& message, int seq)
        : std::runtime_error(message), kind_(kind), seq_(seq) {}

    FailureKind kind() const { return kind_; }
    int seq() const { return seq_; }

private:
    FailureKind kind_;
    int seq_;
};

// One workflow run: owns the audit trace and one mock-web session shared by
// both bindings. Single-threaded by contract.
class Executor {
public:
    Executor(const Registry& reg, ExecOptions options, std::string program_digest);

    // The gate pipeline: policy -> preconditions -> binding selection ->
    // execution -> result typing -> postconditions -> trace append. Every
    // invocation appends exactly one entry; failures throw VerbAbort.
    VerbOutcome invoke_verb(const idl::VerbSpec& spec,
                            const std::vector<std::pair<std::string, Value>>& args);

    const contracts::AuditTrace& trace() const { return trace_; }
    contracts::AuditTrace take_trace() { return std::move(trace_); }
    const std::string& session();

private:
    struct BindingResult {
        Value result;
        std::int64_t steps = 0;
    };

    BindingResult run_api_binding(const idl::VerbSpec& spec, const idl::ApiBinding& binding,
                                  const std::vector<std::pair<std::string, Value>>& args);
    BindingResult run_browser_binding(const idl::VerbSpec& spec,
                                      const idl::BrowserBinding& binding,
                                      const std::vector<std::pair<std::string, Value>>& args);

    const Registry& reg_;
    ExecOptions options_;
    contracts::AuditTrace trace_;
    std::string session_;
};

// Interprets a type-checked program (pre: type_check(prog, reg) is clean).
// Never throws for the declared dynamic error classes; they come back in
// RunOutcome::failure with the partial trace.
RunOutcome run(const wfl::WorkflowProgram& prog, const Registry& reg, ExecOptions options);

}  // namespace webverbs::exec

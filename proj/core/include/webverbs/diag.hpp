#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace webverbs {

struct SourcePos {
    int line = 0;  // 1-based; 0 means "no position"
    int col = 0;

    bool valid() const { return line > 0; }
    bool operator==(const SourcePos&) const = default;
};

enum class Severity { error, warning };

struct Diagnostic {
    SourcePos pos;
    Severity severity = Severity::error;
    std::string message;
};

// Renders "file:line:col: severity: message", matching compiler conventions.
inline std::string format_diagnostic(const std::string& file, const Diagnostic& d) {
    std::string out = file;
    out += ':' + std::to_string(d.pos.line) + ':' + std::to_string(d.pos.col) + ": ";
    out += d.severity == Severity::error ? "error: " : "warning: ";
    out += d.message;
    return out;
}

inline bool has_errors(const std::vector<Diagnostic>& ds) {
    for (const auto& d : ds)
        if (d.severity == Severity::error) return true;
    return false;
}

}  // namespace webverbs

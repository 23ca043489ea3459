#pragma once

#include "callfuse/graph.hpp"
#include "callfuse/js_ast.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace callfuse {

inline constexpr std::string_view kStaticToolId = "static-ast";

enum class UnresolvedReason { DynamicDispatch, EvalLike, UnknownName };

/// "dynamic-dispatch" / "eval-like" / "unknown-name"
std::string_view to_string(UnresolvedReason reason);

struct UnresolvedCall {
    SourcePosition site;
    std::string callee;
    UnresolvedReason reason = UnresolvedReason::UnknownName;

    bool operator==(const UnresolvedCall&) const = default;
};

/// One call or `new` expression. Exactly one of `targets` (non-empty) and
/// `unresolved` is set.
struct CallSite {
    SourcePosition site;
    SourcePosition caller;
    std::string callee;
    std::vector<SourcePosition> targets;
    std::optional<UnresolvedReason> unresolved;
};

struct StaticExtraction {
    HybridCallGraph graph;
    std::vector<UnresolvedCall> unresolved;
    std::vector<CallSite> sites;
    std::vector<FunctionSpan> spans;
    std::vector<std::string> diagnostics;
};

/// Name of the synthetic caller used for calls made at a file's top level.
/// It sits one line past the end of the file, so it never collides with a
/// real function.
inline constexpr std::string_view kTopLevelName = "<toplevel>";

/// Builds the call graph of one program snapshot.
///
/// Plain calls `g()` resolve lexically, innermost scope first. Property calls
/// `x.m()` resolve field-based: an edge to every function stored under a
/// property named `m` anywhere in the snapshot (object literals, method
/// shorthand, `x.m = fn`, `x["m"] = fn`). `eval`, `Function`, `.call`,
/// `.apply` and `.bind` are recorded as eval-like. Every function is a node;
/// every edge has found_by = {"static-ast"} and confidence 1.0.
StaticExtraction extract_call_graph(std::span<const js::JsSubsetAst> asts);

/// Parses every .js/.mjs/.cjs file below `root` (skipping node_modules and
/// hidden directories) with paths relative to `root`, then extracts. Files
/// that fail to parse are skipped with a diagnostic.
StaticExtraction extract_static_directory(const std::string& root);

}  // namespace callfuse

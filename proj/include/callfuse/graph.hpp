#pragma once

#include "callfuse/error.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace callfuse {

/// Function identity: repository-relative path plus 1-based line and column.
struct SourcePosition {
    std::string file;
    std::uint32_t line = 1;
    std::uint32_t column = 1;

    auto operator<=>(const SourcePosition&) const = default;
    bool operator==(const SourcePosition&) const = default;

    /// "file:line:col"
    std::string to_string() const;

    /// Parses "file:line:col". The file part may itself contain ':'; the last
    /// two fields are the numbers. The path is normalized.
    static SourcePosition parse(std::string_view text);
};

/// Forward slashes, no "./" segments, no leading "/" or "./", no repeated separators.
std::string normalize_path(std::string_view path);

using ToolSet = std::set<std::string>;

struct FunctionNode {
    SourcePosition pos;
    bool entry = false;
    bool final = false;
    std::optional<std::string> name;

    bool operator==(const FunctionNode&) const = default;
};

struct CallEdge {
    SourcePosition source;
    SourcePosition target;
    ToolSet found_by;
    double confidence = 0.0;

    bool operator==(const CallEdge&) const = default;
};

using EdgeKey = std::pair<SourcePosition, SourcePosition>;

inline EdgeKey key_of(const CallEdge& edge) { return {edge.source, edge.target}; }

/// Nodes and edges of a (possibly merged) call graph. Producers in this
/// library return graphs in canonical order: nodes by position, edges by
/// (source, target). Equality is structural and order-sensitive, so compare
/// canonical graphs.
struct HybridCallGraph {
    std::vector<FunctionNode> nodes;
    std::vector<CallEdge> edges;
    ToolSet tool_ids;

    bool operator==(const HybridCallGraph&) const = default;

    const FunctionNode* find_node(const SourcePosition& pos) const;
};

/// Sorts nodes and edges into canonical order.
void canonicalize(HybridCallGraph& graph);

/// Incremental construction with node de-duplication and edge collapsing.
/// Adding an edge whose key exists unions `found_by` and keeps the larger
/// confidence.
class GraphBuilder {
public:
    /// Adds the node if absent; otherwise ORs the flags and keeps the
    /// lexicographically smallest non-empty name.
    void add_node(const FunctionNode& node);
    void add_edge(const CallEdge& edge);
    void add_tool(const std::string& tool_id) { m_tools.insert(tool_id); }

    bool has_node(const SourcePosition& pos) const { return m_nodes.contains(pos); }

    HybridCallGraph build() const;

private:
    std::map<SourcePosition, FunctionNode> m_nodes;
    std::map<EdgeKey, CallEdge> m_edges;
    ToolSet m_tools;
};

struct GraphViolation {
    enum class Kind {
        InvalidPosition,
        DuplicateNode,
        DanglingEndpoint,
        DuplicateEdge,
        ConfidenceOutOfRange,
        EmptyFoundBy,
        UnknownTool,
    };
    Kind kind;
    /// Human-readable, names the offending node or edge.
    std::string message;
};

std::vector<GraphViolation> validate_graph(const HybridCallGraph& graph);

/// Line extent of a function: from its identity position to `end_line`.
struct FunctionSpan {
    SourcePosition id;
    std::uint32_t end_line = 1;

    bool operator==(const FunctionSpan&) const = default;
};

/// `[{"pos": "file:line:col", "end_line": n}, ...]`
std::vector<FunctionSpan> parse_span_document(std::string_view document);
std::string serialize_spans(std::vector<FunctionSpan> spans);

/// Parses a unified call-graph document. `tool_ids` is the union of all
/// edges' `found_by`. Unknown fields are reported to `diagnostics` and ignored.
/// Throws ParseError for malformed JSON or schema mismatches and
/// ValidationError when the result would break a graph invariant.
HybridCallGraph parse_graph_document(std::string_view document, Diagnostics* diagnostics = nullptr);

/// Canonical document text (two-space indented JSON, trailing newline).
std::string serialize_graph(const HybridCallGraph& graph);

}  // namespace callfuse

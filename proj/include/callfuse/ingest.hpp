#pragma once

#include "callfuse/error.hpp"
#include "callfuse/graph.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace callfuse {

enum class ToolFormat {
    Unified,   ///< unified call-graph document
    Pairlist,  ///< lines of `file:line:col -> file:line:col`
};

/// "unified" / "pairlist"; throws Error for anything else.
ToolFormat parse_tool_format(std::string_view name);
std::string_view to_string(ToolFormat format);

struct ToolOutput {
    std::string tool_id;
    ToolFormat format = ToolFormat::Unified;
    std::string payload;
};

/// Every edge of the result has found_by = {tool_id} and confidence 1.0.
HybridCallGraph convert_tool_output(const ToolOutput& output, Diagnostics* diagnostics = nullptr);

/// One function-level row of a static-metrics export.
struct StaticMetricsRow {
    SourcePosition id;
    std::string name;
    std::int64_t loc = 0;
    std::int64_t lloc = 0;
    std::int64_t nos = 0;
    std::int64_t mccc = 0;
    std::int64_t nl = 0;
    double cd = 0.0;
    std::int64_t cloc = 0;
    std::int64_t dloc = 0;
    std::int64_t nii = 0;
    std::int64_t noi = 0;

    bool operator==(const StaticMetricsRow&) const = default;
};

struct RejectedRow {
    std::size_t line;  ///< 1-based line of the row in the CSV
    std::string reason;
};

struct StaticMetricsTable {
    std::vector<StaticMetricsRow> rows;
    std::vector<RejectedRow> rejected;
};

/// Metric column names, in the order used by feature matrices.
inline constexpr std::string_view kStaticMetricColumns[] = {
    "LOC", "LLOC", "NOS", "McCC", "NL", "CD", "CLOC", "DLOC", "NII", "NOI",
};

/// Reads a static-metrics CSV with columns Name, Path, Line, Column and the
/// ten metric columns (extra columns are ignored). Rows with missing or
/// out-of-range cells are rejected individually; a missing column throws
/// ParseError("missing column <name>").
StaticMetricsTable load_static_metrics(std::string_view csv);

/// Inclusive, 1-based line range.
struct LineRange {
    std::uint32_t start = 1;
    std::uint32_t end = 1;

    bool operator==(const LineRange&) const = default;
    auto operator<=>(const LineRange&) const = default;
};

struct FileChange {
    std::string file;
    std::vector<LineRange> ranges;

    bool operator==(const FileChange&) const = default;
};

struct Patch {
    std::string bug_id;
    std::vector<FileChange> file_changes;

    bool operator==(const Patch&) const = default;
};

/// Changed lines of a unified diff on the pre-image (before-fix) side.
/// Deleted lines map to themselves; added lines map to the pre-image line
/// they follow (line 1 when inserted at the top). Ranges are merged when
/// they overlap or touch, so each file's ranges are sorted and disjoint.
/// Files created by the patch have no pre-image lines and are skipped.
Patch parse_patch(std::string_view diff, const std::string& bug_id, Diagnostics* diagnostics = nullptr);

}  // namespace callfuse

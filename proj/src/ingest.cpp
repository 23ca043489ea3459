#include "callfuse/ingest.hpp"

#include "callfuse/text.hpp"

#include <algorithm>
#include <map>
#include <optional>

namespace callfuse {

ToolFormat parse_tool_format(std::string_view name)
{
    if (name == "unified")
        return ToolFormat::Unified;
    if (name == "pairlist")
        return ToolFormat::Pairlist;
    throw Error("unknown tool output format '" + std::string(name) + "'");
}

std::string_view to_string(ToolFormat format)
{
    switch (format) {
    case ToolFormat::Unified:
        return "unified";
    case ToolFormat::Pairlist:
        return "pairlist";
    }
    return "unknown";
}

namespace {

HybridCallGraph convert_pairlist(const ToolOutput& output)
{
    GraphBuilder builder;
    builder.add_tool(output.tool_id);

    std::size_t line_number = 0;
    for (auto raw : split(output.payload, '\n')) {
        ++line_number;
        const auto line = trim(raw);
        if (line.empty() || line.starts_with('#'))
            continue;
        const auto arrow = line.find("->");
        if (arrow == std::string_view::npos)
            throw ParseError("pairlist line lacks '->'", line_number);
        SourcePosition source;
        SourcePosition target;
        try {
            source = SourcePosition::parse(trim(line.substr(0, arrow)));
            target = SourcePosition::parse(trim(line.substr(arrow + 2)));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_number);
        }
        builder.add_node({source, false, false, std::nullopt});
        builder.add_node({target, false, false, std::nullopt});
        builder.add_edge({source, target, {output.tool_id}, 1.0});
    }
    return builder.build();
}

}  // namespace

HybridCallGraph convert_tool_output(const ToolOutput& output, Diagnostics* diagnostics)
{
    if (output.tool_id.empty())
        throw Error("tool output needs a non-empty tool id");

    if (output.format == ToolFormat::Pairlist)
        return convert_pairlist(output);

    if (trim(output.payload).empty()) {
        HybridCallGraph empty;
        empty.tool_ids = {output.tool_id};
        return empty;
    }
    HybridCallGraph graph = parse_graph_document(output.payload, diagnostics);
    for (auto& edge : graph.edges) {
        edge.found_by = {output.tool_id};
        edge.confidence = 1.0;
    }
    graph.tool_ids = {output.tool_id};
    return graph;
}

StaticMetricsTable load_static_metrics(std::string_view csv)
{
    const CsvTable table = parse_csv(csv);

    constexpr std::string_view identity_columns[] = {"Name", "Path", "Line", "Column"};
    std::map<std::string_view, std::size_t> index;
    for (auto name : identity_columns) {
        auto column = table.column(name);
        if (!column)
            throw ParseError("missing column " + std::string(name));
        index[name] = *column;
    }
    for (auto name : kStaticMetricColumns) {
        auto column = table.column(name);
        if (!column)
            throw ParseError("missing column " + std::string(name));
        index[name] = *column;
    }

    StaticMetricsTable result;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        const std::size_t line = table.row_lines[r];
        std::optional<std::string> problem;

        auto cell = [&](std::string_view column) -> std::string_view {
            const auto i = index.at(column);
            return i < cells.size() ? trim(cells[i]) : std::string_view{};
        };
        auto count = [&](std::string_view column) -> std::int64_t {
            if (problem)
                return 0;
            const auto text = cell(column);
            if (text.empty()) {
                problem = "missing value for " + std::string(column);
                return 0;
            }
            auto value = parse_int(text);
            if (!value) {
                // Exports sometimes write integral counts as "12.0".
                auto real = parse_double(text);
                if (real && *real == static_cast<double>(static_cast<std::int64_t>(*real)))
                    value = static_cast<std::int64_t>(*real);
            }
            if (!value || *value < 0) {
                problem = std::string(column) + " value '" + std::string(text) + "' is not a non-negative count";
                return 0;
            }
            return *value;
        };

        StaticMetricsRow row;
        row.name = std::string(cell("Name"));
        const auto path = normalize_path(cell("Path"));
        const auto pos_line = count("Line");
        const auto pos_column = count("Column");
        if (!problem && (path.empty() || pos_line < 1 || pos_column < 1))
            problem = "invalid function position";
        row.id = {path, static_cast<std::uint32_t>(pos_line), static_cast<std::uint32_t>(pos_column)};
        row.loc = count("LOC");
        row.lloc = count("LLOC");
        row.nos = count("NOS");
        row.mccc = count("McCC");
        row.nl = count("NL");
        if (!problem) {
            const auto text = cell("CD");
            auto cd = parse_double(text);
            if (text.empty())
                problem = "missing value for CD";
            else if (!cd || !(*cd >= 0.0 && *cd <= 1.0))
                problem = "CD value '" + std::string(text) + "' is outside [0,1]";
            else
                row.cd = *cd;
        }
        row.cloc = count("CLOC");
        row.dloc = count("DLOC");
        row.nii = count("NII");
        row.noi = count("NOI");

        if (problem)
            result.rejected.push_back({line, *problem});
        else
            result.rows.push_back(std::move(row));
    }
    return result;
}

namespace {

struct DiffPath {
    std::string path;
    bool is_null = false;
};

DiffPath diff_header_path(std::string_view rest)
{
    // "--- a/lib/x.js\t2018-03-21 ..." : drop the optional timestamp.
    if (auto tab = rest.find('\t'); tab != std::string_view::npos)
        rest = rest.substr(0, tab);
    rest = trim(rest);
    if (rest.size() >= 2 && rest.front() == '"' && rest.back() == '"')
        rest = rest.substr(1, rest.size() - 2);
    if (rest == "/dev/null")
        return {"", true};
    if (rest.starts_with("a/") || rest.starts_with("b/"))
        rest.remove_prefix(2);
    return {normalize_path(rest), false};
}

struct HunkHeader {
    std::uint32_t old_start = 0;
    std::uint32_t old_count = 1;
    std::uint32_t new_start = 0;
    std::uint32_t new_count = 1;
};

std::optional<HunkHeader> parse_hunk_header(std::string_view line)
{
    // @@ -a[,b] +c[,d] @@ optional section heading
    if (!line.starts_with("@@ -"))
        return std::nullopt;
    line.remove_prefix(4);
    const auto close = line.find(" @@");
    if (close == std::string_view::npos)
        return std::nullopt;
    line = line.substr(0, close);
    const auto plus = line.find(" +");
    if (plus == std::string_view::npos)
        return std::nullopt;

    auto parse_range = [](std::string_view text, std::uint32_t& start, std::uint32_t& count) {
        const auto comma = text.find(',');
        auto first = parse_int(text.substr(0, comma));
        if (!first || *first < 0)
            return false;
        start = static_cast<std::uint32_t>(*first);
        count = 1;
        if (comma != std::string_view::npos) {
            auto second = parse_int(text.substr(comma + 1));
            if (!second || *second < 0)
                return false;
            count = static_cast<std::uint32_t>(*second);
        }
        return true;
    };
    HunkHeader header;
    if (!parse_range(line.substr(0, plus), header.old_start, header.old_count) ||
        !parse_range(line.substr(plus + 2), header.new_start, header.new_count))
        return std::nullopt;
    return header;
}

std::vector<LineRange> merge_ranges(std::vector<LineRange> ranges)
{
    std::sort(ranges.begin(), ranges.end());
    std::vector<LineRange> merged;
    for (const auto& range : ranges) {
        if (!merged.empty() && range.start <= merged.back().end + 1)
            merged.back().end = std::max(merged.back().end, range.end);
        else
            merged.push_back(range);
    }
    return merged;
}

}  // namespace

Patch parse_patch(std::string_view diff, const std::string& bug_id, Diagnostics* diagnostics)
{
    auto lines = split(diff, '\n');
    if (!lines.empty() && lines.back().empty())
        lines.pop_back();

    std::map<std::string, std::vector<LineRange>> changes;
    std::optional<DiffPath> old_path;
    std::optional<DiffPath> new_path;
    bool saw_hunk = false;
    bool saw_header = false;

    std::size_t i = 0;
    while (i < lines.size()) {
        std::string_view line = lines[i];
        if (line.ends_with('\r'))
            line.remove_suffix(1);

        if (line.starts_with("diff ")) {
            old_path.reset();
            new_path.reset();
            ++i;
            continue;
        }
        if (line.starts_with("--- ")) {
            old_path = diff_header_path(line.substr(4));
            new_path.reset();
            saw_header = true;
            ++i;
            continue;
        }
        if (line.starts_with("+++ ")) {
            new_path = diff_header_path(line.substr(4));
            saw_header = true;
            ++i;
            continue;
        }
        if (!line.starts_with("@@")) {
            // Preamble and extended git headers (index, mode, rename, ...).
            ++i;
            continue;
        }

        const std::size_t header_line = i + 1;
        auto header = parse_hunk_header(line);
        if (!header)
            throw ParseError("malformed hunk header '" + std::string(line) + "'", header_line);
        if (!old_path || !new_path)
            throw ParseError("hunk without ---/+++ file header", header_line);
        saw_hunk = true;

        std::vector<LineRange>* ranges = nullptr;
        if (old_path->is_null) {
            report(diagnostics, "bug " + bug_id + ": skipping new file " + new_path->path +
                                    " (no pre-fix lines)");
        } else {
            ranges = &changes[old_path->path];
        }

        // Next pre-image line to be consumed. An empty pre-image side names the
        // line after which the insertion happens.
        std::uint32_t old_line = header->old_count == 0 ? header->old_start + 1 : header->old_start;
        std::uint32_t old_left = header->old_count;
        std::uint32_t new_left = header->new_count;
        ++i;
        while (old_left > 0 || new_left > 0) {
            if (i >= lines.size())
                throw ParseError("hunk ends before its declared line counts", header_line);
            std::string_view body = lines[i];
            if (body.ends_with('\r'))
                body.remove_suffix(1);
            const char tag = body.empty() ? ' ' : body.front();
            switch (tag) {
            case ' ':
                if (old_left == 0 || new_left == 0)
                    throw ParseError("context line exceeds hunk counts", i + 1);
                ++old_line;
                --old_left;
                --new_left;
                break;
            case '-':
                if (old_left == 0)
                    throw ParseError("deleted line exceeds hunk counts", i + 1);
                if (ranges)
                    ranges->push_back({old_line, old_line});
                ++old_line;
                --old_left;
                break;
            case '+': {
                if (new_left == 0)
                    throw ParseError("added line exceeds hunk counts", i + 1);
                const std::uint32_t anchor = std::max<std::uint32_t>(1, old_line - 1);
                if (ranges)
                    ranges->push_back({anchor, anchor});
                --new_left;
                break;
            }
            case '\\':
                break;
            default:
                throw ParseError("unexpected line inside hunk", i + 1);
            }
            ++i;
        }
        // "\ No newline at end of file" may trail the last hunk line.
        while (i < lines.size() && lines[i].starts_with('\\'))
            ++i;
    }

    if (!saw_hunk && !trim(diff).empty() && !saw_header)
        throw ParseError("input is not a unified diff");

    Patch patch;
    patch.bug_id = bug_id;
    for (auto& [file, ranges] : changes) {
        auto merged = merge_ranges(std::move(ranges));
        if (!merged.empty())
            patch.file_changes.push_back({file, std::move(merged)});
    }
    return patch;
}

}  // namespace callfuse

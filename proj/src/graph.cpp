#include "callfuse/graph.hpp"

#include "callfuse/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>

namespace callfuse {

using ordered_json = nlohmann::ordered_json;

std::string SourcePosition::to_string() const
{
    return file + ":" + std::to_string(line) + ":" + std::to_string(column);
}

namespace {

std::optional<std::uint32_t> parse_u32(std::string_view text)
{
    std::uint32_t value = 0;
    if (text.empty())
        return std::nullopt;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        return std::nullopt;
    return value;
}

}  // namespace

SourcePosition SourcePosition::parse(std::string_view text)
{
    const auto col_sep = text.rfind(':');
    if (col_sep == std::string_view::npos || col_sep == 0)
        throw ParseError("position '" + std::string(text) + "' is not of the form file:line:col");
    const auto line_sep = text.rfind(':', col_sep - 1);
    if (line_sep == std::string_view::npos)
        throw ParseError("position '" + std::string(text) + "' is not of the form file:line:col");

    const auto line = parse_u32(text.substr(line_sep + 1, col_sep - line_sep - 1));
    const auto column = parse_u32(text.substr(col_sep + 1));
    if (!line || !column)
        throw ParseError("position '" + std::string(text) + "' has a non-numeric line or column");

    SourcePosition pos{normalize_path(text.substr(0, line_sep)), *line, *column};
    if (pos.file.empty() || pos.line == 0 || pos.column == 0)
        throw ParseError("position '" + std::string(text) + "' needs a file and line, column >= 1");
    return pos;
}

std::string normalize_path(std::string_view path)
{
    std::string unified(path);
    std::replace(unified.begin(), unified.end(), '\\', '/');

    std::vector<std::string_view> segments;
    for (auto segment : split(unified, '/')) {
        if (segment.empty() || segment == ".")
            continue;
        segments.push_back(segment);
    }
    std::string out;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (i)
            out += '/';
        out += segments[i];
    }
    return out;
}

const FunctionNode* HybridCallGraph::find_node(const SourcePosition& pos) const
{
    auto it = std::lower_bound(nodes.begin(), nodes.end(), pos,
                               [](const FunctionNode& node, const SourcePosition& p) { return node.pos < p; });
    if (it != nodes.end() && it->pos == pos)
        return &*it;
    // Fall back to a scan for graphs that are not canonical.
    auto found = std::find_if(nodes.begin(), nodes.end(), [&](const FunctionNode& n) { return n.pos == pos; });
    return found == nodes.end() ? nullptr : &*found;
}

void canonicalize(HybridCallGraph& graph)
{
    std::stable_sort(graph.nodes.begin(), graph.nodes.end(),
                     [](const FunctionNode& a, const FunctionNode& b) { return a.pos < b.pos; });
    std::stable_sort(graph.edges.begin(), graph.edges.end(),
                     [](const CallEdge& a, const CallEdge& b) { return key_of(a) < key_of(b); });
}

void GraphBuilder::add_node(const FunctionNode& node)
{
    auto [it, inserted] = m_nodes.try_emplace(node.pos, node);
    if (inserted)
        return;
    FunctionNode& existing = it->second;
    existing.entry = existing.entry || node.entry;
    existing.final = existing.final || node.final;
    if (node.name && !node.name->empty() &&
        (!existing.name || existing.name->empty() || *node.name < *existing.name))
        existing.name = node.name;
}

void GraphBuilder::add_edge(const CallEdge& edge)
{
    auto [it, inserted] = m_edges.try_emplace(key_of(edge), edge);
    m_tools.insert(edge.found_by.begin(), edge.found_by.end());
    if (inserted)
        return;
    it->second.found_by.insert(edge.found_by.begin(), edge.found_by.end());
    it->second.confidence = std::max(it->second.confidence, edge.confidence);
}

HybridCallGraph GraphBuilder::build() const
{
    HybridCallGraph graph;
    graph.nodes.reserve(m_nodes.size());
    for (const auto& [pos, node] : m_nodes)
        graph.nodes.push_back(node);
    graph.edges.reserve(m_edges.size());
    for (const auto& [key, edge] : m_edges)
        graph.edges.push_back(edge);
    graph.tool_ids = m_tools;
    return graph;
}

std::vector<GraphViolation> validate_graph(const HybridCallGraph& graph)
{
    using Kind = GraphViolation::Kind;
    std::vector<GraphViolation> violations;

    std::set<SourcePosition> seen_nodes;
    for (const auto& node : graph.nodes) {
        const auto& pos = node.pos;
        if (pos.file.empty() || pos.line == 0 || pos.column == 0 || pos.file.find('\\') != std::string::npos)
            violations.push_back({Kind::InvalidPosition, "node " + pos.to_string() + " has an invalid position"});
        if (!seen_nodes.insert(pos).second)
            violations.push_back({Kind::DuplicateNode, "node " + pos.to_string() + " is declared more than once"});
    }

    std::set<EdgeKey> seen_edges;
    for (const auto& edge : graph.edges) {
        const std::string label = "edge " + edge.source.to_string() + " -> " + edge.target.to_string();
        if (!seen_nodes.contains(edge.source))
            violations.push_back({Kind::DanglingEndpoint, label + ": source " + edge.source.to_string() + " is not a node"});
        if (!seen_nodes.contains(edge.target))
            violations.push_back({Kind::DanglingEndpoint, label + ": target " + edge.target.to_string() + " is not a node"});
        if (!seen_edges.insert(key_of(edge)).second)
            violations.push_back({Kind::DuplicateEdge, label + " appears more than once"});
        if (!(edge.confidence >= 0.0 && edge.confidence <= 1.0))
            violations.push_back({Kind::ConfidenceOutOfRange,
                                  label + " has confidence " + format_double(edge.confidence) + " outside [0,1]"});
        if (edge.found_by.empty())
            violations.push_back({Kind::EmptyFoundBy, label + " has an empty found_by set"});
        for (const auto& tool : edge.found_by) {
            if (!graph.tool_ids.contains(tool))
                violations.push_back({Kind::UnknownTool, label + " names tool '" + tool + "' missing from tool_ids"});
        }
    }
    return violations;
}

namespace {

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte_offset)
{
    std::size_t line = 1;
    std::size_t column = 1;
    const auto limit = std::min(byte_offset, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

void warn_unknown_fields(const ordered_json& object, std::initializer_list<std::string_view> known,
                         const std::string& where, Diagnostics* diagnostics)
{
    for (const auto& [key, value] : object.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            report(diagnostics, "ignoring unknown field '" + key + "' in " + where);
    }
}

const ordered_json& require(const ordered_json& object, const char* field, const std::string& where)
{
    auto it = object.find(field);
    if (it == object.end())
        throw ParseError(where + " is missing field '" + field + "'");
    return *it;
}

SourcePosition position_field(const ordered_json& object, const char* field, const std::string& where)
{
    const auto& value = require(object, field, where);
    if (!value.is_string())
        throw ParseError(where + "." + field + " must be a string");
    try {
        return SourcePosition::parse(value.get<std::string>());
    } catch (const ParseError& e) {
        throw ParseError(where + "." + field + ": " + e.what());
    }
}

bool bool_field(const ordered_json& object, const char* field, const std::string& where)
{
    auto it = object.find(field);
    if (it == object.end())
        return false;
    if (!it->is_boolean())
        throw ParseError(where + "." + field + " must be a boolean");
    return it->get<bool>();
}

}  // namespace

HybridCallGraph parse_graph_document(std::string_view document, Diagnostics* diagnostics)
{
    ordered_json root;
    try {
        root = ordered_json::parse(document.begin(), document.end());
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, column] = line_and_column(document, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError("malformed graph document (byte " + std::to_string(e.byte) + ")", line, column);
    }
    if (!root.is_object())
        throw ParseError("graph document must be a JSON object");
    warn_unknown_fields(root, {"nodes", "edges"}, "document", diagnostics);

    const auto& nodes = require(root, "nodes", "document");
    const auto& edges = require(root, "edges", "document");
    if (!nodes.is_array() || !edges.is_array())
        throw ParseError("document 'nodes' and 'edges' must be arrays");

    HybridCallGraph graph;
    graph.nodes.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string where = "nodes[" + std::to_string(i) + "]";
        const auto& item = nodes[i];
        if (!item.is_object())
            throw ParseError(where + " must be an object");
        warn_unknown_fields(item, {"pos", "entry", "final", "name"}, where, diagnostics);

        FunctionNode node;
        node.pos = position_field(item, "pos", where);
        node.entry = bool_field(item, "entry", where);
        node.final = bool_field(item, "final", where);
        if (auto it = item.find("name"); it != item.end() && !it->is_null()) {
            if (!it->is_string())
                throw ParseError(where + ".name must be a string");
            node.name = it->get<std::string>();
        }
        graph.nodes.push_back(std::move(node));
    }

    graph.edges.reserve(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const std::string where = "edges[" + std::to_string(i) + "]";
        const auto& item = edges[i];
        if (!item.is_object())
            throw ParseError(where + " must be an object");
        warn_unknown_fields(item, {"source", "target", "found_by", "confidence"}, where, diagnostics);

        CallEdge edge;
        edge.source = position_field(item, "source", where);
        edge.target = position_field(item, "target", where);
        const auto& found_by = require(item, "found_by", where);
        if (!found_by.is_array())
            throw ParseError(where + ".found_by must be an array of strings");
        for (const auto& tool : found_by) {
            if (!tool.is_string() || tool.get<std::string>().empty())
                throw ParseError(where + ".found_by must contain non-empty strings");
            edge.found_by.insert(tool.get<std::string>());
        }
        const auto& confidence = require(item, "confidence", where);
        if (!confidence.is_number())
            throw ParseError(where + ".confidence must be a number");
        edge.confidence = confidence.get<double>();
        graph.tool_ids.insert(edge.found_by.begin(), edge.found_by.end());
        graph.edges.push_back(std::move(edge));
    }

    const auto violations = validate_graph(graph);
    if (!violations.empty()) {
        std::string message = "invalid graph document: " + violations.front().message;
        if (violations.size() > 1)
            message += " (and " + std::to_string(violations.size() - 1) + " more)";
        throw ValidationError(message);
    }
    canonicalize(graph);
    return graph;
}

std::string serialize_graph(const HybridCallGraph& graph)
{
    HybridCallGraph sorted = graph;
    canonicalize(sorted);

    ordered_json root = ordered_json::object();
    root["nodes"] = ordered_json::array();
    root["edges"] = ordered_json::array();
    for (const auto& node : sorted.nodes) {
        ordered_json item;
        item["pos"] = node.pos.to_string();
        item["entry"] = node.entry;
        item["final"] = node.final;
        if (node.name)
            item["name"] = *node.name;
        root["nodes"].push_back(std::move(item));
    }
    for (const auto& edge : sorted.edges) {
        ordered_json item;
        item["source"] = edge.source.to_string();
        item["target"] = edge.target.to_string();
        item["found_by"] = ordered_json(std::vector<std::string>(edge.found_by.begin(), edge.found_by.end()));
        item["confidence"] = edge.confidence;
        root["edges"].push_back(std::move(item));
    }
    return root.dump(2) + "\n";
}

std::vector<FunctionSpan> parse_span_document(std::string_view document)
{
    ordered_json root;
    try {
        root = ordered_json::parse(document.begin(), document.end());
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, column] = line_and_column(document, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError("malformed span document", line, column);
    }
    if (!root.is_array())
        throw ParseError("span document must be a JSON array");
    std::vector<FunctionSpan> spans;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const std::string where = "spans[" + std::to_string(i) + "]";
        const auto& item = root[i];
        if (!item.is_object())
            throw ParseError(where + " must be an object");
        FunctionSpan span;
        span.id = position_field(item, "pos", where);
        const auto& end = require(item, "end_line", where);
        if (!end.is_number_integer() || end.get<std::int64_t>() < span.id.line)
            throw ParseError(where + ".end_line must be an integer >= the start line");
        span.end_line = end.get<std::uint32_t>();
        spans.push_back(std::move(span));
    }
    return spans;
}

std::string serialize_spans(std::vector<FunctionSpan> spans)
{
    std::sort(spans.begin(), spans.end(), [](const FunctionSpan& a, const FunctionSpan& b) { return a.id < b.id; });
    ordered_json root = ordered_json::array();
    for (const auto& span : spans) {
        ordered_json item;
        item["pos"] = span.id.to_string();
        item["end_line"] = span.end_line;
        root.push_back(std::move(item));
    }
    return root.dump(2) + "\n";
}

}  // namespace callfuse

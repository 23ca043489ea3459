#include "callfuse/fusion.hpp"

#include "callfuse/random.hpp"
#include "callfuse/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <numeric>
#include <set>

namespace callfuse {

using ordered_json = nlohmann::ordered_json;

std::string cell_label(const VennCell& cell)
{
    std::string label;
    for (const auto& tool : cell) {
        if (!label.empty())
            label += '+';
        label += tool;
    }
    return label;
}

HybridCallGraph merge_graphs(const std::vector<std::pair<std::string, HybridCallGraph>>& graphs)
{
    std::set<std::string> seen;
    GraphBuilder builder;
    for (const auto& [tool_id, graph] : graphs) {
        if (tool_id.empty())
            throw Error("merge input needs a non-empty tool id");
        if (!seen.insert(tool_id).second)
            throw Error("tool id '" + tool_id + "' appears more than once in the merge input");
        builder.add_tool(tool_id);
        for (const auto& tool : graph.tool_ids)
            builder.add_tool(tool);
        for (const auto& node : graph.nodes)
            builder.add_node(node);
        for (const auto& edge : graph.edges) {
            CallEdge merged = edge;
            if (merged.found_by.empty())
                merged.found_by = {tool_id};
            merged.confidence = 0.0;
            builder.add_edge(merged);
        }
    }
    return builder.build();
}

std::map<VennCell, std::size_t> cell_populations(const HybridCallGraph& graph)
{
    std::map<VennCell, std::size_t> populations;
    for (const auto& edge : graph.edges)
        ++populations[edge.found_by];
    return populations;
}

double ConfidenceTable::lookup(const VennCell& cell) const
{
    auto it = rates.find(cell);
    return it == rates.end() ? fallback.rate : it->second.rate;
}

namespace {

double ratio(std::int64_t tp, std::int64_t total)
{
    return total > 0 ? static_cast<double>(tp) / static_cast<double>(total) : 0.0;
}

}  // namespace

ConfidenceTable estimate_confidence(const LabeledEdgeSample& sample, const EstimateOptions& options)
{
    if (sample.entries.empty())
        throw Error("cannot estimate confidence from an empty labeled sample");
    if (!(options.prior_strength >= 0.0))
        throw Error("prior strength must be non-negative");

    ConfidenceTable table;
    std::set<EdgeKey> keys;
    for (const auto& entry : sample.entries) {
        const std::string label = entry.key.first.to_string() + " -> " + entry.key.second.to_string();
        if (!entry.valid)
            throw Error("labeled sample entry " + label + " has no label");
        if (entry.cell.empty())
            throw ValidationError("labeled sample entry " + label + " has an empty tool set");
        if (!keys.insert(entry.key).second)
            throw ValidationError("labeled sample lists edge " + label + " more than once");
        CellRate& cell = table.rates[entry.cell];
        ++cell.total;
        ++table.fallback.total;
        if (*entry.valid) {
            ++cell.tp;
            ++table.fallback.tp;
        }
    }
    table.fallback.rate = ratio(table.fallback.tp, table.fallback.total);
    for (auto& [cell, rate] : table.rates) {
        if (options.prior_strength == 0.0) {
            rate.rate = ratio(rate.tp, rate.total);
        } else {
            rate.rate = (static_cast<double>(rate.tp) + options.prior_strength * table.fallback.rate) /
                        (static_cast<double>(rate.total) + options.prior_strength);
        }
    }
    return table;
}

HybridCallGraph assign_confidence(const HybridCallGraph& graph, const ConfidenceTable& table)
{
    HybridCallGraph out = graph;
    for (auto& edge : out.edges)
        edge.confidence = table.lookup(edge.found_by);
    return out;
}

LabeledEdgeSample stratified_sample(const HybridCallGraph& graph, const std::map<VennCell, std::size_t>& quota,
                                    std::uint64_t seed)
{
    std::map<VennCell, std::vector<EdgeKey>> cells;
    for (const auto& edge : graph.edges)
        cells[edge.found_by].push_back(key_of(edge));

    LabeledEdgeSample sample;
    std::uint64_t salt = 0;
    for (const auto& [cell, wanted] : quota) {
        ++salt;
        auto it = cells.find(cell);
        const std::size_t population = it == cells.end() ? 0 : it->second.size();
        if (wanted > population)
            throw Error("quota " + std::to_string(wanted) + " for cell {" + cell_label(cell) +
                        "} exceeds its population " + std::to_string(population));
        if (wanted == 0)
            continue;
        std::vector<EdgeKey> edges = it->second;
        std::sort(edges.begin(), edges.end());
        // Partial Fisher-Yates: the first `wanted` slots become the sample.
        Rng rng(mix_seed(seed, salt));
        for (std::size_t i = 0; i < wanted; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(edges.size() - i));
            std::swap(edges[i], edges[j]);
        }
        edges.resize(wanted);
        std::sort(edges.begin(), edges.end());
        for (auto& key : edges)
            sample.entries.push_back({std::move(key), cell, std::nullopt});
    }
    return sample;
}

std::map<VennCell, std::size_t> proportional_quota(const std::map<VennCell, std::size_t>& populations,
                                                   std::size_t total)
{
    struct Cell {
        const VennCell* cell;
        std::size_t population;
        std::size_t order;
        std::size_t allocated = 0;
    };
    std::vector<Cell> cells;
    std::size_t capacity = 0;
    for (const auto& [cell, population] : populations) {
        if (population == 0)
            continue;
        cells.push_back({&cell, population, cells.size()});
        capacity += population;
    }
    if (total > capacity)
        throw Error("total quota " + std::to_string(total) + " exceeds the " + std::to_string(capacity) +
                    " edges available");

    std::map<VennCell, std::size_t> quota;
    if (total < cells.size()) {
        std::vector<Cell*> order;
        for (auto& c : cells)
            order.push_back(&c);
        std::stable_sort(order.begin(), order.end(),
                         [](const Cell* a, const Cell* b) { return a->population > b->population; });
        for (std::size_t i = 0; i < total; ++i)
            order[i]->allocated = 1;
    } else {
        for (auto& c : cells)
            c.allocated = 1;
        std::size_t remaining = total - cells.size();
        while (remaining > 0) {
            double weight = 0.0;
            for (const auto& c : cells) {
                if (c.allocated < c.population)
                    weight += static_cast<double>(c.population);
            }
            std::vector<std::pair<double, Cell*>> remainders;
            std::size_t handed_out = 0;
            for (auto& c : cells) {
                if (c.allocated >= c.population)
                    continue;
                const double share = static_cast<double>(remaining) * static_cast<double>(c.population) / weight;
                const auto whole = std::min(static_cast<std::size_t>(share), c.population - c.allocated);
                c.allocated += whole;
                handed_out += whole;
                if (c.allocated < c.population)
                    remainders.push_back({share - static_cast<double>(whole), &c});
            }
            remaining -= handed_out;
            std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
                if (a.first != b.first)
                    return a.first > b.first;
                if (a.second->population != b.second->population)
                    return a.second->population > b.second->population;
                return a.second->order < b.second->order;
            });
            for (auto& [fraction, c] : remainders) {
                if (remaining == 0)
                    break;
                ++c->allocated;
                --remaining;
            }
        }
    }
    for (const auto& c : cells)
        quota[*c.cell] = c.allocated;
    return quota;
}

namespace {

std::int64_t count_field(const ordered_json& object, const char* field, const std::string& where)
{
    auto it = object.find(field);
    if (it == object.end() || !it->is_number_integer() || it->get<std::int64_t>() < 0)
        throw ParseError(where + "." + field + " must be a non-negative integer");
    return it->get<std::int64_t>();
}

CellRate cell_rate(const ordered_json& object, const std::string& where)
{
    CellRate rate;
    rate.tp = count_field(object, "tp", where);
    rate.total = count_field(object, "total", where);
    if (rate.total == 0 || rate.tp > rate.total)
        throw ValidationError(where + " needs 0 <= tp <= total and total > 0");
    rate.rate = ratio(rate.tp, rate.total);
    return rate;
}

}  // namespace

ConfidenceTable parse_confidence_table(std::string_view document)
{
    ordered_json root;
    try {
        root = ordered_json::parse(document.begin(), document.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed confidence table: ") + e.what());
    }
    if (!root.is_object() || !root.contains("cells") || !root["cells"].is_array() || !root.contains("fallback") ||
        !root["fallback"].is_object())
        throw ParseError("confidence table needs a 'cells' array and a 'fallback' object");

    ConfidenceTable table;
    const auto& cells = root["cells"];
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const std::string where = "cells[" + std::to_string(i) + "]";
        const auto& item = cells[i];
        if (!item.is_object() || !item.contains("tools") || !item["tools"].is_array())
            throw ParseError(where + " needs a 'tools' array");
        VennCell cell;
        for (const auto& tool : item["tools"]) {
            if (!tool.is_string() || tool.get<std::string>().empty())
                throw ParseError(where + ".tools must contain non-empty strings");
            cell.insert(tool.get<std::string>());
        }
        if (cell.empty())
            throw ValidationError(where + " has an empty tool set");
        if (table.rates.contains(cell))
            throw ValidationError(where + " repeats cell {" + cell_label(cell) + "}");
        table.rates[cell] = cell_rate(item, where);
    }
    table.fallback = cell_rate(root["fallback"], "fallback");
    return table;
}

std::string serialize_confidence_table(const ConfidenceTable& table)
{
    ordered_json root = ordered_json::object();
    root["cells"] = ordered_json::array();
    for (const auto& [cell, rate] : table.rates) {
        ordered_json item;
        item["tools"] = ordered_json(std::vector<std::string>(cell.begin(), cell.end()));
        item["tp"] = rate.tp;
        item["total"] = rate.total;
        root["cells"].push_back(std::move(item));
    }
    root["fallback"] = {{"tp", table.fallback.tp}, {"total", table.fallback.total}};
    return root.dump(2) + "\n";
}

LabeledEdgeSample parse_labeled_sample(std::string_view csv)
{
    const CsvTable table = parse_csv(csv);
    std::size_t columns[4];
    constexpr std::string_view names[] = {"source", "target", "tools", "valid"};
    for (std::size_t i = 0; i < 4; ++i) {
        auto column = table.column(names[i]);
        if (!column)
            throw ParseError("missing column " + std::string(names[i]));
        columns[i] = *column;
    }

    LabeledEdgeSample sample;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = table.row_lines[r];
        auto cell = [&](std::size_t i) { return columns[i] < row.size() ? trim(row[columns[i]]) : std::string_view{}; };
        LabeledEdge entry;
        try {
            entry.key = {SourcePosition::parse(cell(0)), SourcePosition::parse(cell(1))};
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line);
        }
        for (auto tool : split(cell(2), ';')) {
            tool = trim(tool);
            if (!tool.empty())
                entry.cell.insert(std::string(tool));
        }
        if (entry.cell.empty())
            throw ParseError("sample row has no tools", line);
        const auto valid = cell(3);
        if (valid == "1" || valid == "true")
            entry.valid = true;
        else if (valid == "0" || valid == "false")
            entry.valid = false;
        else if (!valid.empty())
            throw ParseError("valid must be 1, 0 or empty, got '" + std::string(valid) + "'", line);
        sample.entries.push_back(std::move(entry));
    }
    return sample;
}

std::string serialize_labeled_sample(const LabeledEdgeSample& sample)
{
    std::string out = csv_line({"source", "target", "tools", "valid"});
    for (const auto& entry : sample.entries) {
        std::string tools;
        for (const auto& tool : entry.cell) {
            if (!tools.empty())
                tools += ';';
            tools += tool;
        }
        out += csv_line({entry.key.first.to_string(), entry.key.second.to_string(), tools,
                         entry.valid ? (*entry.valid ? "1" : "0") : ""});
    }
    return out;
}

}  // namespace callfuse

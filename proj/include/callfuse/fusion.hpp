#pragma once

#include "callfuse/graph.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace callfuse {

/// The exact set of tools that reported an edge.
using VennCell = ToolSet;

/// "A+B" style label, tools in sorted order.
std::string cell_label(const VennCell& cell);

/// Union of the input graphs. Each merged edge's found_by is the union of
/// the contributing edges' found_by sets and its confidence is 0 until
/// assign_confidence runs. Throws Error on a repeated tool id.
HybridCallGraph merge_graphs(const std::vector<std::pair<std::string, HybridCallGraph>>& graphs);

/// Number of distinct edges per Venn cell.
std::map<VennCell, std::size_t> cell_populations(const HybridCallGraph& graph);

struct LabeledEdge {
    EdgeKey key;
    VennCell cell;
    /// Unset until a human labels the edge.
    std::optional<bool> valid;

    bool operator==(const LabeledEdge&) const = default;
};

struct LabeledEdgeSample {
    std::vector<LabeledEdge> entries;

    bool operator==(const LabeledEdgeSample&) const = default;
};

struct CellRate {
    std::int64_t tp = 0;
    std::int64_t total = 0;
    double rate = 0.0;

    bool operator==(const CellRate&) const = default;
};

struct ConfidenceTable {
    std::map<VennCell, CellRate> rates;
    /// Whole-sample counts; used for cells that were never labeled.
    CellRate fallback;

    double fallback_rate() const { return fallback.rate; }
    double lookup(const VennCell& cell) const;

    bool operator==(const ConfidenceTable&) const = default;
};

struct EstimateOptions {
    /// Pseudo-count pulling each cell's rate toward the fallback rate:
    /// (tp + s * fallback) / (total + s). 0 keeps the raw ratio.
    double prior_strength = 0.0;
};

/// Per-cell true-positive rates of a fully labeled sample. Throws Error for
/// an empty sample or an unlabeled entry and ValidationError for repeated
/// edge keys.
ConfidenceTable estimate_confidence(const LabeledEdgeSample& sample, const EstimateOptions& options = {});

/// Copy of `graph` with every edge's confidence set from its cell.
HybridCallGraph assign_confidence(const HybridCallGraph& graph, const ConfidenceTable& table);

/// Unlabeled sample with exactly `quota[cell]` distinct edges per cell,
/// chosen uniformly at random for the seed. Throws Error naming the cell
/// when a quota exceeds its population.
LabeledEdgeSample stratified_sample(const HybridCallGraph& graph, const std::map<VennCell, std::size_t>& quota,
                                    std::uint64_t seed);

/// Splits `total` over the non-empty cells proportionally to population by
/// largest remainder, after giving each cell one edge. Remainder ties go to
/// the larger population, then to the earlier cell. When `total` is below
/// the number of cells, the largest cells get one each.
std::map<VennCell, std::size_t> proportional_quota(const std::map<VennCell, std::size_t>& populations,
                                                   std::size_t total);

/// `{"cells": [{"tools": [...], "tp": n, "total": n}], "fallback": {"tp": n, "total": n}}`
ConfidenceTable parse_confidence_table(std::string_view document);
std::string serialize_confidence_table(const ConfidenceTable& table);

/// CSV `source,target,tools,valid`; tools joined by ';', valid is 1, 0 or empty.
LabeledEdgeSample parse_labeled_sample(std::string_view csv);
std::string serialize_labeled_sample(const LabeledEdgeSample& sample);

}  // namespace callfuse

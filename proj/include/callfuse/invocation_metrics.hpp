#pragma once

#include "callfuse/graph.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace callfuse {

enum class Comparator {
    Strict,     ///< confidence > threshold
    Inclusive,  ///< confidence >= threshold
};

/// "strict" / "inclusive"; throws Error otherwise.
Comparator parse_comparator(std::string_view name);
std::string_view to_string(Comparator comparator);

struct ThresholdConfig {
    double threshold = 0.0;
    Comparator comparator = Comparator::Strict;

    bool passes(double confidence) const
    {
        return comparator == Comparator::Strict ? confidence > threshold : confidence >= threshold;
    }
};

/// One record of the metric document.
struct InvocationCounts {
    SourcePosition id;
    bool entry = false;
    bool final = false;
    std::int64_t hnii = 0;
    std::int64_t hnoi = 0;

    bool operator==(const InvocationCounts&) const = default;
};

/// HNII/HNOI of every node (in node order), counting only edges whose
/// confidence passes the threshold. Throws Error for a threshold outside [0,1].
std::vector<InvocationCounts> count_invocations(const HybridCallGraph& graph, const ThresholdConfig& config);

using ThresholdSweep = std::vector<std::pair<double, std::vector<InvocationCounts>>>;

/// One count_invocations result per threshold. Thresholds must ascend.
ThresholdSweep threshold_sweep(const HybridCallGraph& graph, std::span<const double> thresholds,
                               Comparator comparator = Comparator::Strict);

struct DescriptiveStats {
    double avg = 0.0;
    double median = 0.0;
    /// Population standard deviation.
    double stddev = 0.0;
};

/// Throws Error for an empty list.
DescriptiveStats descriptive_stats(std::span<const double> values);

/// "0_00" style rendering used in artifact names.
std::string threshold_label(double threshold);

/// JSON array of `{"pos", "entry", "final", "hnii", "hnoi"}` records.
std::string serialize_metric_document(const std::vector<InvocationCounts>& counts);
std::vector<InvocationCounts> parse_metric_document(std::string_view document);

}  // namespace callfuse

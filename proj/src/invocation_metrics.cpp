#include "callfuse/invocation_metrics.hpp"

#include "callfuse/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace callfuse {

using ordered_json = nlohmann::ordered_json;

Comparator parse_comparator(std::string_view name)
{
    if (name == "strict" || name == ">")
        return Comparator::Strict;
    if (name == "inclusive" || name == ">=")
        return Comparator::Inclusive;
    throw Error("unknown comparator '" + std::string(name) + "'");
}

std::string_view to_string(Comparator comparator)
{
    return comparator == Comparator::Strict ? "strict" : "inclusive";
}

std::vector<InvocationCounts> count_invocations(const HybridCallGraph& graph, const ThresholdConfig& config)
{
    if (!(config.threshold >= 0.0 && config.threshold <= 1.0))
        throw Error("threshold " + format_double(config.threshold) + " is outside [0,1]");

    std::vector<InvocationCounts> counts;
    counts.reserve(graph.nodes.size());
    std::map<SourcePosition, std::size_t> index;
    for (const auto& node : graph.nodes) {
        index.emplace(node.pos, counts.size());
        counts.push_back({node.pos, node.entry, node.final, 0, 0});
    }
    for (const auto& edge : graph.edges) {
        if (!config.passes(edge.confidence))
            continue;
        auto source = index.find(edge.source);
        auto target = index.find(edge.target);
        if (source == index.end() || target == index.end())
            throw ValidationError("edge " + edge.source.to_string() + " -> " + edge.target.to_string() +
                                  " has an endpoint outside the graph");
        ++counts[source->second].hnoi;
        ++counts[target->second].hnii;
    }
    return counts;
}

ThresholdSweep threshold_sweep(const HybridCallGraph& graph, std::span<const double> thresholds, Comparator comparator)
{
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        throw Error("thresholds must be sorted ascending");
    ThresholdSweep sweep;
    for (double threshold : thresholds)
        sweep.emplace_back(threshold, count_invocations(graph, {threshold, comparator}));
    return sweep;
}

DescriptiveStats descriptive_stats(std::span<const double> values)
{
    if (values.empty())
        throw Error("descriptive statistics need at least one value");

    // Welford's running mean and squared deviation.
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (double x : values) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    const double median = sorted.size() % 2 == 1 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;

    return {mean, median, std::sqrt(m2 / static_cast<double>(n))};
}

std::string threshold_label(double threshold)
{
    std::string text = format_fixed(threshold, 2);
    std::replace(text.begin(), text.end(), '.', '_');
    return text;
}

std::string serialize_metric_document(const std::vector<InvocationCounts>& counts)
{
    ordered_json root = ordered_json::array();
    for (const auto& c : counts) {
        ordered_json item;
        item["pos"] = c.id.to_string();
        item["entry"] = c.entry;
        item["final"] = c.final;
        item["hnii"] = c.hnii;
        item["hnoi"] = c.hnoi;
        root.push_back(std::move(item));
    }
    return root.dump(2) + "\n";
}

std::vector<InvocationCounts> parse_metric_document(std::string_view document)
{
    ordered_json root;
    try {
        root = ordered_json::parse(document.begin(), document.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed metric document: ") + e.what());
    }
    if (!root.is_array())
        throw ParseError("metric document must be a JSON array");

    std::vector<InvocationCounts> counts;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const std::string where = "metrics[" + std::to_string(i) + "]";
        const auto& item = root[i];
        if (!item.is_object() || !item.contains("pos") || !item["pos"].is_string())
            throw ParseError(where + " needs a 'pos' string");
        InvocationCounts c;
        c.id = SourcePosition::parse(item["pos"].get<std::string>());
        c.entry = item.value("entry", false);
        c.final = item.value("final", false);
        for (const char* field : {"hnii", "hnoi"}) {
            if (!item.contains(field) || !item[field].is_number_integer() || item[field].get<std::int64_t>() < 0)
                throw ParseError(where + "." + field + " must be a non-negative integer");
        }
        c.hnii = item["hnii"].get<std::int64_t>();
        c.hnoi = item["hnoi"].get<std::int64_t>();
        counts.push_back(std::move(c));
    }
    return counts;
}

}  // namespace callfuse

#include "callfuse/dataset.hpp"

#include "callfuse/text.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <utility>

namespace callfuse {

std::string_view to_string(FeatureSetVariant variant)
{
    switch (variant) {
    case FeatureSetVariant::S:
        return "S";
    case FeatureSetVariant::H:
        return "H";
    case FeatureSetVariant::SH:
        return "S+H";
    }
    return "?";
}

std::string_view file_suffix(FeatureSetVariant variant)
{
    switch (variant) {
    case FeatureSetVariant::S:
        return "s";
    case FeatureSetVariant::H:
        return "h";
    case FeatureSetVariant::SH:
        return "s+h";
    }
    return "?";
}

FeatureSetVariant parse_variant(std::string_view text)
{
    std::string lower;
    for (char c : trim(text))
        lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "s")
        return FeatureSetVariant::S;
    if (lower == "h")
        return FeatureSetVariant::H;
    if (lower == "s+h" || lower == "sh")
        return FeatureSetVariant::SH;
    throw Error("unknown feature set '" + std::string(text) + "'");
}

std::vector<std::string> feature_columns(FeatureSetVariant variant)
{
    std::vector<std::string> columns;
    for (std::size_t i = 0; i < 8; ++i)
        columns.emplace_back(kStaticMetricColumns[i]);
    if (variant != FeatureSetVariant::H) {
        columns.emplace_back("NII");
        columns.emplace_back("NOI");
    }
    if (variant != FeatureSetVariant::S) {
        columns.emplace_back("HNII");
        columns.emplace_back("HNOI");
    }
    return columns;
}

std::set<SourcePosition> map_patch_to_functions(const Patch& patch, std::span<const FunctionSpan> spans,
                                                std::span<const StaticMetricsRow> rows, Diagnostics* diagnostics)
{
    std::map<std::string, std::vector<const FunctionSpan*>> by_file;
    for (const auto& span : spans)
        by_file[span.id.file].push_back(&span);
    std::set<SourcePosition> known;
    for (const auto& row : rows)
        known.insert(row.id);

    std::set<SourcePosition> matched;
    for (const auto& change : patch.file_changes) {
        const auto file = normalize_path(change.file);
        auto it = by_file.find(file);
        if (it == by_file.end()) {
            report(diagnostics, patch.bug_id + ": no functions known in " + file + ", skipped");
            continue;
        }
        for (const FunctionSpan* span : it->second) {
            const bool overlaps = std::any_of(change.ranges.begin(), change.ranges.end(), [&](const LineRange& r) {
                return r.start <= span->end_line && span->id.line <= r.end;
            });
            if (overlaps && known.contains(span->id))
                matched.insert(span->id);
        }
    }
    return matched;
}

namespace {

FunctionRecord make_record(const StaticMetricsRow& row, const std::map<SourcePosition, const InvocationCounts*>& counts,
                           Label label, const std::string& source)
{
    FunctionRecord record{row, 0, 0, label, source};
    if (auto it = counts.find(row.id); it != counts.end()) {
        record.hnii = it->second->hnii;
        record.hnoi = it->second->hnoi;
    }
    return record;
}

std::map<SourcePosition, const InvocationCounts*> index_counts(const std::vector<InvocationCounts>& counts)
{
    std::map<SourcePosition, const InvocationCounts*> index;
    for (const auto& c : counts)
        index.emplace(c.id, &c);
    return index;
}

}  // namespace

std::vector<FunctionRecord> compose_dataset(std::span<const BugSnapshot> bugs, const ReferenceSnapshot& reference,
                                            Diagnostics* diagnostics)
{
    std::vector<FunctionRecord> records;
    std::set<SourcePosition> seen;
    std::set<std::pair<std::string, std::string>> buggy_names;

    for (const auto& bug : bugs) {
        std::map<SourcePosition, const StaticMetricsRow*> rows;
        for (const auto& row : bug.rows)
            rows.emplace(row.id, &row);
        const auto counts = index_counts(bug.counts);
        for (const auto& id : bug.matched) {
            auto row = rows.find(id);
            if (row == rows.end()) {
                report(diagnostics, bug.bug_id + ": " + id.to_string() + " has no static metrics, dropped");
                continue;
            }
            if (!seen.insert(id).second)
                continue;
            records.push_back(make_record(*row->second, counts, Label::Buggy, bug.bug_id));
            buggy_names.emplace(id.file, row->second->name);
        }
    }

    const auto counts = index_counts(reference.counts);
    for (const auto& row : reference.rows) {
        if (buggy_names.contains({row.id.file, row.name}))
            continue;
        records.push_back(make_record(row, counts, Label::NonBuggy, reference.name));
    }
    return records;
}

FeatureMatrix build_feature_matrix(std::span<const FunctionRecord> records, FeatureSetVariant variant)
{
    if (records.empty())
        throw Error("no records to build a feature matrix from");
    FeatureMatrix out;
    out.columns = feature_columns(variant);
    out.x = ml::Matrix(records.size(), out.columns.size());
    out.y.reserve(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& m = records[r].metrics;
        std::vector<double> values{static_cast<double>(m.loc),  static_cast<double>(m.lloc), static_cast<double>(m.nos),
                                   static_cast<double>(m.mccc), static_cast<double>(m.nl),   m.cd,
                                   static_cast<double>(m.cloc), static_cast<double>(m.dloc)};
        if (variant != FeatureSetVariant::H) {
            values.push_back(static_cast<double>(m.nii));
            values.push_back(static_cast<double>(m.noi));
        }
        if (variant != FeatureSetVariant::S) {
            values.push_back(static_cast<double>(records[r].hnii));
            values.push_back(static_cast<double>(records[r].hnoi));
        }
        std::copy(values.begin(), values.end(), out.x.row(r).begin());
        out.y.push_back(records[r].label == Label::Buggy ? 1 : 0);
    }
    return out;
}

std::string export_feature_matrix(const FeatureMatrix& matrix)
{
    auto header = matrix.columns;
    header.emplace_back("label");
    std::string out = csv_line(header);
    for (std::size_t r = 0; r < matrix.x.rows(); ++r) {
        std::vector<std::string> fields;
        for (double v : matrix.x.row(r))
            fields.push_back(format_double(v));
        fields.push_back(std::to_string(matrix.y[r]));
        out += csv_line(fields);
    }
    return out;
}

std::string export_dataset(std::span<const FunctionRecord> records, FeatureSetVariant variant)
{
    if (records.empty()) {
        auto header = feature_columns(variant);
        header.emplace_back("label");
        return csv_line(header);
    }
    return export_feature_matrix(build_feature_matrix(records, variant));
}

FeatureMatrix import_dataset(std::string_view csv)
{
    const auto table = parse_csv(csv);
    if (table.header.empty() || table.header.back() != "label")
        throw ParseError("dataset must end with a label column", 1);
    FeatureMatrix out;
    out.columns.assign(table.header.begin(), table.header.end() - 1);
    const std::size_t width = out.columns.size();
    out.x = ml::Matrix(0, width);
    std::vector<double> values(width);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto line = table.row_lines[r];
        if (row.size() != width + 1)
            throw ParseError("expected " + std::to_string(width + 1) + " fields", line);
        for (std::size_t c = 0; c < width; ++c) {
            auto v = parse_double(row[c]);
            if (!v)
                throw ParseError("bad value in column " + out.columns[c], line);
            values[c] = *v;
        }
        if (row.back() != "0" && row.back() != "1")
            throw ParseError("label must be 0 or 1", line);
        out.x.push_row(values);
        out.y.push_back(row.back() == "1" ? 1 : 0);
    }
    return out;
}

std::string dataset_file_name(double threshold, FeatureSetVariant variant)
{
    return threshold_label(threshold) + "_" + std::string(file_suffix(variant)) + ".csv";
}

std::string export_record_listing(std::span<const FunctionRecord> records)
{
    std::string out = csv_line({"file", "line", "column", "name", "label", "source"});
    for (const auto& r : records) {
        out += csv_line({r.metrics.id.file, std::to_string(r.metrics.id.line), std::to_string(r.metrics.id.column),
                         r.metrics.name, r.label == Label::Buggy ? "1" : "0", r.source});
    }
    return out;
}

}  // namespace callfuse

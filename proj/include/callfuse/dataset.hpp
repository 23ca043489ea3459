#pragma once

#include "callfuse/error.hpp"
#include "callfuse/graph.hpp"
#include "callfuse/ingest.hpp"
#include "callfuse/invocation_metrics.hpp"
#include "callfuse/ml/matrix.hpp"

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace callfuse {

enum class Label { NonBuggy = 0, Buggy = 1 };

/// One row of the training data: static metrics, hybrid counts and label.
struct FunctionRecord {
    StaticMetricsRow metrics;
    std::int64_t hnii = 0;
    std::int64_t hnoi = 0;
    Label label = Label::NonBuggy;
    /// Snapshot the metrics were taken from: a bug id, or the reference
    /// version name for non-buggy rows.
    std::string source;

    bool operator==(const FunctionRecord&) const = default;
};

enum class FeatureSetVariant { S, H, SH };

inline constexpr FeatureSetVariant kAllVariants[] = {FeatureSetVariant::S, FeatureSetVariant::H, FeatureSetVariant::SH};

/// "S" / "H" / "S+H"
std::string_view to_string(FeatureSetVariant variant);
/// "s" / "h" / "s+h", as used in file names.
std::string_view file_suffix(FeatureSetVariant variant);
/// Accepts either spelling, case-insensitive.
FeatureSetVariant parse_variant(std::string_view text);

/// Column order of each variant:
///   S    LOC,LLOC,NOS,McCC,NL,CD,CLOC,DLOC,NII,NOI
///   H    LOC,LLOC,NOS,McCC,NL,CD,CLOC,DLOC,HNII,HNOI
///   S+H  LOC,LLOC,NOS,McCC,NL,CD,CLOC,DLOC,NII,NOI,HNII,HNOI
std::vector<std::string> feature_columns(FeatureSetVariant variant);

/// Functions of the pre-fix snapshot whose line extent [id.line, end_line]
/// shares a line with a changed range of the same file. Only ids present in
/// `rows` are returned. Patch files without any span are reported and skipped.
std::set<SourcePosition> map_patch_to_functions(const Patch& patch, std::span<const FunctionSpan> spans,
                                                std::span<const StaticMetricsRow> rows,
                                                Diagnostics* diagnostics = nullptr);

struct BugSnapshot {
    std::string bug_id;
    std::set<SourcePosition> matched;
    std::vector<StaticMetricsRow> rows;
    std::vector<InvocationCounts> counts;
};

struct ReferenceSnapshot {
    std::string name = "reference";
    std::vector<StaticMetricsRow> rows;
    std::vector<InvocationCounts> counts;
};

/// Buggy records (bug order, ids ascending within a bug) followed by the
/// non-buggy records (reference row order). A function matched by several
/// bugs keeps the first bug's snapshot. Reference functions whose
/// (file, name) appears among the buggy records are left out. HNII/HNOI join
/// by position; a function absent from the counts has no passing edges and
/// gets zeros. A matched id missing from its bug's rows is reported and dropped.
std::vector<FunctionRecord> compose_dataset(std::span<const BugSnapshot> bugs, const ReferenceSnapshot& reference,
                                            Diagnostics* diagnostics = nullptr);

struct FeatureMatrix {
    ml::Matrix x;
    ml::Labels y;
    std::vector<std::string> columns;

    bool operator==(const FeatureMatrix&) const = default;
};

/// Throws Error for an empty record list.
FeatureMatrix build_feature_matrix(std::span<const FunctionRecord> records, FeatureSetVariant variant);

/// CSV with the variant's columns followed by `label` (1 buggy, 0 non-buggy).
std::string export_dataset(std::span<const FunctionRecord> records, FeatureSetVariant variant);
std::string export_feature_matrix(const FeatureMatrix& matrix);
/// Reads an exported CSV back. The last column must be `label`.
FeatureMatrix import_dataset(std::string_view csv);

/// "<threshold>_<suffix>.csv", e.g. "0_00_s+h.csv".
std::string dataset_file_name(double threshold, FeatureSetVariant variant);

/// Per-record listing `file,line,column,name,label,source` for auditing labels.
std::string export_record_listing(std::span<const FunctionRecord> records);

}  // namespace callfuse

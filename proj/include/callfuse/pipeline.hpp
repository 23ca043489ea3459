#pragma once

#include "callfuse/dataset.hpp"
#include "callfuse/error.hpp"
#include "callfuse/eval.hpp"
#include "callfuse/ingest.hpp"
#include "callfuse/invocation_metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace callfuse {

/// An input file or a prerequisite artifact does not exist.
class MissingInputError : public Error {
public:
    explicit MissingInputError(const std::filesystem::path& path)
        : Error("missing input: " + path.string()), m_path(path)
    {
    }

    const std::filesystem::path& path() const noexcept { return m_path; }

private:
    std::filesystem::path m_path;
};

/// A stage failed for any reason other than a missing input.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error("stage " + stage + " failed: " + message), m_stage(std::move(stage))
    {
    }

    const std::string& stage() const noexcept { return m_stage; }

private:
    std::string m_stage;
};

struct ToolInput {
    std::string id;
    ToolFormat format = ToolFormat::Unified;
    std::filesystem::path path;
};

/// One program snapshot: a bug's pre-fix revision or the reference revision.
struct VersionInput {
    std::string name;
    std::optional<std::filesystem::path> source_dir;  ///< analysed by extract-static
    std::filesystem::path metrics;                    ///< static-metrics CSV
    std::optional<std::filesystem::path> spans;       ///< span document; defaults to the extracted spans
    std::vector<ToolInput> tools;
};

struct BugInput {
    std::string id;
    std::string version;
    std::filesystem::path patch;
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
    std::vector<double> thresholds{0.0, 0.05, 0.2, 0.3};
    Comparator comparator = Comparator::Strict;

    std::vector<VersionInput> versions;
    std::vector<BugInput> bugs;
    std::string reference;

    std::optional<std::filesystem::path> confidence_table;
    std::optional<std::filesystem::path> labeled_sample;
    double prior_strength = 0.0;

    std::optional<double> train_threshold;  ///< defaults to the first threshold
    std::vector<FeatureSetVariant> variants{FeatureSetVariant::S, FeatureSetVariant::H, FeatureSetVariant::SH};
    std::size_t folds = 10;
    double oversample_factor = 1.5;
    std::vector<int> config_ids;  ///< empty = the whole grid
    std::size_t workers = 0;

    ScoreName significance_score = ScoreName::FMeasure;
    ReportOptions report;

    const VersionInput& version(const std::string& name) const;
};

/// Reads the JSON config. Relative input paths resolve against `base_dir`
/// (normally the config file's directory); so does output_dir.
/// Throws ParseError or ValidationError.
PipelineConfig parse_pipeline_config(std::string_view document, const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& file);

inline constexpr std::string_view kStages[] = {"extract-static", "ingest", "fuse", "metrics", "dataset", "train", "report"};

/// Runs one stage (or "all", which runs every stage in order). Artifacts are
/// written below config.output_dir with fixed names. Throws
/// MissingInputError or StageError; diagnostics go to the sink.
void run_stage(std::string_view stage, const PipelineConfig& config, Diagnostics* diagnostics = nullptr);

}  // namespace callfuse

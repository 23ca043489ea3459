#include "callfuse/pipeline.hpp"

#include "callfuse/fusion.hpp"
#include "callfuse/ml/cross_validation.hpp"
#include "callfuse/static_extractor.hpp"
#include "callfuse/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>

namespace callfuse {

namespace fs = std::filesystem;
using nlohmann::json;

const VersionInput& PipelineConfig::version(const std::string& name) const
{
    for (const auto& v : versions)
        if (v.name == name)
            return v;
    throw ValidationError("unknown version '" + name + "'");
}

namespace {

void reject_unknown(const json& object, std::initializer_list<std::string_view> allowed, const std::string& where)
{
    for (const auto& [key, value] : object.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ParseError("unknown key '" + key + "' in " + where);
    }
}

fs::path resolve(const fs::path& base, const std::string& path)
{
    fs::path p(path);
    return p.is_absolute() ? p : (base / p).lexically_normal();
}

void validate_thresholds(const std::vector<double>& thresholds)
{
    if (thresholds.empty())
        throw ValidationError("at least one threshold is required");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] >= 0.0 && thresholds[i] <= 1.0))
            throw ValidationError("threshold " + format_double(thresholds[i]) + " is outside [0,1]");
        if (i > 0 && !(thresholds[i - 1] < thresholds[i]))
            throw ValidationError("thresholds must be strictly ascending");
    }
}

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view document, const fs::path& base_dir)
{
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (!doc.is_object())
        throw ParseError("config must be a JSON object");

    PipelineConfig config;
    try {
        reject_unknown(doc, {"seed", "output_dir", "thresholds", "comparator", "versions", "bugs", "reference", "confidence", "train", "report"},
                       "config");
        config.seed = doc.value("seed", std::uint64_t{0});
        config.output_dir = resolve(base_dir, doc.value("output_dir", std::string("out")));
        if (doc.contains("thresholds"))
            config.thresholds = doc["thresholds"].get<std::vector<double>>();
        if (doc.contains("comparator"))
            config.comparator = parse_comparator(doc["comparator"].get<std::string>());

        for (const auto& [name, v] : doc.at("versions").items()) {
            reject_unknown(v, {"source_dir", "metrics", "spans", "tools"}, "version " + name);
            VersionInput version;
            version.name = name;
            if (v.contains("source_dir"))
                version.source_dir = resolve(base_dir, v["source_dir"].get<std::string>());
            version.metrics = resolve(base_dir, v.at("metrics").get<std::string>());
            if (v.contains("spans"))
                version.spans = resolve(base_dir, v["spans"].get<std::string>());
            for (const auto& t : v.value("tools", json::array())) {
                reject_unknown(t, {"id", "format", "path"}, "tool of version " + name);
                version.tools.push_back({t.at("id").get<std::string>(), parse_tool_format(t.value("format", std::string("unified"))),
                                         resolve(base_dir, t.at("path").get<std::string>())});
            }
            config.versions.push_back(std::move(version));
        }
        for (const auto& b : doc.value("bugs", json::array())) {
            reject_unknown(b, {"id", "version", "patch"}, "bug");
            config.bugs.push_back({b.at("id").get<std::string>(), b.at("version").get<std::string>(),
                                   resolve(base_dir, b.at("patch").get<std::string>())});
        }
        config.reference = doc.at("reference").get<std::string>();

        if (doc.contains("confidence")) {
            const auto& c = doc["confidence"];
            reject_unknown(c, {"table", "labeled_sample", "prior_strength"}, "confidence");
            if (c.contains("table"))
                config.confidence_table = resolve(base_dir, c["table"].get<std::string>());
            if (c.contains("labeled_sample"))
                config.labeled_sample = resolve(base_dir, c["labeled_sample"].get<std::string>());
            config.prior_strength = c.value("prior_strength", 0.0);
        }
        if (doc.contains("train")) {
            const auto& t = doc["train"];
            reject_unknown(t, {"threshold", "variants", "k", "oversample_factor", "configs", "workers"}, "train");
            if (t.contains("threshold"))
                config.train_threshold = t["threshold"].get<double>();
            if (t.contains("variants")) {
                config.variants.clear();
                for (const auto& v : t["variants"])
                    config.variants.push_back(parse_variant(v.get<std::string>()));
            }
            config.folds = t.value("k", config.folds);
            config.oversample_factor = t.value("oversample_factor", config.oversample_factor);
            config.config_ids = t.value("configs", std::vector<int>{});
            config.workers = t.value("workers", config.workers);
        }
        if (doc.contains("report")) {
            const auto& r = doc["report"];
            reject_unknown(r, {"score", "top_k", "rankings"}, "report");
            if (r.contains("score"))
                config.significance_score = parse_score_name(r["score"].get<std::string>());
            config.report.top_k = r.value("top_k", config.report.top_k);
            if (r.contains("rankings")) {
                config.report.rankings.clear();
                for (const auto& s : r["rankings"])
                    config.report.rankings.push_back(parse_score_name(s.get<std::string>()));
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }

    validate_thresholds(config.thresholds);
    std::set<std::string> bug_ids;
    for (const auto& b : config.bugs) {
        config.version(b.version);
        if (!bug_ids.insert(b.id).second)
            throw ValidationError("bug id '" + b.id + "' is repeated");
    }
    config.version(config.reference);
    return config;
}

PipelineConfig load_pipeline_config(const fs::path& file)
{
    if (!fs::exists(file))
        throw MissingInputError(file);
    return parse_pipeline_config(read_file(file.string()), file.parent_path());
}

namespace {

std::string read_input(const fs::path& path)
{
    if (!fs::exists(path))
        throw MissingInputError(path);
    return read_file(path.string());
}

void write_artifact(const fs::path& path, std::string_view contents)
{
    fs::create_directories(path.parent_path());
    write_file(path.string(), contents);
}

void forward(Diagnostics* sink, const std::string& prefix, const std::vector<std::string>& messages)
{
    for (const auto& m : messages)
        report(sink, prefix + m);
}

struct Layout {
    fs::path root;

    fs::path static_graph(const std::string& v) const { return root / "static" / (v + ".json"); }
    fs::path static_spans(const std::string& v) const { return root / "static" / (v + ".spans.json"); }
    fs::path static_unresolved(const std::string& v) const { return root / "static" / (v + ".unresolved.csv"); }
    fs::path tool_graph(const std::string& v, const std::string& tool) const { return root / "ingest" / v / (tool + ".json"); }
    fs::path patch(const std::string& bug) const { return root / "ingest" / "patches" / (bug + ".json"); }
    fs::path confidence() const { return root / "fuse" / "confidence.json"; }
    fs::path hybrid(const std::string& v) const { return root / "fuse" / (v + ".json"); }
    fs::path cells(const std::string& v) const { return root / "fuse" / (v + ".cells.csv"); }
    fs::path metric_doc(const std::string& v, double t) const { return root / "metrics" / v / (threshold_label(t) + ".json"); }
    fs::path metric_summary() const { return root / "metrics" / "summary.csv"; }
    fs::path dataset(double t, FeatureSetVariant variant) const { return root / "dataset" / dataset_file_name(t, variant); }
    fs::path records(double t) const { return root / "dataset" / (threshold_label(t) + "_records.csv"); }
    fs::path results() const { return root / "train" / "results.json"; }
    fs::path report_dir() const { return root / "report"; }
};

std::string serialize_patch(const Patch& patch)
{
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& change : patch.file_changes) {
        nlohmann::ordered_json ranges = nlohmann::ordered_json::array();
        for (const auto& r : change.ranges)
            ranges.push_back({r.start, r.end});
        files.push_back({{"file", change.file}, {"ranges", std::move(ranges)}});
    }
    nlohmann::ordered_json doc;
    doc["bug_id"] = patch.bug_id;
    doc["files"] = std::move(files);
    return doc.dump(2) + "\n";
}

Patch parse_patch_document(std::string_view text)
{
    try {
        const auto doc = json::parse(text);
        Patch patch;
        patch.bug_id = doc.at("bug_id").get<std::string>();
        for (const auto& f : doc.at("files")) {
            FileChange change{f.at("file").get<std::string>(), {}};
            for (const auto& r : f.at("ranges"))
                change.ranges.push_back({r.at(0).get<std::uint32_t>(), r.at(1).get<std::uint32_t>()});
            patch.file_changes.push_back(std::move(change));
        }
        return patch;
    } catch (const json::exception& e) {
        throw ParseError(std::string("patch document: ") + e.what());
    }
}

void stage_extract_static(const PipelineConfig& config, const Layout& out, Diagnostics* diagnostics)
{
    for (const auto& v : config.versions) {
        if (!v.source_dir)
            continue;
        if (!fs::is_directory(*v.source_dir))
            throw MissingInputError(*v.source_dir);
        auto extraction = extract_static_directory(v.source_dir->string());
        forward(diagnostics, v.name + ": ", extraction.diagnostics);
        write_artifact(out.static_graph(v.name), serialize_graph(extraction.graph));
        write_artifact(out.static_spans(v.name), serialize_spans(extraction.spans));
        std::string unresolved = csv_line({"site", "callee", "reason"});
        for (const auto& u : extraction.unresolved)
            unresolved += csv_line({u.site.to_string(), u.callee, std::string(to_string(u.reason))});
        write_artifact(out.static_unresolved(v.name), unresolved);
    }
}

void stage_ingest(const PipelineConfig& config, const Layout& out, Diagnostics* diagnostics)
{
    for (const auto& v : config.versions) {
        for (const auto& tool : v.tools) {
            Diagnostics local;
            auto graph = convert_tool_output({tool.id, tool.format, read_input(tool.path)}, &local);
            forward(diagnostics, v.name + "/" + tool.id + ": ", local.messages);
            write_artifact(out.tool_graph(v.name, tool.id), serialize_graph(graph));
        }
        const auto table = load_static_metrics(read_input(v.metrics));
        for (const auto& r : table.rejected)
            report(diagnostics, v.metrics.string() + ":" + std::to_string(r.line) + ": " + r.reason);
    }
    for (const auto& bug : config.bugs) {
        Diagnostics local;
        const auto patch = parse_patch(read_input(bug.patch), bug.id, &local);
        forward(diagnostics, bug.id + ": ", local.messages);
        write_artifact(out.patch(bug.id), serialize_patch(patch));
    }
}

void stage_fuse(const PipelineConfig& config, const Layout& out, Diagnostics* diagnostics)
{
    ConfidenceTable table;
    if (config.confidence_table) {
        table = parse_confidence_table(read_input(*config.confidence_table));
    } else if (config.labeled_sample) {
        table = estimate_confidence(parse_labeled_sample(read_input(*config.labeled_sample)), {config.prior_strength});
    } else {
        throw Error("neither a confidence table nor a labeled sample is configured");
    }
    write_artifact(out.confidence(), serialize_confidence_table(table));

    for (const auto& v : config.versions) {
        std::vector<std::pair<std::string, HybridCallGraph>> graphs;
        if (v.source_dir)
            graphs.emplace_back(std::string(kStaticToolId), parse_graph_document(read_input(out.static_graph(v.name))));
        for (const auto& tool : v.tools)
            graphs.emplace_back(tool.id, parse_graph_document(read_input(out.tool_graph(v.name, tool.id))));
        if (graphs.empty())
            report(diagnostics, v.name + ": no call-graph inputs, hybrid graph is empty");
        const auto weighted = assign_confidence(merge_graphs(graphs), table);
        write_artifact(out.hybrid(v.name), serialize_graph(weighted));

        std::string cells = csv_line({"cell", "edges", "confidence"});
        for (const auto& [cell, population] : cell_populations(weighted))
            cells += csv_line({cell_label(cell), std::to_string(population), format_double(table.lookup(cell))});
        write_artifact(out.cells(v.name), cells);
    }
}

void stage_metrics(const PipelineConfig& config, const Layout& out, Diagnostics*)
{
    std::string summary = csv_line({"version", "threshold", "metric", "avg", "median", "stddev"});
    for (const auto& v : config.versions) {
        const auto graph = parse_graph_document(read_input(out.hybrid(v.name)));
        for (const auto& [t, counts] : threshold_sweep(graph, config.thresholds, config.comparator)) {
            write_artifact(out.metric_doc(v.name, t), serialize_metric_document(counts));
            if (counts.empty())
                continue;
            std::vector<double> hnii, hnoi;
            for (const auto& c : counts) {
                hnii.push_back(static_cast<double>(c.hnii));
                hnoi.push_back(static_cast<double>(c.hnoi));
            }
            for (const auto& [name, values] : {std::pair{"HNII", &hnii}, std::pair{"HNOI", &hnoi}}) {
                const auto s = descriptive_stats(*values);
                summary += csv_line({v.name, threshold_label(t), name, format_fixed(s.avg, 6), format_fixed(s.median, 6),
                                     format_fixed(s.stddev, 6)});
            }
        }
    }
    write_artifact(out.metric_summary(), summary);
}

void stage_dataset(const PipelineConfig& config, const Layout& out, Diagnostics* diagnostics)
{
    std::map<std::string, std::vector<StaticMetricsRow>> rows;
    auto rows_of = [&](const VersionInput& v) -> const std::vector<StaticMetricsRow>& {
        auto it = rows.find(v.name);
        if (it == rows.end())
            it = rows.emplace(v.name, load_static_metrics(read_input(v.metrics)).rows).first;
        return it->second;
    };

    std::map<std::string, std::set<SourcePosition>> matched;
    for (const auto& bug : config.bugs) {
        const auto& v = config.version(bug.version);
        const auto spans_path = v.spans ? *v.spans : out.static_spans(v.name);
        const auto spans = parse_span_document(read_input(spans_path));
        const auto patch = parse_patch_document(read_input(out.patch(bug.id)));
        matched[bug.id] = map_patch_to_functions(patch, spans, rows_of(v), diagnostics);
    }

    for (double t : config.thresholds) {
        std::vector<BugSnapshot> bugs;
        for (const auto& bug : config.bugs) {
            const auto& v = config.version(bug.version);
            bugs.push_back({bug.id, matched[bug.id], rows_of(v), parse_metric_document(read_input(out.metric_doc(v.name, t)))});
        }
        const auto& ref = config.version(config.reference);
        ReferenceSnapshot reference{ref.name, rows_of(ref), parse_metric_document(read_input(out.metric_doc(ref.name, t)))};
        // Diagnostics repeat per threshold; keep the first pass only.
        const auto records = compose_dataset(bugs, reference, t == config.thresholds.front() ? diagnostics : nullptr);
        for (auto variant : kAllVariants)
            write_artifact(out.dataset(t, variant), export_dataset(records, variant));
        write_artifact(out.records(t), export_record_listing(records));
    }
}

void stage_train(const PipelineConfig& config, const Layout& out, Diagnostics* diagnostics)
{
    const double t = config.train_threshold.value_or(config.thresholds.front());
    std::vector<std::pair<FeatureSetVariant, FeatureMatrix>> data;
    for (auto variant : config.variants)
        data.emplace_back(variant, import_dataset(read_input(out.dataset(t, variant))));

    std::vector<ml::ModelConfig> configs;
    for (const auto& c : ml::enumerate_configs()) {
        if (config.config_ids.empty() ||
            std::find(config.config_ids.begin(), config.config_ids.end(), c.config_id) != config.config_ids.end())
            configs.push_back(c);
    }
    if (configs.empty())
        throw Error("the config filter selects no model configuration");

    ml::CvOptions options;
    options.k = config.folds;
    options.oversample_factor = config.oversample_factor;
    options.seed = config.seed;
    options.workers = config.workers;
    const auto records = ml::run_experiment(configs, data, options, diagnostics);
    write_artifact(out.results(), ml::serialize_results(records));
}

void stage_report(const PipelineConfig& config, const Layout& out, Diagnostics*)
{
    const auto folds = ml::parse_results(read_input(out.results()));
    const auto results = aggregate_folds(folds);
    std::set<FeatureSetVariant> variants;
    for (const auto& r : results)
        variants.insert(r.variant);
    std::vector<PairTest> tests;
    if (variants.size() > 1)
        tests = compare_feature_sets(results, config.significance_score);
    for (const auto& [name, contents] : emit_report(results, tests, config.report))
        write_artifact(out.report_dir() / name, contents);
}

using StageFn = void (*)(const PipelineConfig&, const Layout&, Diagnostics*);

constexpr std::pair<std::string_view, StageFn> kStageTable[] = {
    {"extract-static", stage_extract_static}, {"ingest", stage_ingest},   {"fuse", stage_fuse},
    {"metrics", stage_metrics},               {"dataset", stage_dataset}, {"train", stage_train},
    {"report", stage_report},
};

}  // namespace

void run_stage(std::string_view stage, const PipelineConfig& config, Diagnostics* diagnostics)
{
    if (stage == "all") {
        for (const auto& [name, fn] : kStageTable)
            run_stage(name, config, diagnostics);
        return;
    }
    for (const auto& [name, fn] : kStageTable) {
        if (name != stage)
            continue;
        try {
            validate_thresholds(config.thresholds);
            fn(config, Layout{config.output_dir}, diagnostics);
        } catch (const MissingInputError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(std::string(name), e.what());
        }
        return;
    }
    throw Error("unknown subcommand '" + std::string(stage) + "'");
}

}  // namespace callfuse

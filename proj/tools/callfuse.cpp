// callfuse command-line driver.
//
//   callfuse <subcommand> --config <file> [--out <dir>] [--seed <n>] [--threshold <t>...]
//   callfuse extract-static <dir> --out <graph.json>
//
// Exit status: 0 on success, 2 when an input is missing (the path is
// printed), 1 when a stage fails (the stage is named).

#include "callfuse/pipeline.hpp"
#include "callfuse/static_extractor.hpp"
#include "callfuse/text.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::vector<double> thresholds;
    std::string directory;
};

void print_diagnostics(const callfuse::Diagnostics& diagnostics)
{
    std::vector<std::pair<std::string, std::size_t>> unique;
    for (const auto& m : diagnostics.messages) {
        auto it = std::find_if(unique.begin(), unique.end(), [&](const auto& u) { return u.first == m; });
        if (it == unique.end())
            unique.emplace_back(m, 1);
        else
            ++it->second;
    }
    for (const auto& [m, n] : unique) {
        std::cerr << "warning: " << m;
        if (n > 1)
            std::cerr << " (x" << n << ")";
        std::cerr << "\n";
    }
}

int extract_directory(const Options& options)
{
    if (!fs::is_directory(options.directory)) {
        std::cerr << "callfuse: missing input: " << options.directory << "\n";
        return 2;
    }
    if (options.out.empty()) {
        std::cerr << "callfuse: extract-static <dir> needs --out <graph.json>\n";
        return 1;
    }
    try {
        const auto extraction = callfuse::extract_static_directory(options.directory);
        for (const auto& m : extraction.diagnostics)
            std::cerr << "warning: " << m << "\n";
        const fs::path out(options.out);
        if (out.has_parent_path())
            fs::create_directories(out.parent_path());
        callfuse::write_file(out.string(), callfuse::serialize_graph(extraction.graph));
        std::cerr << extraction.graph.nodes.size() << " functions, " << extraction.graph.edges.size() << " edges, "
                  << extraction.unresolved.size() << " unresolved call sites\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "callfuse: stage extract-static failed: " << e.what() << "\n";
        return 1;
    }
}

int run(const std::string& stage, const Options& options)
{
    if (options.config.empty()) {
        std::cerr << "callfuse: " << stage << " needs --config <file>\n";
        return 1;
    }
    callfuse::Diagnostics diagnostics;
    try {
        auto config = callfuse::load_pipeline_config(options.config);
        if (!options.out.empty())
            config.output_dir = options.out;
        if (options.seed)
            config.seed = *options.seed;
        if (!options.thresholds.empty())
            config.thresholds = options.thresholds;
        callfuse::run_stage(stage, config, &diagnostics);
    } catch (const callfuse::MissingInputError& e) {
        print_diagnostics(diagnostics);
        std::cerr << "callfuse: missing input: " << e.path().string() << "\n";
        return 2;
    } catch (const callfuse::StageError& e) {
        print_diagnostics(diagnostics);
        std::cerr << "callfuse: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        print_diagnostics(diagnostics);
        std::cerr << "callfuse: stage config failed: " << e.what() << "\n";
        return 1;
    }
    print_diagnostics(diagnostics);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hybrid call-graph fusion and bug-prediction toolkit"};
    app.require_subcommand(1);
    Options options;

    const std::pair<const char*, const char*> commands[] = {
        {"extract-static", "Build static call graphs of the configured source trees"},
        {"ingest", "Convert tool outputs and patches to the common formats"},
        {"fuse", "Merge call graphs and assign per-cell confidence"},
        {"metrics", "Count HNII/HNOI for every threshold"},
        {"dataset", "Label functions and write the S, H and S+H datasets"},
        {"train", "Cross-validate the model grid on every feature set"},
        {"report", "Rank models and run the signed-rank tests"},
        {"all", "Run every stage in order"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", options.config, "Pipeline config (JSON)");
        sub->add_option("--out", options.out, "Output directory (or graph file for extract-static <dir>)");
        sub->add_option("--seed", options.seed, "Override the configured seed");
        sub->add_option("--threshold", options.thresholds, "Override the threshold list");
        if (std::string_view(name) == "extract-static")
            sub->add_option("dir", options.directory, "Source directory to analyse directly");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    auto* chosen = app.get_subcommands().front();
    const std::string stage = chosen->get_name();
    if (stage == "extract-static" && !options.directory.empty())
        return extract_directory(options);
    return run(stage, options);
}

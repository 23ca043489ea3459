#include "callfuse/eval.hpp"
#include "callfuse/fusion.hpp"
#include "callfuse/invocation_metrics.hpp"
#include "callfuse/ml/models.hpp"
#include "callfuse/pipeline.hpp"
#include "callfuse/static_extractor.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace callfuse;

namespace {

py::dict counts_to_dict(const InvocationCounts& c)
{
    py::dict d;
    d["pos"] = c.id.to_string();
    d["entry"] = c.entry;
    d["final"] = c.final;
    d["hnii"] = c.hnii;
    d["hnoi"] = c.hnoi;
    return d;
}

}  // namespace

PYBIND11_MODULE(_callfuse, m)
{
    m.doc() = "Hybrid call-graph fusion and bug-prediction toolkit";

    py::register_exception<Error>(m, "CallfuseError", PyExc_ValueError);
    py::register_exception<StageError>(m, "StageError", PyExc_RuntimeError);
    py::register_exception<MissingInputError>(m, "MissingInputError", PyExc_FileNotFoundError);

    m.def("f_measure", &f_measure, py::arg("precision"), py::arg("recall"));

    m.def(
        "wilcoxon",
        [](const std::vector<double>& x, const std::vector<double>& y, const std::string& zero_method) {
            WilcoxonOptions options;
            if (zero_method == "pratt")
                options.zero_method = ZeroMethod::Pratt;
            else if (zero_method != "wilcox")
                throw Error("zero_method must be 'wilcox' or 'pratt'");
            const auto r = wilcoxon_signed_rank(x, y, options);
            py::dict d;
            d["T"] = r.T;
            d["p_value"] = r.p_value;
            d["n_effective"] = r.n_effective;
            d["method"] = std::string(to_string(r.method));
            return d;
        },
        py::arg("x"), py::arg("y"), py::arg("zero_method") = "wilcox",
        "Two-sided Wilcoxon signed-rank test of x - y.");

    m.def(
        "extract_static",
        [](const std::string& root) {
            const auto extraction = extract_static_directory(root);
            return py::make_tuple(serialize_graph(extraction.graph), serialize_spans(extraction.spans),
                                  extraction.diagnostics);
        },
        py::arg("root"), "Static call graph of a JS tree: (graph_json, spans_json, diagnostics).");

    m.def(
        "merge_graphs",
        [](const std::vector<std::pair<std::string, std::string>>& documents) {
            std::vector<std::pair<std::string, HybridCallGraph>> graphs;
            for (const auto& [tool, doc] : documents)
                graphs.emplace_back(tool, parse_graph_document(doc));
            return serialize_graph(merge_graphs(graphs));
        },
        py::arg("documents"), "Merges (tool_id, graph_json) pairs into one graph document.");

    m.def(
        "count_invocations",
        [](const std::string& graph_json, double threshold, const std::string& comparator) {
            const auto counts =
                count_invocations(parse_graph_document(graph_json), {threshold, parse_comparator(comparator)});
            py::list out;
            for (const auto& c : counts)
                out.append(counts_to_dict(c));
            return out;
        },
        py::arg("graph_json"), py::arg("threshold") = 0.0, py::arg("comparator") = ">");

    m.def("enumerate_configs", [] {
        py::list out;
        for (const auto& c : ml::enumerate_configs())
            out.append(py::make_tuple(c.config_id, std::string(ml::to_string(c.algorithm)), c.describe()));
        return out;
    });

    m.def(
        "run_stage",
        [](const std::string& stage, const std::string& config_path, std::optional<std::string> out,
           std::optional<std::uint64_t> seed, std::optional<std::vector<double>> thresholds) {
            auto config = load_pipeline_config(config_path);
            if (out)
                config.output_dir = *out;
            if (seed)
                config.seed = *seed;
            if (thresholds)
                config.thresholds = *thresholds;
            Diagnostics diagnostics;
            {
                py::gil_scoped_release release;
                run_stage(stage, config, &diagnostics);
            }
            return diagnostics.messages;
        },
        py::arg("stage"), py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(),
        py::arg("thresholds") = py::none(), "Runs one pipeline stage (or 'all'); returns the diagnostics.");
}

#include <doctest.h>

#include "callfuse/graph.hpp"
#include "callfuse/text.hpp"

#include <algorithm>

using namespace callfuse;

namespace {

const std::string kFixtures = CALLFUSE_FIXTURE_DIR;

const char* kTwoNodes = R"({
  "nodes": [
    {"pos": "a.js:1:1", "entry": false, "final": false},
    {"pos": "a.js:5:1", "entry": false, "final": false, "name": "g"}
  ],
  "edges": [
    {"source": "a.js:1:1", "target": "a.js:5:1", "found_by": ["static-ast"], "confidence": 0.5}
  ]
})";

bool has_kind(const std::vector<GraphViolation>& violations, GraphViolation::Kind kind)
{
    return std::any_of(violations.begin(), violations.end(), [&](const auto& v) { return v.kind == kind; });
}

}  // namespace

TEST_CASE("source positions")
{
    auto pos = SourcePosition::parse("eslint/lib/ast-utils.js:169:25");
    CHECK(pos.file == "eslint/lib/ast-utils.js");
    CHECK(pos.line == 169);
    CHECK(pos.column == 25);
    CHECK(pos.to_string() == "eslint/lib/ast-utils.js:169:25");
    CHECK(SourcePosition::parse("C:\\src\\a.js:3:4").file == "C:/src/a.js");
    CHECK(SourcePosition::parse("./x//y.js:1:2").file == "x/y.js");
    CHECK_THROWS_AS(SourcePosition::parse("a.js:0:1"), ParseError);
    CHECK_THROWS_AS(SourcePosition::parse("a.js:1"), ParseError);
    CHECK_THROWS_AS(SourcePosition::parse("a.js:x:1"), ParseError);
    CHECK_THROWS_AS(SourcePosition::parse(":1:1"), ParseError);
}

TEST_CASE("parse a two-node document")
{
    auto graph = parse_graph_document(kTwoNodes);
    CHECK(graph.nodes.size() == 2);
    REQUIRE(graph.edges.size() == 1);
    CHECK(graph.edges[0].confidence == 0.5);
    CHECK(graph.edges[0].found_by == ToolSet{"static-ast"});
    CHECK(graph.tool_ids == ToolSet{"static-ast"});
    CHECK(graph.nodes[1].name == "g");
}

TEST_CASE("dangling endpoint is a validation error naming it")
{
    const char* doc = R"({"nodes": [{"pos": "a.js:1:1"}],
        "edges": [{"source": "a.js:1:1", "target": "b.js:2:2", "found_by": ["t"], "confidence": 1}]})";
    try {
        parse_graph_document(doc);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("b.js:2:2") != std::string::npos);
    }
}

TEST_CASE("malformed JSON reports a line and column")
{
    try {
        parse_graph_document("{\n  \"nodes\": [,\n}");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() > 0);
    }
    CHECK_THROWS_AS(parse_graph_document(R"({"nodes": []})"), ParseError);
    CHECK_THROWS_AS(parse_graph_document(R"([])"), ParseError);
}

TEST_CASE("unknown fields are ignored with a warning")
{
    Diagnostics diagnostics;
    auto graph = parse_graph_document(R"({"nodes": [{"pos": "a.js:1:1", "weight": 3}], "edges": [], "meta": {}})",
                                      &diagnostics);
    CHECK(graph.nodes.size() == 1);
    CHECK(diagnostics.size() == 2);
}

TEST_CASE("empty graph serializes to empty arrays")
{
    CHECK(serialize_graph(HybridCallGraph{}) == "{\n  \"nodes\": [],\n  \"edges\": []\n}\n");
}

TEST_CASE("round trip preserves structure and bytes")
{
    auto graph = parse_graph_document(kTwoNodes);
    const auto text = serialize_graph(graph);
    auto again = parse_graph_document(text);
    CHECK(again == graph);
    CHECK(again.edges.size() == graph.edges.size());
    CHECK(serialize_graph(again) == text);
}

TEST_CASE("fixture graph serializes to the frozen golden file")
{
    const auto input = read_file(kFixtures + "/graph/graph12.json");
    const auto golden = read_file(kFixtures + "/graph/graph12.golden.json");
    Diagnostics diagnostics;
    auto graph = parse_graph_document(input, &diagnostics);
    CHECK(graph.nodes.size() == 12);
    CHECK(graph.edges.size() == 10);
    CHECK(graph.tool_ids == ToolSet{"dynamic-trace", "pairs", "static-ast"});
    CHECK(diagnostics.size() == 1);
    CHECK(validate_graph(graph).empty());
    CHECK(serialize_graph(graph) == golden);
    CHECK(parse_graph_document(golden) == graph);
}

TEST_CASE("validation names each violation")
{
    auto graph = parse_graph_document(kTwoNodes);
    CHECK(validate_graph(graph).empty());

    auto bad = graph;
    bad.edges[0].confidence = 1.5;
    auto violations = validate_graph(bad);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].kind == GraphViolation::Kind::ConfidenceOutOfRange);
    CHECK(violations[0].message.find("a.js:1:1 -> a.js:5:1") != std::string::npos);

    auto duplicate = graph;
    duplicate.edges.push_back(duplicate.edges[0]);
    violations = validate_graph(duplicate);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].kind == GraphViolation::Kind::DuplicateEdge);

    auto other = graph;
    other.edges[0].found_by.clear();
    other.nodes.push_back(other.nodes[0]);
    other.edges.push_back({{"a.js", 9, 9}, {"a.js", 1, 1}, {"ghost"}, 0.1});
    violations = validate_graph(other);
    CHECK(has_kind(violations, GraphViolation::Kind::EmptyFoundBy));
    CHECK(has_kind(violations, GraphViolation::Kind::DuplicateNode));
    CHECK(has_kind(violations, GraphViolation::Kind::DanglingEndpoint));
    CHECK(has_kind(violations, GraphViolation::Kind::UnknownTool));
}

TEST_CASE("builder collapses duplicates")
{
    GraphBuilder builder;
    builder.add_node({{"b.js", 1, 1}, false, false, "z"});
    builder.add_node({{"a.js", 1, 1}, false, false, std::nullopt});
    builder.add_node({{"b.js", 1, 1}, true, false, "y"});
    builder.add_edge({{"b.js", 1, 1}, {"a.js", 1, 1}, {"A"}, 0.2});
    builder.add_edge({{"b.js", 1, 1}, {"a.js", 1, 1}, {"B"}, 0.7});
    auto graph = builder.build();
    REQUIRE(graph.nodes.size() == 2);
    CHECK(graph.nodes[0].pos.file == "a.js");
    CHECK(graph.nodes[1].entry);
    CHECK(graph.nodes[1].name == "y");
    REQUIRE(graph.edges.size() == 1);
    CHECK(graph.edges[0].found_by == ToolSet{"A", "B"});
    CHECK(graph.edges[0].confidence == 0.7);
    CHECK(graph.tool_ids == ToolSet{"A", "B"});
}

TEST_CASE("span documents round-trip")
{
    std::vector<FunctionSpan> spans{{{"b.js", 3, 1}, 9}, {{"a.js", 1, 1}, 4}};
    const auto text = serialize_spans(spans);
    auto parsed = parse_span_document(text);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0] == spans[1]);
    CHECK(parsed[1] == spans[0]);
    CHECK_THROWS_AS(parse_span_document(R"([{"pos": "a.js:5:1", "end_line": 2}])"), ParseError);
}

#include <doctest.h>

#include "callfuse/random.hpp"
#include "callfuse/static_extractor.hpp"

#include <algorithm>
#include <map>
#include <set>

using namespace callfuse;

namespace {

StaticExtraction extract(std::initializer_list<std::pair<const char*, const char*>> files)
{
    std::vector<js::JsSubsetAst> asts;
    for (const auto& [name, source] : files)
        asts.push_back(js::parse_js_subset(source, name));
    return extract_call_graph(asts);
}

std::set<std::pair<std::string, std::string>> edge_names(const StaticExtraction& result)
{
    std::map<SourcePosition, std::string> names;
    for (const auto& node : result.graph.nodes)
        names[node.pos] = node.name.value_or(node.pos.to_string());
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& edge : result.graph.edges)
        out.insert({names[edge.source], names[edge.target]});
    return out;
}

using NamePair = std::pair<std::string, std::string>;

}  // namespace

TEST_CASE("direct call between declarations")
{
    auto result = extract({{"a.js", "function f(){g()} function g(){}"}});
    CHECK(edge_names(result) == std::set<NamePair>{{"f", "g"}});
    REQUIRE(result.graph.edges.size() == 1);
    CHECK(result.graph.edges[0].found_by == ToolSet{"static-ast"});
    CHECK(result.graph.edges[0].confidence == 1.0);
    CHECK(result.unresolved.empty());
}

TEST_CASE("field-based resolution links every function stored under the property")
{
    auto result = extract({{"a.js",
                            "const o = {m: function () {}};\n"
                            "function f() { o.m(); }\n"
                            "const p = {};\n"
                            "p.m = function h() {};\n"}});
    const auto* o_m = result.graph.find_node({"a.js", 1, 15});
    const auto* h = result.graph.find_node({"a.js", 4, 7});
    const auto* f = result.graph.find_node({"a.js", 2, 1});
    REQUIRE(o_m);
    REQUIRE(h);
    REQUIRE(f);
    std::set<EdgeKey> keys;
    for (const auto& edge : result.graph.edges)
        keys.insert(key_of(edge));
    CHECK(keys == std::set<EdgeKey>{{f->pos, o_m->pos}, {f->pos, h->pos}});
}

TEST_CASE("adding a property function never removes edges")
{
    auto before = extract({{"a.js", "var o = {m: function () {}}; function f() { o.m(); x.m(); }"}});
    auto after = extract({{"a.js", "var o = {m: function () {}}; function f() { o.m(); x.m(); }"},
                          {"b.js", "module.exports = {m() {}};"}});
    for (const auto& edge : before.graph.edges) {
        CHECK(std::any_of(after.graph.edges.begin(), after.graph.edges.end(),
                          [&](const CallEdge& e) { return key_of(e) == key_of(edge); }));
    }
    CHECK(after.graph.edges.size() > before.graph.edges.size());
}

TEST_CASE("eval-like sites are unresolved")
{
    auto result = extract({{"a.js", "function f(){eval(\"g()\")} function g(){}"}});
    CHECK(result.graph.edges.empty());
    REQUIRE(result.unresolved.size() == 1);
    CHECK(result.unresolved[0].reason == UnresolvedReason::EvalLike);
    CHECK(result.unresolved[0].callee == "eval");

    auto more = extract({{"a.js", "function f(){ g.apply(null, []); g.call(null); g.bind(null)(); new Function('x'); }"
                                  "function g(){}"}});
    int eval_like = 0;
    for (const auto& u : more.unresolved)
        eval_like += u.reason == UnresolvedReason::EvalLike ? 1 : 0;
    CHECK(eval_like == 4);
}

TEST_CASE("unknown names and dynamic dispatch")
{
    auto result = extract({{"a.js",
                            "function f(cb, o) {\n"
                            "  cb();\n"
                            "  o[k]();\n"
                            "  missing();\n"
                            "  console.log(1);\n"
                            "  f()();\n"
                            "}\n"}});
    std::map<std::string, UnresolvedReason> reasons;
    for (const auto& u : result.unresolved)
        reasons[u.callee] = u.reason;
    CHECK(reasons.at("cb") == UnresolvedReason::DynamicDispatch);
    CHECK(reasons.at("o[...]") == UnresolvedReason::DynamicDispatch);
    CHECK(reasons.at("missing") == UnresolvedReason::UnknownName);
    CHECK(reasons.at("console.log") == UnresolvedReason::UnknownName);
    CHECK(reasons.at("f(...)") == UnresolvedReason::DynamicDispatch);
    CHECK(edge_names(result) == std::set<NamePair>{{"f", "f"}});
}

TEST_CASE("every call site is one edge set or one unresolved record")
{
    auto result = extract({{"a.js",
                            "var o = {run() { helper(); }};\n"
                            "function helper() { o.run(); eval('1'); unknown(); }\n"
                            "helper();\n"
                            "(function () { helper(); })();\n"}});
    std::size_t unresolved_sites = 0;
    for (const auto& site : result.sites) {
        CHECK(site.targets.empty() == site.unresolved.has_value());
        unresolved_sites += site.unresolved ? 1 : 0;
    }
    CHECK(unresolved_sites == result.unresolved.size());
    CHECK(result.sites.size() == 7);
}

TEST_CASE("top-level calls come from a synthetic entry node past the last line")
{
    auto result = extract({{"a.js", "function g() {}\ng();\n"}});
    REQUIRE(result.graph.edges.size() == 1);
    const auto& source = result.graph.edges[0].source;
    CHECK(source == SourcePosition{"a.js", 3, 1});
    const auto* node = result.graph.find_node(source);
    REQUIRE(node);
    CHECK(node->entry);
    CHECK(node->name == "<toplevel>");
}

TEST_CASE("innermost scope wins")
{
    auto result = extract({{"a.js",
                            "function g() {}\n"
                            "function f() {\n"
                            "  function g() {}\n"
                            "  g();\n"
                            "}\n"}});
    REQUIRE(result.graph.edges.size() == 1);
    CHECK(result.graph.edges[0].source == SourcePosition{"a.js", 2, 1});
    CHECK(result.graph.edges[0].target == SourcePosition{"a.js", 3, 3});
}

TEST_CASE("assigned and aliased functions resolve")
{
    auto result = extract({{"a.js",
                            "var handler = null;\n"
                            "handler = function () {};\n"
                            "const alias = handler;\n"
                            "function f() { handler(); alias(); }\n"
                            "const loop = function self() { self(); };\n"}});
    auto names = edge_names(result);
    CHECK(names.count({"f", "handler"}) == 1);
    CHECK(names.count({"self", "self"}) == 1);
    CHECK(result.unresolved.empty());
}

TEST_CASE("spans cover function bodies")
{
    auto result = extract({{"a.js", "function f() {\n  return 1;\n}\nconst g = () =>\n  2;\n"}});
    REQUIRE(result.spans.size() == 2);
    CHECK(result.spans[0] == FunctionSpan{{"a.js", 1, 1}, 3});
    CHECK(result.spans[1] == FunctionSpan{{"a.js", 4, 11}, 5});
}

namespace {

// Random nested programs with unique names and direct calls only. The
// oracle resolves each call by walking the generator's own scope tree.
struct GenFunction {
    std::string name;
    int parent = -1;
    SourcePosition pos;
    std::vector<int> children;
    std::vector<std::string> calls;
};

struct GenProgram {
    std::string source;
    std::vector<GenFunction> functions;
    std::vector<std::string> top_calls;
    std::vector<int> top_functions;
    std::uint32_t lines = 0;
};

void emit_line(GenProgram& program, const std::string& text)
{
    program.source += text + "\n";
    ++program.lines;
}

void generate(GenProgram& program, Rng& rng, int parent, int depth, int& counter)
{
    const int count = 1 + static_cast<int>(rng.below(depth == 0 ? 4 : 3));
    const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    for (int i = 0; i < count; ++i) {
        GenFunction fn;
        fn.name = "fn" + std::to_string(counter++);
        fn.parent = parent;
        fn.pos = {"gen.js", program.lines + 1, static_cast<std::uint32_t>(indent.size() + 1)};
        const int index = static_cast<int>(program.functions.size());
        program.functions.push_back(fn);
        if (parent >= 0)
            program.functions[static_cast<std::size_t>(parent)].children.push_back(index);
        else
            program.top_functions.push_back(index);

        emit_line(program, indent + "function " + fn.name + "(a) {");
        if (depth < 2 && rng.below(2) == 0)
            generate(program, rng, index, depth + 1, counter);
        const int calls = static_cast<int>(rng.below(4));
        for (int c = 0; c < calls; ++c) {
            const std::string callee = "fn" + std::to_string(rng.below(static_cast<std::uint64_t>(counter + 3)));
            program.functions[static_cast<std::size_t>(index)].calls.push_back(callee);
            emit_line(program, indent + "  " + callee + "(a);");
        }
        emit_line(program, indent + "}");
    }
    if (depth == 0) {
        for (int c = 0; c < 3; ++c) {
            const std::string callee = "fn" + std::to_string(rng.below(static_cast<std::uint64_t>(counter + 2)));
            program.top_calls.push_back(callee);
            emit_line(program, callee + "();");
        }
    }
}

std::optional<SourcePosition> oracle_resolve(const GenProgram& program, int scope, const std::string& name)
{
    while (true) {
        const auto& declared =
            scope < 0 ? program.top_functions : program.functions[static_cast<std::size_t>(scope)].children;
        for (int d : declared) {
            if (program.functions[static_cast<std::size_t>(d)].name == name)
                return program.functions[static_cast<std::size_t>(d)].pos;
        }
        if (scope < 0)
            return std::nullopt;
        scope = program.functions[static_cast<std::size_t>(scope)].parent;
    }
}

}  // namespace

TEST_CASE("lexical resolution equals a name-table walk on random programs")
{
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        Rng rng(seed);
        GenProgram program;
        int counter = 0;
        generate(program, rng, -1, 0, counter);

        std::set<EdgeKey> expected;
        std::size_t expected_unresolved = 0;
        const SourcePosition top{"gen.js", program.lines + 1, 1};
        for (std::size_t f = 0; f < program.functions.size(); ++f) {
            for (const auto& call : program.functions[f].calls) {
                if (auto target = oracle_resolve(program, static_cast<int>(f), call))
                    expected.insert({program.functions[f].pos, *target});
                else
                    ++expected_unresolved;
            }
        }
        for (const auto& call : program.top_calls) {
            if (auto target = oracle_resolve(program, -1, call))
                expected.insert({top, *target});
            else
                ++expected_unresolved;
        }

        std::vector<js::JsSubsetAst> asts;
        asts.push_back(js::parse_js_subset(program.source, "gen.js"));
        REQUIRE(asts[0].functions.size() == program.functions.size());
        auto result = extract_call_graph(asts);
        std::set<EdgeKey> actual;
        for (const auto& edge : result.graph.edges)
            actual.insert(key_of(edge));
        CHECK_MESSAGE(actual == expected, "seed " << seed);
        CHECK(result.unresolved.size() == expected_unresolved);
    }
}

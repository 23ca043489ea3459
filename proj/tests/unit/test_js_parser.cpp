#include <doctest.h>

#include "callfuse/error.hpp"
#include "callfuse/js_ast.hpp"

using namespace callfuse;
using namespace callfuse::js;

namespace {

int count_kind(const Node& node, NodeKind kind)
{
    int n = node.kind == kind ? 1 : 0;
    for (const auto& child : node.children)
        n += count_kind(*child, kind);
    return n;
}

}  // namespace

TEST_CASE("function declaration at 1:1")
{
    auto ast = parse_js_subset("function f(){}", "a.js");
    REQUIRE(ast.functions.size() == 1);
    CHECK(ast.functions[0].id == SourcePosition{"a.js", 1, 1});
    CHECK(ast.functions[0].name == "f");
    CHECK_FALSE(ast.functions[0].name_inferred);
    CHECK(ast.functions[0].kind == FunctionKind::Declaration);
    CHECK(ast.diagnostics.empty());
}

TEST_CASE("arrow bound to a const takes the binding name")
{
    auto ast = parse_js_subset("const g = () => {};", "a.js");
    REQUIRE(ast.functions.size() == 1);
    const auto& g = ast.functions[0];
    CHECK(g.kind == FunctionKind::Arrow);
    CHECK(g.name == "g");
    CHECK(g.name_inferred);
    CHECK(g.id == SourcePosition{"a.js", 1, 11});
}

TEST_CASE("single-parameter arrow starts at the parameter")
{
    auto ast = parse_js_subset("let h = x => x + 1;\n", "a.js");
    REQUIRE(ast.functions.size() == 1);
    CHECK(ast.functions[0].id.column == 9);
    CHECK(ast.functions[0].params == std::vector<std::string>{"x"});
    CHECK(ast.line_count == 1);
}

TEST_CASE("class declaration is skipped with one diagnostic")
{
    auto ast = parse_js_subset("class A { m() { return 1; } }\nfunction f() {}\n", "a.js");
    REQUIRE(ast.functions.size() == 1);
    CHECK(ast.functions[0].name == "f");
    CHECK(ast.diagnostics.size() == 1);
    CHECK(ast.diagnostics[0].find("a.js:1:1") == 0);
}

TEST_CASE("unbalanced braces raise a positioned parse error")
{
    try {
        parse_js_subset("function f() {\n  if (x) {\n}\n", "a.js");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
        CHECK(e.column() == 14);
    }
    CHECK_THROWS_AS(parse_js_subset("f(]", "a.js"), ParseError);
    CHECK_THROWS_AS(parse_js_subset("}", "a.js"), ParseError);
}

TEST_CASE("unterminated literals raise parse errors")
{
    CHECK_THROWS_AS(parse_js_subset("var s = 'abc\n';", "a.js"), ParseError);
    CHECK_THROWS_AS(parse_js_subset("/* open", "a.js"), ParseError);
    CHECK_THROWS_AS(parse_js_subset("var t = `abc", "a.js"), ParseError);
}

TEST_CASE("columns count code points, not bytes")
{
    auto ast = parse_js_subset("var s = \"\xc3\xa9\xc3\xa9\"; function f() {}", "a.js");
    REQUIRE(ast.functions.size() == 1);
    CHECK(ast.functions[0].id.column == 15);
}

TEST_CASE("object literal methods and property functions")
{
    const char* source =
        "var o = {\n"
        "  m: function () {},\n"
        "  n() {},\n"
        "  p: () => 1,\n"
        "  get q() { return 1; },\n"
        "};\n";
    auto ast = parse_js_subset(source, "o.js");
    REQUIRE(ast.functions.size() == 4);
    CHECK(ast.functions[0].id == SourcePosition{"o.js", 2, 6});
    CHECK(ast.functions[0].name == "m");
    CHECK(ast.functions[1].kind == FunctionKind::Method);
    CHECK(ast.functions[1].id == SourcePosition{"o.js", 3, 3});
    CHECK(ast.functions[2].name == "p");
    CHECK(ast.functions[3].name == "q");
    CHECK(ast.diagnostics.empty());
}

TEST_CASE("nesting records parents and end lines")
{
    const char* source =
        "function outer(a, b = 2) {\n"
        "  function inner() {\n"
        "    return () => a;\n"
        "  }\n"
        "  return inner;\n"
        "}\n";
    auto ast = parse_js_subset(source, "n.js");
    REQUIRE(ast.functions.size() == 3);
    CHECK(ast.functions[0].parent == -1);
    CHECK(ast.functions[0].end_line == 6);
    CHECK(ast.functions[0].params == std::vector<std::string>{"a", "b"});
    CHECK(ast.functions[1].parent == 0);
    CHECK(ast.functions[1].end_line == 4);
    CHECK(ast.functions[2].parent == 1);
    CHECK(ast.functions[2].end_line == 3);
}

TEST_CASE("control flow is transparent")
{
    const char* source =
        "for (let i = 0; i < n; i++) { if (i % 2) { a(); } else b(); }\n"
        "while (c()) { d(); }\n"
        "do { e(); } while (f());\n"
        "try { g(); } catch (err) { h(); } finally { k(); }\n"
        "switch (x) { case 1: l(); break; default: m(); }\n"
        "for (const y of ys) n(y);\n"
        "label: for (;;) { break label; }\n";
    auto ast = parse_js_subset(source, "c.js");
    CHECK(ast.diagnostics.empty());
    CHECK(count_kind(*ast.program, NodeKind::Call) == 12);
}

TEST_CASE("regex, division and templates are told apart")
{
    const char* source =
        "var r = /a\\/b[/]/g.test(s);\n"
        "var q = total / count / 2;\n"
        "var t = `x ${f(`y ${g()}`)} z`;\n"
        "var u = tag`plain`;\n";
    auto ast = parse_js_subset(source, "r.js");
    CHECK(ast.diagnostics.empty());
    CHECK(count_kind(*ast.program, NodeKind::Call) == 4);
}

TEST_CASE("unsupported statements are skipped and parsing resumes")
{
    const char* source =
        "import x from 'y';\n"
        "with (o) { p(); }\n"
        "var a = ;\n"
        "function f() { g(); }\n";
    auto ast = parse_js_subset(source, "s.js");
    CHECK(ast.diagnostics.size() == 3);
    REQUIRE(ast.functions.size() == 1);
    CHECK(ast.functions[0].name == "f");
    CHECK(ast.functions[0].id.line == 4);
}

TEST_CASE("recovery inside a function body keeps the function")
{
    const char* source =
        "function f() {\n"
        "  var x = * 2;\n"
        "  g();\n"
        "}\n";
    auto ast = parse_js_subset(source, "s.js");
    REQUIRE(ast.functions.size() == 1);
    CHECK(ast.diagnostics.size() == 1);
    CHECK(count_kind(*ast.program, NodeKind::Call) == 1);
}

TEST_CASE("export prefixes are stripped")
{
    auto ast = parse_js_subset("export function f() {}\nexport default function () {}\nexport const g = () => 1;\n",
                               "e.js");
    CHECK(ast.functions.size() == 3);
    CHECK(ast.diagnostics.empty());
}

TEST_CASE("named function expressions and IIFEs")
{
    auto ast = parse_js_subset("var v = function named() {};\n(function () { a(); })();\n", "i.js");
    REQUIRE(ast.functions.size() == 2);
    CHECK(ast.functions[0].name == "named");
    CHECK_FALSE(ast.functions[0].name_inferred);
    CHECK(ast.functions[0].kind == FunctionKind::Expression);
    CHECK_FALSE(ast.functions[1].name.has_value());
}

TEST_CASE("async functions, arrows and ASI")
{
    const char* source =
        "async function f() { await g() }\n"
        "const h = async (a) => { return a }\n"
        "const k = async x => x\n"
        "let n = 1\n"
        "n++\n";
    auto ast = parse_js_subset(source, "a.js");
    CHECK(ast.diagnostics.empty());
    CHECK(ast.functions.size() == 3);
}

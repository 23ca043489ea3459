#pragma once

#include "callfuse/graph.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Syntax tree for the JavaScript subset used by the static call-graph
// extractor. Function declarations and expressions, arrow functions,
// variable declarations, assignments, calls (plain, member, `new`), return
// and blocks are modeled. Control-flow statements are parsed transparently
// so calls nested inside them are kept. Classes, import declarations and
// `with` are skipped with a diagnostic.
//
// Function identity convention: the position of the `function` keyword, of
// the parameter list start for arrows (`(` or the single parameter), or of
// the property key for object-literal method shorthand. Columns are 1-based
// and count Unicode code points.
namespace callfuse::js {

enum class NodeKind {
    Program,
    Block,
    Function,  ///< declaration, expression, arrow or method; see `function`
    VarDecl,   ///< text = var | let | const
    Declarator,
    Assign,    ///< text = operator; children = {target, value}
    Call,      ///< children = {callee, args...}; position of `(` or the template tag argument
    New,       ///< children = {callee, args...}; position of `new`
    Member,    ///< children = {object} or {object, key}; text = property name if static
    Identifier,
    This,
    Literal,   ///< text = literal value for strings, raw text otherwise
    Object,
    Property,  ///< text = key name when static; children = {value} or {key, value}
    Spread,
    Return,
    Statement,   ///< control flow and other statements; children only
    Expression,  ///< operators, arrays, templates and the like; children only
};

struct Node {
    NodeKind kind = NodeKind::Expression;
    std::uint32_t line = 1;
    std::uint32_t column = 1;
    std::string text;
    /// Member/Property with a computed key that is not a string literal.
    bool computed = false;
    /// Index into JsSubsetAst::functions for Function nodes.
    int function = -1;
    std::vector<std::unique_ptr<Node>> children;
};

enum class FunctionKind { Declaration, Expression, Arrow, Method };

struct FunctionInfo {
    SourcePosition id;
    std::optional<std::string> name;
    /// True when `name` comes from the binding (`const g = () => {}`,
    /// `m: function () {}`) rather than from the function's own syntax.
    bool name_inferred = false;
    FunctionKind kind = FunctionKind::Declaration;
    std::vector<std::string> params;
    /// Enclosing function, or -1 for the file's top level.
    int parent = -1;
    std::uint32_t end_line = 1;
    /// Function node. Its children are the parameter default/pattern
    /// expressions followed by the body (Block, or an expression for arrows).
    const Node* node = nullptr;
};

struct JsSubsetAst {
    std::string file;
    std::uint32_t line_count = 0;
    std::unique_ptr<Node> program;
    std::vector<FunctionInfo> functions;
    /// Skipped constructs, with positions.
    std::vector<std::string> diagnostics;

    const Node& body_of(const FunctionInfo& function) const { return *function.node->children.back(); }
};

/// Parses UTF-8 source. Unbalanced brackets and unterminated literals or
/// comments throw ParseError with a position; anything else outside the
/// subset is skipped and reported in `diagnostics`.
JsSubsetAst parse_js_subset(std::string_view source, const std::string& file);

}  // namespace callfuse::js

#include "callfuse/js_ast.hpp"

#include "callfuse/error.hpp"

#include <algorithm>
#include <array>
#include <cstring>

namespace callfuse::js {

namespace {

enum class TokenKind {
    Identifier,  // identifiers, keywords and #private names
    Number,
    String,
    Regex,
    Template,       // `...` without substitutions
    TemplateHead,   // `...${
    TemplateMiddle, // }...${
    TemplateTail,   // }...`
    Punct,
    End,
};

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    std::uint32_t line = 1;
    std::uint32_t column = 1;
    bool newline_before = false;
    /// For brackets: index of the matching bracket.
    std::size_t match = 0;
};

constexpr std::array<std::string_view, 51> kPunctuators = {
    ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "?\?=",
    "=>", "==", "!=", "<=", ">=", "&&", "||", "??", "?.", "++", "--", "+=", "-=", "*=", "/=", "%=",
    "&=", "|=", "^=", "**", "<<", ">>",
    "{", "}", "(", ")", "[", "]", ";", ",", "<", ">", "+", "-", "*", "/", "%", "&", "|", "^",
};
constexpr std::string_view kSinglePunct = "!~?:=.@";

bool is_ident_start(unsigned char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' || c == '\\' || c >= 0x80;
}

bool is_ident_part(unsigned char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

class Lexer {
public:
    explicit Lexer(std::string_view source) : m_src(source) {}

    std::vector<Token> run()
    {
        if (m_src.starts_with("#!")) {
            while (m_i < m_src.size() && m_src[m_i] != '\n')
                advance();
        }
        while (true) {
            skip_trivia();
            if (m_i >= m_src.size())
                break;
            lex_token();
        }
        Token end;
        end.kind = TokenKind::End;
        end.line = m_line;
        end.column = m_col;
        end.newline_before = true;
        m_tokens.push_back(end);
        return std::move(m_tokens);
    }

    std::uint32_t line_count() const { return m_line; }

private:
    void advance()
    {
        const auto c = static_cast<unsigned char>(m_src[m_i++]);
        if (c == '\n') {
            ++m_line;
            m_col = 1;
            m_newline = true;
        } else if ((c & 0xC0) != 0x80) {
            ++m_col;
        }
    }

    char peek(std::size_t ahead = 0) const
    {
        return m_i + ahead < m_src.size() ? m_src[m_i + ahead] : '\0';
    }

    void skip_trivia()
    {
        while (m_i < m_src.size()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                while (m_i < m_src.size() && peek() != '\n')
                    advance();
            } else if (c == '/' && peek(1) == '*') {
                const auto line = m_line;
                const auto col = m_col;
                advance();
                advance();
                while (!(peek() == '*' && peek(1) == '/')) {
                    if (m_i >= m_src.size())
                        throw ParseError("unterminated block comment", line, col);
                    advance();
                }
                advance();
                advance();
            } else if (static_cast<unsigned char>(c) == 0xC2 && static_cast<unsigned char>(peek(1)) == 0xA0) {
                advance();  // no-break space
                advance();
            } else if (static_cast<unsigned char>(c) == 0xEF && static_cast<unsigned char>(peek(1)) == 0xBB &&
                       static_cast<unsigned char>(peek(2)) == 0xBF) {
                advance();  // byte order mark
                advance();
                advance();
            } else {
                break;
            }
        }
    }

    Token start_token(TokenKind kind)
    {
        Token t;
        t.kind = kind;
        t.line = m_line;
        t.column = m_col;
        t.newline_before = m_newline;
        m_newline = false;
        return t;
    }

    bool regex_allowed() const
    {
        if (m_tokens.empty())
            return true;
        const Token& prev = m_tokens.back();
        switch (prev.kind) {
        case TokenKind::Punct:
            return prev.text != ")" && prev.text != "]";
        case TokenKind::Identifier: {
            static constexpr std::array<std::string_view, 15> keywords = {
                "return", "typeof", "instanceof", "in", "of", "new", "delete", "void",
                "throw", "case", "do", "else", "yield", "await", "extends"};
            return std::find(keywords.begin(), keywords.end(), prev.text) != keywords.end();
        }
        case TokenKind::TemplateHead:
        case TokenKind::TemplateMiddle:
            return true;
        default:
            return false;
        }
    }

    void lex_token()
    {
        const auto c = static_cast<unsigned char>(peek());
        if (is_ident_start(c) || (c == '#' && is_ident_start(static_cast<unsigned char>(peek(1))))) {
            Token t = start_token(TokenKind::Identifier);
            const auto start = m_i;
            advance();
            while (m_i < m_src.size() && is_ident_part(static_cast<unsigned char>(peek())))
                advance();
            t.text = std::string(m_src.substr(start, m_i - start));
            m_tokens.push_back(std::move(t));
            return;
        }
        if (is_digit(c) || (c == '.' && is_digit(static_cast<unsigned char>(peek(1))))) {
            lex_number();
            return;
        }
        if (c == '"' || c == '\'') {
            lex_string(static_cast<char>(c));
            return;
        }
        if (c == '`') {
            Token t = start_token(TokenKind::Template);
            advance();
            lex_template_chunk(std::move(t), true);
            return;
        }
        if (c == '}' && !m_template_braces.empty() && m_template_braces.back() == m_brace_depth) {
            m_template_braces.pop_back();
            Token t = start_token(TokenKind::TemplateMiddle);
            advance();
            lex_template_chunk(std::move(t), false);
            return;
        }
        if (c == '/' && regex_allowed() && lex_regex())
            return;

        Token t = start_token(TokenKind::Punct);
        for (auto p : kPunctuators) {
            if (m_src.substr(m_i).starts_with(p)) {
                // "?." followed by a digit is a conditional, not optional chaining.
                if (p == "?." && is_digit(static_cast<unsigned char>(peek(2))))
                    continue;
                t.text = std::string(p);
                break;
            }
        }
        if (t.text.empty()) {
            if (kSinglePunct.find(static_cast<char>(c)) == std::string_view::npos)
                throw ParseError(std::string("unexpected character '") + static_cast<char>(c) + "'", m_line, m_col);
            t.text = std::string(1, static_cast<char>(c));
        }
        for (std::size_t k = 0; k < t.text.size(); ++k)
            advance();
        if (t.text == "{")
            ++m_brace_depth;
        else if (t.text == "}")
            --m_brace_depth;
        m_tokens.push_back(std::move(t));
    }

    void lex_number()
    {
        Token t = start_token(TokenKind::Number);
        const auto start = m_i;
        while (m_i < m_src.size()) {
            const char c = peek();
            if (is_ident_part(static_cast<unsigned char>(c)) || c == '.') {
                advance();
            } else if ((c == '+' || c == '-') && (m_src[m_i - 1] == 'e' || m_src[m_i - 1] == 'E') &&
                       !(m_src.substr(start).starts_with("0x") || m_src.substr(start).starts_with("0X"))) {
                advance();
            } else {
                break;
            }
        }
        t.text = std::string(m_src.substr(start, m_i - start));
        m_tokens.push_back(std::move(t));
    }

    void lex_string(char quote)
    {
        Token t = start_token(TokenKind::String);
        advance();
        std::string value;
        while (true) {
            if (m_i >= m_src.size() || peek() == '\n')
                throw ParseError("unterminated string literal", t.line, t.column);
            const char c = peek();
            if (c == quote) {
                advance();
                break;
            }
            if (c == '\\') {
                advance();
                if (m_i >= m_src.size())
                    throw ParseError("unterminated string literal", t.line, t.column);
                const char escaped = peek();
                advance();
                switch (escaped) {
                case 'n': value += '\n'; break;
                case 't': value += '\t'; break;
                case 'r': value += '\r'; break;
                case '\n': break;  // line continuation
                default: value += escaped;
                }
                continue;
            }
            value += c;
            advance();
        }
        t.text = std::move(value);
        m_tokens.push_back(std::move(t));
    }

    // Scans template text after "`" or after the "}" that closes a substitution.
    void lex_template_chunk(Token t, bool opened_by_backtick)
    {
        const auto start = m_i;
        while (true) {
            if (m_i >= m_src.size())
                throw ParseError("unterminated template literal", t.line, t.column);
            const char c = peek();
            if (c == '\\') {
                advance();
                if (m_i < m_src.size())
                    advance();
                continue;
            }
            if (c == '`') {
                t.text = std::string(m_src.substr(start, m_i - start));
                t.kind = opened_by_backtick ? TokenKind::Template : TokenKind::TemplateTail;
                advance();
                break;
            }
            if (c == '$' && peek(1) == '{') {
                t.text = std::string(m_src.substr(start, m_i - start));
                t.kind = opened_by_backtick ? TokenKind::TemplateHead : TokenKind::TemplateMiddle;
                advance();
                advance();
                m_template_braces.push_back(m_brace_depth);
                break;
            }
            advance();
        }
        m_tokens.push_back(std::move(t));
    }

    // Returns false (consuming nothing) when the slash cannot open a regex on this line.
    bool lex_regex()
    {
        std::size_t j = m_i + 1;
        bool in_class = false;
        while (true) {
            if (j >= m_src.size() || m_src[j] == '\n')
                return false;
            const char c = m_src[j];
            if (c == '\\') {
                j += 2;
                continue;
            }
            if (c == '[')
                in_class = true;
            else if (c == ']')
                in_class = false;
            else if (c == '/' && !in_class)
                break;
            ++j;
        }
        ++j;
        while (j < m_src.size() && is_ident_part(static_cast<unsigned char>(m_src[j])))
            ++j;
        Token t = start_token(TokenKind::Regex);
        t.text = std::string(m_src.substr(m_i, j - m_i));
        while (m_i < j)
            advance();
        m_tokens.push_back(std::move(t));
        return true;
    }

    std::string_view m_src;
    std::size_t m_i = 0;
    std::uint32_t m_line = 1;
    std::uint32_t m_col = 1;
    bool m_newline = false;
    int m_brace_depth = 0;
    std::vector<int> m_template_braces;
    std::vector<Token> m_tokens;
};

bool is_opener(const Token& t)
{
    return t.kind == TokenKind::Punct && (t.text == "(" || t.text == "[" || t.text == "{");
}

bool is_closer(const Token& t)
{
    return t.kind == TokenKind::Punct && (t.text == ")" || t.text == "]" || t.text == "}");
}

void match_brackets(std::vector<Token>& tokens)
{
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        Token& t = tokens[i];
        if (is_opener(t)) {
            stack.push_back(i);
        } else if (is_closer(t)) {
            if (stack.empty())
                throw ParseError("unbalanced '" + t.text + "' without an opening bracket", t.line, t.column);
            Token& open = tokens[stack.back()];
            const char expected = open.text == "(" ? ')' : open.text == "[" ? ']' : '}';
            if (t.text[0] != expected)
                throw ParseError("unbalanced '" + open.text + "' (opened at line " + std::to_string(open.line) +
                                     ", column " + std::to_string(open.column) + ") closed by '" + t.text + "'",
                                 t.line, t.column);
            open.match = i;
            t.match = stack.back();
            stack.pop_back();
        }
    }
    if (!stack.empty()) {
        const Token& open = tokens[stack.back()];
        throw ParseError("unbalanced '" + open.text + "' is never closed", open.line, open.column);
    }
}

/// Thrown inside the parser for tokens it cannot place; caught at statement
/// level where the statement is skipped.
struct Unexpected {
    std::size_t index;
    std::string message;
};

using NodePtr = std::unique_ptr<Node>;

class Parser {
public:
    Parser(std::vector<Token> tokens, JsSubsetAst& ast) : m_tokens(std::move(tokens)), m_ast(ast) {}

    NodePtr parse_program()
    {
        auto program = make(NodeKind::Program, m_tokens.front());
        program->line = 1;
        program->column = 1;
        while (!at_end())
            parse_statement_into(*program);
        return program;
    }

private:
    // -- token helpers ----------------------------------------------------

    const Token& tok(std::size_t ahead = 0) const
    {
        return m_tokens[std::min(m_pos + ahead, m_tokens.size() - 1)];
    }

    bool at_end() const { return tok().kind == TokenKind::End; }

    bool at(std::string_view text, std::size_t ahead = 0) const
    {
        const Token& t = tok(ahead);
        return (t.kind == TokenKind::Punct || t.kind == TokenKind::Identifier) && t.text == text;
    }

    bool at_punct(std::string_view text, std::size_t ahead = 0) const
    {
        const Token& t = tok(ahead);
        return t.kind == TokenKind::Punct && t.text == text;
    }

    bool at_identifier(std::size_t ahead = 0) const { return tok(ahead).kind == TokenKind::Identifier; }

    const Token& next()
    {
        const Token& t = tok();
        if (!at_end())
            ++m_pos;
        return t;
    }

    [[noreturn]] void fail(const std::string& message) const { throw Unexpected{m_pos, message}; }

    const Token& expect(std::string_view text)
    {
        if (!at(text))
            fail("expected '" + std::string(text) + "'");
        return next();
    }

    bool eat(std::string_view text)
    {
        if (!at(text))
            return false;
        next();
        return true;
    }

    NodePtr make(NodeKind kind, const Token& at_token, std::string text = {})
    {
        auto node = std::make_unique<Node>();
        node->kind = kind;
        node->line = at_token.line;
        node->column = at_token.column;
        node->text = std::move(text);
        return node;
    }

    void diagnose(const Token& t, const std::string& message)
    {
        m_ast.diagnostics.push_back(m_ast.file + ":" + std::to_string(t.line) + ":" + std::to_string(t.column) +
                                    ": " + message);
    }

    void consume_semicolon()
    {
        if (eat(";"))
            return;
        if (at_punct("}") || at_end() || tok().newline_before)
            return;
        fail("expected ';'");
    }

    // Skips a bracketed group starting at the current opener.
    void skip_group() { m_pos = tok().match + 1; }

    // -- statements -------------------------------------------------------

    void parse_statement_into(Node& parent)
    {
        const std::size_t start = m_pos;
        const std::size_t function_count = m_ast.functions.size();
        try {
            if (auto statement = parse_statement())
                parent.children.push_back(std::move(statement));
        } catch (const Unexpected& error) {
            m_ast.functions.resize(function_count);
            const Token& bad = m_tokens[std::min(error.index, m_tokens.size() - 1)];
            diagnose(bad, "skipped statement: " + error.message +
                              (bad.kind == TokenKind::End ? std::string(" at end of input")
                                                          : " near '" + bad.text + "'"));
            recover(start, error.index);
        }
    }

    void recover(std::size_t start, std::size_t error_at)
    {
        std::size_t i = start;
        while (true) {
            const Token& t = m_tokens[i];
            if (t.kind == TokenKind::End)
                break;
            if (i > error_at && t.newline_before)
                break;
            if (is_closer(t))
                break;
            if (is_opener(t)) {
                i = t.match + 1;
                continue;
            }
            ++i;
            if (t.kind == TokenKind::Punct && t.text == ";")
                break;
        }
        if (i == start && m_tokens[i].kind != TokenKind::End && !is_closer(m_tokens[i]))
            ++i;
        m_pos = i;
    }

    NodePtr parse_statement()
    {
        const Token& t = tok();
        if (t.kind == TokenKind::Punct) {
            if (t.text == "{")
                return parse_block();
            if (t.text == ";") {
                next();
                return nullptr;
            }
        }
        if (t.kind == TokenKind::Identifier) {
            const std::string& word = t.text;
            if (word == "function")
                return parse_function(FunctionKind::Declaration);
            if (word == "async" && at("function", 1) && !tok(1).newline_before) {
                next();
                return parse_function(FunctionKind::Declaration);
            }
            if (word == "var" || word == "const" ||
                (word == "let" && (at_identifier(1) || at_punct("[", 1) || at_punct("{", 1)))) {
                auto decl = parse_var_decl();
                consume_semicolon();
                return decl;
            }
            if (word == "return")
                return parse_return();
            if (word == "if")
                return parse_if();
            if (word == "for")
                return parse_for();
            if (word == "while")
                return parse_while();
            if (word == "do")
                return parse_do();
            if (word == "try")
                return parse_try();
            if (word == "switch")
                return parse_switch();
            if (word == "throw") {
                auto node = make(NodeKind::Statement, next(), "throw");
                node->children.push_back(parse_expression());
                consume_semicolon();
                return node;
            }
            if (word == "break" || word == "continue") {
                next();
                if (at_identifier() && !tok().newline_before)
                    next();
                consume_semicolon();
                return nullptr;
            }
            if (word == "debugger") {
                next();
                consume_semicolon();
                return nullptr;
            }
            if (word == "class") {
                skip_class("class declaration");
                return nullptr;
            }
            if (word == "import" && !at_punct("(", 1) && !at_punct(".", 1))
                return skip_import();
            if (word == "export")
                return parse_export();
            if (word == "with") {
                diagnose(t, "skipped 'with' statement (outside the supported subset)");
                next();
                skip_group();
                skip_substatement();
                return nullptr;
            }
            if (at_punct(":", 1) && word != "default" && word != "case") {
                next();
                next();
                return parse_statement();
            }
        }
        auto statement = make(NodeKind::Statement, t, "expression");
        statement->children.push_back(parse_expression());
        consume_semicolon();
        return statement;
    }

    void skip_substatement()
    {
        if (at_punct("{")) {
            skip_group();
            return;
        }
        recover(m_pos, m_pos);
    }

    NodePtr parse_block()
    {
        const Token& open = tok();
        auto block = make(NodeKind::Block, open);
        const std::size_t close = open.match;
        next();
        while (m_pos < close)
            parse_statement_into(*block);
        m_pos = close + 1;
        return block;
    }

    NodePtr parse_var_decl()
    {
        auto decl = make(NodeKind::VarDecl, tok(), next().text);
        do {
            const Token& start = tok();
            auto declarator = make(NodeKind::Declarator, start);
            NodePtr target;
            if (at_punct("[") || at_punct("{"))
                target = parse_primary();
            else if (at_identifier())
                target = make(NodeKind::Identifier, start, next().text);
            else
                fail("expected a binding name");
            if (target->kind == NodeKind::Identifier)
                declarator->text = target->text;
            declarator->children.push_back(std::move(target));
            if (eat("=")) {
                declarator->children.push_back(parse_assignment());
                infer_name(*declarator->children.back(), declarator->text);
            }
            decl->children.push_back(std::move(declarator));
        } while (eat(","));
        return decl;
    }

    NodePtr parse_return()
    {
        auto node = make(NodeKind::Return, next());
        if (!at_punct(";") && !at_punct("}") && !at_end() && !tok().newline_before)
            node->children.push_back(parse_expression());
        consume_semicolon();
        return node;
    }

    NodePtr parse_parenthesized()
    {
        expect("(");
        auto expression = parse_expression();
        expect(")");
        return expression;
    }

    NodePtr parse_if()
    {
        auto node = make(NodeKind::Statement, next(), "if");
        node->children.push_back(parse_parenthesized());
        append_statement(*node);
        if (eat("else"))
            append_statement(*node);
        return node;
    }

    void append_statement(Node& parent)
    {
        if (auto statement = parse_statement())
            parent.children.push_back(std::move(statement));
    }

    NodePtr parse_for()
    {
        auto node = make(NodeKind::Statement, next(), "for");
        eat("await");
        expect("(");
        if (!at_punct(";")) {
            if (at("var") || at("const") || (at("let") && (at_identifier(1) || at_punct("[", 1) || at_punct("{", 1))))
                node->children.push_back(parse_var_decl());
            else
                node->children.push_back(parse_expression());
        }
        if (eat("of") || eat("in")) {
            node->children.push_back(parse_assignment());
        } else {
            expect(";");
            if (!at_punct(";"))
                node->children.push_back(parse_expression());
            expect(";");
            if (!at_punct(")"))
                node->children.push_back(parse_expression());
        }
        expect(")");
        append_statement(*node);
        return node;
    }

    NodePtr parse_while()
    {
        auto node = make(NodeKind::Statement, next(), "while");
        node->children.push_back(parse_parenthesized());
        append_statement(*node);
        return node;
    }

    NodePtr parse_do()
    {
        auto node = make(NodeKind::Statement, next(), "do");
        append_statement(*node);
        expect("while");
        node->children.push_back(parse_parenthesized());
        eat(";");
        return node;
    }

    NodePtr parse_try()
    {
        auto node = make(NodeKind::Statement, next(), "try");
        if (!at_punct("{"))
            fail("expected '{' after try");
        node->children.push_back(parse_block());
        if (eat("catch")) {
            if (at_punct("("))
                skip_group();
            if (!at_punct("{"))
                fail("expected '{' after catch");
            node->children.push_back(parse_block());
        }
        if (eat("finally")) {
            if (!at_punct("{"))
                fail("expected '{' after finally");
            node->children.push_back(parse_block());
        }
        return node;
    }

    NodePtr parse_switch()
    {
        auto node = make(NodeKind::Statement, next(), "switch");
        node->children.push_back(parse_parenthesized());
        if (!at_punct("{"))
            fail("expected '{' after switch");
        const std::size_t close = tok().match;
        next();
        auto body = make(NodeKind::Block, tok());
        while (m_pos < close) {
            if (at("case")) {
                next();
                body->children.push_back(parse_expression());
                expect(":");
            } else if (at("default") && at_punct(":", 1)) {
                next();
                next();
            } else {
                parse_statement_into(*body);
            }
        }
        m_pos = close + 1;
        node->children.push_back(std::move(body));
        return node;
    }

    void skip_class(const char* what)
    {
        diagnose(tok(), std::string("skipped ") + what + " (outside the supported subset)");
        next();
        while (!at_end() && !at_punct("{")) {
            if (is_opener(tok()))
                skip_group();
            else
                next();
        }
        if (at_punct("{"))
            skip_group();
    }

    NodePtr skip_import()
    {
        diagnose(tok(), "skipped import declaration (module resolution is opaque)");
        next();
        while (!at_end() && tok().kind != TokenKind::String) {
            if (is_opener(tok()))
                skip_group();
            else
                next();
        }
        if (!at_end())
            next();
        eat(";");
        return nullptr;
    }

    NodePtr parse_export()
    {
        const Token& keyword = tok();
        if (at_punct("{", 1) || at_punct("*", 1)) {
            diagnose(keyword, "skipped export list (module resolution is opaque)");
            next();
            if (at_punct("{"))
                skip_group();
            else
                next();
            if (eat("as"))
                next();
            if (eat("from"))
                next();
            consume_semicolon();
            return nullptr;
        }
        next();
        if (eat("default")) {
            if (at("function") || (at("async") && at("function", 1)))
                return parse_statement();
            if (at("class")) {
                skip_class("class declaration");
                return nullptr;
            }
            auto statement = make(NodeKind::Statement, tok(), "expression");
            statement->children.push_back(parse_assignment());
            consume_semicolon();
            return statement;
        }
        return parse_statement();
    }

    // -- functions --------------------------------------------------------

    void infer_name(const Node& value, const std::string& name)
    {
        if (value.kind != NodeKind::Function || name.empty())
            return;
        FunctionInfo& info = m_ast.functions[static_cast<std::size_t>(value.function)];
        if (!info.name) {
            info.name = name;
            info.name_inferred = true;
        }
    }

    int begin_function(const Token& at_token, FunctionKind kind, std::optional<std::string> name)
    {
        FunctionInfo info;
        info.id = SourcePosition{m_ast.file, at_token.line, at_token.column};
        info.kind = kind;
        info.name = std::move(name);
        info.parent = m_current_function;
        m_ast.functions.push_back(std::move(info));
        const int index = static_cast<int>(m_ast.functions.size() - 1);
        m_current_function = index;
        return index;
    }

    NodePtr end_function(int index, NodePtr node, int saved_function)
    {
        m_current_function = saved_function;
        node->function = index;
        FunctionInfo& info = m_ast.functions[static_cast<std::size_t>(index)];
        info.node = node.get();
        info.end_line = m_tokens[m_pos == 0 ? 0 : m_pos - 1].line;
        return node;
    }

    /// At `function`: declaration or expression, optionally a generator.
    NodePtr parse_function(FunctionKind kind)
    {
        const Token& keyword = next();
        eat("*");
        std::optional<std::string> name;
        if (at_identifier())
            name = next().text;
        const int saved = m_current_function;
        const int index = begin_function(keyword, kind, name);
        auto node = make(NodeKind::Function, keyword, name.value_or(""));
        parse_params(*node, index);
        if (!at_punct("{"))
            fail("expected function body");
        node->children.push_back(parse_block());
        return end_function(index, std::move(node), saved);
    }

    /// Object-literal method shorthand; current token is `(`.
    NodePtr parse_method(const Token& key_token, const std::string& key)
    {
        const int saved = m_current_function;
        const int index = begin_function(key_token, FunctionKind::Method, key.empty() ? std::nullopt : std::optional(key));
        auto node = make(NodeKind::Function, key_token, key);
        parse_params(*node, index);
        if (!at_punct("{"))
            fail("expected method body");
        node->children.push_back(parse_block());
        return end_function(index, std::move(node), saved);
    }

    /// At the parameter start of an arrow: `(` or a single identifier.
    NodePtr parse_arrow()
    {
        const Token& start = tok();
        const int saved = m_current_function;
        const int index = begin_function(start, FunctionKind::Arrow, std::nullopt);
        auto node = make(NodeKind::Function, start);
        if (at_punct("(")) {
            parse_params(*node, index);
        } else {
            m_ast.functions[static_cast<std::size_t>(index)].params.push_back(next().text);
        }
        expect("=>");
        if (at_punct("{"))
            node->children.push_back(parse_block());
        else
            node->children.push_back(parse_assignment());
        return end_function(index, std::move(node), saved);
    }

    void parse_params(Node& function, int index)
    {
        expect("(");
        while (!at_punct(")")) {
            NodePtr param;
            if (at_punct("...")) {
                const Token& spread = next();
                param = make(NodeKind::Spread, spread);
                param->children.push_back(parse_binding_target());
            } else {
                param = parse_binding_target();
            }
            if (at_punct("=")) {
                const Token& eq = next();
                auto assign = make(NodeKind::Assign, eq, "=");
                assign->line = param->line;
                assign->column = param->column;
                assign->children.push_back(std::move(param));
                assign->children.push_back(parse_assignment());
                param = std::move(assign);
            }
            collect_binding_names(*param, m_ast.functions[static_cast<std::size_t>(index)].params);
            function.children.push_back(std::move(param));
            if (!eat(","))
                break;
        }
        expect(")");
    }

    NodePtr parse_binding_target()
    {
        if (at_punct("[") || at_punct("{"))
            return parse_primary();
        if (!at_identifier())
            fail("expected a parameter name");
        const Token& name = next();
        return make(NodeKind::Identifier, name, name.text);
    }

    static void collect_binding_names(const Node& pattern, std::vector<std::string>& out)
    {
        switch (pattern.kind) {
        case NodeKind::Identifier:
            out.push_back(pattern.text);
            break;
        case NodeKind::Assign:
            collect_binding_names(*pattern.children.front(), out);
            break;
        case NodeKind::Property:
            collect_binding_names(*pattern.children.back(), out);
            break;
        case NodeKind::Spread:
        case NodeKind::Object:
        case NodeKind::Expression:
            for (const auto& child : pattern.children)
                collect_binding_names(*child, out);
            break;
        default:
            break;
        }
    }

    bool arrow_ahead() const
    {
        const Token& t = tok();
        if (t.kind == TokenKind::Identifier && at_punct("=>", 1))
            return true;
        if (at_punct("(")) {
            const std::size_t after = t.match + 1;
            return after < m_tokens.size() && m_tokens[after].kind == TokenKind::Punct && m_tokens[after].text == "=>";
        }
        return false;
    }

    // -- expressions ------------------------------------------------------

    NodePtr parse_expression()
    {
        auto first = parse_assignment();
        if (!at_punct(","))
            return first;
        auto sequence = make(NodeKind::Expression, tok(), ",");
        sequence->line = first->line;
        sequence->column = first->column;
        sequence->children.push_back(std::move(first));
        while (eat(","))
            sequence->children.push_back(parse_assignment());
        return sequence;
    }

    static bool is_assignment_operator(const Token& t)
    {
        static constexpr std::array<std::string_view, 16> ops = {
            "=", "+=", "-=", "*=", "/=", "%=", "**=", "<<=", ">>=", ">>>=", "&=", "|=", "^=", "&&=", "||=", "?\?="};
        return t.kind == TokenKind::Punct && std::find(ops.begin(), ops.end(), t.text) != ops.end();
    }

    NodePtr parse_assignment()
    {
        if (arrow_ahead())
            return parse_arrow();
        if (at("async") && !tok(1).newline_before) {
            if (tok(1).kind == TokenKind::Identifier && at_punct("=>", 2)) {
                next();
                return parse_arrow();
            }
            if (at_punct("(", 1)) {
                const std::size_t after = tok(1).match + 1;
                if (after < m_tokens.size() && m_tokens[after].kind == TokenKind::Punct && m_tokens[after].text == "=>") {
                    next();
                    return parse_arrow();
                }
            }
        }
        if (at("yield")) {
            auto node = make(NodeKind::Expression, next(), "yield");
            eat("*");
            if (!at_punct(")") && !at_punct("]") && !at_punct("}") && !at_punct(",") && !at_punct(";") &&
                !at_punct(":") && !at_end() && !tok().newline_before)
                node->children.push_back(parse_assignment());
            return node;
        }

        auto left = parse_conditional();
        if (is_assignment_operator(tok())) {
            auto node = make(NodeKind::Assign, tok(), next().text);
            node->line = left->line;
            node->column = left->column;
            node->children.push_back(std::move(left));
            node->children.push_back(parse_assignment());
            const Node& target = *node->children.front();
            if (node->text == "=" &&
                (target.kind == NodeKind::Identifier || (target.kind == NodeKind::Member && !target.computed)))
                infer_name(*node->children.back(), target.text);
            return node;
        }
        return left;
    }

    NodePtr parse_conditional()
    {
        auto condition = parse_binary(0);
        if (!at_punct("?"))
            return condition;
        auto node = make(NodeKind::Expression, next(), "?");
        node->line = condition->line;
        node->column = condition->column;
        node->children.push_back(std::move(condition));
        node->children.push_back(parse_assignment());
        expect(":");
        node->children.push_back(parse_assignment());
        return node;
    }

    int binary_precedence(const Token& t) const
    {
        if (t.kind == TokenKind::Identifier) {
            if (t.text == "instanceof" || t.text == "in")
                return 7;
            return -1;
        }
        if (t.kind != TokenKind::Punct)
            return -1;
        static const std::array<std::pair<std::string_view, int>, 22> table = {{
            {"??", 1}, {"||", 1}, {"&&", 2}, {"|", 3}, {"^", 4}, {"&", 5},
            {"==", 6}, {"!=", 6}, {"===", 6}, {"!==", 6},
            {"<", 7}, {">", 7}, {"<=", 7}, {">=", 7},
            {"<<", 8}, {">>", 8}, {">>>", 8},
            {"+", 9}, {"-", 9}, {"*", 10}, {"/", 10}, {"%", 10},
        }};
        if (t.text == "**")
            return 11;
        for (const auto& [op, precedence] : table) {
            if (op == t.text)
                return precedence;
        }
        return -1;
    }

    NodePtr parse_binary(int min_precedence)
    {
        auto left = parse_unary();
        while (true) {
            const int precedence = binary_precedence(tok());
            if (precedence < 0 || precedence < min_precedence)
                return left;
            const Token& op = next();
            const int next_min = op.text == "**" ? precedence : precedence + 1;
            auto node = make(NodeKind::Expression, op, op.text);
            node->line = left->line;
            node->column = left->column;
            node->children.push_back(std::move(left));
            node->children.push_back(parse_binary(next_min));
            left = std::move(node);
        }
    }

    NodePtr parse_unary()
    {
        const Token& t = tok();
        const bool prefix_punct = t.kind == TokenKind::Punct &&
                                  (t.text == "!" || t.text == "~" || t.text == "+" || t.text == "-" ||
                                   t.text == "++" || t.text == "--");
        const bool prefix_word = t.kind == TokenKind::Identifier &&
                                 (t.text == "typeof" || t.text == "void" || t.text == "delete" ||
                                  (t.text == "await" && !at_punct(")", 1) && !at_punct(";", 1) &&
                                   !at_punct(",", 1) && !at_punct("=", 1) && !at_punct(".", 1)));
        if (prefix_punct || prefix_word) {
            auto node = make(NodeKind::Expression, next(), t.text);
            node->children.push_back(parse_unary());
            return node;
        }
        auto operand = parse_left_hand_side();
        if ((at_punct("++") || at_punct("--")) && !tok().newline_before) {
            auto node = make(NodeKind::Expression, next(), "postfix");
            node->line = operand->line;
            node->column = operand->column;
            node->children.push_back(std::move(operand));
            return node;
        }
        return operand;
    }

    NodePtr parse_new()
    {
        const Token& keyword = next();
        if (at_punct(".")) {
            next();
            auto meta = make(NodeKind::Expression, keyword, "new." + next().text);
            return meta;
        }
        auto node = make(NodeKind::New, keyword);
        NodePtr callee = at("new") ? parse_new() : parse_primary();
        callee = parse_member_suffixes(std::move(callee), false);
        node->children.push_back(std::move(callee));
        if (at_punct("("))
            parse_arguments(*node);
        return node;
    }

    NodePtr parse_left_hand_side()
    {
        NodePtr expression = at("new") ? parse_new() : parse_primary();
        return parse_member_suffixes(std::move(expression), true);
    }

    NodePtr make_static_member(NodePtr object, const Token& name_token)
    {
        auto member = make(NodeKind::Member, name_token, name_token.text);
        member->line = object->line;
        member->column = object->column;
        member->children.push_back(std::move(object));
        return member;
    }

    NodePtr make_computed_member(NodePtr object)
    {
        const Token& open = tok();
        const std::size_t close = open.match;
        next();
        auto key = parse_expression();
        if (m_pos != close)
            fail("expected ']'");
        next();
        auto member = make(NodeKind::Member, open);
        member->line = object->line;
        member->column = object->column;
        if (key->kind == NodeKind::Literal && key->computed == false && !key->text.empty() && key->function == -2)
            member->text = key->text;  // o["m"] names property m
        else
            member->computed = true;
        member->children.push_back(std::move(object));
        member->children.push_back(std::move(key));
        return member;
    }

    NodePtr parse_member_suffixes(NodePtr expression, bool allow_calls)
    {
        while (true) {
            const Token& t = tok();
            if (t.kind == TokenKind::Punct && t.text == ".") {
                next();
                if (!at_identifier())
                    fail("expected a property name after '.'");
                expression = make_static_member(std::move(expression), next());
            } else if (t.kind == TokenKind::Punct && t.text == "?.") {
                if (!allow_calls)
                    return expression;
                next();
                if (at_punct("("))
                    expression = make_call(std::move(expression));
                else if (at_punct("["))
                    expression = make_computed_member(std::move(expression));
                else if (at_identifier())
                    expression = make_static_member(std::move(expression), next());
                else
                    fail("expected a property after '?.'");
            } else if (t.kind == TokenKind::Punct && t.text == "[") {
                expression = make_computed_member(std::move(expression));
            } else if (t.kind == TokenKind::Punct && t.text == "(" && allow_calls) {
                expression = make_call(std::move(expression));
            } else if (t.kind == TokenKind::Template || t.kind == TokenKind::TemplateHead) {
                // Tagged template: a call of the tag.
                auto call = make(NodeKind::Call, t);
                call->children.push_back(std::move(expression));
                call->children.push_back(parse_template());
                expression = std::move(call);
            } else {
                return expression;
            }
        }
    }

    NodePtr make_call(NodePtr callee)
    {
        auto call = make(NodeKind::Call, tok());
        call->children.push_back(std::move(callee));
        parse_arguments(*call);
        return call;
    }

    void parse_arguments(Node& call)
    {
        expect("(");
        while (!at_punct(")")) {
            if (at_punct("...")) {
                auto spread = make(NodeKind::Spread, next());
                spread->children.push_back(parse_assignment());
                call.children.push_back(std::move(spread));
            } else {
                call.children.push_back(parse_assignment());
            }
            if (!eat(","))
                break;
        }
        expect(")");
    }

    NodePtr parse_template()
    {
        const Token& head = next();
        auto node = make(NodeKind::Expression, head, "template");
        if (head.kind == TokenKind::Template)
            return node;
        while (true) {
            node->children.push_back(parse_expression());
            const Token& part = tok();
            if (part.kind == TokenKind::TemplateMiddle) {
                next();
                continue;
            }
            if (part.kind == TokenKind::TemplateTail) {
                next();
                return node;
            }
            fail("malformed template literal");
        }
    }

    NodePtr parse_primary()
    {
        const Token& t = tok();
        switch (t.kind) {
        case TokenKind::Identifier:
            if (t.text == "function")
                return parse_function(FunctionKind::Expression);
            if (t.text == "async" && at("function", 1) && !tok(1).newline_before) {
                next();
                return parse_function(FunctionKind::Expression);
            }
            if (t.text == "class") {
                skip_class("class expression");
                return make(NodeKind::Expression, t, "class");
            }
            if (t.text == "this") {
                next();
                return make(NodeKind::This, t, "this");
            }
            if (t.text == "true" || t.text == "false" || t.text == "null") {
                next();
                return make(NodeKind::Literal, t, t.text);
            }
            next();
            return make(NodeKind::Identifier, t, t.text);
        case TokenKind::String: {
            next();
            auto literal = make(NodeKind::Literal, t, t.text);
            literal->function = -2;  // marks a string literal
            return literal;
        }
        case TokenKind::Number:
        case TokenKind::Regex:
            next();
            return make(NodeKind::Literal, t, t.text);
        case TokenKind::Template:
        case TokenKind::TemplateHead:
            return parse_template();
        case TokenKind::Punct:
            if (t.text == "(") {
                const std::size_t close = t.match;
                next();
                auto inner = parse_expression();
                if (m_pos != close)
                    fail("expected ')'");
                next();
                return inner;
            }
            if (t.text == "[")
                return parse_array();
            if (t.text == "{")
                return parse_object();
            break;
        default:
            break;
        }
        fail("unexpected token");
    }

    NodePtr parse_array()
    {
        const Token& open = next();
        auto array = make(NodeKind::Expression, open, "array");
        while (!at_punct("]")) {
            if (at_punct(",")) {
                next();
                continue;
            }
            if (at_punct("...")) {
                auto spread = make(NodeKind::Spread, next());
                spread->children.push_back(parse_assignment());
                array->children.push_back(std::move(spread));
            } else {
                array->children.push_back(parse_assignment());
            }
            if (!at_punct("]"))
                expect(",");
        }
        next();
        return array;
    }

    bool property_key_ahead(std::size_t ahead) const
    {
        const Token& t = tok(ahead);
        if (t.kind == TokenKind::Identifier || t.kind == TokenKind::String || t.kind == TokenKind::Number)
            return true;
        return t.kind == TokenKind::Punct && (t.text == "[" || t.text == "*");
    }

    NodePtr parse_object()
    {
        const Token& open = next();
        auto object = make(NodeKind::Object, open);
        while (!at_punct("}")) {
            if (at_punct("...")) {
                auto spread = make(NodeKind::Spread, next());
                spread->children.push_back(parse_assignment());
                object->children.push_back(std::move(spread));
            } else {
                object->children.push_back(parse_property());
            }
            if (!at_punct("}"))
                expect(",");
        }
        next();
        return object;
    }

    NodePtr parse_property()
    {
        // Modifiers: get/set/async/static before a key, and generator '*'.
        while ((at("get") || at("set") || at("async") || at("static")) && tok().kind == TokenKind::Identifier &&
               property_key_ahead(1))
            next();
        eat("*");

        const Token& key_token = tok();
        auto property = make(NodeKind::Property, key_token);
        NodePtr computed_key;
        switch (key_token.kind) {
        case TokenKind::Identifier:
        case TokenKind::String:
        case TokenKind::Number:
            property->text = next().text;
            break;
        case TokenKind::Punct:
            if (key_token.text == "[") {
                const std::size_t close = key_token.match;
                next();
                computed_key = parse_assignment();
                if (m_pos != close)
                    fail("expected ']'");
                next();
                if (computed_key->kind == NodeKind::Literal && computed_key->function == -2)
                    property->text = computed_key->text;
                else
                    property->computed = true;
                break;
            }
            [[fallthrough]];
        default:
            fail("expected a property key");
        }
        if (computed_key)
            property->children.push_back(std::move(computed_key));

        if (at_punct("(")) {
            property->children.push_back(parse_method(key_token, property->text));
        } else if (eat(":")) {
            property->children.push_back(parse_assignment());
            if (!property->computed)
                infer_name(*property->children.back(), property->text);
        } else if (at_punct("=")) {
            // Shorthand with default, only valid in patterns.
            const Token& eq = next();
            auto assign = make(NodeKind::Assign, eq, "=");
            assign->children.push_back(make(NodeKind::Identifier, key_token, property->text));
            assign->children.push_back(parse_assignment());
            property->children.push_back(std::move(assign));
        } else {
            if (key_token.kind != TokenKind::Identifier)
                fail("expected ':' after property key");
            property->children.push_back(make(NodeKind::Identifier, key_token, property->text));
        }
        return property;
    }

    std::vector<Token> m_tokens;
    std::size_t m_pos = 0;
    JsSubsetAst& m_ast;
    int m_current_function = -1;
};

}  // namespace

JsSubsetAst parse_js_subset(std::string_view source, const std::string& file)
{
    JsSubsetAst ast;
    ast.file = normalize_path(file);
    Lexer lexer(source);
    auto tokens = lexer.run();
    ast.line_count = lexer.line_count();
    if (!source.empty() && source.back() == '\n')
        --ast.line_count;
    match_brackets(tokens);
    Parser parser(std::move(tokens), ast);
    ast.program = parser.parse_program();
    return ast;
}

}  // namespace callfuse::js

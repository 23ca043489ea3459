#include "callfuse/static_extractor.hpp"

#include "callfuse/text.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

namespace callfuse {

std::string_view to_string(UnresolvedReason reason)
{
    switch (reason) {
    case UnresolvedReason::DynamicDispatch:
        return "dynamic-dispatch";
    case UnresolvedReason::EvalLike:
        return "eval-like";
    case UnresolvedReason::UnknownName:
        return "unknown-name";
    }
    return "unknown";
}

namespace {

using js::FunctionKind;
using js::JsSubsetAst;
using js::Node;
using js::NodeKind;

struct Binding {
    std::set<int> functions;  // global function ids
    bool value = false;
};

using Scope = std::map<std::string, Binding>;

class Extractor {
public:
    explicit Extractor(std::span<const JsSubsetAst> asts) : m_asts(asts)
    {
        for (const auto& ast : m_asts) {
            m_offsets.push_back(static_cast<int>(m_ids.size()));
            for (const auto& info : ast.functions)
                m_ids.push_back(info.id);
            m_scopes.emplace_back(ast.functions.size() + 1);
        }
    }

    StaticExtraction run()
    {
        for (std::size_t a = 0; a < m_asts.size(); ++a)
            declare(a, *m_asts[a].program, -1);
        for (std::size_t a = 0; a < m_asts.size(); ++a)
            bind_named_expressions(a);
        for (std::size_t a = 0; a < m_asts.size(); ++a)
            assign(a, *m_asts[a].program, -1);
        for (std::size_t a = 0; a < m_asts.size(); ++a)
            collect_fields(a, *m_asts[a].program, -1);
        for (std::size_t a = 0; a < m_asts.size(); ++a)
            calls(a, *m_asts[a].program, -1);
        return finish();
    }

private:
    int global_id(std::size_t a, int function) const { return m_offsets[a] + function; }

    Scope& scope(std::size_t a, int function) { return m_scopes[a][static_cast<std::size_t>(function + 1)]; }

    Binding* lookup(std::size_t a, int function, const std::string& name)
    {
        int current = function;
        while (true) {
            Scope& s = scope(a, current);
            if (auto it = s.find(name); it != s.end())
                return &it->second;
            if (current < 0)
                return nullptr;
            current = m_asts[a].functions[static_cast<std::size_t>(current)].parent;
        }
    }

    static void pattern_names(const Node& pattern, std::vector<std::string>& out)
    {
        switch (pattern.kind) {
        case NodeKind::Identifier:
            out.push_back(pattern.text);
            break;
        case NodeKind::Assign:
            pattern_names(*pattern.children.front(), out);
            break;
        case NodeKind::Property:
            if (!pattern.children.empty())
                pattern_names(*pattern.children.back(), out);
            break;
        case NodeKind::Spread:
        case NodeKind::Object:
        case NodeKind::Expression:
            for (const auto& child : pattern.children)
                pattern_names(*child, out);
            break;
        default:
            break;
        }
    }

    // Pass 1: declarations, parameters and function declarations per scope.
    void declare(std::size_t a, const Node& node, int current)
    {
        if (node.kind == NodeKind::Function) {
            const auto& info = m_asts[a].functions[static_cast<std::size_t>(node.function)];
            if (info.kind == FunctionKind::Declaration && info.name && !info.name_inferred)
                scope(a, current)[*info.name].functions.insert(global_id(a, node.function));
            for (const auto& param : info.params)
                scope(a, node.function)[param].value = true;
            for (const auto& child : node.children)
                declare(a, *child, node.function);
            return;
        }
        if (node.kind == NodeKind::Declarator) {
            const Node& target = *node.children.front();
            const Node* init = node.children.size() > 1 ? node.children[1].get() : nullptr;
            if (target.kind == NodeKind::Identifier && init && init->kind == NodeKind::Function) {
                scope(a, current)[target.text].functions.insert(global_id(a, init->function));
            } else {
                std::vector<std::string> names;
                pattern_names(target, names);
                for (const auto& name : names)
                    scope(a, current)[name].value = true;
            }
        }
        for (const auto& child : node.children)
            declare(a, *child, current);
    }

    // A named function expression sees its own name unless its scope rebinds it.
    void bind_named_expressions(std::size_t a)
    {
        const auto& functions = m_asts[a].functions;
        for (std::size_t f = 0; f < functions.size(); ++f) {
            const auto& info = functions[f];
            if (info.kind != FunctionKind::Expression || !info.name || info.name_inferred)
                continue;
            Scope& own = scope(a, static_cast<int>(f));
            if (!own.contains(*info.name))
                own[*info.name].functions.insert(global_id(a, static_cast<int>(f)));
        }
    }

    std::set<int> function_values(std::size_t a, int current, const Node& value)
    {
        if (value.kind == NodeKind::Function)
            return {global_id(a, value.function)};
        if (value.kind == NodeKind::Identifier) {
            if (const Binding* binding = lookup(a, current, value.text))
                return binding->functions;
        }
        return {};
    }

    // Pass 2: `g = fn` and `const h = g` add functions to existing bindings.
    void assign(std::size_t a, const Node& node, int current)
    {
        if (node.kind == NodeKind::Function) {
            for (const auto& child : node.children)
                assign(a, *child, node.function);
            return;
        }
        if (node.kind == NodeKind::Assign && node.text == "=" && node.children.front()->kind == NodeKind::Identifier) {
            const std::string& name = node.children.front()->text;
            auto functions = function_values(a, current, *node.children.back());
            if (!functions.empty()) {
                Binding* binding = lookup(a, current, name);
                if (!binding)
                    binding = &scope(a, -1)[name];  // implicit global
                binding->functions.insert(functions.begin(), functions.end());
            }
        }
        if (node.kind == NodeKind::Declarator && node.children.size() > 1 &&
            node.children.front()->kind == NodeKind::Identifier && node.children[1]->kind == NodeKind::Identifier) {
            auto functions = function_values(a, current, *node.children[1]);
            if (!functions.empty())
                scope(a, current)[node.text].functions.insert(functions.begin(), functions.end());
        }
        for (const auto& child : node.children)
            assign(a, *child, current);
    }

    // Pass 3: the field table, property name -> functions stored under it.
    void collect_fields(std::size_t a, const Node& node, int current)
    {
        if (node.kind == NodeKind::Function) {
            for (const auto& child : node.children)
                collect_fields(a, *child, node.function);
            return;
        }
        if (node.kind == NodeKind::Property && !node.computed && !node.children.empty()) {
            auto functions = function_values(a, current, *node.children.back());
            m_fields[node.text].insert(functions.begin(), functions.end());
        }
        if (node.kind == NodeKind::Assign && node.text == "=") {
            const Node& target = *node.children.front();
            if (target.kind == NodeKind::Member && !target.computed) {
                auto functions = function_values(a, current, *node.children.back());
                m_fields[target.text].insert(functions.begin(), functions.end());
            }
        }
        for (const auto& child : node.children)
            collect_fields(a, *child, current);
    }

    static std::string callee_text(const Node& callee)
    {
        switch (callee.kind) {
        case NodeKind::Identifier:
            return callee.text;
        case NodeKind::This:
            return "this";
        case NodeKind::Member: {
            std::string object = callee_text(*callee.children.front());
            return callee.computed ? object + "[...]" : object + "." + callee.text;
        }
        case NodeKind::Call:
            return callee_text(*callee.children.front()) + "(...)";
        case NodeKind::Function:
            return "function";
        default:
            return "<expression>";
        }
    }

    SourcePosition caller_of(std::size_t a, int current)
    {
        if (current >= 0)
            return m_asts[a].functions[static_cast<std::size_t>(current)].id;
        return {m_asts[a].file, m_asts[a].line_count + 1, 1};
    }

    // Pass 4: call sites.
    void calls(std::size_t a, const Node& node, int current)
    {
        if (node.kind == NodeKind::Function) {
            for (const auto& child : node.children)
                calls(a, *child, node.function);
            return;
        }
        if (node.kind == NodeKind::Call || node.kind == NodeKind::New)
            resolve_call(a, node, current);
        for (const auto& child : node.children)
            calls(a, *child, current);
    }

    void resolve_call(std::size_t a, const Node& call, int current)
    {
        const Node& callee = *call.children.front();
        CallSite site;
        site.site = {m_asts[a].file, call.line, call.column};
        site.caller = caller_of(a, current);
        site.callee = callee_text(callee);

        std::set<int> targets;
        switch (callee.kind) {
        case NodeKind::Identifier:
            if (const Binding* binding = lookup(a, current, callee.text)) {
                if (binding->functions.empty())
                    site.unresolved = UnresolvedReason::DynamicDispatch;
                else
                    targets = binding->functions;
            } else if (callee.text == "eval" || callee.text == "Function") {
                site.unresolved = UnresolvedReason::EvalLike;
            } else {
                site.unresolved = UnresolvedReason::UnknownName;
            }
            break;
        case NodeKind::Member:
            if (callee.computed) {
                site.unresolved = UnresolvedReason::DynamicDispatch;
            } else if (callee.text == "call" || callee.text == "apply" || callee.text == "bind") {
                site.unresolved = UnresolvedReason::EvalLike;
            } else if (auto it = m_fields.find(callee.text); it != m_fields.end() && !it->second.empty()) {
                targets = it->second;
            } else {
                site.unresolved = UnresolvedReason::UnknownName;
            }
            break;
        case NodeKind::Function:
            targets.insert(global_id(a, callee.function));
            break;
        default:
            site.unresolved = UnresolvedReason::DynamicDispatch;
        }

        for (int id : targets)
            site.targets.push_back(m_ids[static_cast<std::size_t>(id)]);
        std::sort(site.targets.begin(), site.targets.end());
        if (site.unresolved)
            m_result.unresolved.push_back({site.site, site.callee, *site.unresolved});
        m_result.sites.push_back(std::move(site));
    }

    StaticExtraction finish()
    {
        GraphBuilder builder;
        builder.add_tool(std::string(kStaticToolId));
        for (std::size_t a = 0; a < m_asts.size(); ++a) {
            const auto& ast = m_asts[a];
            for (const auto& info : ast.functions) {
                builder.add_node({info.id, false, false, info.name});
                m_result.spans.push_back({info.id, std::max(info.end_line, info.id.line)});
            }
            for (const auto& message : ast.diagnostics)
                m_result.diagnostics.push_back(message);
        }
        const ToolSet found_by{std::string(kStaticToolId)};
        for (const auto& site : m_result.sites) {
            if (site.targets.empty())
                continue;
            if (!builder.has_node(site.caller))
                builder.add_node({site.caller, true, false, std::string(kTopLevelName)});
            for (const auto& target : site.targets)
                builder.add_edge({site.caller, target, found_by, 1.0});
        }
        m_result.graph = builder.build();
        return std::move(m_result);
    }

    std::span<const JsSubsetAst> m_asts;
    std::vector<int> m_offsets;
    std::vector<SourcePosition> m_ids;
    std::vector<std::vector<Scope>> m_scopes;
    std::map<std::string, std::set<int>> m_fields;
    StaticExtraction m_result;
};

}  // namespace

StaticExtraction extract_call_graph(std::span<const js::JsSubsetAst> asts)
{
    return Extractor(asts).run();
}

StaticExtraction extract_static_directory(const std::string& root)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(root))
        throw Error("source directory not found: " + root);

    std::vector<std::string> files;
    for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
        const auto name = it->path().filename().string();
        if (it->is_directory()) {
            if (name == "node_modules" || name.starts_with('.'))
                it.disable_recursion_pending();
            continue;
        }
        const auto ext = it->path().extension().string();
        if (it->is_regular_file() && (ext == ".js" || ext == ".mjs" || ext == ".cjs"))
            files.push_back(normalize_path(fs::relative(it->path(), root).generic_string()));
    }
    std::sort(files.begin(), files.end());

    std::vector<js::JsSubsetAst> asts;
    std::vector<std::string> failures;
    for (const auto& file : files) {
        const std::string source = read_file((fs::path(root) / file).string());
        try {
            asts.push_back(js::parse_js_subset(source, file));
        } catch (const ParseError& e) {
            failures.push_back(file + ": skipped, " + e.what());
        }
    }
    StaticExtraction result = extract_call_graph(asts);
    result.diagnostics.insert(result.diagnostics.begin(), failures.begin(), failures.end());
    return result;
}

}  // namespace callfuse

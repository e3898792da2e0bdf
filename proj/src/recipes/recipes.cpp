#include "wfforge/recipes.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "../json_reader.hpp"
#include "wfforge/rng.hpp"

namespace wfforge::recipes {

using detail::Reader;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::optional<std::size_t> TypedDag::index_of(std::string_view id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id == id) return i;
    }
    return std::nullopt;
}

std::vector<std::vector<std::size_t>> TypedDag::children() const {
    std::vector<std::vector<std::size_t>> out(nodes.size());
    for (auto [p, c] : edges) out[p].push_back(c);
    for (auto& v : out) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return out;
}

std::vector<std::vector<std::size_t>> TypedDag::parents() const {
    std::vector<std::vector<std::size_t>> out(nodes.size());
    for (auto [p, c] : edges) out[c].push_back(p);
    for (auto& v : out) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return out;
}

bool TypedDag::acyclic() const {
    const auto kids = children();
    std::vector<std::size_t> indegree(size());
    for (const auto& v : kids) {
        for (auto c : v) ++indegree[c];
    }
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < size(); ++i) {
        if (indegree[i] == 0) stack.push_back(i);
    }
    std::size_t seen = 0;
    while (!stack.empty()) {
        const auto i = stack.back();
        stack.pop_back();
        ++seen;
        for (auto c : kids[i]) {
            if (--indegree[c] == 0) stack.push_back(c);
        }
    }
    return seen == size();
}

std::map<std::string, std::size_t> TypedDag::category_counts() const {
    std::map<std::string, std::size_t> out;
    for (const auto& n : nodes) ++out[n.category];
    return out;
}

namespace {

void check_dag(const TypedDag& dag, const std::string& what) {
    std::set<std::string_view> ids;
    for (const auto& n : dag.nodes) {
        if (n.id.empty() || n.category.empty()) {
            throw InvalidArgument(what + ": node with empty id or category");
        }
        if (!ids.insert(n.id).second) throw InvalidArgument(what + ": duplicate node id " + n.id);
    }
    for (auto [p, c] : dag.edges) {
        if (p >= dag.size() || c >= dag.size()) throw InvalidArgument(what + ": edge out of range");
        if (p == c) throw InvalidArgument(what + ": self edge on " + dag.nodes[p].id);
    }
    if (!dag.acyclic()) throw InvalidArgument(what + ": graph has a cycle");
}

// Base graph plus one copy of `pattern`, used to check attachment acyclicity.
TypedDag with_copy(const TypedDag& base, const Pattern& pattern) {
    TypedDag g = base;
    const auto offset = g.size();
    for (const auto& n : pattern.graph.nodes) g.nodes.push_back({"~" + n.id, n.category});
    for (auto [p, c] : pattern.graph.edges) g.edges.emplace_back(offset + p, offset + c);
    for (auto [b, p] : pattern.attach_in) g.edges.emplace_back(b, offset + p);
    for (auto [p, b] : pattern.attach_out) g.edges.emplace_back(offset + p, b);
    return g;
}

} // namespace

void Recipe::check() const {
    if (name.empty()) throw InvalidArgument("recipe without a name");
    check_dag(base_graph, "recipe " + name + " base graph");
    if (base_graph.size() == 0) throw InvalidArgument("recipe " + name + ": empty base graph");
    for (const auto& p : patterns) {
        const std::string what = "recipe " + name + " pattern " + p.name;
        check_dag(p.graph, what);
        if (p.graph.size() == 0) throw InvalidArgument(what + ": empty pattern");
        for (auto [b, n] : p.attach_in) {
            if (b >= base_graph.size() || n >= p.graph.size()) {
                throw InvalidArgument(what + ": attachment point not in graph");
            }
        }
        for (auto [n, b] : p.attach_out) {
            if (b >= base_graph.size() || n >= p.graph.size()) {
                throw InvalidArgument(what + ": attachment point not in graph");
            }
        }
        if (!with_copy(base_graph, p).acyclic()) {
            throw InvalidArgument(what + ": attachment creates a cycle");
        }
    }
}

// ---------------------------------------------------------------------------
// JSON

namespace {

ordered_json dag_nodes_json(const TypedDag& dag) {
    ordered_json tasks = ordered_json::array();
    for (const auto& n : dag.nodes) tasks.push_back({{"id", n.id}, {"category", n.category}});
    return tasks;
}

ordered_json pairs_json(const std::vector<std::pair<std::size_t, std::size_t>>& pairs, const TypedDag& from,
                        const TypedDag& to) {
    ordered_json out = ordered_json::array();
    for (auto [a, b] : pairs) out.push_back({from.nodes[a].id, to.nodes[b].id});
    return out;
}

TypedDag read_nodes(const json& node, const std::string& path) {
    if (!node.is_array()) Reader::fail(path, "expected an array");
    TypedDag dag;
    for (std::size_t i = 0; i < node.size(); ++i) {
        const std::string p = path + "/" + std::to_string(i);
        const auto& t = Reader::object(node[i], p, {"id", "category"});
        dag.nodes.push_back({Reader::string(Reader::member(t, p, "id"), p + "/id"),
                             Reader::string(Reader::member(t, p, "category"), p + "/category")});
    }
    return dag;
}

std::vector<std::pair<std::size_t, std::size_t>> read_pairs(const json& node, const std::string& path,
                                                            const TypedDag& from, const TypedDag& to) {
    if (!node.is_array()) Reader::fail(path, "expected an array");
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
        const std::string p = path + "/" + std::to_string(i);
        const auto ids = Reader::strings(node[i], p);
        if (ids.size() != 2) Reader::fail(p, "expected a pair of ids");
        const auto a = from.index_of(ids[0]);
        if (!a) Reader::fail(p + "/0", "unknown task id " + ids[0]);
        const auto b = to.index_of(ids[1]);
        if (!b) Reader::fail(p + "/1", "unknown task id " + ids[1]);
        out.emplace_back(*a, *b);
    }
    return out;
}

} // namespace

std::string recipe_to_json(const Recipe& recipe) {
    ordered_json doc;
    doc["name"] = recipe.name;
    doc["base_graph"] = {{"tasks", dag_nodes_json(recipe.base_graph)},
                         {"edges", pairs_json(recipe.base_graph.edges, recipe.base_graph, recipe.base_graph)}};
    ordered_json patterns = ordered_json::array();
    for (const auto& p : recipe.patterns) {
        ordered_json entry;
        entry["name"] = p.name;
        entry["tasks"] = dag_nodes_json(p.graph);
        entry["edges"] = pairs_json(p.graph.edges, p.graph, p.graph);
        entry["attach_in"] = pairs_json(p.attach_in, recipe.base_graph, p.graph);
        entry["attach_out"] = pairs_json(p.attach_out, p.graph, recipe.base_graph);
        patterns.push_back(std::move(entry));
    }
    doc["patterns"] = std::move(patterns);
    return doc.dump(2) + "\n";
}

Recipe recipe_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed recipe JSON: ") + e.what());
    }
    Recipe r;
    Reader::object(doc, "", {"name", "base_graph", "patterns"});
    r.name = Reader::string(Reader::member(doc, "", "name"), "/name");
    const auto& base = Reader::object(Reader::member(doc, "", "base_graph"), "/base_graph", {"tasks", "edges"});
    r.base_graph = read_nodes(Reader::member(base, "/base_graph", "tasks"), "/base_graph/tasks");
    r.base_graph.edges =
        read_pairs(Reader::member(base, "/base_graph", "edges"), "/base_graph/edges", r.base_graph, r.base_graph);
    const auto& patterns = Reader::member(doc, "", "patterns");
    if (!patterns.is_array()) Reader::fail("/patterns", "expected an array");
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        const std::string path = "/patterns/" + std::to_string(i);
        const auto& node =
            Reader::object(patterns[i], path, {"name", "tasks", "edges", "attach_in", "attach_out"});
        Pattern p;
        p.name = Reader::string(Reader::member(node, path, "name"), path + "/name");
        p.graph = read_nodes(Reader::member(node, path, "tasks"), path + "/tasks");
        p.graph.edges = read_pairs(Reader::member(node, path, "edges"), path + "/edges", p.graph, p.graph);
        p.attach_in =
            read_pairs(Reader::member(node, path, "attach_in"), path + "/attach_in", r.base_graph, p.graph);
        p.attach_out =
            read_pairs(Reader::member(node, path, "attach_out"), path + "/attach_out", p.graph, r.base_graph);
        r.patterns.push_back(std::move(p));
    }
    try {
        r.check();
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
    return r;
}

Recipe load_recipe(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open recipe file " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return recipe_from_json(text.str());
}

Recipe resolve_recipe(const std::string& name_or_path) {
    std::string lower = name_or_path;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    const auto names = builtin_recipe_names();
    if (std::find(names.begin(), names.end(), lower) != names.end()) return builtin_recipe(lower);
    return load_recipe(name_or_path);
}

// ---------------------------------------------------------------------------
// Generation

namespace {

// Pattern index of each replication step in order. Every round visits all
// patterns once in a seeded shuffled order; stops once num_tasks is reached.
std::vector<std::size_t> replication_order(const Recipe& recipe, std::uint64_t num_tasks, std::uint64_t seed) {
    std::vector<std::size_t> order;
    if (recipe.patterns.empty()) return order;
    Rng rng(derive_seed(seed, "replication"));
    std::uint64_t size = recipe.min_tasks();
    std::vector<std::size_t> round(recipe.patterns.size());
    while (size < num_tasks) {
        std::iota(round.begin(), round.end(), std::size_t{0});
        for (std::size_t i = round.size(); i > 1; --i) {
            std::swap(round[i - 1], round[bounded(rng, i)]);
        }
        for (auto p : round) {
            order.push_back(p);
            size += recipe.patterns[p].graph.size();
            if (size >= num_tasks) break;
        }
    }
    return order;
}

std::string task_id(const std::string& category, std::size_t index) {
    char digits[32];
    std::snprintf(digits, sizeof digits, "%08zu", index);
    return category + "_" + digits;
}

} // namespace

std::vector<std::uint64_t> replication_sizes(const Recipe& recipe, std::uint64_t num_tasks, std::uint64_t seed) {
    std::vector<std::uint64_t> sizes{recipe.min_tasks()};
    for (auto p : replication_order(recipe, num_tasks, seed)) {
        sizes.push_back(sizes.back() + recipe.patterns[p].graph.size());
    }
    return sizes;
}

WorkflowSpec generate(const GenerationRequest& request) {
    const Recipe& recipe = request.recipe;
    recipe.check();
    if (request.num_tasks < recipe.min_tasks()) {
        throw InvalidArgument("requested " + std::to_string(request.num_tasks) + " tasks but recipe " + recipe.name +
                              " has min_tasks = " + std::to_string(recipe.min_tasks()));
    }

    auto order = replication_order(recipe, request.num_tasks, request.seed);
    std::uint64_t size = recipe.min_tasks();
    for (auto p : order) size += recipe.patterns[p].graph.size();
    if (size > request.num_tasks && !order.empty()) {
        const std::uint64_t below = size - recipe.patterns[order.back()].graph.size();
        if (request.num_tasks - below <= size - request.num_tasks) order.pop_back();
    }

    TypedDag dag = recipe.base_graph;
    for (auto p : order) {
        const Pattern& pattern = recipe.patterns[p];
        const auto offset = dag.size();
        for (const auto& n : pattern.graph.nodes) dag.nodes.push_back(n);
        for (auto [a, b] : pattern.graph.edges) dag.edges.emplace_back(offset + a, offset + b);
        for (auto [base, n] : pattern.attach_in) dag.edges.emplace_back(base, offset + n);
        for (auto [n, base] : pattern.attach_out) dag.edges.emplace_back(offset + n, base);
    }

    WorkflowSpec spec;
    spec.name = recipe.name;
    spec.provenance = {recipe.name, request.num_tasks, request.footprint_bytes.value_or(0), request.seed};
    std::vector<std::string> ids;
    ids.reserve(dag.size());
    for (std::size_t i = 0; i < dag.size(); ++i) ids.push_back(task_id(dag.nodes[i].category, i));

    const auto parents = dag.parents();
    spec.tasks.reserve(dag.size());
    spec.files.reserve(dag.size() + 16);
    for (std::size_t i = 0; i < dag.size(); ++i) {
        TaskSpec task;
        task.id = ids[i];
        task.category = dag.nodes[i].category;
        auto it = request.category_params.find(task.category);
        task.params = it != request.category_params.end() ? it->second : request.default_params;
        if (parents[i].empty()) {
            task.inputs.push_back(task.id + "_in");
            spec.files.push_back({task.inputs.back(), std::nullopt});
        }
        for (auto p : parents[i]) task.inputs.push_back(ids[p] + "_out");
        task.outputs.push_back(task.id + "_out");
        spec.files.push_back({task.outputs.back(), std::nullopt});
        spec.tasks.push_back(std::move(task));
    }
    if (request.footprint_bytes) return distribute_footprint(spec, *request.footprint_bytes);
    return spec;
}

WorkflowSpec distribute_footprint(const WorkflowSpec& spec, std::uint64_t footprint_bytes) {
    const std::uint64_t n = spec.files.size();
    if (footprint_bytes < n) {
        throw InvalidArgument("footprint of " + std::to_string(footprint_bytes) + " bytes is smaller than the " +
                              std::to_string(n) + " files it must cover");
    }
    WorkflowSpec out = spec;
    if (n == 0) return out;
    std::vector<std::size_t> by_id(n);
    std::iota(by_id.begin(), by_id.end(), std::size_t{0});
    std::sort(by_id.begin(), by_id.end(),
              [&](std::size_t a, std::size_t b) { return out.files[a].id < out.files[b].id; });
    const std::uint64_t share = footprint_bytes / n;
    const std::uint64_t extra = footprint_bytes % n;
    for (std::uint64_t rank = 0; rank < n; ++rank) {
        out.files[by_id[rank]].size_bytes = share + (rank < extra ? 1 : 0);
    }
    return out;
}

TypedDag typed_dag_from_spec(const WorkflowSpec& spec) {
    TypedDag dag;
    for (const auto& t : spec.tasks) dag.nodes.push_back({t.id, t.category});
    const TaskGraph graph = build_task_graph(spec);
    for (std::size_t i = 0; i < graph.size(); ++i) {
        for (auto c : graph.children[i]) dag.edges.emplace_back(i, c);
    }
    return dag;
}

} // namespace wfforge::recipes

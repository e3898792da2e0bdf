#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wfforge/wfspec.hpp"

namespace wfforge::recipes {

/// Directed acyclic graph whose nodes carry a task category.
struct TypedDag {
    struct Node {
        std::string id;
        std::string category;

        friend bool operator==(const Node&, const Node&) = default;
    };
    std::vector<Node> nodes;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // parent -> child

    std::size_t size() const { return nodes.size(); }
    std::optional<std::size_t> index_of(std::string_view id) const;
    std::vector<std::vector<std::size_t>> children() const;
    std::vector<std::vector<std::size_t>> parents() const;
    bool acyclic() const;
    std::map<std::string, std::size_t> category_counts() const;

    friend bool operator==(const TypedDag&, const TypedDag&) = default;
};

/// Replicable sub-DAG. Each copy is wired to the base graph through the
/// attachment edges: attach_in links base -> pattern, attach_out pattern -> base.
struct Pattern {
    std::string name;
    TypedDag graph;
    std::vector<std::pair<std::size_t, std::size_t>> attach_in;   // (base node, pattern node)
    std::vector<std::pair<std::size_t, std::size_t>> attach_out;  // (pattern node, base node)

    friend bool operator==(const Pattern&, const Pattern&) = default;
};

struct Recipe {
    std::string name;
    TypedDag base_graph;
    std::vector<Pattern> patterns;

    std::size_t min_tasks() const { return base_graph.size(); }
    /// Throws InvalidArgument when an invariant does not hold.
    void check() const;

    friend bool operator==(const Recipe&, const Recipe&) = default;
};

Recipe recipe_from_json(std::string_view text);
std::string recipe_to_json(const Recipe& recipe);
Recipe load_recipe(const std::string& path);

/// Names of the recipes compiled into the library.
std::vector<std::string> builtin_recipe_names();
/// Built-in recipe by (case-insensitive) name; throws InvalidArgument.
Recipe builtin_recipe(std::string_view name);
/// A built-in name, otherwise a path to a recipe file.
Recipe resolve_recipe(const std::string& name_or_path);

struct GenerationRequest {
    Recipe recipe;
    std::uint64_t num_tasks = 0;
    std::optional<std::uint64_t> footprint_bytes;
    TaskParams default_params;
    std::map<std::string, TaskParams> category_params;
    std::uint64_t seed = 0;
};

/// Task counts reachable by the seeded replication order, starting at the
/// base graph and growing one pattern copy at a time until `num_tasks` is
/// reached or passed.
std::vector<std::uint64_t> replication_sizes(const Recipe& recipe, std::uint64_t num_tasks, std::uint64_t seed);

/// Builds a spec with the reachable task count nearest to the request
/// (ties go to the smaller count). Task ids are <category>_<index:08>; each
/// task writes <id>_out and tasks without parents read <id>_in.
WorkflowSpec generate(const GenerationRequest& request);

/// Spreads the footprint uniformly over files in id order; the first
/// (footprint mod F) files get one extra byte.
WorkflowSpec distribute_footprint(const WorkflowSpec& spec, std::uint64_t footprint_bytes);

/// Task graph of a spec with categories attached.
TypedDag typed_dag_from_spec(const WorkflowSpec& spec);

/// Signature-hash pattern detector. The smallest instance becomes the base
/// graph; repeated connected components of tasks whose categories change
/// count across instances become patterns.
Recipe detect_patterns(const std::vector<TypedDag>& instances, std::string name = "detected");

} // namespace wfforge::recipes

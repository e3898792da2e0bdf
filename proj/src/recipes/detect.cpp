#include <algorithm>
#include <map>
#include <set>

#include "wfforge/recipes.hpp"

namespace wfforge::recipes {

namespace {

std::vector<std::size_t> topo_order(const TypedDag& g) {
    const auto kids = g.children();
    std::vector<std::size_t> indegree(g.size());
    for (const auto& v : kids) {
        for (auto c : v) ++indegree[c];
    }
    std::set<std::size_t> ready;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (indegree[i] == 0) ready.insert(i);
    }
    std::vector<std::size_t> order;
    while (!ready.empty()) {
        const auto i = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(i);
        for (auto c : kids[i]) {
            if (--indegree[c] == 0) ready.insert(c);
        }
    }
    return order;
}

// Interns (category, sorted neighbour signatures) so equal structure gets an
// equal small integer without collisions.
class SignatureTable {
public:
    int intern(const std::string& category, std::vector<int> neighbours) {
        std::sort(neighbours.begin(), neighbours.end());
        auto [it, inserted] = ids_.try_emplace({category, std::move(neighbours)}, static_cast<int>(ids_.size()));
        return it->second;
    }

private:
    std::map<std::pair<std::string, std::vector<int>>, int> ids_;
};

struct Signatures {
    std::vector<int> down;  // category + sorted child signatures
    std::vector<int> up;    // category + sorted parent signatures
};

Signatures signatures(const TypedDag& g) {
    const auto order = topo_order(g);
    const auto kids = g.children();
    const auto pars = g.parents();
    SignatureTable down_table;
    SignatureTable up_table;
    Signatures s{std::vector<int>(g.size()), std::vector<int>(g.size())};
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        std::vector<int> child;
        for (auto c : kids[*it]) child.push_back(s.down[c]);
        s.down[*it] = down_table.intern(g.nodes[*it].category, std::move(child));
    }
    for (auto i : order) {
        std::vector<int> parent;
        for (auto p : pars[i]) parent.push_back(s.up[p]);
        s.up[i] = up_table.intern(g.nodes[i].category, std::move(parent));
    }
    return s;
}

std::vector<std::size_t> top_levels(const TypedDag& g) {
    const auto pars = g.parents();
    std::vector<std::size_t> level(g.size(), 0);
    for (auto i : topo_order(g)) {
        for (auto p : pars[i]) level[i] = std::max(level[i], level[p] + 1);
    }
    return level;
}

} // namespace

Recipe detect_patterns(const std::vector<TypedDag>& instances, std::string name) {
    if (instances.size() < 2) throw InvalidArgument("pattern detection needs at least two instances");
    for (const auto& g : instances) {
        if (!g.acyclic()) throw InvalidArgument("instance graph has a cycle");
        if (g.size() == 0) throw InvalidArgument("empty instance graph");
    }
    auto by_size = [](const TypedDag& a, const TypedDag& b) { return a.size() < b.size(); };
    const TypedDag& small = *std::min_element(instances.begin(), instances.end(), by_size);
    const TypedDag& large = *std::max_element(instances.begin(), instances.end(), by_size);

    const auto small_counts = small.category_counts();
    for (const auto& g : instances) {
        const auto counts = g.category_counts();
        const bool shared = std::any_of(counts.begin(), counts.end(),
                                        [&](const auto& kv) { return small_counts.contains(kv.first); });
        if (!shared) throw InvalidArgument("instances have disjoint task categories");
    }

    Recipe recipe;
    recipe.name = std::move(name);
    recipe.base_graph = small;

    std::set<std::string> growing;
    for (const auto& [category, n] : large.category_counts()) {
        auto it = small_counts.find(category);
        if (n > (it == small_counts.end() ? 0 : it->second)) growing.insert(category);
    }
    if (growing.empty()) return recipe;

    const auto sig = signatures(large);
    std::map<std::pair<int, int>, std::size_t> class_size;
    for (std::size_t i = 0; i < large.size(); ++i) ++class_size[{sig.down[i], sig.up[i]}];
    std::vector<bool> candidate(large.size());
    for (std::size_t i = 0; i < large.size(); ++i) {
        candidate[i] = growing.contains(large.nodes[i].category) && class_size[{sig.down[i], sig.up[i]}] > 1;
    }

    // Connected components of the candidate subgraph, ignoring edge direction.
    std::vector<std::vector<std::size_t>> adjacent(large.size());
    for (auto [p, c] : large.edges) {
        if (candidate[p] && candidate[c]) {
            adjacent[p].push_back(c);
            adjacent[c].push_back(p);
        }
    }
    std::vector<int> component(large.size(), -1);
    std::vector<std::vector<std::size_t>> components;
    for (std::size_t i = 0; i < large.size(); ++i) {
        if (!candidate[i] || component[i] >= 0) continue;
        const int id = static_cast<int>(components.size());
        components.emplace_back();
        std::vector<std::size_t> stack{i};
        component[i] = id;
        while (!stack.empty()) {
            const auto n = stack.back();
            stack.pop_back();
            components.back().push_back(n);
            for (auto m : adjacent[n]) {
                if (component[m] < 0) {
                    component[m] = id;
                    stack.push_back(m);
                }
            }
        }
        std::sort(components.back().begin(), components.back().end());
    }

    // Components with the same multiset of node classes are copies of one unit.
    std::map<std::vector<std::pair<int, int>>, std::vector<std::size_t>> groups;
    std::vector<std::vector<std::pair<int, int>>> group_order;
    for (std::size_t c = 0; c < components.size(); ++c) {
        std::vector<std::pair<int, int>> key;
        for (auto n : components[c]) key.emplace_back(sig.down[n], sig.up[n]);
        std::sort(key.begin(), key.end());
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) group_order.push_back(key);
        it->second.push_back(c);
    }

    // Nodes outside a pattern map to base nodes by (category, top level).
    const auto small_levels = top_levels(small);
    const auto large_levels = top_levels(large);
    std::map<std::pair<std::string, std::size_t>, std::size_t> base_by_level;
    std::map<std::string, std::size_t> base_by_category;
    for (std::size_t i = 0; i < small.size(); ++i) {
        base_by_level.try_emplace({small.nodes[i].category, small_levels[i]}, i);
        base_by_category.try_emplace(small.nodes[i].category, i);
    }
    auto base_node = [&](std::size_t n) {
        if (auto it = base_by_level.find({large.nodes[n].category, large_levels[n]}); it != base_by_level.end()) {
            return it->second;
        }
        if (auto it = base_by_category.find(large.nodes[n].category); it != base_by_category.end()) {
            return it->second;
        }
        throw InvalidArgument("no base task of category " + large.nodes[n].category + " to attach a pattern to");
    };

    for (const auto& key : group_order) {
        const auto& members = groups[key];
        if (members.size() < 2) continue;
        const auto& nodes = components[members.front()];
        std::map<std::size_t, std::size_t> local;
        Pattern p;
        p.name = "pattern" + std::to_string(recipe.patterns.size());
        for (auto n : nodes) {
            local[n] = p.graph.size();
            p.graph.nodes.push_back(large.nodes[n]);
        }
        std::set<std::pair<std::size_t, std::size_t>> in, out;
        for (auto [a, b] : large.edges) {
            const bool a_in = local.contains(a);
            const bool b_in = local.contains(b);
            if (a_in && b_in) {
                p.graph.edges.emplace_back(local[a], local[b]);
            } else if (b_in) {
                in.emplace(base_node(a), local[b]);
            } else if (a_in) {
                out.emplace(local[a], base_node(b));
            }
        }
        p.attach_in.assign(in.begin(), in.end());
        p.attach_out.assign(out.begin(), out.end());
        recipe.patterns.push_back(std::move(p));
    }
    recipe.check();
    return recipe;
}

} // namespace wfforge::recipes

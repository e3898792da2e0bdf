#include "wfforge/wfspec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "json_reader.hpp"

namespace wfforge {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

std::string ValidationReport::to_string() const {
    std::string out;
    for (const auto& v : violations) {
        out += v.message;
        out += '\n';
    }
    return out;
}

ValidationFailed::ValidationFailed(ValidationReport report)
    : Error("invalid workflow spec:\n" + report.to_string()), report_(std::move(report)) {}

ValidationReport validate(const WorkflowSpec& spec) {
    ValidationReport report;
    auto violate = [&](const std::string& subject, std::string message) {
        report.violations.push_back({subject, std::move(message)});
    };

    std::unordered_set<std::string> file_ids;
    for (const auto& file : spec.files) {
        if (file.id.empty()) {
            violate(file.id, "file with empty id");
        } else if (!file_ids.insert(file.id).second) {
            violate(file.id, "duplicate file id " + file.id);
        }
    }

    std::unordered_set<std::string> task_ids;
    std::map<std::string, std::vector<std::string>> producers;
    for (const auto& task : spec.tasks) {
        if (task.id.empty()) {
            violate(task.id, "task with empty id");
        } else if (!task_ids.insert(task.id).second) {
            violate(task.id, "duplicate task id " + task.id);
        }
        const auto& p = task.params;
        if (p.cores < 1) {
            violate(task.id, "task " + task.id + ": cores must be >= 1");
        }
        if (!std::isfinite(p.cpuwork) || p.cpuwork < 0.0) {
            violate(task.id, "task " + task.id + ": cpuwork must be finite and non-negative");
        }
        if (!std::isfinite(p.memwork) || p.memwork < 0.0) {
            violate(task.id, "task " + task.id + ": memwork must be finite and non-negative");
        }

        std::set<std::string> seen_inputs;
        for (const auto& in : task.inputs) {
            if (!file_ids.contains(in)) {
                violate(task.id, "task " + task.id + " references unknown file " + in);
            }
            if (!seen_inputs.insert(in).second) {
                violate(task.id, "task " + task.id + " lists input " + in + " more than once");
            }
        }
        std::set<std::string> seen_outputs;
        for (const auto& out : task.outputs) {
            if (!file_ids.contains(out)) {
                violate(task.id, "task " + task.id + " references unknown file " + out);
            }
            if (!seen_outputs.insert(out).second) {
                violate(task.id, "task " + task.id + " lists output " + out + " more than once");
            }
            if (seen_inputs.contains(out)) {
                violate(task.id, "task " + task.id + " lists file " + out + " as both input and output");
            }
            producers[out].push_back(task.id);
        }
    }

    for (const auto& [file, tasks] : producers) {
        if (tasks.size() > 1) {
            std::string names;
            for (const auto& t : tasks) {
                names += (names.empty() ? "" : ", ") + t;
            }
            violate(file, "file " + file + " has two producers: " + names);
        }
    }

    const TaskGraph graph = build_task_graph(spec);
    if (!graph.topological_order()) {
        // Tasks left over after peeling every source belong to or hang off a cycle.
        std::vector<std::size_t> indegree(graph.size());
        for (std::size_t i = 0; i < graph.size(); ++i) {
            indegree[i] = graph.parents[i].size();
        }
        std::vector<std::size_t> stack;
        for (std::size_t i = 0; i < graph.size(); ++i) {
            if (indegree[i] == 0) stack.push_back(i);
        }
        std::vector<bool> removed(graph.size(), false);
        while (!stack.empty()) {
            const auto i = stack.back();
            stack.pop_back();
            removed[i] = true;
            for (auto c : graph.children[i]) {
                if (--indegree[c] == 0) stack.push_back(c);
            }
        }
        std::string names;
        std::string first;
        for (std::size_t i = 0; i < graph.size(); ++i) {
            if (!removed[i]) {
                if (first.empty()) first = spec.tasks[i].id;
                names += (names.empty() ? "" : ", ") + spec.tasks[i].id;
            }
        }
        violate(first, "cycle among tasks " + names);
    }
    return report;
}

std::uint64_t total_footprint(const WorkflowSpec& spec) {
    std::unordered_set<std::string_view> referenced;
    for (const auto& task : spec.tasks) {
        referenced.insert(task.inputs.begin(), task.inputs.end());
        referenced.insert(task.outputs.begin(), task.outputs.end());
    }
    std::uint64_t total = 0;
    std::unordered_set<std::string_view> counted;
    for (const auto& file : spec.files) {
        if (referenced.contains(file.id) && counted.insert(file.id).second) {
            total += file.size_bytes.value_or(0);
        }
    }
    return total;
}

std::optional<std::vector<std::size_t>> TaskGraph::topological_order() const {
    std::vector<std::size_t> indegree(size());
    for (std::size_t i = 0; i < size(); ++i) {
        indegree[i] = parents[i].size();
    }
    std::set<std::size_t> ready;
    for (std::size_t i = 0; i < size(); ++i) {
        if (indegree[i] == 0) ready.insert(i);
    }
    std::vector<std::size_t> order;
    order.reserve(size());
    while (!ready.empty()) {
        const auto i = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(i);
        for (auto c : children[i]) {
            if (--indegree[c] == 0) ready.insert(c);
        }
    }
    if (order.size() != size()) return std::nullopt;
    return order;
}

TaskGraph build_task_graph(const WorkflowSpec& spec) {
    TaskGraph graph;
    graph.parents.resize(spec.tasks.size());
    graph.children.resize(spec.tasks.size());

    std::unordered_map<std::string_view, std::vector<std::size_t>> producers;
    for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
        for (const auto& out : spec.tasks[i].outputs) {
            producers[out].push_back(i);
        }
    }
    for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
        for (const auto& in : spec.tasks[i].inputs) {
            auto it = producers.find(in);
            if (it == producers.end()) continue;
            for (auto p : it->second) {
                if (p == i) continue;
                graph.parents[i].push_back(p);
                graph.children[p].push_back(i);
            }
        }
    }
    auto normalize = [](std::vector<std::size_t>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    for (auto& v : graph.parents) normalize(v);
    for (auto& v : graph.children) normalize(v);
    return graph;
}

std::vector<TaskIoBytes> task_io_bytes(const WorkflowSpec& spec) {
    std::unordered_map<std::string_view, std::uint64_t> sizes;
    for (const auto& f : spec.files) sizes.emplace(f.id, f.size_bytes.value_or(0));
    auto sum = [&](const std::vector<std::string>& ids) {
        std::uint64_t total = 0;
        for (const auto& id : ids) {
            if (auto it = sizes.find(id); it != sizes.end()) total += it->second;
        }
        return total;
    };
    std::vector<TaskIoBytes> out;
    out.reserve(spec.tasks.size());
    for (const auto& t : spec.tasks) out.push_back({sum(t.inputs), sum(t.outputs)});
    return out;
}

// ---------------------------------------------------------------------------
// JSON

std::string serialize(const WorkflowSpec& spec) {
    if (auto report = validate(spec); !report.ok()) {
        throw ValidationFailed(std::move(report));
    }
    ordered_json doc;
    doc["name"] = spec.name;
    doc["provenance"] = {
        {"recipe", spec.provenance.recipe},
        {"requested_tasks", spec.provenance.requested_tasks},
        {"requested_footprint_bytes", spec.provenance.requested_footprint_bytes},
        {"seed", spec.provenance.seed},
    };
    ordered_json files = ordered_json::array();
    for (const auto& f : spec.files) {
        ordered_json entry;
        entry["id"] = f.id;
        if (f.size_bytes) {
            entry["size_bytes"] = *f.size_bytes;
        } else {
            entry["size_bytes"] = nullptr;
        }
        files.push_back(std::move(entry));
    }
    doc["files"] = std::move(files);
    ordered_json tasks = ordered_json::array();
    for (const auto& t : spec.tasks) {
        ordered_json entry;
        entry["id"] = t.id;
        entry["category"] = t.category;
        entry["cores"] = t.params.cores;
        entry["cpuwork"] = t.params.cpuwork;
        entry["memwork"] = t.params.memwork;
        entry["f"] = t.params.f.value();
        entry["inputs"] = t.inputs;
        entry["outputs"] = t.outputs;
        tasks.push_back(std::move(entry));
    }
    doc["tasks"] = std::move(tasks);
    return doc.dump(2) + "\n";
}

using detail::Reader;

WorkflowSpec parse(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }

    using R = Reader;
    R::object(doc, "", {"name", "provenance", "files", "tasks"});
    WorkflowSpec spec;
    spec.name = R::string(R::member(doc, "", "name"), "/name");

    const auto& prov = R::object(R::member(doc, "", "provenance"), "/provenance",
                                 {"recipe", "requested_tasks", "requested_footprint_bytes", "seed"});
    spec.provenance.recipe = R::string(R::member(prov, "/provenance", "recipe"), "/provenance/recipe");
    spec.provenance.requested_tasks =
        R::unsigned_integer(R::member(prov, "/provenance", "requested_tasks"), "/provenance/requested_tasks");
    spec.provenance.requested_footprint_bytes =
        R::unsigned_integer(R::member(prov, "/provenance", "requested_footprint_bytes"),
                            "/provenance/requested_footprint_bytes");
    spec.provenance.seed = R::unsigned_integer(R::member(prov, "/provenance", "seed"), "/provenance/seed");

    const auto& files = R::member(doc, "", "files");
    if (!files.is_array()) R::fail("/files", "expected an array");
    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string path = "/files/" + std::to_string(i);
        const auto& node = R::object(files[i], path, {"id", "size_bytes"});
        FileSpec file;
        file.id = R::string(R::member(node, path, "id"), path + "/id");
        const auto& size = R::member(node, path, "size_bytes");
        if (!size.is_null()) {
            file.size_bytes = R::unsigned_integer(size, path + "/size_bytes");
        }
        spec.files.push_back(std::move(file));
    }

    const auto& tasks = R::member(doc, "", "tasks");
    if (!tasks.is_array()) R::fail("/tasks", "expected an array");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const std::string path = "/tasks/" + std::to_string(i);
        const auto& node = R::object(tasks[i], path,
                                     {"id", "category", "cores", "cpuwork", "memwork", "f", "inputs", "outputs"});
        TaskSpec task;
        task.id = R::string(R::member(node, path, "id"), path + "/id");
        task.category = R::string(R::member(node, path, "category"), path + "/category");
        const auto cores = R::integer(R::member(node, path, "cores"), path + "/cores");
        if (cores < INT32_MIN || cores > INT32_MAX) R::fail(path + "/cores", "integer out of range");
        task.params.cores = static_cast<int>(cores);
        task.params.cpuwork = R::number(R::member(node, path, "cpuwork"), path + "/cpuwork");
        task.params.memwork = R::number(R::member(node, path, "memwork"), path + "/memwork");
        try {
            task.params.f = CpuFraction::from_double(R::number(R::member(node, path, "f"), path + "/f"));
        } catch (const InvalidArgument& e) {
            R::fail(path + "/f", e.what());
        }
        task.inputs = R::strings(R::member(node, path, "inputs"), path + "/inputs");
        task.outputs = R::strings(R::member(node, path, "outputs"), path + "/outputs");
        spec.tasks.push_back(std::move(task));
    }

    if (auto report = validate(spec); !report.ok()) {
        throw ValidationFailed(std::move(report));
    }
    return spec;
}

WorkflowSpec load_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open spec file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

void save_spec(const WorkflowSpec& spec, const std::string& path) {
    const std::string text = serialize(spec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write spec file " + path);
    out << text;
    if (!out) throw Error("failed writing spec file " + path);
}

} // namespace wfforge

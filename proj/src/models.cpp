#include "wfforge/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include <json.hpp>

namespace wfforge::models {

void PlatformModel::check() const {
    if (n == 0 || p == 0) throw InvalidArgument("platform needs at least one node and one core per node");
    if (!(std::isfinite(bw_read) && bw_read > 0) || !(std::isfinite(bw_write) && bw_write > 0)) {
        throw InvalidArgument("platform bandwidths must be positive");
    }
}

namespace {

void check_aggregate(const WorkloadAggregate& agg) {
    for (double v : {agg.data_read, agg.data_write, agg.work}) {
        if (!(std::isfinite(v) && v >= 0)) throw InvalidArgument("workload totals must be non-negative");
    }
}

} // namespace

double macro_no_overlap(const WorkloadAggregate& agg, const PlatformModel& plat) {
    plat.check();
    check_aggregate(agg);
    const double n = static_cast<double>(plat.n);
    return agg.data_read / (n * plat.bw_read) + agg.work / (n * static_cast<double>(plat.p)) +
           agg.data_write / (n * plat.bw_write);
}

double macro_overlap(const WorkloadAggregate& agg, const PlatformModel& plat) {
    plat.check();
    check_aggregate(agg);
    const double n = static_cast<double>(plat.n);
    return std::max(agg.work / (n * static_cast<double>(plat.p)),
                    agg.data_read / (n * plat.bw_read) + agg.data_write / (n * plat.bw_write));
}

namespace {

std::vector<std::size_t> level_vector(const WorkflowSpec& spec) {
    const TaskGraph graph = build_task_graph(spec);
    const auto order = graph.topological_order();
    if (!order) throw InvalidArgument("workflow has a cycle");
    std::vector<std::size_t> level(graph.size(), 0);
    for (auto i : *order) {
        for (auto p : graph.parents[i]) level[i] = std::max(level[i], level[p] + 1);
    }
    return level;
}

} // namespace

std::map<std::string, std::size_t> top_levels(const WorkflowSpec& spec) {
    const auto level = level_vector(spec);
    std::map<std::string, std::size_t> out;
    for (std::size_t i = 0; i < spec.tasks.size(); ++i) out[spec.tasks[i].id] = level[i];
    return out;
}

double per_level(const WorkflowSpec& spec, const PlatformModel& plat, const std::vector<TaskCost>& costs) {
    plat.check();
    std::unordered_map<std::string_view, const TaskCost*> by_id;
    for (const auto& c : costs) by_id[c.id] = &c;
    std::vector<const TaskCost*> task_cost;
    for (const auto& t : spec.tasks) {
        auto it = by_id.find(t.id);
        if (it == by_id.end()) throw InvalidArgument("no cost given for task " + t.id);
        task_cost.push_back(it->second);
    }

    const auto level = level_vector(spec);
    std::size_t depth = 0;
    for (auto l : level) depth = std::max(depth, l + 1);
    std::vector<std::vector<const TaskCost*>> levels(depth);
    for (std::size_t i = 0; i < level.size(); ++i) levels[level[i]].push_back(task_cost[i]);

    auto time_with = [&](const TaskCost& c, double m) {
        return c.w_t + static_cast<double>(c.read_bytes) * m / plat.bw_read +
               static_cast<double>(c.write_bytes) * m / plat.bw_write;
    };

    const std::uint64_t batch = plat.n * plat.p;
    double total = 0.0;
    for (auto& tasks : levels) {
        std::sort(tasks.begin(), tasks.end(), [&](const TaskCost* a, const TaskCost* b) {
            const double ta = time_with(*a, 1.0);
            const double tb = time_with(*b, 1.0);
            if (ta != tb) return ta > tb;
            return a->id < b->id;
        });
        for (std::size_t start = 0; start < tasks.size(); start += batch) {
            const std::size_t count = std::min<std::size_t>(batch, tasks.size() - start);
            const std::uint64_t m = std::min<std::uint64_t>(plat.p, (count + plat.n - 1) / plat.n);
            double sum = 0.0;
            for (std::size_t k = start; k < start + count; ++k) sum += time_with(*tasks[k], static_cast<double>(m));
            total += sum / static_cast<double>(count);
        }
    }
    return total;
}

double add_overhead(double estimate_seconds, double overhead_seconds) {
    if (!(estimate_seconds >= 0) || !(overhead_seconds >= 0)) {
        throw InvalidArgument("estimate and overhead must be non-negative");
    }
    return estimate_seconds + overhead_seconds;
}

std::uint64_t nodes_for_tasks(std::uint64_t num_tasks) {
    if (num_tasks == 0) throw InvalidArgument("number of tasks must be positive");
    // 0.1 * tasks / 40 == tasks / 400
    return std::max<std::uint64_t>(1, num_tasks / 400 + (num_tasks % 400 != 0));
}

std::vector<TaskCost> task_costs(const WorkflowSpec& spec, const WorkRates& rates) {
    if (rates.fixed_wt && !(*rates.fixed_wt >= 0)) throw InvalidArgument("w_t must be non-negative");
    if (!(rates.cpu_unit_seconds >= 0) || !(rates.mem_unit_seconds >= 0)) {
        throw InvalidArgument("unit times must be non-negative");
    }
    const auto io = task_io_bytes(spec);
    std::vector<TaskCost> out;
    out.reserve(spec.tasks.size());
    for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
        const auto& t = spec.tasks[i];
        const double w = rates.fixed_wt ? *rates.fixed_wt
                                        : std::max(t.params.cpuwork * rates.cpu_unit_seconds,
                                                   t.params.memwork * rates.mem_unit_seconds);
        out.push_back({t.id, w, io[i].read, io[i].write});
    }
    return out;
}

WorkloadAggregate aggregate(const std::vector<TaskCost>& costs) {
    WorkloadAggregate agg;
    for (const auto& c : costs) {
        agg.data_read += static_cast<double>(c.read_bytes);
        agg.data_write += static_cast<double>(c.write_bytes);
        agg.work += c.w_t;
    }
    return agg;
}

Model model_from_name(std::string_view name) {
    if (name == "macro-no-overlap") return Model::MacroNoOverlap;
    if (name == "macro-overlap") return Model::MacroOverlap;
    if (name == "per-level") return Model::PerLevel;
    throw InvalidArgument("unknown model " + std::string(name));
}

std::string_view model_name(Model m) {
    switch (m) {
    case Model::MacroNoOverlap: return "macro-no-overlap";
    case Model::MacroOverlap: return "macro-overlap";
    case Model::PerLevel: return "per-level";
    }
    return "?";
}

double Estimate::throughput() const {
    if (makespan_seconds <= 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(tasks) / makespan_seconds;
}

Estimate estimate(const WorkflowSpec& spec, Model model, const PlatformModel& plat, const WorkRates& rates,
                  double overhead_seconds) {
    const auto costs = task_costs(spec, rates);
    Estimate e;
    e.model = model;
    e.tasks = spec.tasks.size();
    e.platform = plat;
    switch (model) {
    case Model::MacroNoOverlap: e.model_seconds = macro_no_overlap(aggregate(costs), plat); break;
    case Model::MacroOverlap: e.model_seconds = macro_overlap(aggregate(costs), plat); break;
    case Model::PerLevel: e.model_seconds = per_level(spec, plat, costs); break;
    }
    e.overhead_seconds = overhead_seconds;
    e.makespan_seconds = add_overhead(e.model_seconds, overhead_seconds);
    return e;
}

std::string estimate_to_json(const Estimate& e) {
    nlohmann::ordered_json doc;
    doc["model"] = model_name(e.model);
    doc["tasks"] = e.tasks;
    doc["nodes"] = e.platform.n;
    doc["cores_per_node"] = e.platform.p;
    doc["bw_read"] = e.platform.bw_read;
    doc["bw_write"] = e.platform.bw_write;
    doc["model_seconds"] = e.model_seconds;
    doc["overhead_seconds"] = e.overhead_seconds;
    doc["makespan_seconds"] = e.makespan_seconds;
    const double tp = e.throughput();
    if (std::isfinite(tp)) {
        doc["throughput_tasks_per_second"] = tp;
    } else {
        doc["throughput_tasks_per_second"] = nullptr;
    }
    return doc.dump(2) + "\n";
}

} // namespace wfforge::models

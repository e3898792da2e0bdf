#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wfforge/wfspec.hpp"

namespace wfforge::models {

struct PlatformModel {
    std::uint64_t n = 1;       // nodes
    std::uint64_t p = 1;       // cores per node
    double bw_read = 1.0;      // bytes/s per node
    double bw_write = 1.0;     // bytes/s per node

    /// Throws InvalidArgument unless every field is positive and finite.
    void check() const;
};

struct WorkloadAggregate {
    double data_read = 0.0;   // bytes
    double data_write = 0.0;  // bytes
    double work = 0.0;        // core-seconds
};

struct TaskCost {
    std::string id;
    double w_t = 0.0;  // sequential compute seconds
    std::uint64_t read_bytes = 0;
    std::uint64_t write_bytes = 0;
};

double macro_no_overlap(const WorkloadAggregate& agg, const PlatformModel& plat);
double macro_overlap(const WorkloadAggregate& agg, const PlatformModel& plat);

/// Longest path, in edges, from an entry task.
std::map<std::string, std::size_t> top_levels(const WorkflowSpec& spec);

/// Level-by-level list scheduling in batches of n*p tasks sorted by
/// decreasing single-task time (ties by id). Within a batch each node runs
/// m tasks sharing its bandwidth; the batch takes the mean of its task times.
double per_level(const WorkflowSpec& spec, const PlatformModel& plat, const std::vector<TaskCost>& costs);

double add_overhead(double estimate_seconds, double overhead_seconds);

/// ceil(0.1 * num_tasks / 40), at least one.
std::uint64_t nodes_for_tasks(std::uint64_t num_tasks);

/// Per-task compute seconds. With a fixed w_t every task gets it; otherwise
/// w_t = max(cpuwork * cpu_unit_seconds, memwork * mem_unit_seconds).
struct WorkRates {
    std::optional<double> fixed_wt;
    double cpu_unit_seconds = 0.0;
    double mem_unit_seconds = 0.0;
};

/// Costs aligned with spec.tasks; I/O volumes from the file sizes.
std::vector<TaskCost> task_costs(const WorkflowSpec& spec, const WorkRates& rates);

/// Totals over all tasks; work is the sum of w_t.
WorkloadAggregate aggregate(const std::vector<TaskCost>& costs);

enum class Model { MacroNoOverlap, MacroOverlap, PerLevel };

Model model_from_name(std::string_view name);
std::string_view model_name(Model m);

struct Estimate {
    Model model = Model::PerLevel;
    std::uint64_t tasks = 0;
    PlatformModel platform;
    double model_seconds = 0.0;
    double overhead_seconds = 0.0;
    double makespan_seconds = 0.0;  // model + overhead

    double throughput() const;  // tasks per second
};

Estimate estimate(const WorkflowSpec& spec, Model model, const PlatformModel& plat, const WorkRates& rates,
                  double overhead_seconds = 0.0);

std::string estimate_to_json(const Estimate& e);

} // namespace wfforge::models

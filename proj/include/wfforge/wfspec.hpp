#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wfforge/error.hpp"
#include "wfforge/fraction.hpp"

namespace wfforge {

struct FileSpec {
    std::string id;
    // Unassigned until a footprint is distributed; serialized as null.
    std::optional<std::uint64_t> size_bytes;

    friend bool operator==(const FileSpec&, const FileSpec&) = default;
};

/// Compute-phase configuration of one task benchmark.
struct TaskParams {
    int cores = 1;
    double cpuwork = 0.0;
    double memwork = 0.0;
    CpuFraction f;

    friend bool operator==(const TaskParams&, const TaskParams&) = default;
};

struct TaskSpec {
    std::string id;
    std::string category;
    TaskParams params;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;

    friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct Provenance {
    std::string recipe;
    std::uint64_t requested_tasks = 0;
    std::uint64_t requested_footprint_bytes = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Complete benchmark description. Dependencies exist only through files:
/// a task consuming a file depends on the task producing it.
struct WorkflowSpec {
    std::string name;
    Provenance provenance;
    std::vector<FileSpec> files;
    std::vector<TaskSpec> tasks;

    friend bool operator==(const WorkflowSpec&, const WorkflowSpec&) = default;
};

struct Violation {
    std::string subject;  // offending task or file id
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    /// One violation per line.
    std::string to_string() const;
};

ValidationReport validate(const WorkflowSpec& spec);

/// Sum of sizes over distinct files referenced by at least one task.
/// Unassigned sizes count as zero.
std::uint64_t total_footprint(const WorkflowSpec& spec);

// Raised when parsed text is well-formed but violates spec invariants.
class ValidationFailed : public Error {
public:
    explicit ValidationFailed(ValidationReport report);
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

/// Deterministic JSON text (2-space indent, fixed key order, trailing newline).
/// Throws ValidationFailed if the spec is invalid.
std::string serialize(const WorkflowSpec& spec);

/// Parses and validates. Throws ParseError on malformed text or schema
/// mismatch (unknown keys are reported with their JSON pointer), then
/// ValidationFailed on invariant violations.
WorkflowSpec parse(std::string_view text);

WorkflowSpec load_spec(const std::string& path);
void save_spec(const WorkflowSpec& spec, const std::string& path);

/// Task-level dependency graph derived from file producer/consumer relations.
/// Indices refer to positions in WorkflowSpec::tasks; adjacency lists are
/// sorted and free of duplicates.
struct TaskGraph {
    std::vector<std::vector<std::size_t>> parents;
    std::vector<std::vector<std::size_t>> children;

    std::size_t size() const { return parents.size(); }
    /// Kahn order with ties broken by lowest index; nullopt on a cycle.
    std::optional<std::vector<std::size_t>> topological_order() const;
};

/// Builds the graph; files with several producers link every producer.
TaskGraph build_task_graph(const WorkflowSpec& spec);

struct TaskIoBytes {
    std::uint64_t read = 0;   // sum of input file sizes
    std::uint64_t write = 0;  // sum of output file sizes
};

/// Per-task I/O volumes, aligned with WorkflowSpec::tasks.
std::vector<TaskIoBytes> task_io_bytes(const WorkflowSpec& spec);

} // namespace wfforge

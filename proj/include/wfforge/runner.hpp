#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wfforge/wfspec.hpp"

namespace wfforge::runner {

enum class Format { PortableDag, MakeStyle };

Format format_from_name(std::string_view name);

/// Command-line settings shared by translate and execute_local. Paths inside
/// commands are relative to the working directory the commands run in.
struct CommandOptions {
    std::string taskbench = "taskbench";
    std::uint64_t seed = 0;                 // run seed; per-task seeds derive from it
    std::vector<std::string> extra_args;    // appended to every taskbench call
};

/// Seed handed to the taskbench process of `task_id`.
std::uint64_t task_seed(std::uint64_t run_seed, std::string_view task_id);

/// taskbench argv for one task (argv[0] is options.taskbench).
std::vector<std::string> task_command(const WorkflowSpec& spec, std::size_t task_index, const CommandOptions& options);

/// Artifact text. Throws InvalidArgument when a file size is unassigned.
std::string translate(const WorkflowSpec& spec, Format format, const CommandOptions& options = {});

struct Manifest {
    struct Task {
        std::string id;
        std::vector<std::string> command;
    };
    std::vector<Task> tasks;
    std::vector<std::pair<std::string, std::string>> edges;
};

/// Parses WFDAG 1 text; throws ParseError.
Manifest parse_manifest(std::string_view text);

/// Joins argv into one shell-safe line; single-quotes tokens that need it.
std::string quote_command(const std::vector<std::string>& argv);
std::vector<std::string> split_command(std::string_view line);

enum class TaskStatus { Ok, Failed, Aborted };

std::string_view status_name(TaskStatus s);

struct TaskTrace {
    std::string id;
    std::size_t cores = 1;
    double start = 0.0;  // seconds since run origin
    double end = 0.0;
    TaskStatus status = TaskStatus::Ok;
    int exit_code = 0;
    std::string report;  // KernelReport path relative to workdir
};

struct ExecutionTrace {
    std::size_t core_cap = 0;
    std::string host;
    std::uint64_t seed = 0;
    double makespan = 0.0;  // last end - first start over started tasks
    std::vector<TaskTrace> tasks;

    bool ok() const;
};

std::string trace_to_json(const ExecutionTrace& trace);
ExecutionTrace trace_from_json(std::string_view text);
ExecutionTrace load_trace(const std::string& path);

struct ExecOptions {
    std::filesystem::path taskbench;       // absolute path to the taskbench executable
    std::vector<std::string> extra_args;   // e.g. --oversubscribe, --array-bytes 1M
};

/// Runs every task as a taskbench process under `workdir` (data/, reports/,
/// logs/). Ready tasks start in non-increasing cpuwork+memwork order, ties
/// by id, whenever enough of the core_cap cores are free. A failing task
/// aborts its descendants; independent tasks still run.
ExecutionTrace execute_local(const WorkflowSpec& spec, std::size_t core_cap, const std::filesystem::path& workdir,
                             std::uint64_t seed, const ExecOptions& options);

struct FileCheck {
    std::string id;
    std::uint64_t expected = 0;
    std::optional<std::uint64_t> actual;  // absent when missing

    bool ok() const { return actual && *actual == expected; }
};

struct VerifyReport {
    std::vector<FileCheck> files;
    std::vector<std::string> warnings;  // undeclared files in data/

    std::vector<FileCheck> mismatches() const;
    std::string to_string() const;
};

VerifyReport verify_outputs(const WorkflowSpec& spec, const std::filesystem::path& workdir);

/// Host name and usable CPU count.
std::string host_description();

} // namespace wfforge::runner

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "../json_reader.hpp"
#include "wfforge/rng.hpp"
#include "wfforge/taskbench.hpp"
#include "wfforge/runner.hpp"

namespace wfforge::runner {

namespace fs = std::filesystem;
using detail::Reader;

std::string_view status_name(TaskStatus s) {
    switch (s) {
    case TaskStatus::Ok: return "ok";
    case TaskStatus::Failed: return "failed";
    case TaskStatus::Aborted: return "aborted";
    }
    return "?";
}

namespace {

TaskStatus status_from_name(const std::string& name, const std::string& path) {
    if (name == "ok") return TaskStatus::Ok;
    if (name == "failed") return TaskStatus::Failed;
    if (name == "aborted") return TaskStatus::Aborted;
    Reader::fail(path, "unknown status " + name);
}

} // namespace

bool ExecutionTrace::ok() const {
    return std::all_of(tasks.begin(), tasks.end(), [](const TaskTrace& t) { return t.status == TaskStatus::Ok; });
}

std::string trace_to_json(const ExecutionTrace& trace) {
    nlohmann::ordered_json doc;
    doc["core_cap"] = trace.core_cap;
    doc["host"] = trace.host;
    doc["seed"] = trace.seed;
    doc["makespan"] = trace.makespan;
    auto tasks = nlohmann::ordered_json::array();
    for (const auto& t : trace.tasks) {
        tasks.push_back({{"id", t.id},
                         {"cores", t.cores},
                         {"start", t.start},
                         {"end", t.end},
                         {"status", status_name(t.status)},
                         {"exit_code", t.exit_code},
                         {"report", t.report}});
    }
    doc["tasks"] = std::move(tasks);
    return doc.dump(2) + "\n";
}

ExecutionTrace trace_from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed trace JSON: ") + e.what());
    }
    ExecutionTrace trace;
    Reader::object(doc, "", {"core_cap", "host", "seed", "makespan", "tasks"});
    trace.core_cap = Reader::unsigned_integer(Reader::member(doc, "", "core_cap"), "/core_cap");
    trace.host = Reader::string(Reader::member(doc, "", "host"), "/host");
    trace.seed = Reader::unsigned_integer(Reader::member(doc, "", "seed"), "/seed");
    trace.makespan = Reader::number(Reader::member(doc, "", "makespan"), "/makespan");
    const auto& tasks = Reader::member(doc, "", "tasks");
    if (!tasks.is_array()) Reader::fail("/tasks", "expected an array");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const std::string p = "/tasks/" + std::to_string(i);
        const auto& t = Reader::object(tasks[i], p, {"id", "cores", "start", "end", "status", "exit_code", "report"});
        TaskTrace tt;
        tt.id = Reader::string(Reader::member(t, p, "id"), p + "/id");
        tt.cores = Reader::unsigned_integer(Reader::member(t, p, "cores"), p + "/cores");
        tt.start = Reader::number(Reader::member(t, p, "start"), p + "/start");
        tt.end = Reader::number(Reader::member(t, p, "end"), p + "/end");
        tt.status = status_from_name(Reader::string(Reader::member(t, p, "status"), p + "/status"), p + "/status");
        tt.exit_code = static_cast<int>(Reader::integer(Reader::member(t, p, "exit_code"), p + "/exit_code"));
        tt.report = Reader::string(Reader::member(t, p, "report"), p + "/report");
        if (tt.end < tt.start) Reader::fail(p, "end before start");
        trace.tasks.push_back(std::move(tt));
    }
    return trace;
}

ExecutionTrace load_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open trace file " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return trace_from_json(text.str());
}

std::string host_description() {
    char name[256] = {};
    if (gethostname(name, sizeof name - 1) != 0) std::strcpy(name, "unknown");
    return std::string(name) + " (" + std::to_string(bench::usable_cpus().size()) + " usable CPUs)";
}

namespace {

// Forks and execs argv inside `cwd` with stdout and stderr sent to `log`.
pid_t spawn(const std::vector<std::string>& argv, const fs::path& cwd, const fs::path& log) {
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    const std::string dir = cwd.string();
    const int fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw Error("cannot open log " + log.string() + ": " + std::strerror(errno));
    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(fd);
        throw Error(std::string("fork failed: ") + std::strerror(errno));
    }
    if (pid == 0) {
        if (::chdir(dir.c_str()) != 0 || ::dup2(fd, 1) < 0 || ::dup2(fd, 2) < 0) _exit(126);
        ::execv(args[0], args.data());
        _exit(127);
    }
    ::close(fd);
    return pid;
}

} // namespace

ExecutionTrace execute_local(const WorkflowSpec& spec, std::size_t core_cap, const fs::path& workdir,
                             std::uint64_t seed, const ExecOptions& options) {
    if (auto report = validate(spec); !report.ok()) throw ValidationFailed(std::move(report));
    for (const auto& f : spec.files) {
        if (!f.size_bytes) throw InvalidArgument("file " + f.id + " has no size assigned");
    }
    if (core_cap == 0) throw InvalidArgument("core cap must be positive");
    for (const auto& t : spec.tasks) {
        if (static_cast<std::size_t>(t.params.cores) > core_cap) {
            throw InvalidArgument("task " + t.id + " needs " + std::to_string(t.params.cores) +
                                  " cores but the cap is " + std::to_string(core_cap));
        }
    }
    if (!fs::is_regular_file(options.taskbench)) {
        throw Error("taskbench executable not found at " + options.taskbench.string());
    }

    const fs::path root = fs::absolute(workdir);
    for (const char* sub : {"data", "reports", "logs"}) fs::create_directories(root / sub);

    // Files no task produces are workflow inputs; create them up front.
    std::unordered_set<std::string> produced;
    for (const auto& t : spec.tasks) produced.insert(t.outputs.begin(), t.outputs.end());
    for (const auto& f : spec.files) {
        if (!produced.contains(f.id)) {
            bench::write_phase(root / "data" / f.id, *f.size_bytes, derive_seed(seed, "stage:" + f.id));
        }
    }

    CommandOptions command_options{fs::absolute(options.taskbench).string(), seed, options.extra_args};
    const TaskGraph graph = build_task_graph(spec);
    const std::size_t n = spec.tasks.size();

    ExecutionTrace trace;
    trace.core_cap = core_cap;
    trace.host = host_description();
    trace.seed = seed;
    trace.tasks.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        trace.tasks[i].id = spec.tasks[i].id;
        trace.tasks[i].cores = static_cast<std::size_t>(spec.tasks[i].params.cores);
        trace.tasks[i].status = TaskStatus::Aborted;
        trace.tasks[i].report = "reports/" + spec.tasks[i].id + ".json";
    }

    auto work = [&](std::size_t i) { return spec.tasks[i].params.cpuwork + spec.tasks[i].params.memwork; };
    auto before = [&](std::size_t a, std::size_t b) {
        if (work(a) != work(b)) return work(a) > work(b);
        return spec.tasks[a].id < spec.tasks[b].id;
    };
    std::set<std::size_t, decltype(before)> ready(before);
    std::vector<std::size_t> waiting(n);
    for (std::size_t i = 0; i < n; ++i) {
        waiting[i] = graph.parents[i].size();
        if (waiting[i] == 0) ready.insert(i);
    }

    using clock = std::chrono::steady_clock;
    const auto origin = clock::now();
    auto since_origin = [&] { return std::chrono::duration<double>(clock::now() - origin).count(); };

    std::unordered_map<pid_t, std::size_t> running;
    std::size_t free_cores = core_cap;
    while (!ready.empty() || !running.empty()) {
        for (auto it = ready.begin(); it != ready.end() && free_cores > 0;) {
            const std::size_t i = *it;
            if (trace.tasks[i].cores > free_cores) {
                ++it;
                continue;
            }
            const auto argv = task_command(spec, i, command_options);
            trace.tasks[i].start = since_origin();
            const pid_t pid = spawn(argv, root, root / "logs" / (spec.tasks[i].id + ".log"));
            running.emplace(pid, i);
            free_cores -= trace.tasks[i].cores;
            it = ready.erase(it);
        }
        if (running.empty()) break;

        int status = 0;
        const pid_t pid = ::waitpid(-1, &status, 0);
        if (pid < 0) {
            if (errno == EINTR) continue;
            throw Error(std::string("waitpid failed: ") + std::strerror(errno));
        }
        const double end = since_origin();
        auto found = running.find(pid);
        if (found == running.end()) continue;  // not one of ours
        const std::size_t i = found->second;
        running.erase(found);
        free_cores += trace.tasks[i].cores;

        TaskTrace& t = trace.tasks[i];
        t.end = end;
        t.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
        t.status = t.exit_code == 0 ? TaskStatus::Ok : TaskStatus::Failed;
        if (t.status != TaskStatus::Ok) continue;  // descendants never become ready
        for (auto c : graph.children[i]) {
            if (--waiting[c] == 0) ready.insert(c);
        }
    }

    double first = 0.0;
    double last = 0.0;
    bool any = false;
    for (const auto& t : trace.tasks) {
        if (t.status == TaskStatus::Aborted) continue;
        first = any ? std::min(first, t.start) : t.start;
        last = any ? std::max(last, t.end) : t.end;
        any = true;
    }
    trace.makespan = any ? last - first : 0.0;

    std::ofstream(root / "trace.json") << trace_to_json(trace);
    return trace;
}

std::vector<FileCheck> VerifyReport::mismatches() const {
    std::vector<FileCheck> out;
    std::copy_if(files.begin(), files.end(), std::back_inserter(out), [](const FileCheck& f) { return !f.ok(); });
    return out;
}

std::string VerifyReport::to_string() const {
    std::string text;
    for (const auto& f : mismatches()) {
        text += "mismatch " + f.id + ": expected " + std::to_string(f.expected) + " bytes, ";
        text += f.actual ? "found " + std::to_string(*f.actual) + "\n" : "missing\n";
    }
    for (const auto& w : warnings) text += "warning: " + w + "\n";
    return text;
}

VerifyReport verify_outputs(const WorkflowSpec& spec, const fs::path& workdir) {
    VerifyReport report;
    std::unordered_map<std::string, std::uint64_t> sizes;
    for (const auto& f : spec.files) sizes[f.id] = f.size_bytes.value_or(0);
    for (const auto& t : spec.tasks) {
        for (const auto& out : t.outputs) {
            FileCheck check{out, sizes[out], std::nullopt};
            std::error_code ec;
            const auto path = workdir / "data" / out;
            if (fs::is_regular_file(path, ec)) check.actual = fs::file_size(path, ec);
            report.files.push_back(std::move(check));
        }
    }
    std::error_code ec;
    if (fs::is_directory(workdir / "data", ec)) {
        std::vector<std::string> extra;
        for (const auto& entry : fs::directory_iterator(workdir / "data", ec)) {
            const auto name = entry.path().filename().string();
            if (!sizes.contains(name)) extra.push_back("undeclared file " + name);
        }
        std::sort(extra.begin(), extra.end());
        report.warnings = std::move(extra);
    }
    return report;
}

} // namespace wfforge::runner

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "wfforge/rng.hpp"
#include "wfforge/runner.hpp"
#include "wfforge/units.hpp"

namespace wfforge::runner {

Format format_from_name(std::string_view name) {
    if (name == "portable-dag") return Format::PortableDag;
    if (name == "make-style") return Format::MakeStyle;
    throw InvalidArgument("unknown format " + std::string(name) + " (expected portable-dag or make-style)");
}

std::uint64_t task_seed(std::uint64_t run_seed, std::string_view task_id) { return derive_seed(run_seed, task_id); }

namespace {

std::string data_path(const std::string& file_id) { return "data/" + file_id; }

std::uint64_t size_of(const WorkflowSpec& spec, const std::string& file_id) {
    for (const auto& f : spec.files) {
        if (f.id == file_id) {
            if (!f.size_bytes) throw InvalidArgument("file " + f.id + " has no size assigned");
            return *f.size_bytes;
        }
    }
    throw InvalidArgument("unknown file " + file_id);
}

void require_sizes(const WorkflowSpec& spec) {
    for (const auto& f : spec.files) {
        if (!f.size_bytes) throw InvalidArgument("file " + f.id + " has no size assigned");
    }
}

bool needs_quotes(std::string_view token) {
    if (token.empty()) return true;
    return std::any_of(token.begin(), token.end(), [](unsigned char c) {
        return !(std::isalnum(c) || std::string_view("-_./:=+,@%").find(static_cast<char>(c)) != std::string_view::npos);
    });
}

std::vector<std::string> stage_command(const std::string& file_id, std::uint64_t bytes, const CommandOptions& options) {
    const std::string name = "stage_" + file_id;
    std::vector<std::string> argv{options.taskbench, "--name", name, "--cores", "1", "--cpuwork", "0",
                                  "--memwork", "0", "--f", "1.0", "--output",
                                  data_path(file_id) + ":" + std::to_string(bytes), "--seed",
                                  std::to_string(task_seed(options.seed, name)), "--report",
                                  "reports/" + name + ".json"};
    argv.insert(argv.end(), options.extra_args.begin(), options.extra_args.end());
    return argv;
}

} // namespace

std::vector<std::string> task_command(const WorkflowSpec& spec, std::size_t task_index, const CommandOptions& options) {
    const TaskSpec& t = spec.tasks.at(task_index);
    std::vector<std::string> argv{options.taskbench,
                                  "--name",
                                  t.id,
                                  "--cores",
                                  std::to_string(t.params.cores),
                                  "--cpuwork",
                                  format_number(t.params.cpuwork),
                                  "--memwork",
                                  format_number(t.params.memwork),
                                  "--f",
                                  t.params.f.to_string()};
    if (!t.inputs.empty()) {
        argv.emplace_back("--input");
        for (const auto& in : t.inputs) argv.push_back(data_path(in));
    }
    if (!t.outputs.empty()) {
        argv.emplace_back("--output");
        for (const auto& out : t.outputs) argv.push_back(data_path(out) + ":" + std::to_string(size_of(spec, out)));
    }
    argv.insert(argv.end(), {"--seed", std::to_string(task_seed(options.seed, t.id)), "--report",
                             "reports/" + t.id + ".json"});
    argv.insert(argv.end(), options.extra_args.begin(), options.extra_args.end());
    return argv;
}

std::string quote_command(const std::vector<std::string>& argv) {
    std::string line;
    for (const auto& token : argv) {
        if (!line.empty()) line += ' ';
        if (!needs_quotes(token)) {
            line += token;
            continue;
        }
        line += '\'';
        for (char c : token) {
            if (c == '\'') {
                line += "'\\''";
            } else {
                line += c;
            }
        }
        line += '\'';
    }
    return line;
}

std::vector<std::string> split_command(std::string_view line) {
    std::vector<std::string> out;
    std::string current;
    bool in_token = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == ' ' || c == '\t') {
            if (in_token) out.push_back(std::move(current));
            current.clear();
            in_token = false;
        } else if (c == '\'') {
            in_token = true;
            const auto close = line.find('\'', i + 1);
            if (close == std::string_view::npos) throw ParseError("unterminated quote in command: " + std::string(line));
            current.append(line.substr(i + 1, close - i - 1));
            i = close;
        } else if (c == '\\' && i + 1 < line.size()) {
            in_token = true;
            current += line[++i];
        } else {
            in_token = true;
            current += c;
        }
    }
    if (in_token) out.push_back(std::move(current));
    return out;
}

std::string translate(const WorkflowSpec& spec, Format format, const CommandOptions& options) {
    if (auto report = validate(spec); !report.ok()) throw ValidationFailed(std::move(report));
    require_sizes(spec);
    const TaskGraph graph = build_task_graph(spec);
    std::ostringstream out;

    if (format == Format::PortableDag) {
        out << "WFDAG 1\n";
        for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
            out << "TASK " << spec.tasks[i].id << ' ' << quote_command(task_command(spec, i, options)) << '\n';
        }
        for (std::size_t i = 0; i < graph.size(); ++i) {
            for (auto c : graph.children[i]) out << "EDGE " << spec.tasks[i].id << ' ' << spec.tasks[c].id << '\n';
        }
        return out.str();
    }

    std::set<std::string> produced;
    for (const auto& t : spec.tasks) produced.insert(t.outputs.begin(), t.outputs.end());
    std::set<std::string> workflow_inputs;
    for (const auto& t : spec.tasks) {
        for (const auto& in : t.inputs) {
            if (!produced.contains(in)) workflow_inputs.insert(in);
        }
    }

    out << "# make -j N all\n";
    out << "$(shell mkdir -p data reports)\n\n";
    out << ".PHONY: all\nall:";
    for (const auto& t : spec.tasks) {
        for (const auto& o : t.outputs) out << ' ' << data_path(o);
    }
    out << "\n";
    for (const auto& id : workflow_inputs) {
        out << '\n' << data_path(id) << ":\n\t" << quote_command(stage_command(id, size_of(spec, id), options)) << '\n';
    }
    for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
        const auto& t = spec.tasks[i];
        out << '\n';
        for (std::size_t k = 0; k < t.outputs.size(); ++k) out << (k ? " " : "") << data_path(t.outputs[k]);
        out << (t.outputs.size() > 1 ? " &:" : ":");
        for (const auto& in : t.inputs) out << ' ' << data_path(in);
        out << "\n\t" << quote_command(task_command(spec, i, options)) << '\n';
    }
    return out.str();
}

Manifest parse_manifest(std::string_view text) {
    Manifest m;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    std::set<std::string> ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = "manifest line " + std::to_string(line_no) + ": ";
        if (!header) {
            if (line != "WFDAG 1") throw ParseError(where + "expected header 'WFDAG 1'");
            header = true;
            continue;
        }
        if (line.rfind("TASK ", 0) == 0) {
            const auto rest = std::string_view(line).substr(5);
            const auto space = rest.find(' ');
            if (space == std::string_view::npos) throw ParseError(where + "task without a command");
            Manifest::Task task{std::string(rest.substr(0, space)), split_command(rest.substr(space + 1))};
            if (!ids.insert(task.id).second) throw ParseError(where + "duplicate task " + task.id);
            m.tasks.push_back(std::move(task));
        } else if (line.rfind("EDGE ", 0) == 0) {
            const auto parts = split_command(std::string_view(line).substr(5));
            if (parts.size() != 2) throw ParseError(where + "EDGE needs a parent and a child");
            for (const auto& p : parts) {
                if (!ids.contains(p)) throw ParseError(where + "edge names unknown task " + p);
            }
            m.edges.emplace_back(parts[0], parts[1]);
        } else {
            throw ParseError(where + "unrecognised line");
        }
    }
    if (!header) throw ParseError("empty manifest");
    return m;
}

} // namespace wfforge::runner

#include "wfforge/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wfforge/analyze.hpp"
#include "wfforge/calibrate.hpp"
#include "wfforge/models.hpp"
#include "wfforge/recipes.hpp"
#include "wfforge/runner.hpp"
#include "wfforge/simd/kernels.hpp"
#include "wfforge/taskbench.hpp"
#include "wfforge/units.hpp"

namespace wfforge::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

unsigned long long default_seed() {
    const char* env = std::getenv("WFFORGE_SEED");
    if (env == nullptr || *env == '\0') return 0;
    try {
        return parse_si_quantity(env);
    } catch (const Error&) {
        throw CLI::ValidationError("WFFORGE_SEED", std::string("not an integer: ") + env);
    }
}

namespace {

// Flag conversions report bad values as usage errors.
std::uint64_t si_count(const std::string& flag, const std::string& text) {
    try {
        return parse_si_quantity(text);
    } catch (const Error& e) {
        throw CLI::ValidationError(flag, e.what());
    }
}

double si_real(const std::string& flag, const std::string& text) {
    try {
        return parse_si_real(text);
    } catch (const Error& e) {
        throw CLI::ValidationError(flag, e.what());
    }
}

CpuFraction fraction(const std::string& flag, const std::string& text) {
    try {
        return CpuFraction::from_double(parse_si_real(text));
    } catch (const Error& e) {
        throw CLI::ValidationError(flag, e.what());
    }
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot write " + path);
    file << text;
    if (!file) throw Error("write failed for " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

fs::path sibling_taskbench() {
    std::error_code ec;
    const auto self = fs::read_symlink("/proc/self/exe", ec);
    if (ec) return "taskbench";
    return self.parent_path() / "taskbench";
}

// ---------------------------------------------------------------------------
// taskbench / run-task

struct TaskbenchArgs {
    std::string name = "task";
    int cores = 1;
    std::string cpuwork = "0";
    std::string memwork = "0";
    std::string f = "1.0";
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;  // PATH:BYTES
    std::string seed;
    std::string report;
    std::string array_bytes;
    bool oversubscribe = false;
    bool no_pin = false;
    std::string simd;
};

void add_taskbench_options(CLI::App& app, TaskbenchArgs& a) {
    app.add_option("--name", a.name, "Task id recorded in the report");
    app.add_option("--cores", a.cores, "Number of worker groups (cores)")->check(CLI::PositiveNumber);
    app.add_option("--cpuwork", a.cpuwork, "CPU work units (1 unit = 1000 series terms)");
    app.add_option("--memwork", a.memwork, "Memory work units (random increments)");
    app.add_option("--f", a.f, "Fraction of CPU workers per group, multiple of 0.1");
    app.add_option("--input", a.inputs, "Files read before computing")->expected(0, -1);
    app.add_option("--output", a.outputs, "Files written after computing, as PATH:BYTES")->expected(0, -1);
    app.add_option("--seed", a.seed, "Seed for memory indices and output bytes (default $WFFORGE_SEED or 0)");
    app.add_option("--report", a.report, "Where to write the JSON report (default stdout)");
    app.add_option("--array-bytes", a.array_bytes, "Size of each memory worker's array (default 64Mi)");
    app.add_flag("--oversubscribe", a.oversubscribe, "Allow more groups than usable CPUs");
    app.add_flag("--no-pin", a.no_pin, "Do not pin worker groups to CPUs");
    app.add_option("--simd", a.simd, "Kernel variant: scalar, avx2 or neon (default: best available)");
}

int run_taskbench(const TaskbenchArgs& a, std::ostream& out, std::ostream& err) {
    bench::TaskRun run;
    run.name = a.name;
    run.params.cores = a.cores;
    run.params.cpuwork = si_real("--cpuwork", a.cpuwork);
    run.params.memwork = si_real("--memwork", a.memwork);
    run.params.f = fraction("--f", a.f);
    for (const auto& in : a.inputs) run.inputs.emplace_back(in);
    for (const auto& o : a.outputs) {
        const auto colon = o.rfind(':');
        if (colon == std::string::npos || colon == 0) {
            throw CLI::ValidationError("--output", "expected PATH:BYTES, got " + o);
        }
        run.outputs.push_back({o.substr(0, colon), si_count("--output", o.substr(colon + 1))});
    }
    run.seed = a.seed.empty() ? default_seed() : si_count("--seed", a.seed);
    if (!a.array_bytes.empty()) run.options.array_bytes = si_count("--array-bytes", a.array_bytes);
    run.options.allow_oversubscribe = a.oversubscribe;
    run.options.pin = !a.no_pin;
    if (!a.simd.empty()) {
        const auto variant = simd::variant_from_name(a.simd);
        if (!variant) throw CLI::ValidationError("--simd", "unknown variant " + a.simd);
        run.options.variant = *variant;
    }
    const auto report = bench::run_task(run);
    write_output(a.report, bench::report_to_json(report), out);
    for (const auto& w : report.warnings) err << "warning: " << w << "\n";
    if (!report.ok) {
        err << "error: " << report.failed_phase << " phase failed: " << report.error << "\n";
        return kExitDomainError;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// Subcommand arguments

struct GenerateArgs {
    std::string recipe;
    std::string tasks;
    std::string footprint;
    std::string cpuwork = "0";
    std::string memwork = "0";
    std::string f = "1.0";
    int cores = 1;
    std::string seed;
    std::string output;
};

struct CalibrateArgs {
    std::string profile;
    std::string target_seconds;
    std::string f;
    bool sweep = false;
    double tolerance = 0.05;
    int max_iterations = 20;
    int repetitions = 3;
    int cores = 1;
    std::string array_bytes;
    bool oversubscribe = false;
    int node_cores = 0;
    int load_cores = -1;
    std::string loaded_target_seconds;
    std::string report;
};

struct TranslateArgs {
    std::string spec;
    std::string format = "portable-dag";
    std::string taskbench = "taskbench";
    std::string seed;
    std::string output;
};

struct RunArgs {
    std::string spec;
    std::size_t cores = 0;
    std::string workdir;
    std::string seed;
    std::string trace;
    std::string taskbench;
    bool oversubscribe = false;
    std::string array_bytes;
};

struct EstimateArgs {
    std::string spec;
    std::string model = "per-level";
    std::string nodes;
    std::string cores_per_node;
    std::string bw_read;
    std::string bw_write;
    std::string wt;
    std::string cpu_unit_seconds;
    std::string mem_unit_seconds;
    std::string overhead = "0";
    std::string output;
};

struct AnalyzeArgs {
    std::string trace;
    std::string against;
    std::string metric = "throughput";
    std::string output;
};

struct DetectArgs {
    std::vector<std::string> instances;
    std::string name = "detected";
    std::string output;
};

// ---------------------------------------------------------------------------
// Subcommand bodies

int do_generate(const GenerateArgs& a, std::ostream& out) {
    recipes::GenerationRequest req;
    req.recipe = recipes::resolve_recipe(a.recipe);
    req.num_tasks = si_count("--tasks", a.tasks);
    if (!a.footprint.empty()) req.footprint_bytes = si_count("--footprint", a.footprint);
    req.default_params.cores = a.cores;
    req.default_params.cpuwork = si_real("--cpuwork", a.cpuwork);
    req.default_params.memwork = si_real("--memwork", a.memwork);
    req.default_params.f = fraction("--f", a.f);
    req.seed = a.seed.empty() ? default_seed() : si_count("--seed", a.seed);
    write_output(a.output, serialize(recipes::generate(req)), out);
    return kExitOk;
}

int do_calibrate(const CalibrateArgs& a, std::ostream& out, std::ostream& err, int verbosity) {
    ordered_json doc;
    if (!a.profile.empty()) {
        const auto counts = calib::parse_profile(read_text(a.profile));
        doc["total_instructions"] = counts.total_instructions;
        doc["memory_instructions"] = counts.memory_instructions;
        doc["f"] = calib::f_from_profile(counts).value();
        write_output(a.report, doc.dump(2) + "\n", out);
        return kExitOk;
    }
    if (a.target_seconds.empty()) throw CLI::RequiredError("--target-seconds (or --profile)");
    if (a.sweep == !a.f.empty()) throw CLI::ValidationError("--f", "give exactly one of --f or --sweep");

    calib::CalibrationTarget target;
    target.seconds = si_real("--target-seconds", a.target_seconds);
    target.tolerance = a.tolerance;
    target.max_iterations = a.max_iterations;
    calib::FitOptions fit_options;
    fit_options.repetitions = a.repetitions;
    bench::ComputeOptions options;
    options.allow_oversubscribe = a.oversubscribe;
    if (!a.array_bytes.empty()) options.array_bytes = si_count("--array-bytes", a.array_bytes);
    const auto runner = calib::kernel_runner(a.cores, options);

    if (!a.sweep) {
        target.f = fraction("--f", a.f);
        if (verbosity > 0) err << "fitting work for T=" << target.seconds << "s f=" << target.f.to_string() << "\n";
        const auto fit = calib::fit_work(target, runner, fit_options);
        doc["target_seconds"] = target.seconds;
        doc["f"] = target.f.value();
        doc["tolerance"] = target.tolerance;
        doc["cpuwork"] = fit.cpuwork;
        doc["memwork"] = fit.memwork;
        doc["iterations"] = fit.iterations;
        doc["t_cpu"] = fit.last.t_cpu ? ordered_json(*fit.last.t_cpu) : ordered_json(nullptr);
        doc["t_mem"] = fit.last.t_mem ? ordered_json(*fit.last.t_mem) : ordered_json(nullptr);
        write_output(a.report, doc.dump(2) + "\n", out);
        return kExitOk;
    }

    calib::LoadSpec load;
    load.node_cores = a.node_cores > 0 ? a.node_cores : static_cast<int>(bench::usable_cpus().size());
    if (a.load_cores >= 0) load.load_cores = a.load_cores;
    if (!a.loaded_target_seconds.empty()) {
        load.loaded_target_seconds = si_real("--loaded-target-seconds", a.loaded_target_seconds);
    }
    const auto report = calib::calibrate_under_load(
        target, load, runner,
        calib::background_load_starter(a.cores, a.array_bytes.empty() ? bench::kDefaultArrayBytes
                                                                       : si_count("--array-bytes", a.array_bytes)),
        fit_options);
    write_output(a.report, calib::report_to_json(report), out);
    return kExitOk;
}

int do_translate(const TranslateArgs& a, std::ostream& out) {
    const auto spec = load_spec(a.spec);
    runner::CommandOptions options;
    options.taskbench = a.taskbench;
    options.seed = a.seed.empty() ? default_seed() : si_count("--seed", a.seed);
    runner::Format format;
    try {
        format = runner::format_from_name(a.format);
    } catch (const Error& e) {
        throw CLI::ValidationError("--format", e.what());
    }
    write_output(a.output, runner::translate(spec, format, options), out);
    return kExitOk;
}

int do_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
    const auto spec = load_spec(a.spec);
    runner::ExecOptions options;
    options.taskbench = a.taskbench.empty() ? sibling_taskbench() : fs::path(a.taskbench);
    if (a.oversubscribe) options.extra_args.emplace_back("--oversubscribe");
    if (!a.array_bytes.empty()) {
        options.extra_args.emplace_back("--array-bytes");
        options.extra_args.push_back(std::to_string(si_count("--array-bytes", a.array_bytes)));
    }
    const std::uint64_t seed = a.seed.empty() ? default_seed() : si_count("--seed", a.seed);
    const auto trace = runner::execute_local(spec, a.cores, a.workdir, seed, options);
    if (!a.trace.empty()) write_output(a.trace, runner::trace_to_json(trace), out);
    const auto verify = runner::verify_outputs(spec, a.workdir);

    ordered_json doc;
    doc["ok"] = trace.ok() && verify.mismatches().empty();
    doc["tasks"] = trace.tasks.size();
    std::size_t failed = 0;
    std::size_t aborted = 0;
    for (const auto& t : trace.tasks) {
        failed += t.status == runner::TaskStatus::Failed;
        aborted += t.status == runner::TaskStatus::Aborted;
    }
    doc["failed"] = failed;
    doc["aborted"] = aborted;
    doc["makespan"] = trace.makespan;
    doc["output_mismatches"] = verify.mismatches().size();
    doc["warnings"] = verify.warnings;
    if (trace.ok()) doc["throughput"] = analyze::throughput(trace);
    out << doc.dump(2) << "\n";
    if (!verify.mismatches().empty()) err << verify.to_string();
    return doc["ok"].get<bool>() ? kExitOk : kExitDomainError;
}

int do_estimate(const EstimateArgs& a, std::ostream& out) {
    const auto spec = load_spec(a.spec);
    models::Model model;
    try {
        model = models::model_from_name(a.model);
    } catch (const Error& e) {
        throw CLI::ValidationError("--model", e.what());
    }
    models::PlatformModel plat;
    plat.n = a.nodes.empty() ? models::nodes_for_tasks(std::max<std::size_t>(1, spec.tasks.size()))
                             : si_count("--nodes", a.nodes);
    plat.p = si_count("--cores-per-node", a.cores_per_node);
    plat.bw_read = si_real("--bw-read", a.bw_read);
    plat.bw_write = si_real("--bw-write", a.bw_write);
    models::WorkRates rates;
    if (!a.wt.empty()) {
        rates.fixed_wt = si_real("--wt", a.wt);
    } else if (!a.cpu_unit_seconds.empty() || !a.mem_unit_seconds.empty()) {
        if (!a.cpu_unit_seconds.empty()) rates.cpu_unit_seconds = si_real("--cpu-unit-seconds", a.cpu_unit_seconds);
        if (!a.mem_unit_seconds.empty()) rates.mem_unit_seconds = si_real("--mem-unit-seconds", a.mem_unit_seconds);
    } else {
        throw CLI::RequiredError("--wt (or --cpu-unit-seconds/--mem-unit-seconds)");
    }
    const auto e = models::estimate(spec, model, plat, rates, si_real("--overhead", a.overhead));
    write_output(a.output, models::estimate_to_json(e), out);
    return kExitOk;
}

int do_analyze(const AnalyzeArgs& a, std::ostream& out) {
    const auto trace = runner::load_trace(a.trace);
    if ((a.metric == "ks" || a.metric == "ratio") && a.against.empty()) {
        throw CLI::RequiredError("--against (needed by --metric " + a.metric + ")");
    }
    ordered_json doc;
    doc["metric"] = a.metric;
    if (a.metric == "throughput") {
        doc["tasks"] = trace.tasks.size();
        doc["makespan"] = analyze::makespan(trace);
        doc["throughput"] = analyze::throughput(trace);
    } else if (a.metric == "ecdf") {
        write_output(a.output, analyze::ecdf_to_text(analyze::start_time_ecdf(trace)), out);
        return kExitOk;
    } else if (a.metric == "ks") {
        const auto other = runner::load_trace(a.against);
        doc["ks"] = analyze::ecdf_distance(analyze::start_time_ecdf(trace), analyze::start_time_ecdf(other));
    } else {
        const auto other = runner::load_trace(a.against);
        doc["ratio"] = analyze::makespan_ratio(trace, other);
    }
    write_output(a.output, doc.dump(2) + "\n", out);
    return kExitOk;
}

int do_detect(const DetectArgs& a, std::ostream& out) {
    std::vector<recipes::TypedDag> dags;
    for (const auto& path : a.instances) dags.push_back(recipes::typed_dag_from_spec(load_spec(path)));
    write_output(a.output, recipes::recipe_to_json(recipes::detect_patterns(dags, a.name)), out);
    return kExitOk;
}

// Runs CLI11 parsing plus `body`, translating failures into exit codes.
template <typename Body>
int guarded(CLI::App& app, const std::vector<std::string>& args, std::ostream& out, std::ostream& err, Body body) {
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        return body();
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::Success&) {
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        if (dynamic_cast<const CLI::ExtrasError*>(&e) != nullptr) err << app.help();
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomainError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomainError;
    }
}

std::string version_json() {
    ordered_json doc;
    doc["name"] = "wfforge";
    doc["version"] = kVersion;
    doc["simd"] = simd::name(simd::best_variant());
    return doc.dump() + "\n";
}

} // namespace

int taskbench_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthetic task benchmark: read inputs, burn CPU and memory, write outputs", "taskbench"};
    TaskbenchArgs a;
    add_taskbench_options(app, a);
    app.add_flag_callback("--version", [&] {
        out << version_json();
        throw CLI::Success();
    });
    return guarded(app, args, out, err, [&] { return run_taskbench(a, out, err); });
}

int wfforge_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Workflow benchmark generator, runner and models", "wfforge"};
    app.require_subcommand(1);
    int verbosity = 0;
    app.add_flag("-v,--verbose", verbosity, "More progress output on stderr");
    app.add_flag_callback("--version", [&] {
        out << version_json();
        throw CLI::Success();
    });

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Generate a workflow spec from a recipe");
    generate->add_option("--recipe", gen.recipe, "Built-in recipe name or recipe JSON path")->required();
    generate->add_option("--tasks", gen.tasks, "Requested number of tasks")->required();
    generate->add_option("--footprint", gen.footprint, "Total data footprint in bytes (SI suffixes allowed)");
    generate->add_option("--cpuwork", gen.cpuwork, "cpuwork for every task");
    generate->add_option("--memwork", gen.memwork, "memwork for every task");
    generate->add_option("--f", gen.f, "CPU fraction for every task");
    generate->add_option("--cores", gen.cores, "Cores per task")->check(CLI::PositiveNumber);
    generate->add_option("--seed", gen.seed, "Generation seed (default $WFFORGE_SEED or 0)");
    generate->add_option("-o,--output", gen.output, "Output spec path (default stdout)");

    CalibrateArgs cal;
    auto* calibrate = app.add_subcommand("calibrate", "Fit benchmark work to a target runtime");
    calibrate->add_option("--profile", cal.profile, "Instruction counts file: derive f and exit");
    calibrate->add_option("--target-seconds", cal.target_seconds, "Runtime T of the task being imitated");
    calibrate->add_option("--f", cal.f, "CPU fraction to calibrate for");
    calibrate->add_flag("--sweep", cal.sweep, "Calibrate f = 0.1..0.9 with and without background load");
    calibrate->add_option("--tolerance", cal.tolerance, "Relative tolerance on both completion times");
    calibrate->add_option("--max-iterations", cal.max_iterations, "Measurement rounds before giving up");
    calibrate->add_option("--repetitions", cal.repetitions, "Runs per measurement (median taken)");
    calibrate->add_option("--cores", cal.cores, "Cores of the benchmarked task")->check(CLI::PositiveNumber);
    calibrate->add_option("--array-bytes", cal.array_bytes, "Memory worker array size");
    calibrate->add_flag("--oversubscribe", cal.oversubscribe, "Allow more groups than usable CPUs");
    calibrate->add_option("--node-cores", cal.node_cores, "Cores of the node (default: usable CPUs)");
    calibrate->add_option("--load-cores", cal.load_cores, "Background load cores (default: half the node)");
    calibrate->add_option("--loaded-target-seconds", cal.loaded_target_seconds,
                          "Runtime of the real task under the same load");
    calibrate->add_option("--report", cal.report, "Output JSON path (default stdout)");

    TaskbenchArgs tb;
    auto* run_task = app.add_subcommand("run-task", "Run one task benchmark (same flags as taskbench)");
    add_taskbench_options(*run_task, tb);

    TranslateArgs tr;
    auto* translate = app.add_subcommand("translate", "Emit a portable DAG manifest or make-style rules");
    translate->add_option("--spec", tr.spec, "Workflow spec JSON")->required();
    translate->add_option("--format", tr.format, "portable-dag or make-style");
    translate->add_option("--taskbench", tr.taskbench, "taskbench command used in the artifacts");
    translate->add_option("--seed", tr.seed, "Run seed for per-task seeds");
    translate->add_option("-o,--output", tr.output, "Output path (default stdout)");

    RunArgs ru;
    auto* run = app.add_subcommand("run", "Execute a spec locally under a core cap");
    run->add_option("--spec", ru.spec, "Workflow spec JSON")->required();
    run->add_option("--cores", ru.cores, "Core cap")->required()->check(CLI::PositiveNumber);
    run->add_option("--workdir", ru.workdir, "Working directory (data/, reports/, logs/)")->required();
    run->add_option("--seed", ru.seed, "Run seed");
    run->add_option("--trace", ru.trace, "Where to write the execution trace");
    run->add_option("--taskbench", ru.taskbench, "taskbench executable (default: next to wfforge)");
    run->add_flag("--oversubscribe", ru.oversubscribe, "Pass --oversubscribe to every task");
    run->add_option("--array-bytes", ru.array_bytes, "Memory worker array size for every task");

    EstimateArgs es;
    auto* estimate = app.add_subcommand("estimate", "Analytical makespan estimate");
    estimate->add_option("--spec", es.spec, "Workflow spec JSON")->required();
    estimate->add_option("--model", es.model, "macro-no-overlap, macro-overlap or per-level");
    estimate->add_option("--nodes", es.nodes, "Node count (default: one per 400 tasks)");
    estimate->add_option("--cores-per-node", es.cores_per_node, "Cores per node")->required();
    estimate->add_option("--bw-read", es.bw_read, "Read bandwidth per node, bytes/s")->required();
    estimate->add_option("--bw-write", es.bw_write, "Write bandwidth per node, bytes/s")->required();
    estimate->add_option("--wt", es.wt, "Compute seconds of every task");
    estimate->add_option("--cpu-unit-seconds", es.cpu_unit_seconds, "Seconds per cpuwork unit");
    estimate->add_option("--mem-unit-seconds", es.mem_unit_seconds, "Seconds per memwork unit");
    estimate->add_option("--overhead", es.overhead, "Measured overhead seconds added to the estimate");
    estimate->add_option("-o,--output", es.output, "Output path (default stdout)");

    AnalyzeArgs an;
    auto* analyze_cmd = app.add_subcommand("analyze", "Metrics from execution traces");
    analyze_cmd->add_option("--trace", an.trace, "Trace JSON")->required();
    analyze_cmd->add_option("--against", an.against, "Second trace for ks and ratio");
    analyze_cmd->add_option("--metric", an.metric, "throughput, ecdf, ks or ratio")
        ->check(CLI::IsMember({"throughput", "ecdf", "ks", "ratio"}));
    analyze_cmd->add_option("-o,--output", an.output, "Output path (default stdout)");

    DetectArgs de;
    auto* detect = app.add_subcommand("detect", "Derive a recipe from specs of one application");
    detect->add_option("--instance", de.instances, "Spec JSON of one instance (repeat)")->required();
    detect->add_option("--name", de.name, "Recipe name");
    detect->add_option("-o,--output", de.output, "Output recipe path (default stdout)");

    return guarded(app, args, out, err, [&]() -> int {
        if (*generate) return do_generate(gen, out);
        if (*calibrate) return do_calibrate(cal, out, err, verbosity);
        if (*run_task) return run_taskbench(tb, out, err);
        if (*translate) return do_translate(tr, out);
        if (*run) return do_run(ru, out, err);
        if (*estimate) return do_estimate(es, out);
        if (*analyze_cmd) return do_analyze(an, out);
        if (*detect) {
            if (de.instances.size() < 2) throw CLI::ValidationError("--instance", "give at least two instances");
            return do_detect(de, out);
        }
        return kExitUsage;
    });
}

} // namespace wfforge::cli

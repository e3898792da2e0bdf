#include <gtest/gtest.h>

#include <sys/stat.h>

#include <algorithm>
#include <cstdlib>
#include <set>

#include "test_support.hpp"
#include "trace_checks.hpp"
#include "wfforge/recipes.hpp"
#include "wfforge/runner.hpp"
#include "wfforge/units.hpp"

using namespace wfforge;
using namespace wfforge::runner;
namespace fs = std::filesystem;
using wfforge::testing::TempDir;

namespace {

ExecOptions exec_options() {
    ExecOptions o;
    o.taskbench = WFFORGE_TASKBENCH_PATH;
    o.extra_args = {"--oversubscribe", "--array-bytes", "1048576"};
    return o;
}

std::vector<std::string> tokens_after(const std::vector<std::string>& argv, const std::string& flag) {
    auto it = std::find(argv.begin(), argv.end(), flag);
    std::vector<std::string> out;
    if (it == argv.end()) return out;
    for (++it; it != argv.end() && it->rfind("--", 0) != 0; ++it) out.push_back(*it);
    return out;
}

// Wrapper around taskbench that fails for one task name.
fs::path failing_taskbench(const TempDir& dir, const std::string& name) {
    const auto path = dir / "failing-taskbench.sh";
    wfforge::testing::write_file(path, "#!/bin/sh\ncase \" $* \" in *\" --name " + name + " \"*) exit 3;; esac\nexec " +
                                           std::string(WFFORGE_TASKBENCH_PATH) + " \"$@\"\n");
    ::chmod(path.c_str(), 0755);
    return path;
}

} // namespace

TEST(Translate, ChainManifest) {
    const auto spec = wfforge::testing::make_chain(2);
    const auto text = translate(spec, Format::PortableDag);
    EXPECT_EQ(text.rfind("WFDAG 1\n", 0), 0u);
    const auto m = parse_manifest(text);
    ASSERT_EQ(m.tasks.size(), 2u);
    ASSERT_EQ(m.edges.size(), 1u);
    EXPECT_EQ(m.edges[0], (std::pair<std::string, std::string>{"T0", "T1"}));
    EXPECT_EQ(translate(spec, Format::PortableDag), text);
}

TEST(Translate, CommandsCarrySpecValues) {
    recipes::GenerationRequest req{recipes::builtin_recipe("montage"), 40, 1'000'000, {}, {}, 3};
    req.default_params = {2, 1234.5, 0.25, CpuFraction::from_tenths(3)};
    req.category_params["mAdd"] = {1, 7, 9, CpuFraction::from_tenths(10)};
    const auto spec = recipes::generate(req);
    const auto m = parse_manifest(translate(spec, Format::PortableDag, {"/opt/bin/taskbench", 5, {}}));
    ASSERT_EQ(m.tasks.size(), spec.tasks.size());
    for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
        const auto& t = spec.tasks[i];
        const auto& argv = m.tasks[i].command;
        EXPECT_EQ(m.tasks[i].id, t.id);
        EXPECT_EQ(argv[0], "/opt/bin/taskbench");
        EXPECT_EQ(tokens_after(argv, "--cores"), std::vector<std::string>{std::to_string(t.params.cores)});
        EXPECT_EQ(tokens_after(argv, "--cpuwork"), std::vector<std::string>{format_number(t.params.cpuwork)});
        EXPECT_EQ(tokens_after(argv, "--memwork"), std::vector<std::string>{format_number(t.params.memwork)});
        EXPECT_EQ(tokens_after(argv, "--f"), std::vector<std::string>{t.params.f.to_string()});
        EXPECT_EQ(parse_si_real(tokens_after(argv, "--cpuwork")[0]), t.params.cpuwork);
        EXPECT_EQ(tokens_after(argv, "--seed"), std::vector<std::string>{std::to_string(task_seed(5, t.id))});
        EXPECT_EQ(tokens_after(argv, "--input").size(), t.inputs.size());
        EXPECT_EQ(tokens_after(argv, "--output").size(), t.outputs.size());
    }
}

TEST(Translate, ManifestRoundTripsEdgeSet) {
    for (const auto& name : recipes::builtin_recipe_names()) {
        const auto spec = recipes::generate({recipes::builtin_recipe(name), 60, 10'000, {}, {}, 1});
        const auto m = parse_manifest(translate(spec, Format::PortableDag));
        std::set<std::pair<std::string, std::string>> parsed(m.edges.begin(), m.edges.end());
        std::set<std::pair<std::string, std::string>> expected;
        const auto graph = build_task_graph(spec);
        for (std::size_t i = 0; i < graph.size(); ++i) {
            for (auto c : graph.children[i]) expected.emplace(spec.tasks[i].id, spec.tasks[c].id);
        }
        EXPECT_EQ(parsed, expected) << name;
        EXPECT_EQ(parsed.size(), m.edges.size());
    }
}

TEST(Translate, UnassignedSizesRejected) {
    auto spec = wfforge::testing::make_chain(2);
    spec.files[1].size_bytes.reset();
    EXPECT_THROW(translate(spec, Format::PortableDag), InvalidArgument);
    EXPECT_THROW(translate(spec, Format::MakeStyle), InvalidArgument);
}

TEST(Translate, QuotingRoundTrips) {
    const std::vector<std::string> argv{"a b", "it's", "", "plain", "x:1", "$HOME", "tab\there"};
    EXPECT_EQ(split_command(quote_command(argv)), argv);
    EXPECT_THROW(parse_manifest("WFDAG 2\n"), ParseError);
    EXPECT_THROW(parse_manifest("WFDAG 1\nEDGE a b\n"), ParseError);
    EXPECT_THROW(parse_manifest("WFDAG 1\nTASK a x\nTASK a y\n"), ParseError);
    EXPECT_THROW(parse_manifest("WFDAG 1\nJUNK\n"), ParseError);
    EXPECT_THROW(format_from_name("dot"), InvalidArgument);
}

TEST(Translate, MakeStyleRulesRunUnderMake) {
    if (std::system("make --version > /dev/null 2>&1") != 0) GTEST_SKIP() << "make not installed";
    TempDir dir;
    auto spec = wfforge::testing::make_chain(3, 4096);
    for (auto& t : spec.tasks) t.params.memwork = 50;
    CommandOptions options{WFFORGE_TASKBENCH_PATH, 9, {"--oversubscribe", "--array-bytes", "65536"}};
    const auto rules = translate(spec, Format::MakeStyle, options);
    EXPECT_NE(rules.find("data/f3: data/f2\n"), std::string::npos);
    wfforge::testing::write_file(dir / "Makefile", rules);
    const std::string cmd = "make -s -C " + dir.path().string() + " -j2 all > /dev/null 2>&1";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    for (int i = 0; i <= 3; ++i) EXPECT_EQ(fs::file_size(dir / ("data/f" + std::to_string(i))), 4096u);
}

TEST(Execute, ChainRunsStrictlyInOrder) {
    TempDir dir;
    auto spec = wfforge::testing::make_chain(3, 2000);
    const auto trace = execute_local(spec, 4, dir.path(), 1, exec_options());
    ASSERT_TRUE(trace.ok());
    for (std::size_t i = 1; i < 3; ++i) EXPECT_GE(trace.tasks[i].start, trace.tasks[i - 1].end);
    EXPECT_EQ(wfforge::testing::peak_cores(trace), 1u);
    EXPECT_TRUE(verify_outputs(spec, dir.path()).mismatches().empty());
    EXPECT_TRUE(fs::exists(dir / "trace.json"));
    EXPECT_TRUE(fs::exists(dir / "reports/T0.json"));
}

TEST(Execute, CoreCapHonoured) {
    TempDir dir;
    const auto spec = wfforge::testing::make_independent(8, 500, 2000);
    const auto trace = execute_local(spec, 4, dir.path(), 2, exec_options());
    ASSERT_TRUE(trace.ok());
    EXPECT_LE(wfforge::testing::peak_cores(trace), 4u);
    EXPECT_TRUE(wfforge::testing::dependency_violations(spec, trace).empty());
}

TEST(Execute, MultiCoreTasksShareTheCap) {
    TempDir dir;
    auto spec = wfforge::testing::make_independent(5, 300, 500);
    for (std::size_t i = 0; i < spec.tasks.size(); ++i) spec.tasks[i].params.cores = 1 + static_cast<int>(i % 3);
    const auto trace = execute_local(spec, 3, dir.path(), 2, exec_options());
    ASSERT_TRUE(trace.ok());
    EXPECT_LE(wfforge::testing::peak_cores(trace), 3u);
}

TEST(Execute, MakespanAboveCriticalPath) {
    TempDir dir;
    const auto spec = recipes::generate({recipes::builtin_recipe("epigenomics"), 12, 100'000, {1, 2000, 2000, CpuFraction::from_tenths(5)}, {}, 4});
    const auto trace = execute_local(spec, 4, dir.path(), 3, exec_options());
    ASSERT_TRUE(trace.ok());
    EXPECT_TRUE(wfforge::testing::dependency_violations(spec, trace).empty());

    // Solo runtimes measured one task at a time, then the longest path.
    std::vector<double> solo(spec.tasks.size());
    for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
        TempDir solo_dir;
        WorkflowSpec one;
        one.name = "solo";
        one.tasks = {spec.tasks[i]};
        for (const auto& f : spec.files) {
            const auto& t = spec.tasks[i];
            if (std::count(t.inputs.begin(), t.inputs.end(), f.id) || std::count(t.outputs.begin(), t.outputs.end(), f.id)) {
                one.files.push_back(f);
            }
        }
        const auto solo_trace = execute_local(one, 1, solo_dir.path(), 3, exec_options());
        ASSERT_TRUE(solo_trace.ok());
        solo[i] = solo_trace.tasks[0].end - solo_trace.tasks[0].start;
    }
    const auto graph = build_task_graph(spec);
    std::vector<double> finish(spec.tasks.size(), 0.0);
    const auto order = graph.topological_order();
    ASSERT_TRUE(order);
    for (auto i : *order) {
        double ready = 0.0;
        for (auto p : graph.parents[i]) ready = std::max(ready, finish[p]);
        finish[i] = ready + solo[i];
    }
    const double critical = *std::max_element(finish.begin(), finish.end());
    // Allow for timer and process start-up jitter between separate runs.
    EXPECT_GE(trace.makespan, 0.8 * critical);
}

TEST(Execute, FailureAbortsDescendantsOnly) {
    TempDir dir;
    WorkflowSpec spec = wfforge::testing::make_chain(3, 100);
    // An independent branch next to the chain.
    spec.files.push_back({"z_in", 100});
    spec.files.push_back({"z_out", 100});
    spec.tasks.push_back(wfforge::testing::make_task("Z", {"z_in"}, {"z_out"}));
    auto options = exec_options();
    options.taskbench = failing_taskbench(dir, "T1");
    const auto trace = execute_local(spec, 2, dir.path() / "work", 4, options);
    EXPECT_FALSE(trace.ok());
    EXPECT_EQ(trace.tasks[0].status, TaskStatus::Ok);
    EXPECT_EQ(trace.tasks[1].status, TaskStatus::Failed);
    EXPECT_EQ(trace.tasks[1].exit_code, 3);
    EXPECT_EQ(trace.tasks[2].status, TaskStatus::Aborted);
    EXPECT_EQ(trace.tasks[3].status, TaskStatus::Ok);
    const auto verify = verify_outputs(spec, dir.path() / "work");
    ASSERT_EQ(verify.mismatches().size(), 2u);
    EXPECT_FALSE(verify.mismatches()[0].actual.has_value());
}

TEST(Execute, InsufficientCoresFailsBeforeStarting) {
    TempDir dir;
    auto spec = wfforge::testing::make_chain(2);
    spec.tasks[1].params.cores = 3;
    EXPECT_THROW(execute_local(spec, 2, dir.path() / "w", 1, exec_options()), InvalidArgument);
    EXPECT_FALSE(fs::exists(dir / "w"));
}

TEST(Execute, DispatchOrderLargestWorkFirst) {
    TempDir dir;
    auto spec = wfforge::testing::make_independent(4, 100, 0);
    spec.tasks[2].params.cpuwork = 300;
    spec.tasks[1].params.cpuwork = 200;
    const auto trace = execute_local(spec, 1, dir.path(), 1, exec_options());
    ASSERT_TRUE(trace.ok());
    std::vector<std::size_t> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(),
              [&](auto a, auto b) { return trace.tasks[a].start < trace.tasks[b].start; });
    EXPECT_EQ(order, (std::vector<std::size_t>{2, 1, 0, 3}));
}

TEST(Verify, TruncatedAndExtraFiles) {
    TempDir dir;
    auto spec = wfforge::testing::make_chain(2, 300);
    const auto trace = execute_local(spec, 1, dir.path(), 1, exec_options());
    ASSERT_TRUE(trace.ok());
    auto report = verify_outputs(spec, dir.path());
    EXPECT_TRUE(report.mismatches().empty());
    EXPECT_TRUE(report.warnings.empty());

    fs::resize_file(dir / "data/f2", 100);
    wfforge::testing::write_file(dir / "data/stray", "x");
    report = verify_outputs(spec, dir.path());
    ASSERT_EQ(report.mismatches().size(), 1u);
    EXPECT_EQ(report.mismatches()[0].id, "f2");
    EXPECT_EQ(report.mismatches()[0].expected, 300u);
    EXPECT_EQ(report.mismatches()[0].actual, 100u);
    ASSERT_EQ(report.warnings.size(), 1u);
    EXPECT_NE(report.warnings[0].find("stray"), std::string::npos);
    EXPECT_NE(report.to_string().find("f2"), std::string::npos);
}

TEST(Trace, JsonRoundTrip) {
    ExecutionTrace t;
    t.core_cap = 4;
    t.host = "h";
    t.seed = 18446744073709551615ULL;
    t.makespan = 2.5;
    t.tasks = {{"a", 1, 0.0, 1.5, TaskStatus::Ok, 0, "reports/a.json"},
               {"b", 2, 1.5, 2.5, TaskStatus::Failed, 1, "reports/b.json"},
               {"c", 1, 0.0, 0.0, TaskStatus::Aborted, 0, "reports/c.json"}};
    const auto back = trace_from_json(trace_to_json(t));
    EXPECT_EQ(trace_to_json(back), trace_to_json(t));
    EXPECT_EQ(back.seed, t.seed);
    EXPECT_THROW(trace_from_json(R"({"core_cap":1})"), ParseError);
}

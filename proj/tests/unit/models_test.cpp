#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include <json.hpp>

#include "per_level_oracle.hpp"
#include "test_support.hpp"
#include "wfforge/models.hpp"
#include "wfforge/recipes.hpp"

using namespace wfforge;
using namespace wfforge::models;

namespace {

constexpr double MB = 1e6;

WorkflowSpec two_level_spec(int width_a, int width_b) {
    WorkflowSpec spec;
    spec.name = "two";
    spec.files.push_back({"root_in", 10});
    TaskSpec root = wfforge::testing::make_task("root", {"root_in"}, {"root_out"});
    spec.files.push_back({"root_out", 10});
    spec.tasks.push_back(root);
    for (int i = 0; i < width_a; ++i) {
        const std::string id = "a" + std::to_string(i);
        spec.files.push_back({id + "_out", 1});
        spec.tasks.push_back(wfforge::testing::make_task(id, {"root_out"}, {id + "_out"}));
    }
    for (int i = 0; i < width_b; ++i) {
        const std::string id = "b" + std::to_string(i);
        spec.files.push_back({id + "_out", 1});
        spec.tasks.push_back(wfforge::testing::make_task(id, {"a" + std::to_string(i % width_a) + "_out"}, {id + "_out"}));
    }
    return spec;
}

} // namespace

TEST(Macro, ZeroWorkloadIsZero) {
    PlatformModel plat{3, 8, 1e9, 1e9};
    EXPECT_EQ(macro_no_overlap({}, plat), 0.0);
    EXPECT_EQ(macro_overlap({}, plat), 0.0);
}

TEST(Macro, MeasuredConstantsExample) {
    PlatformModel plat{1, 40, 466 * MB, 60 * MB};
    WorkloadAggregate agg{466 * MB, 60 * MB, 40 * 20.62};
    EXPECT_NEAR(macro_no_overlap(agg, plat), 22.62, 1e-12);
    EXPECT_NEAR(macro_overlap(agg, plat), 20.62, 1e-12);
}

TEST(Macro, HomogeneousInNodeCountAndOrdered) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1e9);
    for (int i = 0; i < 200; ++i) {
        WorkloadAggregate agg{u(rng), u(rng), u(rng) / 1e3};
        PlatformModel one{1 + rng() % 50, 1 + rng() % 64, 1 + u(rng), 1 + u(rng)};
        PlatformModel two = one;
        two.n *= 2;
        EXPECT_NEAR(macro_no_overlap(agg, two), macro_no_overlap(agg, one) / 2, 1e-9 * macro_no_overlap(agg, one));
        EXPECT_LE(macro_overlap(agg, one), macro_no_overlap(agg, one));
    }
    EXPECT_DOUBLE_EQ(macro_overlap({0, 0, 100}, {2, 5, 1, 1}), 10.0);
}

TEST(Macro, RejectsBadPlatform) {
    EXPECT_THROW(macro_overlap({}, {0, 1, 1, 1}), InvalidArgument);
    EXPECT_THROW(macro_overlap({}, {1, 1, 0, 1}), InvalidArgument);
    EXPECT_THROW(macro_overlap({-1, 0, 0}, {1, 1, 1, 1}), InvalidArgument);
}

TEST(Levels, ChainDiamondAndLongestPath) {
    auto chain = wfforge::testing::make_chain(3);
    auto levels = top_levels(chain);
    EXPECT_EQ(levels.at("T0"), 0u);
    EXPECT_EQ(levels.at("T1"), 1u);
    EXPECT_EQ(levels.at("T2"), 2u);

    WorkflowSpec diamond;
    for (const char* f : {"in", "a", "b", "c", "d"}) diamond.files.push_back({f, 1});
    diamond.tasks = {wfforge::testing::make_task("A", {"in"}, {"a"}), wfforge::testing::make_task("B", {"a"}, {"b"}),
                     wfforge::testing::make_task("C", {"a"}, {"c"}), wfforge::testing::make_task("D", {"b", "c"}, {"d"})};
    levels = top_levels(diamond);
    EXPECT_EQ(levels, (std::map<std::string, std::size_t>{{"A", 0}, {"B", 1}, {"C", 1}, {"D", 2}}));

    // E has parents at levels 1 (B) and 3 (F after D).
    diamond.files.push_back({"f", 1});
    diamond.files.push_back({"e", 1});
    diamond.tasks.push_back(wfforge::testing::make_task("F", {"d"}, {"f"}));
    diamond.tasks.push_back(wfforge::testing::make_task("E", {"b", "f"}, {"e"}));
    EXPECT_EQ(top_levels(diamond).at("E"), 4u);
}

TEST(Levels, PermutationInvariant) {
    auto spec = recipes::generate({recipes::builtin_recipe("montage"), 60, std::nullopt, {}, {}, 9});
    const auto reference = top_levels(spec);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 10; ++i) {
        std::shuffle(spec.tasks.begin(), spec.tasks.end(), rng);
        EXPECT_EQ(top_levels(spec), reference);
    }
}

TEST(PerLevel, SingleTaskSingleCore) {
    WorkflowSpec spec = wfforge::testing::make_chain(1, 500);
    PlatformModel plat{1, 1, 100, 50};
    const std::vector<TaskCost> costs{{"T0", 3.0, 500, 500}};
    EXPECT_DOUBLE_EQ(per_level(spec, plat, costs), 3.0 + 5.0 + 10.0);
}

TEST(PerLevel, TwoIdenticalTasksOneBatch) {
    WorkflowSpec spec;
    spec.files = {{"x", 0}, {"y", 0}, {"z", 0}, {"w", 0}};
    spec.tasks = {wfforge::testing::make_task("A", {"x"}, {"y"}), wfforge::testing::make_task("B", {"z"}, {"w"})};
    const std::vector<TaskCost> costs{{"A", 10, 0, 0}, {"B", 10, 0, 0}};
    EXPECT_DOUBLE_EQ(per_level(spec, {1, 2, 1, 1}, costs), 10.0);
}

TEST(PerLevel, MissingCostIsError) {
    auto spec = wfforge::testing::make_chain(2);
    EXPECT_THROW(per_level(spec, {1, 1, 1, 1}, {{"T0", 1, 0, 0}}), InvalidArgument);
}

TEST(PerLevel, MatchesBruteForceOracle) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> w(0.5, 30);
    const auto spec = two_level_spec(9, 10);  // 20 tasks on three levels
    ASSERT_EQ(spec.tasks.size(), 20u);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<TaskCost> costs;
        for (const auto& t : spec.tasks) costs.push_back({t.id, std::round(w(rng)), rng() % 4000, rng() % 1000});
        PlatformModel plat{1 + rng() % 3, 4, 100 + static_cast<double>(rng() % 900), 100};
        EXPECT_EQ(per_level(spec, plat, costs), wfforge::testing::brute_per_level(spec, plat, costs));
    }
}

TEST(PerLevel, UniformFullBatchesClosedForm) {
    // One level of 24 identical tasks on 2 nodes x 3 cores: 4 full batches.
    WorkflowSpec spec;
    std::vector<TaskCost> costs;
    for (int i = 0; i < 24; ++i) {
        const std::string id = "t" + std::to_string(i);
        spec.files.push_back({id + "_in", 0});
        spec.files.push_back({id + "_out", 0});
        spec.tasks.push_back(wfforge::testing::make_task(id, {id + "_in"}, {id + "_out"}));
        costs.push_back({id, 2.0, 300, 120});
    }
    const PlatformModel plat{2, 3, 100, 40};
    EXPECT_DOUBLE_EQ(per_level(spec, plat, costs), 4 * (2.0 + 3 * 300 / 100.0 + 3 * 120 / 40.0));
}

TEST(PerLevel, NotBelowMacroOverlapOnGeneratedSuite) {
    for (const auto& name : recipes::builtin_recipe_names()) {
        for (std::uint64_t n : {20u, 80u, 200u}) {
            recipes::GenerationRequest req{recipes::builtin_recipe(name), n, 50'000'000, {}, {}, 4};
            req.default_params.cpuwork = 100;
            req.default_params.memwork = 100;
            const auto spec = recipes::generate(req);
            const auto costs = task_costs(spec, {std::nullopt, 0.05, 0.01});
            PlatformModel plat{2, 1 + spec.tasks.size() / 2, 466 * MB, 60 * MB};
            EXPECT_GE(per_level(spec, plat, costs), macro_overlap(aggregate(costs), plat)) << name << " " << n;
        }
    }
}

TEST(Overhead, AddsAndPreservesOrder) {
    EXPECT_EQ(add_overhead(10, 0), 10);
    EXPECT_EQ(add_overhead(0, 42), 42);
    EXPECT_LT(add_overhead(3, 7), add_overhead(4, 7));
    EXPECT_THROW(add_overhead(-1, 0), InvalidArgument);
}

TEST(Nodes, ScenarioRule) {
    EXPECT_EQ(nodes_for_tasks(10'000), 25u);
    EXPECT_EQ(nodes_for_tasks(100'000), 250u);
    EXPECT_EQ(nodes_for_tasks(100), 1u);
    EXPECT_EQ(nodes_for_tasks(401), 2u);
    EXPECT_THROW(nodes_for_tasks(0), InvalidArgument);
}

TEST(Estimate, CostsAndJson) {
    auto spec = wfforge::testing::make_chain(3, 1000);
    auto costs = task_costs(spec, {std::nullopt, 0.5, 0.25});
    ASSERT_EQ(costs.size(), 3u);
    EXPECT_EQ(costs[1].read_bytes, 1000u);
    EXPECT_EQ(costs[1].write_bytes, 1000u);
    EXPECT_DOUBLE_EQ(costs[0].w_t, std::max(spec.tasks[0].params.cpuwork * 0.5, spec.tasks[0].params.memwork * 0.25));
    costs = task_costs(spec, {2.0, 0, 0});
    EXPECT_EQ(aggregate(costs).work, 6.0);

    const auto e = estimate(spec, Model::PerLevel, {1, 1, 1000, 1000}, {2.0, 0, 0}, 1.0);
    EXPECT_DOUBLE_EQ(e.makespan_seconds, 3 * 2.0 + 3 * 2.0 - 0 + 1.0);
    EXPECT_DOUBLE_EQ(e.throughput(), 3 / e.makespan_seconds);
    const auto doc = nlohmann::json::parse(estimate_to_json(e));
    EXPECT_EQ(doc["model"], "per-level");
    EXPECT_DOUBLE_EQ(doc["makespan_seconds"].get<double>(), e.makespan_seconds);
    EXPECT_EQ(model_from_name("macro-overlap"), Model::MacroOverlap);
    EXPECT_THROW(model_from_name("bogus"), InvalidArgument);
}

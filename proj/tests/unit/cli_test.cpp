#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "test_support.hpp"
#include "wfforge/cli.hpp"
#include "wfforge/recipes.hpp"
#include "wfforge/runner.hpp"

using namespace wfforge;
using wfforge::testing::TempDir;
using json = nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result wfforge_cmd(std::vector<std::string> args) {
    args.insert(args.begin(), "wfforge");
    std::ostringstream out, err;
    const int code = cli::wfforge_main(args, out, err);
    return {code, out.str(), err.str()};
}

Result taskbench_cmd(std::vector<std::string> args) {
    args.insert(args.begin(), "taskbench");
    std::ostringstream out, err;
    const int code = cli::taskbench_main(args, out, err);
    return {code, out.str(), err.str()};
}

// Restores WFFORGE_SEED on scope exit.
class SeedEnv {
public:
    explicit SeedEnv(const char* value) {
        if (const char* old = std::getenv("WFFORGE_SEED")) saved_ = old;
        if (value) {
            ::setenv("WFFORGE_SEED", value, 1);
        } else {
            ::unsetenv("WFFORGE_SEED");
        }
    }
    ~SeedEnv() {
        if (saved_) {
            ::setenv("WFFORGE_SEED", saved_->c_str(), 1);
        } else {
            ::unsetenv("WFFORGE_SEED");
        }
    }

private:
    std::optional<std::string> saved_;
};

} // namespace

TEST(Cli, GenerateProducesValidSpec) {
    SeedEnv env(nullptr);
    const auto r = wfforge_cmd({"generate", "--recipe", "epigenomics", "--tasks", "20", "--footprint", "1M",
                                "--cpuwork", "100", "--f", "0.7"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const auto spec = parse(r.out);
    EXPECT_EQ(total_footprint(spec), 1'000'000u);
    EXPECT_EQ(spec.provenance.recipe, "epigenomics");
    for (const auto& t : spec.tasks) {
        EXPECT_EQ(t.params.cpuwork, 100.0);
        EXPECT_EQ(t.params.f, CpuFraction::from_tenths(7));
    }
}

TEST(Cli, GenerateIsByteDeterministic) {
    const std::vector<std::string> args{"generate", "--recipe", "montage", "--tasks", "50", "--footprint", "10k",
                                        "--seed", "17"};
    const auto a = wfforge_cmd(args);
    const auto b = wfforge_cmd(args);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    auto other = args;
    other.back() = "18";
    EXPECT_NE(wfforge_cmd(other).out, a.out);
}

TEST(Cli, SeedDefaultsFromEnvironment) {
    const std::vector<std::string> args{"generate", "--recipe", "cycles", "--tasks", "40"};
    std::string from_env;
    {
        SeedEnv env("42");
        EXPECT_EQ(cli::default_seed(), 42u);
        from_env = wfforge_cmd(args).out;
    }
    auto explicit_args = args;
    explicit_args.insert(explicit_args.end(), {"--seed", "42"});
    EXPECT_EQ(wfforge_cmd(explicit_args).out, from_env);
    SeedEnv bad("nope");
    EXPECT_EQ(wfforge_cmd(args).code, cli::kExitUsage);
}

TEST(Cli, FullRangeSeedAccepted) {
    const auto r = wfforge_cmd({"generate", "--recipe", "blast", "--tasks", "6", "--seed", "18446744073709551615"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(parse(r.out).provenance.seed, 18446744073709551615ULL);
    EXPECT_EQ(wfforge_cmd({"generate", "--recipe", "blast", "--tasks", "6", "--seed", "18446744073709551616"}).code,
              cli::kExitUsage);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(wfforge_cmd({"bogus"}).code, cli::kExitUsage);
    EXPECT_EQ(wfforge_cmd({}).code, cli::kExitUsage);
    const auto r = wfforge_cmd({"estimate", "--cores-per-node", "4", "--bw-read", "1G", "--bw-write", "1G"});
    EXPECT_EQ(r.code, cli::kExitUsage);
    EXPECT_NE(r.err.find("--spec"), std::string::npos);
    EXPECT_EQ(wfforge_cmd({"generate", "--recipe", "blast", "--tasks", "ten"}).code, cli::kExitUsage);
    EXPECT_EQ(wfforge_cmd({"generate", "--recipe", "blast", "--tasks", "6", "--f", "0.35"}).code, cli::kExitUsage);
}

TEST(Cli, DomainErrors) {
    // Fewer tasks than the base graph is a domain error, not a usage one.
    const auto r = wfforge_cmd({"generate", "--recipe", "soykb", "--tasks", "3"});
    EXPECT_EQ(r.code, cli::kExitDomainError);
    EXPECT_NE(r.err.find("min_tasks"), std::string::npos);
    EXPECT_EQ(wfforge_cmd({"generate", "--recipe", "nosuch", "--tasks", "3"}).code, cli::kExitDomainError);
}

TEST(Cli, VersionJson) {
    const auto r = wfforge_cmd({"--version"});
    ASSERT_EQ(r.code, 0);
    const auto doc = json::parse(r.out);
    EXPECT_EQ(doc["name"], "wfforge");
    EXPECT_TRUE(doc.contains("version"));
    EXPECT_TRUE(doc.contains("simd"));
}

TEST(Cli, TranslateAndEstimate) {
    TempDir dir;
    const auto spec_path = (dir / "w.json").string();
    ASSERT_EQ(wfforge_cmd({"generate", "--recipe", "blast", "--tasks", "10", "--footprint", "1M", "--cpuwork", "10",
                           "-o", spec_path})
                  .code,
              0);
    auto r = wfforge_cmd({"translate", "--spec", spec_path, "--format", "portable-dag"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(runner::parse_manifest(r.out).tasks.size(), 10u);
    EXPECT_EQ(wfforge_cmd({"translate", "--spec", spec_path, "--format", "dot"}).code, cli::kExitUsage);

    r = wfforge_cmd({"estimate", "--spec", spec_path, "--model", "macro-overlap", "--cores-per-node", "4",
                     "--bw-read", "100M", "--bw-write", "100M", "--wt", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = json::parse(r.out);
    EXPECT_GT(doc["makespan_seconds"].get<double>(), 0.0);
    EXPECT_EQ(wfforge_cmd({"estimate", "--spec", spec_path, "--model", "guess", "--cores-per-node", "4",
                           "--bw-read", "1", "--bw-write", "1", "--wt", "1"})
                  .code,
              cli::kExitUsage);
}

TEST(Cli, RunThenAnalyze) {
    TempDir dir;
    const auto spec_path = (dir / "w.json").string();
    const auto trace_path = (dir / "trace.json").string();
    ASSERT_EQ(wfforge_cmd({"generate", "--recipe", "epigenomics", "--tasks", "12", "--footprint", "100k",
                           "--cpuwork", "50", "--memwork", "50", "-o", spec_path})
                  .code,
              0);
    auto r = wfforge_cmd({"run", "--spec", spec_path, "--cores", "2", "--workdir", (dir / "work").string(),
                          "--trace", trace_path, "--taskbench", WFFORGE_TASKBENCH_PATH, "--oversubscribe",
                          "--array-bytes", "64k"});
    ASSERT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_TRUE(json::parse(r.out)["ok"].get<bool>());

    r = wfforge_cmd({"analyze", "--trace", trace_path, "--metric", "throughput"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_GT(json::parse(r.out)["throughput"].get<double>(), 0.0);
    r = wfforge_cmd({"analyze", "--trace", trace_path, "--metric", "ks", "--against", trace_path});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["ks"].get<double>(), 0.0);
    r = wfforge_cmd({"analyze", "--trace", trace_path, "--metric", "ecdf"});
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find(" 1.0\n"), std::string::npos);
    EXPECT_EQ(wfforge_cmd({"analyze", "--trace", trace_path, "--metric", "ks"}).code, cli::kExitUsage);
}

TEST(Cli, DetectFromGeneratedInstances) {
    TempDir dir;
    std::vector<std::string> args{"detect", "--name", "found"};
    for (const char* n : {"20", "40", "60"}) {
        const auto path = (dir / (std::string("i") + n + ".json")).string();
        ASSERT_EQ(wfforge_cmd({"generate", "--recipe", "epigenomics", "--tasks", n, "-o", path}).code, 0);
        args.insert(args.end(), {"--instance", path});
    }
    const auto r = wfforge_cmd(args);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto recipe = recipes::recipe_from_json(r.out);
    EXPECT_EQ(recipe.name, "found");
    EXPECT_FALSE(recipe.patterns.empty());
    EXPECT_EQ(wfforge_cmd({"detect", "--instance", args[4]}).code, cli::kExitUsage);
}

TEST(Cli, RunTaskAndTaskbenchAgree) {
    TempDir dir;
    const auto out_path = (dir / "o.bin").string();
    const std::vector<std::string> args{"--name", "t", "--cpuwork", "10", "--memwork", "10", "--output",
                                        out_path + ":1234", "--array-bytes", "64k", "--oversubscribe"};
    auto with = args;
    with.insert(with.begin(), "run-task");
    const auto a = wfforge_cmd(with);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(std::filesystem::file_size(out_path), 1234u);
    EXPECT_EQ(json::parse(a.out)["name"], "t");
    const auto b = taskbench_cmd(args);
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(taskbench_cmd({"--output", "nobytes"}).code, cli::kExitUsage);
    EXPECT_EQ(taskbench_cmd({"--input", (dir / "missing").string()}).code, cli::kExitDomainError);
}

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "test_support.hpp"
#include "wfforge/taskbench.hpp"

using namespace wfforge;
using namespace wfforge::bench;
using wfforge::testing::TempDir;

namespace {

ComputeOptions small_options(std::uint64_t seed = 1) {
    ComputeOptions o;
    o.seed = seed;
    o.array_bytes = 1 << 20;
    o.allow_oversubscribe = true;
    return o;
}

TaskParams params(int cores, double cpuwork, double memwork, int tenths) {
    TaskParams p;
    p.cores = cores;
    p.cpuwork = cpuwork;
    p.memwork = memwork;
    p.f = CpuFraction::from_tenths(tenths);
    return p;
}

std::size_t count_kind(const KernelReport& r, WorkerKind kind, int group = -1) {
    return static_cast<std::size_t>(std::count_if(r.workers.begin(), r.workers.end(), [&](const WorkerRecord& w) {
        return w.kind == kind && (group < 0 || w.group == group);
    }));
}

} // namespace

TEST(ReadPhase, EmptyFile) {
    TempDir dir;
    wfforge::testing::write_file(dir / "empty", "");
    EXPECT_EQ(read_phase(dir / "empty"), 0u);
}

TEST(ReadPhase, ExactLength) {
    TempDir dir;
    wfforge::testing::write_file(dir / "mib", std::string(1'048'576, 'x'));
    EXPECT_EQ(read_phase(dir / "mib"), 1'048'576u);
}

TEST(ReadPhase, MissingFileIsPhaseError) {
    TempDir dir;
    const auto path = dir / "gone";
    wfforge::testing::write_file(path, "abc");
    std::filesystem::remove(path);
    try {
        read_phase(path);
        FAIL();
    } catch (const PhaseError& e) {
        EXPECT_EQ(e.phase(), "read");
        EXPECT_NE(std::string(e.what()).find(path.string()), std::string::npos);
    }
}

TEST(CpuKernel, ZeroWorkReturnsImmediately) {
    auto r = cpu_kernel(0);
    EXPECT_EQ(r.terms, 0u);
    EXPECT_FALSE(r.pi_estimate.has_value());
}

TEST(CpuKernel, DoublingWorkDoublesTerms) {
    EXPECT_EQ(cpu_kernel(3).terms, 3000u);
    EXPECT_EQ(cpu_kernel(6).terms, 2 * cpu_kernel(3).terms);
    EXPECT_EQ(cpu_kernel(0.5).terms, 500u);
}

TEST(CpuKernel, MoreWorkIsMorePrecise) {
    const auto coarse = cpu_kernel(100);
    const auto fine = cpu_kernel(10'000);
    ASSERT_TRUE(coarse.pi_estimate && fine.pi_estimate);
    EXPECT_LT(std::abs(*fine.pi_estimate - std::numbers::pi), std::abs(*coarse.pi_estimate - std::numbers::pi));
}

TEST(MemKernel, ZeroWorkSumsToZero) {
    auto r = mem_kernel(0, 4096, 1);
    EXPECT_EQ(r.increments, 0u);
    EXPECT_EQ(r.array_sum, 0u);
}

TEST(MemKernel, IncrementsAreConserved) {
    auto r = mem_kernel(1'000'000, 1 << 20, 7);
    EXPECT_EQ(r.increments, 1'000'000u);
    EXPECT_EQ(r.array_sum, 1'000'000u);
}

TEST(MemKernel, RejectsTinyArray) { EXPECT_THROW(mem_kernel(1, 2, 1), InvalidArgument); }

TEST(MemKernel, SameSeedSameArray) {
    std::vector<std::uint32_t> a(4096), b(4096), c(4096);
    scatter_increments(a, 100'000, 42);
    scatter_increments(b, 100'000, 42);
    scatter_increments(c, 100'000, 43);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(ComputePhase, HalfSplitOneCore) {
    KernelReport r;
    compute_phase(params(1, 10, 1000, 5), small_options(), r);
    EXPECT_EQ(r.workers.size(), 10u);
    EXPECT_EQ(count_kind(r, WorkerKind::Cpu), 5u);
    EXPECT_EQ(count_kind(r, WorkerKind::Memory), 5u);
}

TEST(ComputePhase, AllCpuTwoGroups) {
    KernelReport r;
    compute_phase(params(2, 20, 0, 10), small_options(), r);
    EXPECT_EQ(count_kind(r, WorkerKind::Cpu), 20u);
    EXPECT_EQ(count_kind(r, WorkerKind::Memory), 0u);
    EXPECT_EQ(count_kind(r, WorkerKind::Cpu, 0), 10u);
    EXPECT_EQ(count_kind(r, WorkerKind::Cpu, 1), 10u);
    EXPECT_EQ(r.t_mem, 0.0);
}

TEST(ComputePhase, EvenSplitOfCpuWork) {
    KernelReport r;
    compute_phase(params(1, 300, 0, 3), small_options(), r);
    ASSERT_EQ(count_kind(r, WorkerKind::Cpu), 3u);
    std::uint64_t total = 0;
    for (const auto& w : r.workers) {
        if (w.kind == WorkerKind::Cpu) {
            EXPECT_EQ(w.iterations, 100u * kTermsPerCpuUnit);
            total += w.iterations;
        }
    }
    EXPECT_EQ(total, 300u * kTermsPerCpuUnit);
}

TEST(ComputePhase, RemainderGoesToLowestWorkers) {
    EXPECT_EQ(even_split(10, 4), (std::vector<std::uint64_t>{3, 3, 2, 2}));
    EXPECT_EQ(even_split(2, 3), (std::vector<std::uint64_t>{1, 1, 0}));
    EXPECT_TRUE(even_split(5, 0).empty());

    KernelReport r;
    compute_phase(params(1, 0, 7, 7), small_options(), r);
    std::vector<std::uint64_t> mem;
    for (const auto& w : r.workers) {
        if (w.kind == WorkerKind::Memory) mem.push_back(w.iterations);
    }
    EXPECT_EQ(mem, (std::vector<std::uint64_t>{3, 2, 2}));
    EXPECT_EQ(r.mem_array_sum, 7u);
}

TEST(ComputePhase, GlobalSeriesEstimate) {
    // Workers sum disjoint segments, so the estimate equals the single-thread one.
    KernelReport r;
    compute_phase(params(1, 2000, 0, 10), small_options(), r);
    ASSERT_TRUE(r.pi_estimate.has_value());
    EXPECT_NEAR(*r.pi_estimate, *cpu_kernel(2000).pi_estimate, 1e-12);
}

TEST(ComputePhase, TooManyCoresIsError) {
    const auto cpus = usable_cpus();
    ComputeOptions o = small_options();
    o.allow_oversubscribe = false;
    KernelReport r;
    try {
        compute_phase(params(static_cast<int>(cpus.size()) + 1, 1, 0, 10), o, r);
        FAIL();
    } catch (const PhaseError& e) {
        EXPECT_EQ(e.phase(), "compute");
    }
}

TEST(ComputePhase, PinningRecorded) {
    KernelReport r;
    compute_phase(params(1, 1, 0, 10), small_options(), r);
    if (r.pinned) {
        for (const auto& w : r.workers) EXPECT_GE(w.cpu, 0);
        EXPECT_TRUE(r.warnings.empty());
    } else {
        EXPECT_FALSE(r.warnings.empty());
    }

    ComputeOptions unpinned = small_options();
    unpinned.pin = false;
    KernelReport u;
    compute_phase(params(1, 1, 0, 10), unpinned, u);
    EXPECT_FALSE(u.pinned);
    for (const auto& w : u.workers) EXPECT_EQ(w.cpu, -1);
}

TEST(ComputePhase, IgnoredWorkIsWarned) {
    KernelReport r;
    compute_phase(params(1, 50, 0, 0), small_options(), r);
    EXPECT_EQ(r.cpu_iterations(), 0u);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(ComputePhase, TcpuMonotoneInWork) {
    auto median_tcpu = [](double cpuwork) {
        std::vector<double> samples;
        for (int i = 0; i < 3; ++i) {
            KernelReport r;
            compute_phase(params(1, cpuwork, 0, 10), small_options(), r);
            samples.push_back(r.t_cpu);
        }
        std::sort(samples.begin(), samples.end());
        return samples[1];
    };
    const double a = median_tcpu(100);
    const double b = median_tcpu(10'000);
    const double c = median_tcpu(100'000);
    EXPECT_LE(a, b);
    EXPECT_LE(b, c);
}

TEST(WritePhase, ZeroBytesCreatesEmptyFile) {
    TempDir dir;
    EXPECT_EQ(write_phase(dir / "out", 0, 1), 0u);
    ASSERT_TRUE(std::filesystem::exists(dir / "out"));
    EXPECT_EQ(std::filesystem::file_size(dir / "out"), 0u);
}

TEST(WritePhase, ExactSizeAndDeterministic) {
    TempDir dir;
    constexpr std::uint64_t size = 52'428'800;
    write_phase(dir / "a", size, 99);
    write_phase(dir / "b", size, 99);
    write_phase(dir / "c", 1001, 100);
    EXPECT_EQ(std::filesystem::file_size(dir / "a"), size);
    EXPECT_EQ(wfforge::testing::read_file(dir / "a"), wfforge::testing::read_file(dir / "b"));
    EXPECT_EQ(std::filesystem::file_size(dir / "c"), 1001u);
    EXPECT_NE(wfforge::testing::read_file(dir / "a").substr(0, 1001), wfforge::testing::read_file(dir / "c"));
}

TEST(WritePhase, UnwritableDestination) {
    TempDir dir;
    try {
        write_phase(dir / "no-such-dir" / "out", 10, 1);
        FAIL();
    } catch (const PhaseError& e) {
        EXPECT_EQ(e.phase(), "write");
    }
}

TEST(RunTask, NoInputsOneOutput) {
    TempDir dir;
    TaskRun run;
    run.name = "t";
    run.params = params(1, 0, 0, 5);
    run.outputs = {{dir / "out", 1024}};
    run.options = small_options();
    auto r = run_task(run);
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_EQ(r.bytes_read, 0u);
    EXPECT_EQ(r.bytes_written, 1024u);
    EXPECT_EQ(std::filesystem::file_size(dir / "out"), 1024u);
}

TEST(RunTask, TwoInputsTwoGroupsPhasesOrdered) {
    TempDir dir;
    wfforge::testing::write_file(dir / "in1", std::string(3000, 'a'));
    wfforge::testing::write_file(dir / "in2", std::string(5000, 'b'));
    TaskRun run;
    run.name = "join";
    run.params = params(2, 200, 20'000, 6);
    run.inputs = {dir / "in1", dir / "in2"};
    run.outputs = {{dir / "out", 4096}};
    run.seed = 3;
    run.options = small_options();
    auto r = run_task(run);
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_EQ(r.bytes_read, 8000u);
    EXPECT_EQ(r.workers.size(), 20u);
    EXPECT_EQ(count_kind(r, WorkerKind::Cpu, 0), 6u);
    EXPECT_EQ(count_kind(r, WorkerKind::Memory, 1), 4u);
    EXPECT_LE(r.read.start, r.read.end);
    EXPECT_LE(r.read.end, r.compute.start);
    EXPECT_LE(r.compute.start, r.compute.end);
    EXPECT_LE(r.compute.end, r.write.start);
    EXPECT_LE(r.write.start, r.write.end);
    EXPECT_EQ(r.mem_array_sum, 20'000u);
}

TEST(RunTask, FailedPhaseNamed) {
    TempDir dir;
    TaskRun run;
    run.name = "broken";
    run.inputs = {dir / "missing"};
    run.outputs = {{dir / "out", 10}};
    run.options = small_options();
    auto r = run_task(run);
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.failed_phase, "read");
    EXPECT_FALSE(std::filesystem::exists(dir / "out"));
}

TEST(RunTask, SeedFixesOutputBytes) {
    TempDir dir;
    TaskRun run;
    run.params = params(1, 1, 100, 5);
    run.seed = 17;
    run.options = small_options();
    run.outputs = {{dir / "x", 10'000}, {dir / "y", 10'000}};
    run_task(run);
    const auto x1 = wfforge::testing::read_file(dir / "x");
    const auto y1 = wfforge::testing::read_file(dir / "y");
    run_task(run);
    EXPECT_EQ(wfforge::testing::read_file(dir / "x"), x1);
    EXPECT_EQ(wfforge::testing::read_file(dir / "y"), y1);
    EXPECT_NE(x1, y1);
}

TEST(Report, JsonRoundTrip) {
    TempDir dir;
    TaskRun run;
    run.name = "rt";
    run.params = params(1, 5, 50, 4);
    run.outputs = {{dir / "o", 3}};
    run.options = small_options();
    const auto r = run_task(run);
    const auto text = report_to_json(r);
    const auto back = report_from_json(text);
    EXPECT_EQ(report_to_json(back), text);
    EXPECT_EQ(back.workers.size(), 10u);
    EXPECT_THROW(report_from_json("{"), ParseError);
}

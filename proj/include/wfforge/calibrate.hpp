#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wfforge/error.hpp"
#include "wfforge/fraction.hpp"
#include "wfforge/taskbench.hpp"

namespace wfforge::calib {

struct CalibrationTarget {
    double seconds = 0.0;  // runtime T of the task being imitated
    CpuFraction f;
    double tolerance = 0.05;
    int max_iterations = 20;
};

/// Completion times of the CPU and memory workers of one kernel run. A side
/// is absent when f leaves no workers of that kind.
struct Timing {
    std::optional<double> t_cpu;
    std::optional<double> t_mem;
};

using KernelRunner = std::function<Timing(double cpuwork, double memwork, CpuFraction f)>;

struct FitOptions {
    double initial_cpuwork = 100.0;
    double initial_memwork = 100.0;
    int repetitions = 3;  // each measurement is the median of this many runs
};

struct WorkFit {
    double cpuwork = 0.0;
    double memwork = 0.0;
    int iterations = 0;  // measurement rounds performed
    Timing last;         // measurement of the returned work values
};

class CalibrationError : public Error {
public:
    CalibrationError(const std::string& what, WorkFit last) : Error(what), last_(last) {}
    const WorkFit& last_iterate() const { return last_; }

private:
    WorkFit last_;
};

/// True when every present side of `t` is within the relative tolerance of T.
bool within_tolerance(const Timing& t, double target_seconds, double tolerance);

/// Multiplicative update: work * T / measured.
double rescale_work(double work, double target_seconds, double measured_seconds);

/// Greedy fixed-point search: measure, stop when both completion times are
/// within tolerance of T, otherwise rescale each work amount by T / measured.
/// Throws CalibrationError after max_iterations rounds without convergence.
WorkFit fit_work(const CalibrationTarget& target, const KernelRunner& runner, const FitOptions& options = {});

struct ProfileCounts {
    std::uint64_t total_instructions = 0;
    std::uint64_t memory_instructions = 0;
};

/// 1 - memory/total rounded to the nearest tenth (ties up) in exact integer
/// arithmetic. Throws InvalidArgument for zero or inconsistent counts.
CpuFraction f_from_profile(const ProfileCounts& counts);

/// Accepts either two whitespace-separated integers (total, memory) or a JSON
/// object with keys total_instructions and memory_instructions.
ProfileCounts parse_profile(std::string_view text);

/// f whose runtime ratio is closest to 1.0; near-ties go to the smaller f.
CpuFraction select_f_empirical(const std::map<CpuFraction, double>& ratios);

// ---------------------------------------------------------------------------
// Calibration under background memory load

/// A running load generator; stops when destroyed.
class LoadHandle {
public:
    virtual ~LoadHandle() = default;
};

using LoadStarter = std::function<std::unique_ptr<LoadHandle>(int cores)>;

/// Background memory traffic on `cores` threads, each pinned to a CPU not
/// used by the first `skip_cpus` usable CPUs when enough exist.
class BackgroundLoad : public LoadHandle {
public:
    BackgroundLoad(int cores, int skip_cpus, std::size_t array_bytes = bench::kDefaultArrayBytes);
    ~BackgroundLoad() override;
    BackgroundLoad(const BackgroundLoad&) = delete;
    BackgroundLoad& operator=(const BackgroundLoad&) = delete;

    int cores() const { return cores_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int cores_ = 0;
};

struct LoadSpec {
    int node_cores = 0;              // cores of the node; load defaults to floor(node_cores / 2)
    std::optional<int> load_cores;   // explicit override
    std::optional<double> loaded_target_seconds;  // runtime of the real task under the same load
    std::vector<CpuFraction> fractions;           // empty: 0.1 .. 0.9

    int effective_load_cores() const;
};

struct SweepEntry {
    CpuFraction f;
    WorkFit fit;
    double runtime_no_load = 0.0;
    double runtime_loaded = 0.0;
    double ratio_no_load = 0.0;  // runtime_no_load / T
    double ratio_loaded = 0.0;   // runtime_loaded / loaded target (T when absent)
};

struct CalibrationReport {
    double target_seconds = 0.0;
    std::optional<double> loaded_target_seconds;
    double tolerance = 0.0;
    int load_cores = 0;
    std::vector<SweepEntry> entries;
    std::optional<CpuFraction> selected;  // select_f_empirical over ratio_loaded

    std::map<CpuFraction, double> loaded_ratios() const;
};

/// Runtime of one benchmark execution: the slower of its two worker kinds.
double runtime_of(const Timing& t);

/// For each f: fit work without load, then re-measure with the load running.
/// With zero load cores the loaded measurement is the unloaded one.
CalibrationReport calibrate_under_load(const CalibrationTarget& target, const LoadSpec& load,
                                       const KernelRunner& runner, const LoadStarter& start_load,
                                       const FitOptions& options = {});

/// Runner that executes the real compute phase in-process.
KernelRunner kernel_runner(int cores, const bench::ComputeOptions& options);

/// Starter producing BackgroundLoad instances beside a kernel on `kernel_cores`.
LoadStarter background_load_starter(int kernel_cores, std::size_t array_bytes = bench::kDefaultArrayBytes);

std::string report_to_json(const CalibrationReport& report);

} // namespace wfforge::calib

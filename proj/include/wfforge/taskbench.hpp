#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wfforge/error.hpp"
#include "wfforge/simd/kernels.hpp"
#include "wfforge/wfspec.hpp"

namespace wfforge::bench {

/// Leibniz terms per unit of cpuwork.
inline constexpr std::uint64_t kTermsPerCpuUnit = 1000;
/// Default private array size of one memory worker (64 MiB).
inline constexpr std::size_t kDefaultArrayBytes = std::size_t{64} << 20;
inline constexpr int kWorkersPerCore = 10;

/// Failure of one benchmark phase ("read", "compute" or "write").
class PhaseError : public Error {
public:
    PhaseError(std::string phase, const std::string& what)
        : Error(phase + " phase: " + what), phase_(std::move(phase)) {}
    const std::string& phase() const { return phase_; }

private:
    std::string phase_;
};

enum class WorkerKind { Cpu, Memory };

struct WorkerRecord {
    WorkerKind kind = WorkerKind::Cpu;
    int group = 0;       // index of the group of ten, 0..n-1
    int cpu = -1;        // logical CPU the group was pinned to, -1 if unpinned
    std::uint64_t iterations = 0;  // Leibniz terms or array increments performed
    double seconds = 0.0;
};

struct PhaseSpan {
    double start = 0.0;  // seconds since the task origin
    double end = 0.0;
};

/// Machine-readable outcome of one task benchmark run.
struct KernelReport {
    std::string name;
    std::uint64_t seed = 0;
    TaskParams params;
    std::string simd_variant;

    std::uint64_t bytes_read = 0;
    std::uint64_t bytes_written = 0;
    PhaseSpan read;
    PhaseSpan compute;
    PhaseSpan write;
    double t_read = 0.0;
    double t_cpu = 0.0;  // slowest CPU worker
    double t_mem = 0.0;  // slowest memory worker
    double t_write = 0.0;

    std::vector<WorkerRecord> workers;
    std::optional<double> pi_estimate;
    std::uint64_t mem_array_sum = 0;  // over all memory workers' arrays

    bool pinned = false;
    std::vector<std::string> warnings;

    bool ok = true;
    std::string failed_phase;
    std::string error;

    std::uint64_t cpu_iterations() const;
    std::uint64_t mem_iterations() const;
    double cpu_units() const;
};

std::string report_to_json(const KernelReport& report);
KernelReport report_from_json(std::string_view text);

// ---------------------------------------------------------------------------
// Phases

/// Reads the whole file sequentially in the calling thread; returns its length.
std::uint64_t read_phase(const std::filesystem::path& path);

struct CpuKernelResult {
    std::optional<double> pi_estimate;  // absent when no terms were summed
    std::uint64_t terms = 0;
    double seconds = 0.0;
};

/// Sums cpuwork * 1000 Leibniz terms starting at term 0.
CpuKernelResult cpu_kernel(double cpuwork, simd::Variant variant = simd::best_variant());

/// Performs `count` increments at uniformly random positions of `array`,
/// drawing positions from a generator seeded with `seed`.
void scatter_increments(std::span<std::uint32_t> array, std::uint64_t count, std::uint64_t seed);

struct MemKernelResult {
    std::uint64_t increments = 0;
    std::uint64_t array_sum = 0;
    double seconds = 0.0;
};

/// Allocates a private array of `array_bytes` and performs memwork increments.
MemKernelResult mem_kernel(double memwork, std::size_t array_bytes, std::uint64_t seed,
                           simd::Variant variant = simd::best_variant());

struct ComputeOptions {
    std::uint64_t seed = 0;
    std::size_t array_bytes = kDefaultArrayBytes;
    bool pin = true;
    // Permit n larger than the number of usable logical CPUs; groups then
    // share CPUs round-robin.
    bool allow_oversubscribe = false;
    simd::Variant variant = simd::best_variant();
};

/// Runs n groups of ten workers; fills the compute-related report fields.
/// Throws PhaseError("compute") on allocation failure or when n exceeds the
/// usable CPUs without allow_oversubscribe.
void compute_phase(const TaskParams& params, const ComputeOptions& options, KernelReport& report);

/// Creates `path` holding exactly out_bytes pseudo-random bytes.
std::uint64_t write_phase(const std::filesystem::path& path, std::uint64_t out_bytes, std::uint64_t seed);

struct OutputRequest {
    std::filesystem::path path;
    std::uint64_t bytes = 0;
};

struct TaskRun {
    std::string name;
    TaskParams params;
    std::vector<std::filesystem::path> inputs;
    std::vector<OutputRequest> outputs;
    std::uint64_t seed = 0;
    ComputeOptions options;  // options.seed is overwritten from `seed`
};

/// Read all inputs, compute, then write every output, strictly in sequence.
/// Phase failures are captured in the report (ok = false, failed_phase set)
/// and stop the remaining phases.
KernelReport run_task(const TaskRun& run);

/// Logical CPUs this process may run on, in ascending order.
std::vector<int> usable_cpus();

/// Splits `total` into `parts` shares differing by at most one; the first
/// (total mod parts) shares get the extra unit.
std::vector<std::uint64_t> even_split(std::uint64_t total, std::size_t parts);

} // namespace wfforge::bench

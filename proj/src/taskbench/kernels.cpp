#include "wfforge/taskbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <latch>
#include <memory>
#include <new>
#include <thread>

#include <pthread.h>
#include <sched.h>

#include "wfforge/rng.hpp"

namespace wfforge::bench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

std::uint64_t to_count(double work, double per_unit) {
    if (!(work > 0.0)) return 0;
    return static_cast<std::uint64_t>(std::llround(work * per_unit));
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

constexpr std::size_t kIoChunk = std::size_t{1} << 20;

} // namespace

std::vector<std::uint64_t> even_split(std::uint64_t total, std::size_t parts) {
    std::vector<std::uint64_t> shares(parts, 0);
    if (parts == 0) return shares;
    const std::uint64_t base = total / parts;
    const std::uint64_t extra = total % parts;
    for (std::size_t i = 0; i < parts; ++i) {
        shares[i] = base + (i < extra ? 1 : 0);
    }
    return shares;
}

std::vector<int> usable_cpus() {
    std::vector<int> cpus;
    cpu_set_t set;
    CPU_ZERO(&set);
    if (sched_getaffinity(0, sizeof(set), &set) == 0) {
        for (int c = 0; c < CPU_SETSIZE; ++c) {
            if (CPU_ISSET(c, &set)) cpus.push_back(c);
        }
    }
    if (cpus.empty()) {
        const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
        for (unsigned c = 0; c < hw; ++c) cpus.push_back(static_cast<int>(c));
    }
    return cpus;
}

std::uint64_t read_phase(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) {
        throw PhaseError("read", "cannot open " + path.string() + ": " + std::strerror(errno));
    }
    std::vector<char> buffer(kIoChunk);
    std::uint64_t total = 0;
    while (true) {
        const std::size_t got = std::fread(buffer.data(), 1, buffer.size(), file.get());
        total += got;
        if (got < buffer.size()) {
            if (std::ferror(file.get())) {
                throw PhaseError("read", "error reading " + path.string());
            }
            break;
        }
    }
    return total;
}

CpuKernelResult cpu_kernel(double cpuwork, simd::Variant variant) {
    CpuKernelResult result;
    result.terms = to_count(cpuwork, static_cast<double>(kTermsPerCpuUnit));
    const auto start = Clock::now();
    if (result.terms > 0) {
        result.pi_estimate = 4.0 * simd::leibniz_sum(0, result.terms, variant);
    }
    result.seconds = seconds_between(start, Clock::now());
    return result;
}

void scatter_increments(std::span<std::uint32_t> array, std::uint64_t count, std::uint64_t seed) {
    if (array.empty()) {
        if (count > 0) throw InvalidArgument("scatter_increments: empty array");
        return;
    }
    Rng rng(seed);
    const std::uint64_t size = array.size();
    std::uint32_t* data = array.data();
    for (std::uint64_t i = 0; i < count; ++i) {
        ++data[bounded(rng, size)];
    }
}

namespace {

std::unique_ptr<std::uint32_t[]> allocate_counters(std::size_t elements) {
    // Value-initialised so every page is touched before timing starts.
    return std::unique_ptr<std::uint32_t[]>(new std::uint32_t[elements]());
}

std::size_t counters_for(std::size_t array_bytes) {
    return std::max<std::size_t>(1, array_bytes / sizeof(std::uint32_t));
}

} // namespace

MemKernelResult mem_kernel(double memwork, std::size_t array_bytes, std::uint64_t seed,
                           simd::Variant variant) {
    if (array_bytes < sizeof(std::uint32_t)) {
        throw InvalidArgument("mem_kernel: array must hold at least one element");
    }
    MemKernelResult result;
    result.increments = to_count(memwork, 1.0);
    const std::size_t elements = counters_for(array_bytes);
    std::unique_ptr<std::uint32_t[]> array;
    try {
        array = allocate_counters(elements);
    } catch (const std::bad_alloc&) {
        throw PhaseError("compute", "cannot allocate " + std::to_string(array_bytes) + " bytes");
    }
    std::span<std::uint32_t> view(array.get(), elements);
    const auto start = Clock::now();
    scatter_increments(view, result.increments, seed);
    result.seconds = seconds_between(start, Clock::now());
    result.array_sum = simd::sum_u32(view, variant);
    return result;
}

namespace {

bool pin_current_thread(int cpu) {
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(cpu, &set);
    return pthread_setaffinity_np(pthread_self(), sizeof(set), &set) == 0;
}

struct WorkerSlot {
    WorkerKind kind = WorkerKind::Cpu;
    int group = 0;
    std::uint64_t first_term = 0;  // CPU workers: offset into the global series
    std::uint64_t iterations = 0;
    std::uint64_t seed = 0;

    // Outputs, written only by the owning thread.
    double partial_sum = 0.0;
    std::uint64_t array_sum = 0;
    double seconds = 0.0;
    bool pinned = false;
    std::string error;
};

} // namespace

void compute_phase(const TaskParams& params, const ComputeOptions& options, KernelReport& report) {
    if (params.cores < 1) throw PhaseError("compute", "cores must be >= 1");
    if (options.array_bytes < sizeof(std::uint32_t)) {
        throw PhaseError("compute", "array must hold at least one element");
    }
    const auto cpus = usable_cpus();
    const auto groups = static_cast<std::size_t>(params.cores);
    if (groups > cpus.size() && !options.allow_oversubscribe) {
        throw PhaseError("compute", "requested " + std::to_string(groups) + " cores but only " +
                                        std::to_string(cpus.size()) + " are usable");
    }

    const int cpu_per_group = params.f.cpu_workers_per_group();
    const int mem_per_group = params.f.mem_workers_per_group();
    const std::size_t cpu_workers = groups * static_cast<std::size_t>(cpu_per_group);
    const std::size_t mem_workers = groups * static_cast<std::size_t>(mem_per_group);

    const std::uint64_t total_terms = to_count(params.cpuwork, static_cast<double>(kTermsPerCpuUnit));
    const std::uint64_t total_increments = to_count(params.memwork, 1.0);
    if (cpu_workers == 0 && total_terms > 0) {
        report.warnings.push_back("cpuwork ignored: f = 0 leaves no CPU workers");
    }
    if (mem_workers == 0 && total_increments > 0) {
        report.warnings.push_back("memwork ignored: f = 1 leaves no memory workers");
    }
    const auto cpu_shares = even_split(cpu_workers ? total_terms : 0, cpu_workers);
    const auto mem_shares = even_split(mem_workers ? total_increments : 0, mem_workers);

    // Group-major layout: each group lists its CPU workers, then its memory workers.
    std::vector<WorkerSlot> slots;
    slots.reserve(groups * kWorkersPerCore);
    std::size_t cpu_index = 0;
    std::size_t mem_index = 0;
    std::uint64_t next_term = 0;
    for (std::size_t g = 0; g < groups; ++g) {
        for (int k = 0; k < cpu_per_group; ++k) {
            WorkerSlot s;
            s.kind = WorkerKind::Cpu;
            s.group = static_cast<int>(g);
            s.first_term = next_term;
            s.iterations = cpu_shares[cpu_index++];
            next_term += s.iterations;
            slots.push_back(s);
        }
        for (int k = 0; k < mem_per_group; ++k) {
            WorkerSlot s;
            s.kind = WorkerKind::Memory;
            s.group = static_cast<int>(g);
            s.seed = derive_seed(options.seed, mem_index);
            s.iterations = mem_shares[mem_index++];
            slots.push_back(s);
        }
    }

    const std::size_t elements = counters_for(options.array_bytes);
    std::latch start_line(static_cast<std::ptrdiff_t>(slots.size()));
    {
        std::vector<std::jthread> threads;
        threads.reserve(slots.size());
        for (auto& slot : slots) {
            const int group_cpu = cpus[static_cast<std::size_t>(slot.group) % cpus.size()];
            threads.emplace_back([&options, &start_line, elements, group_cpu, s = &slot] {
                WorkerSlot& slot = *s;
                std::unique_ptr<std::uint32_t[]> array;
                try {
                    if (options.pin) slot.pinned = pin_current_thread(group_cpu);
                    if (slot.kind == WorkerKind::Memory && slot.iterations > 0) {
                        array = allocate_counters(elements);
                    }
                } catch (const std::bad_alloc&) {
                    slot.error = "cannot allocate " + std::to_string(options.array_bytes) + " bytes";
                } catch (const std::exception& e) {
                    slot.error = e.what();
                }
                start_line.arrive_and_wait();
                if (!slot.error.empty()) return;

                const auto t0 = Clock::now();
                if (slot.kind == WorkerKind::Cpu) {
                    if (slot.iterations > 0) {
                        slot.partial_sum = simd::leibniz_sum(slot.first_term, slot.iterations, options.variant);
                    }
                } else if (array) {
                    std::span<std::uint32_t> view(array.get(), elements);
                    scatter_increments(view, slot.iterations, slot.seed);
                    slot.seconds = seconds_between(t0, Clock::now());
                    slot.array_sum = simd::sum_u32(view, options.variant);
                    return;
                }
                slot.seconds = seconds_between(t0, Clock::now());
            });
        }
    }

    for (const auto& slot : slots) {
        if (!slot.error.empty()) throw PhaseError("compute", slot.error);
    }

    report.simd_variant = std::string(simd::name(options.variant));
    report.workers.clear();
    report.t_cpu = 0.0;
    report.t_mem = 0.0;
    report.mem_array_sum = 0;
    double series = 0.0;
    bool all_pinned = options.pin;
    for (const auto& slot : slots) {
        WorkerRecord rec;
        rec.kind = slot.kind;
        rec.group = slot.group;
        rec.cpu = slot.pinned ? cpus[static_cast<std::size_t>(slot.group) % cpus.size()] : -1;
        rec.iterations = slot.iterations;
        rec.seconds = slot.seconds;
        report.workers.push_back(rec);
        all_pinned = all_pinned && slot.pinned;
        if (slot.kind == WorkerKind::Cpu) {
            report.t_cpu = std::max(report.t_cpu, slot.seconds);
            series += slot.partial_sum;
        } else {
            report.t_mem = std::max(report.t_mem, slot.seconds);
            report.mem_array_sum += slot.array_sum;
        }
    }
    report.pi_estimate.reset();
    if (cpu_workers > 0 && total_terms > 0) report.pi_estimate = 4.0 * series;
    report.pinned = all_pinned;
    if (options.pin && !all_pinned) {
        report.warnings.push_back("CPU affinity could not be set; workers ran unpinned");
    }
    if (groups > cpus.size()) {
        report.warnings.push_back("oversubscribed: " + std::to_string(groups) + " groups share " +
                                  std::to_string(cpus.size()) + " CPUs");
    }
}

std::uint64_t write_phase(const std::filesystem::path& path, std::uint64_t out_bytes, std::uint64_t seed) {
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) {
        throw PhaseError("write", "cannot create " + path.string() + ": " + std::strerror(errno));
    }
    Rng rng(seed);
    std::vector<unsigned char> buffer(kIoChunk);
    std::uint64_t remaining = out_bytes;
    while (remaining > 0) {
        const std::size_t chunk = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, buffer.size()));
        // Little-endian bytes of consecutive 64-bit outputs; a trailing partial
        // word is truncated.
        for (std::size_t i = 0; i < chunk; i += 8) {
            std::uint64_t word = rng();
            const std::size_t n = std::min<std::size_t>(8, chunk - i);
            for (std::size_t b = 0; b < n; ++b) {
                buffer[i + b] = static_cast<unsigned char>(word >> (8 * b));
            }
        }
        if (std::fwrite(buffer.data(), 1, chunk, file.get()) != chunk) {
            throw PhaseError("write", "short write to " + path.string());
        }
        remaining -= chunk;
    }
    std::FILE* raw = file.release();
    if (std::fclose(raw) != 0) {
        throw PhaseError("write", "cannot close " + path.string());
    }
    return out_bytes;
}

KernelReport run_task(const TaskRun& run) {
    KernelReport report;
    report.name = run.name;
    report.seed = run.seed;
    report.params = run.params;
    report.simd_variant = std::string(simd::name(run.options.variant));

    const auto origin = Clock::now();
    auto now = [&] { return seconds_between(origin, Clock::now()); };
    std::string phase = "read";
    try {
        report.read.start = now();
        for (const auto& input : run.inputs) {
            report.bytes_read += read_phase(input);
        }
        report.read.end = now();
        report.t_read = report.read.end - report.read.start;

        phase = "compute";
        ComputeOptions options = run.options;
        options.seed = derive_seed(run.seed, std::string_view("compute"));
        report.compute.start = now();
        compute_phase(run.params, options, report);
        report.compute.end = now();

        phase = "write";
        report.write.start = now();
        for (std::size_t i = 0; i < run.outputs.size(); ++i) {
            const auto& out = run.outputs[i];
            report.bytes_written += write_phase(out.path, out.bytes, derive_seed(run.seed, i));
        }
        report.write.end = now();
        report.t_write = report.write.end - report.write.start;
    } catch (const PhaseError& e) {
        report.ok = false;
        report.failed_phase = e.phase();
        report.error = e.what();
    } catch (const std::exception& e) {
        report.ok = false;
        report.failed_phase = phase;
        report.error = e.what();
    }
    return report;
}

std::uint64_t KernelReport::cpu_iterations() const {
    std::uint64_t total = 0;
    for (const auto& w : workers) {
        if (w.kind == WorkerKind::Cpu) total += w.iterations;
    }
    return total;
}

std::uint64_t KernelReport::mem_iterations() const {
    std::uint64_t total = 0;
    for (const auto& w : workers) {
        if (w.kind == WorkerKind::Memory) total += w.iterations;
    }
    return total;
}

double KernelReport::cpu_units() const {
    return static_cast<double>(cpu_iterations()) / static_cast<double>(kTermsPerCpuUnit);
}

} // namespace wfforge::bench

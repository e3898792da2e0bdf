#include "wfforge/calibrate.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <sstream>
#include <thread>

#include <pthread.h>
#include <sched.h>

#include <json.hpp>

#include "wfforge/rng.hpp"
#include "wfforge/units.hpp"

namespace wfforge::calib {

bool within_tolerance(const Timing& t, double target_seconds, double tolerance) {
    auto ok = [&](const std::optional<double>& v) {
        return !v || std::abs(*v - target_seconds) / target_seconds < tolerance;
    };
    return ok(t.t_cpu) && ok(t.t_mem);
}

double rescale_work(double work, double target_seconds, double measured_seconds) {
    return work * target_seconds / measured_seconds;
}

namespace {

std::optional<double> median(std::vector<double> v) {
    if (v.empty()) return std::nullopt;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

Timing measure(const KernelRunner& runner, double cpuwork, double memwork, CpuFraction f, int repetitions) {
    std::vector<double> cpu;
    std::vector<double> mem;
    for (int i = 0; i < std::max(1, repetitions); ++i) {
        const Timing t = runner(cpuwork, memwork, f);
        if (t.t_cpu) cpu.push_back(*t.t_cpu);
        if (t.t_mem) mem.push_back(*t.t_mem);
    }
    return {median(std::move(cpu)), median(std::move(mem))};
}

} // namespace

WorkFit fit_work(const CalibrationTarget& target, const KernelRunner& runner, const FitOptions& options) {
    if (!(target.seconds > 0.0)) throw InvalidArgument("target seconds must be positive");
    if (!(target.tolerance > 0.0 && target.tolerance < 1.0)) {
        throw InvalidArgument("tolerance must lie in (0, 1)");
    }
    if (target.max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
    if (!(options.initial_cpuwork > 0.0) || !(options.initial_memwork > 0.0)) {
        throw InvalidArgument("initial work guesses must be positive");
    }

    const bool has_cpu = target.f.cpu_workers_per_group() > 0;
    const bool has_mem = target.f.mem_workers_per_group() > 0;
    WorkFit fit;
    fit.cpuwork = has_cpu ? options.initial_cpuwork : 0.0;
    fit.memwork = has_mem ? options.initial_memwork : 0.0;

    for (int round = 1; round <= target.max_iterations; ++round) {
        fit.iterations = round;
        fit.last = measure(runner, fit.cpuwork, fit.memwork, target.f, options.repetitions);
        if (has_cpu != fit.last.t_cpu.has_value() || has_mem != fit.last.t_mem.has_value()) {
            throw CalibrationError("runner reported worker kinds inconsistent with f = " + target.f.to_string(),
                                   fit);
        }
        if (within_tolerance(fit.last, target.seconds, target.tolerance)) return fit;

        WorkFit next = fit;
        for (auto [work, measured] : {std::pair{&next.cpuwork, fit.last.t_cpu}, {&next.memwork, fit.last.t_mem}}) {
            if (!measured) continue;
            if (!(*measured > 0.0)) throw CalibrationError("runner reported a non-positive time", fit);
            *work = rescale_work(*work, target.seconds, *measured);
        }
        if (round < target.max_iterations) fit = next;
    }
    throw CalibrationError("no convergence within " + std::to_string(target.max_iterations) + " iterations", fit);
}

CpuFraction f_from_profile(const ProfileCounts& counts) {
    if (counts.total_instructions == 0) throw InvalidArgument("profile has zero total instructions");
    if (counts.memory_instructions > counts.total_instructions) {
        throw InvalidArgument("memory instructions exceed total instructions");
    }
    // tenths = floor(10 * cpu / total + 1/2) = floor((20 cpu + total) / (2 total)).
    const uint128 cpu = counts.total_instructions - counts.memory_instructions;
    const uint128 total = counts.total_instructions;
    const auto tenths = static_cast<int>((20 * cpu + total) / (2 * total));
    return CpuFraction::from_tenths(std::clamp(tenths, 0, 10));
}

ProfileCounts parse_profile(std::string_view text) {
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        try {
            const auto doc = nlohmann::json::parse(text.begin(), text.end());
            ProfileCounts p;
            p.total_instructions = doc.at("total_instructions").get<std::uint64_t>();
            p.memory_instructions = doc.at("memory_instructions").get<std::uint64_t>();
            return p;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("invalid profile JSON: ") + e.what());
        }
    }
    std::istringstream in{std::string(text)};
    std::string a;
    std::string b;
    std::string extra;
    if (!(in >> a >> b) || (in >> extra)) {
        throw ParseError("profile must contain exactly two integers: total and memory instructions");
    }
    auto as_count = [](const std::string& s) {
        if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
            throw ParseError("not an instruction count: '" + s + "'");
        }
        try {
            return static_cast<std::uint64_t>(std::stoull(s));
        } catch (const std::exception&) {
            throw ParseError("instruction count out of range: '" + s + "'");
        }
    };
    return {as_count(a), as_count(b)};
}

CpuFraction select_f_empirical(const std::map<CpuFraction, double>& ratios) {
    if (ratios.empty()) throw InvalidArgument("no runtime ratios to select from");
    // Distances within this margin count as equal so that e.g. 0.9 and 1.1 tie.
    constexpr double kTieMargin = 1e-12;
    auto best = ratios.begin();
    double best_distance = std::abs(best->second - 1.0);
    for (auto it = std::next(ratios.begin()); it != ratios.end(); ++it) {
        const double d = std::abs(it->second - 1.0);
        if (d < best_distance - kTieMargin) {
            best = it;
            best_distance = d;
        }
    }
    return best->first;
}

// ---------------------------------------------------------------------------

struct BackgroundLoad::Impl {
    std::vector<std::jthread> threads;
};

BackgroundLoad::BackgroundLoad(int cores, int skip_cpus, std::size_t array_bytes)
    : impl_(std::make_unique<Impl>()), cores_(cores) {
    if (cores < 0) throw InvalidArgument("load cores must be non-negative");
    const auto cpus = bench::usable_cpus();
    const std::size_t elements = std::max<std::size_t>(1, array_bytes / sizeof(std::uint32_t));
    for (int i = 0; i < cores; ++i) {
        const int cpu = cpus[static_cast<std::size_t>(skip_cpus + i) % cpus.size()];
        impl_->threads.emplace_back([cpu, elements, i](std::stop_token stop) {
            cpu_set_t set;
            CPU_ZERO(&set);
            CPU_SET(cpu, &set);
            pthread_setaffinity_np(pthread_self(), sizeof(set), &set);
            std::vector<std::uint32_t> array(elements);
            std::uint64_t seed = derive_seed(0x10ad, static_cast<std::uint64_t>(i));
            while (!stop.stop_requested()) {
                bench::scatter_increments(array, 1 << 16, seed++);
            }
        });
    }
}

BackgroundLoad::~BackgroundLoad() = default;

int LoadSpec::effective_load_cores() const {
    if (load_cores) {
        if (*load_cores < 0) throw InvalidArgument("load cores must be non-negative");
        return *load_cores;
    }
    return std::max(0, node_cores) / 2;
}

std::map<CpuFraction, double> CalibrationReport::loaded_ratios() const {
    std::map<CpuFraction, double> out;
    for (const auto& e : entries) out[e.f] = e.ratio_loaded;
    return out;
}

double runtime_of(const Timing& t) { return std::max(t.t_cpu.value_or(0.0), t.t_mem.value_or(0.0)); }

CalibrationReport calibrate_under_load(const CalibrationTarget& target, const LoadSpec& load,
                                       const KernelRunner& runner, const LoadStarter& start_load,
                                       const FitOptions& options) {
    CalibrationReport report;
    report.target_seconds = target.seconds;
    report.loaded_target_seconds = load.loaded_target_seconds;
    report.tolerance = target.tolerance;
    report.load_cores = load.effective_load_cores();
    if (load.loaded_target_seconds && !(*load.loaded_target_seconds > 0.0)) {
        throw InvalidArgument("loaded target seconds must be positive");
    }
    const double loaded_reference = load.loaded_target_seconds.value_or(target.seconds);

    std::vector<CpuFraction> fractions = load.fractions;
    if (fractions.empty()) {
        for (int t = 1; t <= 9; ++t) fractions.push_back(CpuFraction::from_tenths(t));
    }

    for (const auto f : fractions) {
        CalibrationTarget at = target;
        at.f = f;
        SweepEntry entry;
        entry.f = f;
        entry.fit = fit_work(at, runner, options);
        entry.runtime_no_load = runtime_of(entry.fit.last);
        if (report.load_cores > 0) {
            std::unique_ptr<LoadHandle> handle;
            try {
                handle = start_load(report.load_cores);
            } catch (const std::exception& e) {
                throw Error(std::string("load generator failed: ") + e.what());
            }
            if (!handle) throw Error("load generator failed to start");
            entry.runtime_loaded = runtime_of(measure(runner, entry.fit.cpuwork, entry.fit.memwork, f,
                                                      options.repetitions));
        } else {
            entry.runtime_loaded = entry.runtime_no_load;
        }
        entry.ratio_no_load = entry.runtime_no_load / target.seconds;
        entry.ratio_loaded = entry.runtime_loaded / loaded_reference;
        report.entries.push_back(entry);
    }
    report.selected = select_f_empirical(report.loaded_ratios());
    return report;
}

KernelRunner kernel_runner(int cores, const bench::ComputeOptions& options) {
    return [cores, options](double cpuwork, double memwork, CpuFraction f) {
        TaskParams p;
        p.cores = cores;
        p.cpuwork = cpuwork;
        p.memwork = memwork;
        p.f = f;
        bench::KernelReport r;
        bench::compute_phase(p, options, r);
        Timing t;
        if (f.cpu_workers_per_group() > 0) t.t_cpu = r.t_cpu;
        if (f.mem_workers_per_group() > 0) t.t_mem = r.t_mem;
        return t;
    };
}

LoadStarter background_load_starter(int kernel_cores, std::size_t array_bytes) {
    return [kernel_cores, array_bytes](int cores) -> std::unique_ptr<LoadHandle> {
        return std::make_unique<BackgroundLoad>(cores, kernel_cores, array_bytes);
    };
}

std::string report_to_json(const CalibrationReport& report) {
    nlohmann::ordered_json doc;
    doc["target_seconds"] = report.target_seconds;
    if (report.loaded_target_seconds) {
        doc["loaded_target_seconds"] = *report.loaded_target_seconds;
    } else {
        doc["loaded_target_seconds"] = nullptr;
    }
    doc["tolerance"] = report.tolerance;
    doc["load_cores"] = report.load_cores;
    auto entries = nlohmann::ordered_json::array();
    for (const auto& e : report.entries) {
        nlohmann::ordered_json j;
        j["f"] = e.f.value();
        j["cpuwork"] = e.fit.cpuwork;
        j["memwork"] = e.fit.memwork;
        j["iterations"] = e.fit.iterations;
        j["t_cpu"] = e.fit.last.t_cpu ? nlohmann::ordered_json(*e.fit.last.t_cpu) : nlohmann::ordered_json();
        j["t_mem"] = e.fit.last.t_mem ? nlohmann::ordered_json(*e.fit.last.t_mem) : nlohmann::ordered_json();
        j["runtime_no_load"] = e.runtime_no_load;
        j["runtime_loaded"] = e.runtime_loaded;
        j["ratio_no_load"] = e.ratio_no_load;
        j["ratio_loaded"] = e.ratio_loaded;
        entries.push_back(std::move(j));
    }
    doc["entries"] = std::move(entries);
    if (report.selected) {
        doc["selected_f"] = report.selected->value();
    } else {
        doc["selected_f"] = nullptr;
    }
    return doc.dump(2) + "\n";
}

} // namespace wfforge::calib

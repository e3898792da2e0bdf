#include "wfforge/taskbench.hpp"

#include <json.hpp>

namespace wfforge::bench {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json span_json(const PhaseSpan& s) { return {{"start", s.start}, {"end", s.end}}; }

PhaseSpan span_from(const nlohmann::json& j) { return {j.at("start").get<double>(), j.at("end").get<double>()}; }

} // namespace

std::string report_to_json(const KernelReport& r) {
    ordered_json doc;
    doc["name"] = r.name;
    doc["ok"] = r.ok;
    if (!r.ok) {
        doc["failed_phase"] = r.failed_phase;
        doc["error"] = r.error;
    }
    doc["seed"] = r.seed;
    doc["cores"] = r.params.cores;
    doc["cpuwork"] = r.params.cpuwork;
    doc["memwork"] = r.params.memwork;
    doc["f"] = r.params.f.value();
    doc["simd"] = r.simd_variant;
    doc["bytes_read"] = r.bytes_read;
    doc["bytes_written"] = r.bytes_written;
    doc["phases"] = {{"read", span_json(r.read)}, {"compute", span_json(r.compute)}, {"write", span_json(r.write)}};
    doc["t_read"] = r.t_read;
    doc["t_cpu"] = r.t_cpu;
    doc["t_mem"] = r.t_mem;
    doc["t_write"] = r.t_write;
    if (r.pi_estimate) {
        doc["pi_estimate"] = *r.pi_estimate;
    } else {
        doc["pi_estimate"] = nullptr;
    }
    doc["mem_array_sum"] = r.mem_array_sum;
    doc["pinned"] = r.pinned;
    doc["warnings"] = r.warnings;
    ordered_json workers = ordered_json::array();
    for (const auto& w : r.workers) {
        workers.push_back({{"kind", w.kind == WorkerKind::Cpu ? "cpu" : "mem"},
                           {"group", w.group},
                           {"cpu", w.cpu},
                           {"iterations", w.iterations},
                           {"seconds", w.seconds}});
    }
    doc["workers"] = std::move(workers);
    return doc.dump(2) + "\n";
}

KernelReport report_from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed kernel report: ") + e.what());
    }
    try {
        KernelReport r;
        r.name = doc.at("name").get<std::string>();
        r.ok = doc.at("ok").get<bool>();
        if (!r.ok) {
            r.failed_phase = doc.value("failed_phase", "");
            r.error = doc.value("error", "");
        }
        r.seed = doc.at("seed").get<std::uint64_t>();
        r.params.cores = doc.at("cores").get<int>();
        r.params.cpuwork = doc.at("cpuwork").get<double>();
        r.params.memwork = doc.at("memwork").get<double>();
        r.params.f = CpuFraction::from_double(doc.at("f").get<double>());
        r.simd_variant = doc.at("simd").get<std::string>();
        r.bytes_read = doc.at("bytes_read").get<std::uint64_t>();
        r.bytes_written = doc.at("bytes_written").get<std::uint64_t>();
        const auto& phases = doc.at("phases");
        r.read = span_from(phases.at("read"));
        r.compute = span_from(phases.at("compute"));
        r.write = span_from(phases.at("write"));
        r.t_read = doc.at("t_read").get<double>();
        r.t_cpu = doc.at("t_cpu").get<double>();
        r.t_mem = doc.at("t_mem").get<double>();
        r.t_write = doc.at("t_write").get<double>();
        if (!doc.at("pi_estimate").is_null()) r.pi_estimate = doc.at("pi_estimate").get<double>();
        r.mem_array_sum = doc.at("mem_array_sum").get<std::uint64_t>();
        r.pinned = doc.at("pinned").get<bool>();
        r.warnings = doc.at("warnings").get<std::vector<std::string>>();
        for (const auto& w : doc.at("workers")) {
            WorkerRecord rec;
            rec.kind = w.at("kind").get<std::string>() == "cpu" ? WorkerKind::Cpu : WorkerKind::Memory;
            rec.group = w.at("group").get<int>();
            rec.cpu = w.at("cpu").get<int>();
            rec.iterations = w.at("iterations").get<std::uint64_t>();
            rec.seconds = w.at("seconds").get<double>();
            r.workers.push_back(rec);
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid kernel report: ") + e.what());
    }
}

} // namespace wfforge::bench

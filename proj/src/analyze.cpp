#include "wfforge/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wfforge/units.hpp"

namespace wfforge::analyze {

double Ecdf::operator()(double x) const {
    const auto it = std::upper_bound(points.begin(), points.end(), x);
    if (it == points.begin()) return 0.0;
    return values[static_cast<std::size_t>(it - points.begin()) - 1];
}

Ecdf ecdf_of(std::vector<double> samples) {
    Ecdf e;
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
        e.points.push_back(samples[i]);
        e.values.push_back(i + 1 == samples.size() ? 1.0 : static_cast<double>(i + 1) / n);
    }
    return e;
}

namespace {

void require_complete(const runner::ExecutionTrace& trace) {
    if (trace.tasks.empty()) throw InvalidArgument("trace has no tasks");
    for (const auto& t : trace.tasks) {
        if (t.status != runner::TaskStatus::Ok) {
            throw Error("trace is incomplete: task " + t.id + " " + std::string(runner::status_name(t.status)));
        }
    }
}

} // namespace

double makespan(const runner::ExecutionTrace& trace) {
    require_complete(trace);
    double first = trace.tasks.front().start;
    double last = trace.tasks.front().end;
    for (const auto& t : trace.tasks) {
        first = std::min(first, t.start);
        last = std::max(last, t.end);
    }
    return last - first;
}

double throughput(const runner::ExecutionTrace& trace) {
    const double span = makespan(trace);
    if (!(span > 0)) throw Error("trace has zero duration");
    return static_cast<double>(trace.tasks.size()) / span;
}

Ecdf start_time_ecdf(const runner::ExecutionTrace& trace) {
    std::vector<double> starts;
    for (const auto& t : trace.tasks) {
        if (t.status != runner::TaskStatus::Aborted) starts.push_back(t.start);
    }
    if (starts.empty()) throw InvalidArgument("trace has no started tasks");
    const double origin = *std::min_element(starts.begin(), starts.end());
    for (auto& s : starts) s -= origin;
    return ecdf_of(std::move(starts));
}

double ecdf_distance(const Ecdf& a, const Ecdf& b) {
    if (a.empty() || b.empty()) throw InvalidArgument("ECDF distance needs two non-empty ECDFs");
    // Both are step functions that only change at sample points.
    double d = 0.0;
    for (double x : a.points) d = std::max(d, std::abs(a(x) - b(x)));
    for (double x : b.points) d = std::max(d, std::abs(a(x) - b(x)));
    return d;
}

double makespan_ratio(const runner::ExecutionTrace& a, const runner::ExecutionTrace& b) {
    const double ma = makespan(a);
    const double mb = makespan(b);
    if (!(ma > 0) || !(mb > 0)) throw Error("makespan ratio of a zero-duration trace");
    return mb / ma;
}

std::string ecdf_to_text(const Ecdf& e) {
    std::string out;
    for (std::size_t i = 0; i < e.points.size(); ++i) {
        out += format_number(e.points[i]) + " " + format_number(e.values[i]) + "\n";
    }
    return out;
}

} // namespace wfforge::analyze

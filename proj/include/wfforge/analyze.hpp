#pragma once

#include <string>
#include <vector>

#include "wfforge/runner.hpp"

namespace wfforge::analyze {

/// Right-continuous step function over distinct sample points; tied samples
/// stack into one step.
struct Ecdf {
    std::vector<double> points;  // ascending, distinct
    std::vector<double> values;  // F(points[i]); last value is 1

    /// Fraction of samples <= x.
    double operator()(double x) const;
    bool empty() const { return points.empty(); }
};

Ecdf ecdf_of(std::vector<double> samples);

/// Wall time from the first start to the last end. Throws when the trace
/// has a failed task or is empty.
double makespan(const runner::ExecutionTrace& trace);
double throughput(const runner::ExecutionTrace& trace);

/// Start times of started tasks, shifted so the earliest is zero.
Ecdf start_time_ecdf(const runner::ExecutionTrace& trace);

/// Kolmogorov-Smirnov statistic: sup |a(x) - b(x)|.
double ecdf_distance(const Ecdf& a, const Ecdf& b);

/// makespan(b) / makespan(a).
double makespan_ratio(const runner::ExecutionTrace& a, const runner::ExecutionTrace& b);

/// "seconds fraction" per line.
std::string ecdf_to_text(const Ecdf& e);

} // namespace wfforge::analyze

#pragma once

#include <compare>
#include <string>

namespace wfforge {

/// Fraction of compute workers running the CPU kernel, restricted to the
/// eleven values 0.0, 0.1, ..., 1.0. Stored as an integer count of tenths so
/// that equality and ordering are exact.
class CpuFraction {
public:
    constexpr CpuFraction() = default;

    static CpuFraction from_tenths(int tenths);

    /// Accepts a real value only if it lies within 1e-9 of a multiple of 0.1
    /// inside [0, 1].
    static CpuFraction from_double(double value);

    constexpr int tenths() const { return tenths_; }
    constexpr double value() const { return tenths_ / 10.0; }

    /// CPU workers in one group of ten.
    constexpr int cpu_workers_per_group() const { return tenths_; }
    constexpr int mem_workers_per_group() const { return 10 - tenths_; }

    std::string to_string() const;

    friend constexpr auto operator<=>(CpuFraction, CpuFraction) = default;

private:
    explicit constexpr CpuFraction(int tenths) : tenths_(tenths) {}
    int tenths_ = 10;
};

} // namespace wfforge

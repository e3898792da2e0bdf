#include "wfforge/simd/kernels.hpp"

namespace wfforge::simd::detail {

double leibniz_sum_scalar(std::uint64_t first, std::uint64_t count) {
    double sum = 0.0;
    double sign = (first & 1U) ? -1.0 : 1.0;
    double denom = 2.0 * static_cast<double>(first) + 1.0;
    for (std::uint64_t i = 0; i < count; ++i) {
        sum += sign / denom;
        sign = -sign;
        denom += 2.0;
    }
    return sum;
}

std::uint64_t sum_u32_scalar(std::span<const std::uint32_t> values) {
    std::uint64_t total = 0;
    for (auto v : values) total += v;
    return total;
}

} // namespace wfforge::simd::detail

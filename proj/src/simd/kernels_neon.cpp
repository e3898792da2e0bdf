#include "wfforge/simd/kernels.hpp"

#include <arm_neon.h>

namespace wfforge::simd::detail {

double leibniz_sum_neon(std::uint64_t first, std::uint64_t count) {
    const double lead = (first & 1U) ? -1.0 : 1.0;
    const double base = 2.0 * static_cast<double>(first) + 1.0;

    const double sign_init[2] = {lead, -lead};
    const float64x2_t signs = vld1q_f64(sign_init);
    const double denom_init[2] = {base, base + 2.0};
    float64x2_t denom0 = vld1q_f64(denom_init);
    float64x2_t denom1 = vaddq_f64(denom0, vdupq_n_f64(4.0));
    const float64x2_t step = vdupq_n_f64(8.0);
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);

    std::uint64_t i = 0;
    for (; i + 4 <= count; i += 4) {
        acc0 = vaddq_f64(acc0, vdivq_f64(signs, denom0));
        acc1 = vaddq_f64(acc1, vdivq_f64(signs, denom1));
        denom0 = vaddq_f64(denom0, step);
        denom1 = vaddq_f64(denom1, step);
    }
    double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
    if (i < count) sum += leibniz_sum_scalar(first + i, count - i);
    return sum;
}

std::uint64_t sum_u32_neon(std::span<const std::uint32_t> values) {
    const std::uint32_t* data = values.data();
    const std::size_t n = values.size();
    uint64x2_t acc = vdupq_n_u64(0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = vpadalq_u32(acc, vld1q_u32(data + i));
    }
    std::uint64_t total = vaddvq_u64(acc);
    for (; i < n; ++i) total += data[i];
    return total;
}

} // namespace wfforge::simd::detail

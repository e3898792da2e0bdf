// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include "wfforge/simd/kernels.hpp"

#include <immintrin.h>

namespace wfforge::simd::detail {

double leibniz_sum_avx2(std::uint64_t first, std::uint64_t count) {
    const double lead = (first & 1U) ? -1.0 : 1.0;
    const double base = 2.0 * static_cast<double>(first) + 1.0;

    // Two accumulators of four lanes each hide the divider latency.
    __m256d signs = _mm256_setr_pd(lead, -lead, lead, -lead);
    __m256d denom0 = _mm256_setr_pd(base, base + 2.0, base + 4.0, base + 6.0);
    __m256d denom1 = _mm256_add_pd(denom0, _mm256_set1_pd(8.0));
    const __m256d step = _mm256_set1_pd(16.0);
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();

    std::uint64_t i = 0;
    for (; i + 8 <= count; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_div_pd(signs, denom0));
        acc1 = _mm256_add_pd(acc1, _mm256_div_pd(signs, denom1));
        denom0 = _mm256_add_pd(denom0, step);
        denom1 = _mm256_add_pd(denom1, step);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
    double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);

    if (i < count) sum += leibniz_sum_scalar(first + i, count - i);
    return sum;
}

std::uint64_t sum_u32_avx2(std::span<const std::uint32_t> values) {
    const std::uint32_t* data = values.data();
    const std::size_t n = values.size();
    __m256i acc0 = _mm256_setzero_si256();
    __m256i acc1 = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i));
        acc0 = _mm256_add_epi64(acc0, _mm256_cvtepu32_epi64(_mm256_castsi256_si128(v)));
        acc1 = _mm256_add_epi64(acc1, _mm256_cvtepu32_epi64(_mm256_extracti128_si256(v, 1)));
    }
    alignas(32) std::uint64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), _mm256_add_epi64(acc0, acc1));
    std::uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) total += data[i];
    return total;
}

} // namespace wfforge::simd::detail

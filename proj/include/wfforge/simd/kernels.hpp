#pragma once

// Data-parallel inner loops of the task benchmark. Each kernel exists as a
// scalar reference and as vector variants; the dispatcher picks the widest
// variant the running CPU supports.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace wfforge::simd {

enum class Variant { Scalar, Avx2, Neon };

std::string_view name(Variant v);
std::optional<Variant> variant_from_name(std::string_view name);

/// Variants compiled into this binary and supported by the running CPU.
std::vector<Variant> available_variants();

/// Widest available variant, unless the environment variable WFFORGE_SIMD
/// names another available one (e.g. "scalar").
Variant best_variant();

/// Sum of Leibniz terms (-1)^k / (2k + 1) for k in [first, first + count).
/// Variants differ only in summation order.
double leibniz_sum(std::uint64_t first, std::uint64_t count, Variant v);

/// Exact sum of 32-bit counters.
std::uint64_t sum_u32(std::span<const std::uint32_t> values, Variant v);

namespace detail {
double leibniz_sum_scalar(std::uint64_t first, std::uint64_t count);
std::uint64_t sum_u32_scalar(std::span<const std::uint32_t> values);
#if defined(__x86_64__) || defined(_M_X64)
double leibniz_sum_avx2(std::uint64_t first, std::uint64_t count);
std::uint64_t sum_u32_avx2(std::span<const std::uint32_t> values);
#endif
#if defined(__aarch64__)
double leibniz_sum_neon(std::uint64_t first, std::uint64_t count);
std::uint64_t sum_u32_neon(std::span<const std::uint32_t> values);
#endif
} // namespace detail

} // namespace wfforge::simd

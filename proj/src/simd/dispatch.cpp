#include "wfforge/simd/kernels.hpp"

#include <cstdlib>
#include <string>

namespace wfforge::simd {

std::string_view name(Variant v) {
    switch (v) {
    case Variant::Scalar: return "scalar";
    case Variant::Avx2: return "avx2";
    case Variant::Neon: return "neon";
    }
    return "scalar";
}

std::optional<Variant> variant_from_name(std::string_view text) {
    for (auto v : {Variant::Scalar, Variant::Avx2, Variant::Neon}) {
        if (name(v) == text) return v;
    }
    return std::nullopt;
}

std::vector<Variant> available_variants() {
    std::vector<Variant> out{Variant::Scalar};
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2")) out.push_back(Variant::Avx2);
#endif
#if defined(__aarch64__)
    out.push_back(Variant::Neon);
#endif
    return out;
}

Variant best_variant() {
    static const Variant chosen = [] {
        const auto variants = available_variants();
        if (const char* env = std::getenv("WFFORGE_SIMD")) {
            if (auto wanted = variant_from_name(env)) {
                for (auto v : variants) {
                    if (v == *wanted) return v;
                }
            }
        }
        return variants.back();
    }();
    return chosen;
}

double leibniz_sum(std::uint64_t first, std::uint64_t count, Variant v) {
    switch (v) {
#if defined(__x86_64__) || defined(_M_X64)
    case Variant::Avx2: return detail::leibniz_sum_avx2(first, count);
#endif
#if defined(__aarch64__)
    case Variant::Neon: return detail::leibniz_sum_neon(first, count);
#endif
    default: return detail::leibniz_sum_scalar(first, count);
    }
}

std::uint64_t sum_u32(std::span<const std::uint32_t> values, Variant v) {
    switch (v) {
#if defined(__x86_64__) || defined(_M_X64)
    case Variant::Avx2: return detail::sum_u32_avx2(values);
#endif
#if defined(__aarch64__)
    case Variant::Neon: return detail::sum_u32_neon(values);
#endif
    default: return detail::sum_u32_scalar(values);
    }
}

} // namespace wfforge::simd

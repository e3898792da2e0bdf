#include "wfforge/error.hpp"
#include "wfforge/fraction.hpp"
#include "wfforge/units.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include <json.hpp>

namespace wfforge {

CpuFraction CpuFraction::from_tenths(int tenths) {
    if (tenths < 0 || tenths > 10) {
        throw InvalidArgument("f must lie in [0, 1], got " + std::to_string(tenths) + " tenths");
    }
    return CpuFraction(tenths);
}

CpuFraction CpuFraction::from_double(double value) {
    if (!std::isfinite(value)) {
        throw InvalidArgument("f must be finite");
    }
    const double scaled = value * 10.0;
    const double nearest = std::round(scaled);
    if (std::abs(scaled - nearest) > 1e-9) {
        throw InvalidArgument("f must be a multiple of 0.1, got " + format_number(value));
    }
    if (nearest < 0.0 || nearest > 10.0) {
        throw InvalidArgument("f must lie in [0, 1], got " + format_number(value));
    }
    return CpuFraction(static_cast<int>(nearest));
}

std::string CpuFraction::to_string() const { return format_number(value()); }

namespace {

double suffix_multiplier(char c) {
    switch (std::toupper(static_cast<unsigned char>(c))) {
    case 'K': return 1e3;
    case 'M': return 1e6;
    case 'G': return 1e9;
    case 'T': return 1e12;
    case 'P': return 1e15;
    default: return 0.0;
    }
}

} // namespace

double parse_si_real(std::string_view text) {
    std::string_view body = text;
    while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back()))) {
        body.remove_suffix(1);
    }
    if (!body.empty() && (body.back() == 'B' || body.back() == 'b')) {
        body.remove_suffix(1);
    }
    double multiplier = 1.0;
    if (!body.empty()) {
        if (double m = suffix_multiplier(body.back()); m != 0.0) {
            multiplier = m;
            body.remove_suffix(1);
        }
    }
    double value = 0.0;
    const char* first = body.data();
    const char* last = body.data() + body.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (body.empty() || ec != std::errc{} || ptr != last) {
        throw InvalidArgument("not a quantity: '" + std::string(text) + "'");
    }
    if (!std::isfinite(value) || value < 0.0) {
        throw InvalidArgument("quantity must be non-negative: '" + std::string(text) + "'");
    }
    return value * multiplier;
}

std::uint64_t parse_si_quantity(std::string_view text) {
    // Plain integers are taken exactly; seeds use the full 64-bit range.
    std::uint64_t exact = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), exact);
    if (ec == std::errc() && end == text.data() + text.size()) return exact;
    if (ec == std::errc::result_out_of_range) {
        throw InvalidArgument("quantity out of range: '" + std::string(text) + "'");
    }
    const double value = parse_si_real(text);
    if (value >= 18446744073709551616.0) {
        throw InvalidArgument("quantity out of range: '" + std::string(text) + "'");
    }
    return static_cast<std::uint64_t>(std::round(value));
}

std::string format_number(double value) { return nlohmann::json(value).dump(); }

} // namespace wfforge

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace wfforge {

/// Parses a non-negative quantity with an optional decimal SI suffix
/// (K, M, G, T, P as powers of 10; a trailing "B" is ignored), e.g. "100M",
/// "1.5G", "1TB", "4096". Fractional results are rounded to the nearest
/// integer. Throws InvalidArgument on malformed text.
std::uint64_t parse_si_quantity(std::string_view text);

/// Same grammar as parse_si_quantity but keeps the real value.
double parse_si_real(std::string_view text);

/// Shortest decimal text that round-trips the double (as JSON would print it).
std::string format_number(double value);

} // namespace wfforge

#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace ppg {

// Shortest decimal form that round-trips the exact double. Deterministic,
// locale-independent, and readable ("0.15", not "0.14999999999999999"), so
// repeated runs emit byte-identical report files.
inline std::string format_number(double value) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

}  // namespace ppg

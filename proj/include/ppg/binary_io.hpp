#pragma once

#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "ppg/errors.hpp"

// Little-endian scalar IO shared by the binary artifact formats. memcpy in
// and out of a byte buffer keeps this well-defined regardless of alignment;
// the build targets little-endian hosts, so no byte swapping is needed.
namespace ppg {

template <typename T>
void write_le(std::ostream& os, T value) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& is, const std::string& what) {
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!is) {
        throw ParseError("truncated file while reading " + what);
    }
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

inline void write_bytes(std::ostream& os, const std::string& bytes) {
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_bytes(std::istream& is, std::size_t count, const std::string& what) {
    std::string bytes(count, '\0');
    is.read(bytes.data(), static_cast<std::streamsize>(count));
    if (!is) {
        throw ParseError("truncated file while reading " + what);
    }
    return bytes;
}

}  // namespace ppg

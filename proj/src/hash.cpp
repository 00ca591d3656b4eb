#include "ppg/hash.hpp"

#include <fstream>

#include "ppg/errors.hpp"

namespace ppg {

std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

std::string hash_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IntegrityError("hash: cannot open '" + path + "' for reading");
    Fnv1a64 hasher;
    char buf[1 << 16];
    while (is) {
        is.read(buf, sizeof(buf));
        hasher.update(buf, static_cast<std::size_t>(is.gcount()));
    }
    return hex64(hasher.value());
}

}  // namespace ppg

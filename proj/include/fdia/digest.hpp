#ifndef FDIA_DIGEST_HPP
#define FDIA_DIGEST_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace fdia {

// FNV-1a, stable across platforms; used to fingerprint configs so reports
// can refuse artifacts produced by mismatched runs.
inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string digest_hex(std::string_view text) {
    static const char* hexdigits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(text);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hexdigits[h & 0xf];
        h >>= 4;
    }
    return out;
}

} // namespace fdia

#endif

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace handval {

/// FNV-1a 64-bit digest; stable across runs and platforms.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view bytes);

/// Digest of a file's raw bytes; throws IoError when unreadable.
std::string digest_file(const std::string& path);

} // namespace handval

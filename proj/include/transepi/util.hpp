#ifndef TRANSEPI_UTIL_HPP
#define TRANSEPI_UTIL_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace transepi {

// Seconds since service-day midnight. Values above 86400 are legal and mean
// "after midnight of the following day" (a 25:10:00 departure is 90600).
using Seconds = int32_t;

constexpr Seconds kSecondsPerDay = 86400;

// Parses "HH:MM:SS" (hours may exceed 23). Returns nullopt on malformed input.
std::optional<Seconds> parse_hms(const std::string& text);

// Formats seconds as zero-padded "HH:MM:SS"; the canonical form for feeds.
std::string format_hms(Seconds t);

// Shortest decimal representation that round-trips the value.
std::string format_double(double x);

// splitmix64 finalizer: the standard 64-bit avalanche mixer.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// FNV-1a over bytes; used for stable string keys and manifest content hashes.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t hash_string(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string to_hex(uint64_t v);

// Reads a whole file; throws std::runtime_error naming the path on failure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

bool file_exists(const std::string& path);

}  // namespace transepi

#endif

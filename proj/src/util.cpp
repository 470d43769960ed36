#include "transepi/util.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace transepi {

std::optional<Seconds> parse_hms(const std::string& text) {
    // HH:MM:SS with 1-3 hour digits; minutes/seconds exactly two digits.
    const char* p = text.c_str();
    const char* end = p + text.size();
    while (p < end && *p == ' ') ++p;

    auto read_int = [&](int max_digits, int& out) -> bool {
        int v = 0, n = 0;
        while (p < end && *p >= '0' && *p <= '9' && n < max_digits) {
            v = v * 10 + (*p - '0');
            ++p;
            ++n;
        }
        if (n == 0) return false;
        out = v;
        return true;
    };

    int h = 0, m = 0, s = 0;
    if (!read_int(3, h)) return std::nullopt;
    if (p >= end || *p != ':') return std::nullopt;
    ++p;
    if (!read_int(2, m)) return std::nullopt;
    if (p >= end || *p != ':') return std::nullopt;
    ++p;
    if (!read_int(2, s)) return std::nullopt;
    while (p < end && *p == ' ') ++p;
    if (p != end) return std::nullopt;
    if (m > 59 || s > 59) return std::nullopt;
    return Seconds(h * 3600 + m * 60 + s);
}

std::string format_hms(Seconds t) {
    if (t < 0) t = 0;
    int h = t / 3600, m = (t % 3600) / 60, s = t % 60;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d", h, m, s);
    return buf;
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string to_hex(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

bool file_exists(const std::string& path) {
    std::error_code ec;
    return std::filesystem::exists(path, ec);
}

}  // namespace transepi

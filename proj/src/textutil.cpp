#include "refeval/textutil.hpp"

#include <cstdio>

namespace refeval::text {

std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n\f\v";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto nl = s.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < s.size()) lines.push_back(s.substr(start));
            break;
        }
        lines.push_back(s.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

std::vector<char32_t> decode_utf8(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char b0 = static_cast<unsigned char>(s[i]);
        std::size_t len = 1;
        char32_t cp = b0;
        if ((b0 & 0x80u) == 0) {
            len = 1;
        } else if ((b0 & 0xE0u) == 0xC0u) {
            len = 2;
            cp = b0 & 0x1Fu;
        } else if ((b0 & 0xF0u) == 0xE0u) {
            len = 3;
            cp = b0 & 0x0Fu;
        } else if ((b0 & 0xF8u) == 0xF0u) {
            len = 4;
            cp = b0 & 0x07u;
        } else {
            out.push_back(b0);  // stray continuation byte
            ++i;
            continue;
        }
        if (i + len > s.size()) {
            out.push_back(b0);
            ++i;
            continue;
        }
        bool valid = true;
        for (std::size_t j = 1; j < len; ++j) {
            const unsigned char bj = static_cast<unsigned char>(s[i + j]);
            if ((bj & 0xC0u) != 0x80u) {
                valid = false;
                break;
            }
            cp = (cp << 6) | (bj & 0x3Fu);
        }
        if (!valid) {
            out.push_back(b0);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::size_t utf8_scalar_count(std::string_view s) {
    return decode_utf8(s).size();
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) {
    constexpr std::uint64_t prime = 1099511628211ULL;
    for (const char c : bytes) {
        state ^= static_cast<unsigned char>(c);
        state *= prime;
    }
    return state;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(value));
    return std::string(buf, 16);
}

}  // namespace refeval::text

#include "refeval/token_counter.hpp"

namespace refeval {

namespace {

bool is_word_char(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

bool is_space_char(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
}

}  // namespace

std::size_t ApproxTokenCounter::count(std::string_view content) const {
    std::size_t tokens = 0;
    std::size_t i = 0;
    while (i < content.size()) {
        const unsigned char c = static_cast<unsigned char>(content[i]);
        if (is_space_char(c)) {
            ++i;
            continue;
        }
        if (is_word_char(c)) {
            while (i < content.size() &&
                   is_word_char(static_cast<unsigned char>(content[i]))) {
                ++i;
            }
        } else {
            ++i;
        }
        ++tokens;
    }
    return tokens;
}

}  // namespace refeval

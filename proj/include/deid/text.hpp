#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace deid {

/// One token of a line. Offsets count Unicode scalar values, not bytes, so
/// they are portable across encodings of the same text.
struct Token {
    std::string text;
    std::size_t line_index = 0;
    std::size_t begin = 0;  // inclusive, scalar offset
    std::size_t end = 0;    // exclusive, scalar offset

    friend bool operator==(const Token&, const Token&) = default;
};

namespace utf8 {

struct Decoded {
    std::vector<char32_t> scalars;
    std::vector<std::size_t> byte_offsets;  // size scalars.size()+1; [i] = byte start of scalar i
};

inline bool is_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

/// Lenient decoder: an invalid byte is passed through as one scalar, so any
/// byte string decodes and re-encodes to itself via the offset table.
inline Decoded decode(std::string_view s) {
    Decoded d;
    d.byte_offsets.reserve(s.size() + 1);
    d.scalars.reserve(s.size());
    std::size_t i = 0;
    const std::size_t n = s.size();
    d.byte_offsets.push_back(0);
    while (i < n) {
        const unsigned char b = static_cast<unsigned char>(s[i]);
        char32_t cp = b;
        std::size_t len = 1;
        if (b < 0x80) {
            // ascii
        } else if ((b >> 5) == 0x6 && i + 1 < n && is_continuation(s[i + 1])) {
            cp = (char32_t(b & 0x1F) << 6) | char32_t(s[i + 1] & 0x3F);
            len = 2;
        } else if ((b >> 4) == 0xE && i + 2 < n && is_continuation(s[i + 1]) && is_continuation(s[i + 2])) {
            cp = (char32_t(b & 0x0F) << 12) | (char32_t(s[i + 1] & 0x3F) << 6) | char32_t(s[i + 2] & 0x3F);
            len = 3;
        } else if ((b >> 3) == 0x1E && i + 3 < n && is_continuation(s[i + 1]) && is_continuation(s[i + 2]) &&
                   is_continuation(s[i + 3])) {
            cp = (char32_t(b & 0x07) << 18) | (char32_t(s[i + 1] & 0x3F) << 12) | (char32_t(s[i + 2] & 0x3F) << 6) |
                 char32_t(s[i + 3] & 0x3F);
            len = 4;
        }
        d.scalars.push_back(cp);
        i += len;
        d.byte_offsets.push_back(i);
    }
    return d;
}

inline std::size_t length(std::string_view s) { return decode(s).scalars.size(); }

/// Substring by scalar offsets [begin, end).
inline std::string substr(std::string_view s, std::size_t begin, std::size_t end) {
    const Decoded d = decode(s);
    if (begin > end || end > d.scalars.size()) return {};
    return std::string(s.substr(d.byte_offsets[begin], d.byte_offsets[end] - d.byte_offsets[begin]));
}

/// Replace scalar range [begin, end) with `replacement`.
inline std::string splice(std::string_view s, std::size_t begin, std::size_t end, std::string_view replacement) {
    const Decoded d = decode(s);
    std::string out;
    out.reserve(s.size() + replacement.size());
    out.append(s.substr(0, d.byte_offsets[begin]));
    out.append(replacement);
    out.append(s.substr(d.byte_offsets[end]));
    return out;
}

}  // namespace utf8

/// Token character classes. Letters, digits and "_" form word runs (the "_"
/// keeps PHI sentinels single tokens); non-ASCII scalars count as letters.
inline bool is_word_char(char32_t c) {
    return (c >= U'0' && c <= U'9') || (c >= U'A' && c <= U'Z') || (c >= U'a' && c <= U'z') || c == U'_' || c > 0x7F;
}

inline bool is_space_char(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\r' || c == U'\f' || c == U'\v';
}

/// Tokenize one line: each maximal run of word characters is one token, each
/// remaining non-space character is its own token. Offsets are scalar-valued
/// and reconstruct the line: line[t.begin..t.end) == t.text.
inline std::vector<Token> tokenize(std::string_view line, std::size_t line_index = 0) {
    std::vector<Token> tokens;
    const utf8::Decoded d = utf8::decode(line);
    const std::size_t n = d.scalars.size();
    std::size_t i = 0;
    while (i < n) {
        const char32_t c = d.scalars[i];
        if (is_space_char(c)) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        if (is_word_char(c)) {
            while (j < n && is_word_char(d.scalars[j])) ++j;
        }
        tokens.push_back(Token{
            std::string(line.substr(d.byte_offsets[i], d.byte_offsets[j] - d.byte_offsets[i])),
            line_index, i, j});
        i = j;
    }
    return tokens;
}

/// ASCII-only case fold; non-ASCII bytes pass through unchanged.
inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

}  // namespace deid

#pragma once

#include <string>
#include <string_view>

#include "scope/error.hpp"

namespace scope {

// Decodes UTF-8 into one char32_t per code point. Throws IoError on invalid
// byte sequences; the corpus pipeline treats any such input as corrupt.
inline std::u32string utf8_decode(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    auto cont = [&](std::size_t k) {
        return k < s.size() && (static_cast<unsigned char>(s[k]) & 0xC0u) == 0x80u;
    };
    while (i < s.size()) {
        unsigned char b0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0;
        std::size_t len = 0;
        if (b0 < 0x80u) {
            cp = b0;
            len = 1;
        } else if ((b0 & 0xE0u) == 0xC0u && cont(i + 1)) {
            cp = (char32_t(b0 & 0x1Fu) << 6) | char32_t(s[i + 1] & 0x3F);
            len = 2;
            if (cp < 0x80) throw IoError("overlong UTF-8 sequence");
        } else if ((b0 & 0xF0u) == 0xE0u && cont(i + 1) && cont(i + 2)) {
            cp = (char32_t(b0 & 0x0Fu) << 12) | (char32_t(s[i + 1] & 0x3F) << 6) |
                 char32_t(s[i + 2] & 0x3F);
            len = 3;
            if (cp < 0x800) throw IoError("overlong UTF-8 sequence");
        } else if ((b0 & 0xF8u) == 0xF0u && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
            cp = (char32_t(b0 & 0x07u) << 18) | (char32_t(s[i + 1] & 0x3F) << 12) |
                 (char32_t(s[i + 2] & 0x3F) << 6) | char32_t(s[i + 3] & 0x3F);
            len = 4;
            if (cp < 0x10000 || cp > 0x10FFFF) throw IoError("invalid UTF-8 code point");
        } else {
            throw IoError("invalid UTF-8 byte at offset " + std::to_string(i));
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void utf8_append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string utf8_encode(std::u32string_view s) {
    std::string out;
    out.reserve(s.size() * 3);
    for (char32_t cp : s) utf8_append(out, cp);
    return out;
}

inline std::string utf8_encode(char32_t cp) {
    std::string out;
    utf8_append(out, cp);
    return out;
}

} // namespace scope

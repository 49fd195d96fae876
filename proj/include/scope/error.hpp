#pragma once

#include <stdexcept>
#include <string>

namespace scope {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedSyllable : Error {
    explicit MalformedSyllable(const std::string& s)
        : Error("malformed syllable: '" + s + "'") {}
};

struct UnknownSyllable : Error {
    explicit UnknownSyllable(const std::string& s)
        : Error("syllable does not decompose against the vocabularies: '" + s + "'") {}
};

struct SequenceTooLong : Error {
    SequenceTooLong(std::size_t n, std::size_t max_len)
        : Error("sequence length " + std::to_string(n) + " exceeds max_len " +
                std::to_string(max_len)) {}
};

struct GranularityMismatch : Error {
    using Error::Error;
};

struct LengthMismatch : Error {
    using Error::Error;
};

struct MissingTarget : Error {
    using Error::Error;
};

struct NaNLoss : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace scope

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tabdoor {

enum class ErrorKind {
    config,      // bad configuration / unknown key / invalid preset
    schema,      // data does not match the declared schema
    parse,       // unparseable cell or file content
    validation,  // value outside the declared domain
    state,       // operation called in the wrong order (e.g. apply before fit)
    shape,       // dimension mismatch
    io,          // filesystem problems
    integrity,   // manifest / hash mismatch
    numeric,     // NaN loss and friends
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

// splitmix64; used to derive independent seed streams from (seed, tags...).
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) { return mix_seed(a ^ mix_seed(b)); }

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

std::string trim(std::string_view s);
std::optional<double> parse_double(std::string_view s);

// FNV-1a 64 over bytes; used for config/artifact hashes.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace tabdoor

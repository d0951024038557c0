#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace motus {

// Thrown for malformed input files (recordings, annotations, checkpoints).
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown for contract violations in library calls (bad shapes, bad configs).
struct InvalidArgument : std::runtime_error {
    explicit InvalidArgument(const std::string& msg) : std::runtime_error(msg) {}
};

// Exact double -> text -> double round trip via hexadecimal float literals.
inline std::string hexfloat(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

inline double parse_hexfloat(const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw FormatError("bad float literal: '" + s + "'");
    return v;
}

// Shortest decimal form that parses back to the same double (%.17g is
// always sufficient for IEEE binary64).
inline std::string round_trip_decimal(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v || v != v) break;
    }
    return buf;
}

// FNV-1a over raw bytes; used for determinism and leakage fingerprints.
struct Fnv1a {
    std::uint64_t state = 1469598103934665603ull;
    void feed(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state ^= p[i];
            state *= 1099511628211ull;
        }
    }
    void feed(double v) { feed(&v, sizeof v); }
    void feed(std::uint64_t v) { feed(&v, sizeof v); }
    void feed(const std::vector<double>& v) {
        for (double x : v) feed(x);
    }
    void feed(const std::string& s) { feed(s.data(), s.size()); }
    std::uint64_t value() const { return state; }
};

// splitmix64; used to derive independent sub-seeds from one base seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace motus

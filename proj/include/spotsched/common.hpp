#ifndef SPOTSCHED_COMMON_HPP
#define SPOTSCHED_COMMON_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace spotsched {

// Bad input data (trace files, policy strings). Message carries the location.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or contract violation detected before running.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Request exceeds a documented capability bound (e.g. oracle horizon).
class CapabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised by the autoregressive predictor when the history is too short;
// callers are expected to fall back to a persistence forecast.
class InsufficientHistoryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stateless mixing of a seed with a counter; used to derive independent
// substreams (per slot, per offset, per series) from one user seed.
inline std::uint64_t mix64(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + (counter << 1));
    return splitmix64(s);
}

inline long long round_half_up(double x) {
    return static_cast<long long>(std::floor(x + 0.5));
}

// Integer mean of a nonnegative sum over m entries, rounding halves up.
inline int div_round_half_up(long long sum, long long m) {
    return static_cast<int>((2 * sum + m) / (2 * m));
}

// Shortest decimal form that round-trips through binary64.
inline std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

}  // namespace spotsched

#endif

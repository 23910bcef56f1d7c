#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace f4ms {

using Bytes = std::vector<std::uint8_t>;

// Simulated quantities (time, area, energy) are exact decimals held as
// integer micro-units: 1 unit == 1'000'000 micros. Comparisons stay exact
// across platforms.
using micros_t = std::int64_t;
inline constexpr micros_t kMicrosPerUnit = 1'000'000;

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(const Bytes& b) {
  return std::string(b.begin(), b.end());
}

std::string to_hex(std::span<const std::uint8_t> data);
std::optional<Bytes> from_hex(std::string_view hex);

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t mix64(std::uint64_t x);

// Deterministic generator used for behavior randomness and test data.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform in [0, n); n > 0.
  std::uint64_t next_below(std::uint64_t n) { return next() % n; }

  void fill(Bytes& out, std::size_t count);

 private:
  std::uint64_t state_;
};

// "12.500000" - fixed six fractional digits, used by the `lines` trace format.
std::string format_micros_fixed6(micros_t value);

// "12.5" - canonical decimal: no exponent, trailing zeros stripped,
// no trailing dot. Used by the canonical tree syntax.
std::string format_micros_canonical(micros_t value);

// Exact decimal with at most six fractional digits, no exponent.
std::optional<micros_t> parse_decimal_micros(std::string_view text);

}  // namespace f4ms

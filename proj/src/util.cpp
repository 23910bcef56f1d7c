#include "f4ms/util.hpp"

#include <cctype>
#include <cstdlib>

namespace f4ms {

std::string to_hex(std::span<const std::uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

std::optional<Bytes> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = nibble(hex[i]);
    int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

void SplitMix64::fill(Bytes& out, std::size_t count) {
  out.clear();
  out.reserve(count);
  while (out.size() < count) {
    std::uint64_t word = next();
    for (int i = 0; i < 8 && out.size() < count; ++i) {
      out.push_back(static_cast<std::uint8_t>(word >> (8 * i)));
    }
  }
}

std::string format_micros_fixed6(micros_t value) {
  char buf[40];
  micros_t units = value / kMicrosPerUnit;
  micros_t frac = value % kMicrosPerUnit;
  if (value < 0) {
    units = -(-value / kMicrosPerUnit);
    frac = -value % kMicrosPerUnit;
    std::snprintf(buf, sizeof buf, "-%lld.%06lld",
                  static_cast<long long>(-units), static_cast<long long>(frac));
  } else {
    std::snprintf(buf, sizeof buf, "%lld.%06lld", static_cast<long long>(units),
                  static_cast<long long>(frac));
  }
  return buf;
}

std::string format_micros_canonical(micros_t value) {
  std::string fixed = format_micros_fixed6(value);
  std::size_t last = fixed.find_last_not_of('0');
  if (fixed[last] == '.') --last;
  return fixed.substr(0, last + 1);
}

std::optional<micros_t> parse_decimal_micros(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-') {
    negative = true;
    i = 1;
  }
  if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))
    return std::nullopt;
  micros_t units = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    micros_t digit = text[i] - '0';
    if (units > (INT64_MAX - digit) / 10) return std::nullopt;
    units = units * 10 + digit;
    ++i;
  }
  micros_t frac = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    int digits = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      if (++digits > 6) return std::nullopt;
      frac = frac * 10 + (text[i] - '0');
      ++i;
    }
    if (digits == 0) return std::nullopt;
    for (; digits < 6; ++digits) frac *= 10;
  }
  if (i != text.size()) return std::nullopt;  // rejects exponents and junk
  if (units > INT64_MAX / kMicrosPerUnit) return std::nullopt;
  micros_t value = units * kMicrosPerUnit + frac;
  return negative ? -value : value;
}

}  // namespace f4ms

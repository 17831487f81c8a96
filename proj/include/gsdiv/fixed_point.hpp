#pragma once

// Unsigned, arbitrary-width fixed-point values.
//
// A FixedValue is a raw magnitude read as magnitude * 2^-frac_bits, with an
// explicit integer-bit width. Every operation here is exact unless it says
// otherwise: multiplication keeps all product bits, and precision is only
// ever dropped through truncate() or round_nearest().

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace gsdiv {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

struct OverflowError : std::overflow_error {
  using std::overflow_error::overflow_error;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class FixedValue {
 public:
  /// Zero in the narrowest legal format (1 integer bit, no fraction).
  FixedValue() = default;

  /// Throws OverflowError when magnitude does not fit int_bits + frac_bits,
  /// ArgumentError when int_bits is 0 or magnitude is negative.
  static FixedValue from_bits(BigInt magnitude, unsigned int_bits,
                              unsigned frac_bits);

  const BigInt& magnitude() const noexcept { return magnitude_; }
  unsigned int_bits() const noexcept { return int_bits_; }
  unsigned frac_bits() const noexcept { return frac_bits_; }
  unsigned total_bits() const noexcept { return int_bits_ + frac_bits_; }

  bool is_zero() const noexcept { return magnitude_.is_zero(); }

  /// Exact value as a reduced fraction.
  Rational to_rational() const;

  /// Binary rendering "i.ffff": minimal integer digits, exactly frac_bits
  /// fraction digits (no point when frac_bits is 0).
  std::string to_binary() const;

  /// Exact decimal rendering. Always finite since the denominator is 2^k.
  std::string to_decimal() const;

  /// "0.1111 (0.9375)"
  std::string to_string() const;

  /// Equality and ordering compare exact values, not formats.
  friend bool operator==(const FixedValue& a, const FixedValue& b);
  friend std::strong_ordering operator<=>(const FixedValue& a,
                                          const FixedValue& b);

  /// Bit-for-bit identity: same magnitude and same widths.
  bool identical(const FixedValue& other) const noexcept {
    return magnitude_ == other.magnitude_ && int_bits_ == other.int_bits_ &&
           frac_bits_ == other.frac_bits_;
  }

 private:
  FixedValue(BigInt magnitude, unsigned int_bits, unsigned frac_bits)
      : magnitude_(std::move(magnitude)),
        int_bits_(int_bits),
        frac_bits_(frac_bits) {}

  BigInt magnitude_ = 0;
  unsigned int_bits_ = 1;
  unsigned frac_bits_ = 0;
};

enum class ComplementMode { exact, ones };

std::string_view to_string(ComplementMode mode);
ComplementMode parse_complement_mode(std::string_view text);

/// Exact product. frac_bits and int_bits are the sums of the operands'.
FixedValue mul_exact(const FixedValue& a, const FixedValue& b);

/// Round toward zero to frac_bits fraction bits. Keeps a's integer width.
FixedValue truncate(const FixedValue& a, unsigned frac_bits);

/// Round to nearest, ties upward. The integer width grows by one bit only
/// when the carry out of the fraction does not fit a's integer width.
FixedValue round_nearest(const FixedValue& a, unsigned frac_bits);

/// 2 - a (exact) or 2 - a - ulp (ones), computed on the (1 + frac)-bit
/// pattern. Requires 0 < a < 2; same format as a.
FixedValue twos_complement_of(const FixedValue& a,
                              ComplementMode mode = ComplementMode::exact);

/// Append zero fraction bits; the value is unchanged.
FixedValue zero_extend(const FixedValue& a, unsigned target_frac_bits);

/// Change the declared integer width. Throws OverflowError if the value
/// does not fit the narrower width.
FixedValue resize_int(const FixedValue& a, unsigned int_bits);

inline Rational to_rational(const FixedValue& a) { return a.to_rational(); }

/// Exact decimal rendering of a dyadic rational (denominator a power of
/// two). Negative values get a leading '-'. Throws ArgumentError otherwise.
std::string dyadic_to_decimal(const Rational& value);

/// Parse "1.25" (decimal) or "1.01b" (binary). Binary text and decimals
/// with a dyadic value are taken exactly, with the fewest fraction bits
/// that represent them. Other decimals are rounded to nearest at
/// inexact_frac_bits. Throws ArgumentError on malformed text.
FixedValue parse_fixed(std::string_view text, unsigned inexact_frac_bits = 52);

/// Parse an exact rational from a decimal string such as "-0.015625".
Rational parse_decimal_rational(std::string_view text);

}  // namespace gsdiv

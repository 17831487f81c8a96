#include "gsdiv/fixed_point.hpp"

#include <algorithm>
#include <cctype>

namespace gsdiv {
namespace {

BigInt pow2(unsigned bits) { return BigInt(1) << bits; }

unsigned bit_length(const BigInt& x) {
  return x.is_zero() ? 0u : static_cast<unsigned>(boost::multiprecision::msb(x)) + 1u;
}

std::pair<BigInt, BigInt> aligned(const FixedValue& a, const FixedValue& b) {
  const unsigned f = std::max(a.frac_bits(), b.frac_bits());
  return {a.magnitude() << (f - a.frac_bits()),
          b.magnitude() << (f - b.frac_bits())};
}

bool all_of_chars(std::string_view s, auto pred) {
  return std::all_of(s.begin(), s.end(),
                     [&](char c) { return pred(static_cast<unsigned char>(c)); });
}

// Exponent k with den == 2^k, or -1 when den is not a power of two.
int log2_exact(const BigInt& den) {
  if (den <= 0) return -1;
  const unsigned lsb = static_cast<unsigned>(boost::multiprecision::lsb(den));
  return (den >> lsb) == 1 ? static_cast<int>(lsb) : -1;
}

}  // namespace

FixedValue FixedValue::from_bits(BigInt magnitude, unsigned int_bits,
                                 unsigned frac_bits) {
  if (int_bits == 0) throw ArgumentError("fixed-point format needs at least one integer bit");
  if (magnitude < 0) throw ArgumentError("fixed-point magnitude must be non-negative");
  if (bit_length(magnitude) > int_bits + frac_bits) {
    throw OverflowError("magnitude " + magnitude.str() + " does not fit " +
                        std::to_string(int_bits) + "." + std::to_string(frac_bits) +
                        " format");
  }
  return FixedValue(std::move(magnitude), int_bits, frac_bits);
}

Rational FixedValue::to_rational() const {
  return Rational(magnitude_, pow2(frac_bits_));
}

std::string FixedValue::to_binary() const {
  const BigInt int_part = magnitude_ >> frac_bits_;
  std::string out;
  if (int_part.is_zero()) {
    out = "0";
  } else {
    for (unsigned i = bit_length(int_part); i-- > 0;) out += bit_test(int_part, i) ? '1' : '0';
  }
  if (frac_bits_ == 0) return out;
  out += '.';
  for (unsigned i = frac_bits_; i-- > 0;) out += bit_test(magnitude_, i) ? '1' : '0';
  return out;
}

std::string FixedValue::to_decimal() const { return dyadic_to_decimal(to_rational()); }

std::string FixedValue::to_string() const {
  return to_binary() + " (" + to_decimal() + ")";
}

bool operator==(const FixedValue& a, const FixedValue& b) {
  auto [x, y] = aligned(a, b);
  return x == y;
}

std::strong_ordering operator<=>(const FixedValue& a, const FixedValue& b) {
  auto [x, y] = aligned(a, b);
  if (x < y) return std::strong_ordering::less;
  if (x > y) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string_view to_string(ComplementMode mode) {
  return mode == ComplementMode::exact ? "exact" : "ones";
}

ComplementMode parse_complement_mode(std::string_view text) {
  if (text == "exact") return ComplementMode::exact;
  if (text == "ones") return ComplementMode::ones;
  throw ArgumentError("unknown complement mode '" + std::string(text) + "'");
}

FixedValue mul_exact(const FixedValue& a, const FixedValue& b) {
  return FixedValue::from_bits(a.magnitude() * b.magnitude(),
                               a.int_bits() + b.int_bits(),
                               a.frac_bits() + b.frac_bits());
}

FixedValue truncate(const FixedValue& a, unsigned frac_bits) {
  if (frac_bits > a.frac_bits()) {
    throw ArgumentError("truncate cannot widen " + std::to_string(a.frac_bits()) +
                        " fraction bits to " + std::to_string(frac_bits));
  }
  return FixedValue::from_bits(a.magnitude() >> (a.frac_bits() - frac_bits),
                               a.int_bits(), frac_bits);
}

FixedValue round_nearest(const FixedValue& a, unsigned frac_bits) {
  if (frac_bits > a.frac_bits()) {
    throw ArgumentError("round_nearest cannot widen " +
                        std::to_string(a.frac_bits()) + " fraction bits to " +
                        std::to_string(frac_bits));
  }
  const unsigned drop = a.frac_bits() - frac_bits;
  if (drop == 0) return a;
  // Adding half an output ulp then flooring rounds ties upward.
  BigInt rounded = (a.magnitude() + (BigInt(1) << (drop - 1))) >> drop;
  const unsigned int_bits =
      bit_length(rounded) > a.int_bits() + frac_bits ? a.int_bits() + 1 : a.int_bits();
  return FixedValue::from_bits(std::move(rounded), int_bits, frac_bits);
}

FixedValue twos_complement_of(const FixedValue& a, ComplementMode mode) {
  if (a.is_zero()) {
    throw DomainError("complement of 0 is 2, which needs a wider integer field");
  }
  const BigInt two = pow2(a.frac_bits() + 1);
  if (a.magnitude() >= two) {
    throw DomainError("complement operand " + a.to_decimal() + " is not below 2");
  }
  // Bitwise NOT over the (1 + frac)-bit pattern, plus one ulp for exact mode.
  BigInt inverted = (two - 1) ^ a.magnitude();
  if (mode == ComplementMode::exact) inverted += 1;
  return FixedValue::from_bits(std::move(inverted), a.int_bits(), a.frac_bits());
}

FixedValue zero_extend(const FixedValue& a, unsigned target_frac_bits) {
  if (target_frac_bits < a.frac_bits()) {
    throw ArgumentError("zero_extend cannot narrow " + std::to_string(a.frac_bits()) +
                        " fraction bits to " + std::to_string(target_frac_bits));
  }
  return FixedValue::from_bits(a.magnitude() << (target_frac_bits - a.frac_bits()),
                               a.int_bits(), target_frac_bits);
}

FixedValue resize_int(const FixedValue& a, unsigned int_bits) {
  return FixedValue::from_bits(a.magnitude(), int_bits, a.frac_bits());
}

std::string dyadic_to_decimal(const Rational& value) {
  const BigInt num = abs(numerator(value));
  const int k = log2_exact(denominator(value));
  if (k < 0) throw ArgumentError("value is not dyadic: " + value.str());
  const auto frac_digits = static_cast<unsigned>(k);

  // num / 2^k == num * 5^k / 10^k
  BigInt scaled = num * boost::multiprecision::pow(BigInt(5), frac_digits);
  std::string digits = scaled.str();
  if (digits.size() <= frac_digits) digits.insert(0, frac_digits + 1 - digits.size(), '0');

  std::string out = value < 0 ? "-" : "";
  out += digits.substr(0, digits.size() - frac_digits);
  std::string frac = digits.substr(digits.size() - frac_digits);
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  if (!frac.empty()) out += "." + frac;
  return out;
}

Rational parse_decimal_rational(std::string_view text) {
  const std::string original(text);
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  const auto dot = text.find('.');
  const std::string_view int_part = text.substr(0, dot);
  const std::string_view frac_part =
      dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  const auto is_digit = [](unsigned char c) { return std::isdigit(c) != 0; };
  if ((int_part.empty() && frac_part.empty()) || !all_of_chars(int_part, is_digit) ||
      !all_of_chars(frac_part, is_digit)) {
    throw ArgumentError("malformed decimal '" + original + "'");
  }
  // Leading zeros would make the BigInt parser read the digits as octal.
  std::string digits = std::string(int_part) + std::string(frac_part);
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size()));
  BigInt num(digits.empty() ? std::string("0") : digits);
  Rational out(num, boost::multiprecision::pow(BigInt(10),
                                               static_cast<unsigned>(frac_part.size())));
  return negative ? Rational(-out) : out;
}

FixedValue parse_fixed(std::string_view text, unsigned inexact_frac_bits) {
  const std::string original(text);
  if (!text.empty() && (text.back() == 'b' || text.back() == 'B')) {
    text.remove_suffix(1);
    const auto dot = text.find('.');
    const std::string_view int_part = text.substr(0, dot);
    const std::string_view frac_part =
        dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    const auto is_bit = [](unsigned char c) { return c == '0' || c == '1'; };
    if (int_part.empty() || !all_of_chars(int_part, is_bit) ||
        !all_of_chars(frac_part, is_bit)) {
      throw ArgumentError("malformed binary value '" + original + "'");
    }
    BigInt magnitude = 0;
    for (char c : int_part) magnitude = (magnitude << 1) | (c == '1' ? 1 : 0);
    for (char c : frac_part) magnitude = (magnitude << 1) | (c == '1' ? 1 : 0);
    const auto frac_bits = static_cast<unsigned>(frac_part.size());
    const unsigned int_bits = std::max(1u, bit_length(magnitude >> frac_bits));
    return FixedValue::from_bits(std::move(magnitude), int_bits, frac_bits);
  }

  if (!text.empty() && text.front() == '-') {
    throw ArgumentError("negative value '" + original + "' is not representable");
  }
  const Rational value = parse_decimal_rational(text);
  const BigInt int_part = numerator(value) / denominator(value);
  const unsigned int_bits = std::max(1u, bit_length(int_part));

  if (const int k = log2_exact(denominator(value)); k >= 0) {
    return FixedValue::from_bits(numerator(value), int_bits, static_cast<unsigned>(k));
  }
  const Rational scaled = value * Rational(pow2(inexact_frac_bits));
  const BigInt rounded =
      (2 * numerator(scaled) + denominator(scaled)) / (2 * denominator(scaled));
  const unsigned width = std::max(int_bits, bit_length(rounded >> inexact_frac_bits));
  return FixedValue::from_bits(rounded, std::max(1u, width), inexact_frac_bits);
}

}  // namespace gsdiv

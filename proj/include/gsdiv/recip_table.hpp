#pragma once

// Reciprocal seed ROM: p index bits in, p + 2 bits out.
//
// Entry j approximates 1/D for D in [1 + j*2^-p, 1 + (j+1)*2^-p). It is the
// reciprocal of the interval midpoint rounded to nearest at p + 1 fraction
// bits, stored with one integer bit so that 1.0 is representable.

#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "gsdiv/fixed_point.hpp"

namespace gsdiv {

inline constexpr unsigned kMinTableBits = 1;
inline constexpr unsigned kMaxTableBits = 20;
inline constexpr std::string_view kTableRuleTag = "round-nearest-midpoint";

class ReciprocalTable {
 public:
  unsigned p() const noexcept { return p_; }
  const std::vector<FixedValue>& entries() const noexcept { return entries_; }
  const FixedValue& entry(std::size_t index) const { return entries_.at(index); }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Filled by verify_table(); empty until then.
  const std::optional<Rational>& max_seed_error() const noexcept {
    return max_seed_error_;
  }

 private:
  friend ReciprocalTable build_table(unsigned p);
  friend Rational verify_table(ReciprocalTable& table);
  friend ReciprocalTable read_table(std::istream& in);

  unsigned p_ = 0;
  std::vector<FixedValue> entries_;
  std::optional<Rational> max_seed_error_;
};

/// Throws ArgumentError unless kMinTableBits <= p <= kMaxTableBits.
ReciprocalTable build_table(unsigned p);

/// Index = top p fraction bits of d (truncation). Throws DomainError unless
/// 1 <= d < 2. A d with fewer than p fraction bits is zero-extended first.
const FixedValue& lookup(const ReciprocalTable& table, const FixedValue& d);

/// Index that lookup() would use.
std::size_t table_index(unsigned p, const FixedValue& d);

/// Max of |1 - D*entry[j]| over both endpoints of every input interval;
/// this bounds the seed error for any D, whatever its width. Stores the
/// result in the table and returns it.
Rational verify_table(ReciprocalTable& table);

/// Text form: "# p=<p>", "# rule=<tag>", then one binary entry per line.
void write_table(std::ostream& out, const ReciprocalTable& table);

/// Inverse of write_table. Throws ArgumentError on a malformed stream.
ReciprocalTable read_table(std::istream& in);

}  // namespace gsdiv

#pragma once

// Goldschmidt division by functional iteration.
//
//   K1 = ROM(D),      q1 = N*K1,        r1 = D*K1
//   K(i+1) = 2 - ri,  q(i+1) = qi*K(i+1), r(i+1) = ri*K(i+1)
//
// r converges quadratically to 1 and q to N/D. Position i of every
// sequence in an IterationTrace is the 1-based subscript minus one, so
// iterations = 3 yields q4 at index 3.

#include <optional>
#include <vector>

#include "gsdiv/fixed_point.hpp"
#include "gsdiv/recip_table.hpp"

namespace gsdiv {

struct DivisionProblem {
  FixedValue n;
  FixedValue d;

  /// Throws DomainError unless 1 <= n < 2 and 1 <= d < 2.
  void validate() const;
};

struct GoldschmidtConfig {
  unsigned p = 8;
  /// Step-2 rounds; 3 gives q4.
  unsigned iterations = 3;
  /// Fraction bits kept after every multiply; empty means exact arithmetic.
  std::optional<unsigned> mult_frac_bits;
  ComplementMode complement_mode = ComplementMode::exact;

  bool exact() const noexcept { return !mult_frac_bits.has_value(); }

  /// Throws ArgumentError when mult_frac_bits < p + 1.
  void validate() const;
};

struct IterationTrace {
  DivisionProblem problem;
  GoldschmidtConfig config;
  std::vector<FixedValue> k;
  std::vector<FixedValue> q;
  /// The last r is not needed for the quotient and has no multiplier in
  /// the datapath; it is kept for convergence diagnostics.
  std::vector<FixedValue> r;
  Rational exact_quotient;

  const FixedValue& quotient() const { return q.back(); }
  std::size_t steps() const noexcept { return q.size(); }
};

/// One pass through a width-limited multiplier: exact product, then
/// truncate (or zero-extend) to mult_frac_bits, integer field fixed at 2
/// bits. Exact when mult_frac_bits is empty.
FixedValue multiplier_stage(const FixedValue& a, const FixedValue& b,
                            const std::optional<unsigned>& mult_frac_bits);

/// Kn = 2 - r with the integer field normalised to one bit.
FixedValue complement_stage(const FixedValue& r, ComplementMode mode);

/// Throws ArgumentError if table.p() != config.p, DomainError when the
/// problem is out of range or an r leaves (0, 2).
IterationTrace run_division(const DivisionProblem& problem,
                            const GoldschmidtConfig& config,
                            const ReciprocalTable& table);

/// Same iteration with K1 forced instead of read from a table.
IterationTrace run_division_with_seed(const DivisionProblem& problem,
                                      const GoldschmidtConfig& config,
                                      const FixedValue& seed);

/// |Q - q[i]| / Q for 1-based i. Throws ArgumentError when i is out of
/// range.
Rational relative_error(const IterationTrace& trace, std::size_t i);

/// Smallest m with p * 2^m >= target_fraction_bits. Requires p >= 2.
unsigned required_iterations(unsigned p, unsigned target_fraction_bits);

}  // namespace gsdiv

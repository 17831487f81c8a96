#include "gsdiv/goldschmidt.hpp"

#include <string>

namespace gsdiv {
namespace {

bool in_unit_interval(const FixedValue& v) {
  return v.magnitude() >> v.frac_bits() == 1;
}

}  // namespace

void DivisionProblem::validate() const {
  if (!in_unit_interval(n)) throw DomainError("numerator " + n.to_decimal() + " outside [1, 2)");
  if (!in_unit_interval(d)) throw DomainError("denominator " + d.to_decimal() + " outside [1, 2)");
}

void GoldschmidtConfig::validate() const {
  if (mult_frac_bits && *mult_frac_bits < p + 1) {
    throw ArgumentError("multiplier width of " + std::to_string(*mult_frac_bits) +
                        " fraction bits is below p + 1 = " + std::to_string(p + 1));
  }
}

FixedValue multiplier_stage(const FixedValue& a, const FixedValue& b,
                            const std::optional<unsigned>& mult_frac_bits) {
  FixedValue product = mul_exact(a, b);
  if (mult_frac_bits) {
    product = product.frac_bits() > *mult_frac_bits ? truncate(product, *mult_frac_bits)
                                                    : zero_extend(product, *mult_frac_bits);
  }
  return resize_int(product, 2);
}

FixedValue complement_stage(const FixedValue& r, ComplementMode mode) {
  return resize_int(twos_complement_of(r, mode), 1);
}

IterationTrace run_division_with_seed(const DivisionProblem& problem,
                                      const GoldschmidtConfig& config,
                                      const FixedValue& seed) {
  problem.validate();
  config.validate();

  IterationTrace trace;
  trace.problem = problem;
  trace.config = config;
  trace.exact_quotient = problem.n.to_rational() / problem.d.to_rational();
  trace.k.reserve(config.iterations + 1);
  trace.q.reserve(config.iterations + 1);
  trace.r.reserve(config.iterations + 1);

  const auto& width = config.mult_frac_bits;
  trace.k.push_back(seed);
  trace.q.push_back(multiplier_stage(problem.n, seed, width));
  trace.r.push_back(multiplier_stage(problem.d, seed, width));
  for (unsigned i = 0; i < config.iterations; ++i) {
    const FixedValue k = complement_stage(trace.r.back(), config.complement_mode);
    trace.q.push_back(multiplier_stage(trace.q.back(), k, width));
    trace.r.push_back(multiplier_stage(trace.r.back(), k, width));
    trace.k.push_back(k);
  }
  return trace;
}

IterationTrace run_division(const DivisionProblem& problem,
                            const GoldschmidtConfig& config,
                            const ReciprocalTable& table) {
  if (table.p() != config.p) {
    throw ArgumentError("table built for p=" + std::to_string(table.p()) +
                        " but configuration asks for p=" + std::to_string(config.p));
  }
  problem.validate();
  return run_division_with_seed(problem, config, lookup(table, problem.d));
}

Rational relative_error(const IterationTrace& trace, std::size_t i) {
  if (i < 1 || i > trace.q.size()) {
    throw ArgumentError("iteration index " + std::to_string(i) + " outside [1, " +
                        std::to_string(trace.q.size()) + "]");
  }
  const Rational& quotient = trace.exact_quotient;
  Rational diff = quotient - trace.q[i - 1].to_rational();
  if (diff < 0) diff = -diff;
  return diff / quotient;
}

unsigned required_iterations(unsigned p, unsigned target_fraction_bits) {
  if (p < 2) throw ArgumentError("required_iterations needs p >= 2");
  unsigned m = 0;
  for (unsigned long long bits = p; bits < target_fraction_bits; bits *= 2) ++m;
  return m;
}

}  // namespace gsdiv

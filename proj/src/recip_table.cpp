#include "gsdiv/recip_table.hpp"

#include <istream>
#include <ostream>
#include <string>

namespace gsdiv {

ReciprocalTable build_table(unsigned p) {
  if (p < kMinTableBits || p > kMaxTableBits) {
    throw ArgumentError("table index width p=" + std::to_string(p) +
                        " outside [" + std::to_string(kMinTableBits) + ", " +
                        std::to_string(kMaxTableBits) + "]");
  }
  const unsigned out_frac = p + 1;
  const BigInt one = BigInt(1) << out_frac;
  // Midpoint M_j = (2^(p+1) + 2j + 1) / 2^(p+1), so
  // 2^(p+1) / M_j = 2^(2p+2) / (2^(p+1) + 2j + 1).
  const BigInt scaled_one = BigInt(1) << (2 * out_frac);

  ReciprocalTable table;
  table.p_ = p;
  const std::size_t count = std::size_t{1} << p;
  table.entries_.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const BigInt den = one + 2 * BigInt(j) + 1;
    BigInt entry = (2 * scaled_one + den) / (2 * den);
    if (entry > one) entry = one;
    table.entries_.push_back(FixedValue::from_bits(std::move(entry), 1, out_frac));
  }
  return table;
}

std::size_t table_index(unsigned p, const FixedValue& d) {
  if (d.magnitude() >> d.frac_bits() != 1) {
    throw DomainError("table input " + d.to_decimal() + " outside [1, 2)");
  }
  const FixedValue wide = d.frac_bits() < p ? zero_extend(d, p) : d;
  const BigInt top = (wide.magnitude() >> (wide.frac_bits() - p)) - (BigInt(1) << p);
  return top.convert_to<std::size_t>();
}

const FixedValue& lookup(const ReciprocalTable& table, const FixedValue& d) {
  return table.entry(table_index(table.p(), d));
}

Rational verify_table(ReciprocalTable& table) {
  const unsigned p = table.p();
  const Rational step(BigInt(1), BigInt(1) << p);
  Rational worst = 0;
  for (std::size_t j = 0; j < table.size(); ++j) {
    const Rational k = table.entries_[j].to_rational();
    const Rational low = 1 + Rational(BigInt(j)) * step;
    for (const Rational& d : {low, Rational(low + step)}) {
      Rational err = 1 - d * k;
      if (err < 0) err = -err;
      if (err > worst) worst = err;
    }
  }
  table.max_seed_error_ = worst;
  return worst;
}

void write_table(std::ostream& out, const ReciprocalTable& table) {
  out << "# p=" << table.p() << '\n' << "# rule=" << kTableRuleTag << '\n';
  for (const auto& e : table.entries()) out << e.to_binary() << '\n';
}

ReciprocalTable read_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# p=", 0) != 0) {
    throw ArgumentError("table stream lacks the '# p=' header");
  }
  unsigned p = 0;
  try {
    p = static_cast<unsigned>(std::stoul(line.substr(4)));
  } catch (const std::exception&) {
    throw ArgumentError("bad table header '" + line + "'");
  }
  if (p < kMinTableBits || p > kMaxTableBits) {
    throw ArgumentError("table header p=" + std::to_string(p) + " out of range");
  }
  if (!std::getline(in, line) || line != "# rule=" + std::string(kTableRuleTag)) {
    throw ArgumentError("unsupported table rule line '" + line + "'");
  }

  ReciprocalTable table;
  table.p_ = p;
  const std::size_t count = std::size_t{1} << p;
  table.entries_.reserve(count);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const FixedValue v = parse_fixed(line + "b");
    if (v.frac_bits() != p + 1 || v.magnitude() > (BigInt(1) << (p + 1))) {
      throw ArgumentError("table entry '" + line + "' is not a 1." +
                          std::to_string(p + 1) + " value <= 1");
    }
    table.entries_.push_back(resize_int(v, 1));
  }
  if (table.entries_.size() != count) {
    throw ArgumentError("table has " + std::to_string(table.entries_.size()) +
                        " entries, expected " + std::to_string(count));
  }
  return table;
}

}  // namespace gsdiv

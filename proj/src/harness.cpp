#include "gsdiv/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gsdiv/recip_table.hpp"

namespace gsdiv::harness {
namespace {

using nlohmann::json;

// Top 62 significant bits of x and the shift that was dropped.
std::pair<double, int> top_bits(const BigInt& x) {
  const int msb = static_cast<int>(boost::multiprecision::msb(x));
  const int shift = std::max(0, msb - 61);
  return {(x >> shift).convert_to<double>(), shift};
}

std::string format_double(double value) {
  std::ostringstream s;
  s << std::setprecision(17) << value;
  return s.str();
}

std::string describe_error(const Rational& err) {
  if (err == 0) return "0 (exact)";
  std::ostringstream s;
  s << std::scientific << std::setprecision(6) << to_double(err) << " (2^"
    << std::fixed << std::setprecision(2) << log2_of(err) << ")";
  return s.str();
}

json fixed_json(const FixedValue& v) {
  return json{{"magnitude", v.magnitude().str()},
              {"int_bits", v.int_bits()},
              {"frac_bits", v.frac_bits()},
              {"binary", v.to_binary()},
              {"decimal", v.to_decimal()}};
}

json rational_json(const Rational& r) {
  return json{{"exact", r.str()}, {"approx", to_double(r)}};
}

std::string mult_bits_text(const std::optional<unsigned>& bits) {
  return bits ? std::to_string(*bits) : "exact";
}

json timing_json(const datapath::TimingParams& t) {
  return json{{"mult_latency", t.mult_latency},
              {"mult_initiation_interval", t.mult_initiation_interval},
              {"rom_latency", t.rom_latency},
              {"complement_latency", t.complement_latency},
              {"logic_block_latency", t.logic_block_latency}};
}

std::string timing_text(const datapath::TimingParams& t) {
  std::ostringstream s;
  s << "mult_latency=" << t.mult_latency << " mult_ii=" << t.mult_initiation_interval
    << " rom_latency=" << t.rom_latency << " complement_latency=" << t.complement_latency
    << " logic_latency=" << t.logic_block_latency;
  return s.str();
}

json units_json(const datapath::UnitInventory& u) {
  return json{{"multipliers", u.multipliers}, {"complements", u.complements},
              {"roms", u.roms},               {"logic_blocks", u.logic_blocks},
              {"counters", u.counters}};
}

json schedule_json(const datapath::DataflowGraph& dag, const datapath::ScheduleReport& r) {
  json nodes = json::array();
  for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
    const auto& t = r.nodes[i];
    nodes.push_back({{"id", dag.nodes[i].id},
                     {"unit", r.units[t.unit].name()},
                     {"ready", t.ready},
                     {"issue", t.issue},
                     {"complete", t.complete}});
  }
  json units = json::array();
  for (const auto& u : r.units) units.push_back(u.name());
  json logic = json::array();
  for (const auto& c : r.logic) {
    logic.push_back({{"cycle", c.cycle},
                     {"output", datapath::to_string(c.output)},
                     {"value", c.value},
                     {"select", datapath::to_string(c.state.select)},
                     {"counter", c.state.counter}});
  }
  return json{{"topology", datapath::to_string(r.topology)},
              {"iterations", r.iterations},
              {"timing", timing_json(r.timing)},
              {"units", units},
              {"nodes", nodes},
              {"logic", logic},
              {"total_cycles", r.total_cycles}};
}

json area_json(const datapath::AreaReport& a) {
  return json{{"topology", datapath::to_string(a.topology)},
              {"units", units_json(a.units)},
              {"relative_area", a.relative_area}};
}

// Parses a value argument, naming the flag on failure.
FixedValue parse_argument(const std::string& flag, const std::string& text,
                          unsigned inexact_bits) {
  try {
    return parse_fixed(text, inexact_bits);
  } catch (const ArgumentError& e) {
    throw ArgumentError(flag + ": " + e.what());
  }
}

}  // namespace

double to_double(const Rational& value) {
  const BigInt& num = numerator(value);
  if (num.is_zero()) return 0.0;
  const auto [n, ns] = top_bits(abs(num));
  const auto [d, ds] = top_bits(denominator(value));
  const double x = std::ldexp(n / d, ns - ds);
  return num < 0 ? -x : x;
}

double log2_of(const Rational& value) {
  const BigInt& num = numerator(value);
  if (num.is_zero()) return -std::numeric_limits<double>::infinity();
  const auto [n, ns] = top_bits(abs(num));
  const auto [d, ds] = top_bits(denominator(value));
  return std::log2(n) - std::log2(d) + ns - ds;
}

OutputFormat parse_format(const std::string& text) {
  if (text == "text") return OutputFormat::text;
  if (text == "json") return OutputFormat::json;
  if (text == "csv") return OutputFormat::csv;
  throw ArgumentError("unknown format '" + text + "'");
}

// ---------------------------------------------------------------------------
// table
// ---------------------------------------------------------------------------

int cmd_table(const TableOptions& options, std::ostream& out, std::ostream& err) {
  ReciprocalTable table;
  try {
    table = build_table(options.p);
  } catch (const ArgumentError& e) {
    err << "error: --p: " << e.what() << '\n';
    return kExitUsage;
  }
  if (options.verify && options.p > kMaxVerifyBits) {
    err << "error: --p: exhaustive verification supports p <= " << kMaxVerifyBits << '\n';
    return kExitUsage;
  }
  if (options.p == 1) {
    err << "warning: p=1 is degenerate: two entries, seed error up to 1/4\n";
  }

  if (options.out_path) {
    std::ofstream file(*options.out_path);
    if (!file) {
      err << "error: --out: cannot write '" << *options.out_path << "'\n";
      return kExitUsage;
    }
    write_table(file, table);
    if (!file) {
      err << "error: --out: write to '" << *options.out_path << "' failed\n";
      return kExitUsage;
    }
  } else {
    write_table(out, table);
  }

  if (options.verify) {
    const Rational worst = verify_table(table);
    const Rational bound(BigInt(1), BigInt(1) << options.p);
    const bool ok = worst <= bound;
    out << "entries = " << table.size() << '\n'
        << "max_seed_error = " << worst.str() << " = " << describe_error(worst) << '\n'
        << "bound 2^-" << options.p << ": " << (ok ? "ok" : "EXCEEDED") << '\n';
    if (!ok) {
      err << "error: seed error exceeds 2^-" << options.p << '\n';
      return kExitFailure;
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// divide
// ---------------------------------------------------------------------------

int cmd_divide(const DivideOptions& options, std::ostream& out, std::ostream& err) {
  DivisionProblem problem;
  GoldschmidtConfig config;
  std::optional<FixedValue> seed;
  try {
    if (options.format == OutputFormat::csv) throw ArgumentError("--format: divide supports text or json");
    problem.n = parse_argument("--n", options.n, options.input_frac_bits);
    problem.d = parse_argument("--d", options.d, options.input_frac_bits);
    if (options.seed) seed = parse_argument("--seed", *options.seed, options.input_frac_bits);
    config.p = options.p;
    config.iterations = options.iterations;
    config.mult_frac_bits = options.mult_bits;
    config.complement_mode = parse_complement_mode(options.complement);
    config.validate();
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  IterationTrace trace;
  try {
    if (problem.n.magnitude() >> problem.n.frac_bits() != 1) {
      throw DomainError("--n " + options.n + " outside [1, 2)");
    }
    if (problem.d.magnitude() >> problem.d.frac_bits() != 1) {
      throw DomainError("--d " + options.d + " outside [1, 2)");
    }
    if (seed) {
      trace = run_division_with_seed(problem, config, *seed);
    } else {
      trace = run_division(problem, config, build_table(config.p));
    }
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  const std::size_t steps = trace.steps();
  if (options.format == OutputFormat::json) {
    json k = json::array(), q = json::array(), r = json::array(), errors = json::array();
    for (std::size_t i = 0; i < steps; ++i) {
      k.push_back(fixed_json(trace.k[i]));
      q.push_back(fixed_json(trace.q[i]));
      r.push_back(fixed_json(trace.r[i]));
      errors.push_back(rational_json(relative_error(trace, i + 1)));
    }
    json doc{{"problem", {{"n", fixed_json(problem.n)}, {"d", fixed_json(problem.d)}}},
             {"config",
              {{"p", config.p},
               {"iterations", config.iterations},
               {"mult_frac_bits", mult_bits_text(config.mult_frac_bits)},
               {"complement_mode", to_string(config.complement_mode)},
               {"seed_override", seed.has_value()}}},
             {"k", k},
             {"q", q},
             {"r", r},
             {"relative_error", errors},
             {"exact_quotient", rational_json(trace.exact_quotient)}};
    out << doc.dump(2) << '\n';
    return kExitOk;
  }

  out << "N = " << problem.n.to_string() << '\n'
      << "D = " << problem.d.to_string() << '\n'
      << "Q = " << trace.exact_quotient.str() << " (" << format_double(to_double(trace.exact_quotient))
      << ")\n"
      << "p=" << config.p << " iterations=" << config.iterations
      << " mult_bits=" << mult_bits_text(config.mult_frac_bits)
      << " complement=" << to_string(config.complement_mode)
      << (seed ? " seed=forced" : " seed=table") << '\n';
  for (std::size_t i = 0; i < steps; ++i) {
    out << "i=" << i + 1 << "  K" << i + 1 << " = " << trace.k[i].to_string() << "  q" << i + 1
        << " = " << trace.q[i].to_string() << "  r" << i + 1 << " = " << trace.r[i].to_string()
        << "  rel_error = " << describe_error(relative_error(trace, i + 1)) << '\n';
  }
  out << "q" << steps << " = " << trace.quotient().to_string() << '\n'
      << "relative error = " << describe_error(relative_error(trace, steps)) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

std::vector<std::pair<FixedValue, FixedValue>> sweep_grid(unsigned p, unsigned grid) {
  const std::uint64_t span = std::uint64_t{1} << p;
  const auto value = [p, span](std::uint64_t index) {
    return FixedValue::from_bits(BigInt(span + index), 1, p);
  };

  std::vector<std::pair<FixedValue, FixedValue>> pairs;
  if (p <= kExhaustiveSweepBits) {
    pairs.reserve(span * span);
    for (std::uint64_t a = 0; a < span; ++a) {
      for (std::uint64_t b = 0; b < span; ++b) pairs.emplace_back(value(a), value(b));
    }
    return pairs;
  }

  const std::uint64_t strata = std::clamp<std::uint64_t>(grid, 1, span);
  const std::uint64_t width = span / strata;
  // Raw engine output keeps the sample identical across standard libraries.
  std::mt19937_64 rng(kSweepSeed);
  pairs.reserve(strata * strata);
  for (std::uint64_t sa = 0; sa < strata; ++sa) {
    for (std::uint64_t sb = 0; sb < strata; ++sb) {
      const std::uint64_t a = sa * width + rng() % width;
      const std::uint64_t b = sb * width + rng() % width;
      pairs.emplace_back(value(a), value(b));
    }
  }
  return pairs;
}

SweepResult run_sweep(const SweepOptions& options, std::vector<SweepRow>* rows) {
  SweepResult result;
  result.config.p = options.p;
  result.config.iterations = options.iterations;
  result.config.mult_frac_bits = options.mult_bits;
  result.config.complement_mode = parse_complement_mode(options.complement);
  result.config.validate();
  result.exhaustive = options.p <= kExhaustiveSweepBits;
  result.grid = options.grid;
  result.target_bits = options.target_bits.value_or(options.p << options.iterations);

  const ReciprocalTable table = build_table(options.p);
  const auto pairs = sweep_grid(options.p, options.grid);
  std::vector<SweepRow> computed(pairs.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    constexpr std::size_t kChunk = 64;
    for (;;) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= pairs.size()) return;
      const std::size_t end = std::min(pairs.size(), begin + kChunk);
      try {
        for (std::size_t i = begin; i < end; ++i) {
          const auto& [n, d] = pairs[i];
          const IterationTrace trace = run_division({n, d}, result.config, table);
          computed[i] = SweepRow{n, d, trace.quotient(),
                                 relative_error(trace, trace.steps()),
                                 1 - trace.r.back().to_rational()};
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, 64));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  const Rational target(BigInt(1), BigInt(1) << result.target_bits);
  double sum = 0.0;
  for (const auto& row : computed) {
    if (row.rel_error > result.worst_rel_error) result.worst_rel_error = row.rel_error;
    if (row.rel_error > target) ++result.exceeding_target;
    Rational dev = row.one_minus_r;
    if (dev < 0) dev = -dev;
    if (dev > result.max_abs_one_minus_r) result.max_abs_one_minus_r = dev;
    sum += to_double(row.rel_error);
  }
  result.pairs = computed.size();
  result.mean_rel_error = computed.empty() ? 0.0 : sum / static_cast<double>(computed.size());
  if (rows) *rows = std::move(computed);
  return result;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "n_bits,d_bits,n_dec,d_dec,q_final_dec,rel_error,one_minus_r\n";
  for (const auto& row : rows) {
    out << row.n.to_binary() << ',' << row.d.to_binary() << ',' << row.n.to_decimal() << ','
        << row.d.to_decimal() << ',' << row.q_final.to_decimal() << ','
        << format_double(to_double(row.rel_error)) << ','
        << dyadic_to_decimal(row.one_minus_r) << '\n';
  }
}

int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err) {
  SweepResult result;
  std::vector<SweepRow> rows;
  try {
    build_table(options.p);
    if (options.iterations > 8) throw ArgumentError("--iters: sweeps support at most 8 iterations");
    result = run_sweep(options, &rows);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  if (options.out_path) {
    std::ofstream file(*options.out_path);
    if (!file) {
      err << "error: --out: cannot write '" << *options.out_path << "'\n";
      return kExitUsage;
    }
    write_sweep_csv(file, rows);
  } else if (options.format == OutputFormat::csv) {
    write_sweep_csv(out, rows);
    return kExitOk;
  }

  if (options.format == OutputFormat::json) {
    json doc{{"config",
              {{"p", result.config.p},
               {"iterations", result.config.iterations},
               {"mult_frac_bits", mult_bits_text(result.config.mult_frac_bits)},
               {"complement_mode", to_string(result.config.complement_mode)},
               {"exhaustive", result.exhaustive},
               {"grid", result.grid},
               {"seed", kSweepSeed}}},
             {"pairs", result.pairs},
             {"worst_rel_error", rational_json(result.worst_rel_error)},
             {"mean_rel_error", result.mean_rel_error},
             {"target_bits", result.target_bits},
             {"exceeding_target", result.exceeding_target},
             {"max_abs_one_minus_r", rational_json(result.max_abs_one_minus_r)}};
    out << doc.dump(2) << '\n';
    return kExitOk;
  }

  out << "p=" << result.config.p << " iterations=" << result.config.iterations
      << " mult_bits=" << mult_bits_text(result.config.mult_frac_bits)
      << " complement=" << to_string(result.config.complement_mode) << '\n'
      << "grid = "
      << (result.exhaustive ? std::string("exhaustive")
                            : "stratified " + std::to_string(result.grid) + "x" +
                                  std::to_string(result.grid))
      << ", pairs = " << result.pairs << '\n'
      << "worst rel_error = " << describe_error(result.worst_rel_error) << '\n'
      << "mean rel_error = " << std::scientific << std::setprecision(6)
      << result.mean_rel_error << std::defaultfloat << '\n'
      << "pairs above 2^-" << result.target_bits << " = " << result.exceeding_target << '\n'
      << "max |1 - r_final| = " << describe_error(result.max_abs_one_minus_r) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate / compare
// ---------------------------------------------------------------------------

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
  datapath::DataflowGraph dag;
  datapath::DatapathSpec spec;
  datapath::ScheduleReport report;
  try {
    const auto topology = datapath::parse_topology(options.topology);
    dag = datapath::build_dag(options.iterations);
    spec = datapath::build_topology(topology, options.iterations, options.timing);
    if (options.counter_preset && topology == datapath::Topology::feedback) {
      spec.counter_preset = *options.counter_preset;
    }
    report = datapath::schedule(dag, spec);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  switch (options.format) {
    case OutputFormat::json: {
      json doc = schedule_json(dag, report);
      doc["area"] = area_json(datapath::area_report(spec));
      doc["counter_preset"] = spec.counter_preset;
      out << doc.dump(2) << '\n';
      break;
    }
    case OutputFormat::csv:
      datapath::write_cycle_table(out, dag, report, ',');
      break;
    case OutputFormat::text:
      out << "topology = " << datapath::to_string(report.topology)
          << ", iterations = " << report.iterations << '\n'
          << "timing: " << timing_text(report.timing) << '\n';
      if (spec.topology == datapath::Topology::feedback) {
        out << "counter preset = " << spec.counter_preset << " cycles\n";
      }
      datapath::write_cycle_table(out, dag, report, ' ');
      out << "total_cycles = " << report.total_cycles << '\n';
      break;
  }
  return kExitOk;
}

int cmd_compare(const CompareOptions& options, std::ostream& out, std::ostream& err) {
  datapath::ComparisonReport report;
  try {
    if (options.format == OutputFormat::csv) throw ArgumentError("--format: compare supports text or json");
    report = datapath::compare(options.iterations, options.timing);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  const bool failed = report.claim_holds && !*report.claim_holds;
  if (options.format == OutputFormat::json) {
    const auto& s = report.savings;
    json doc{{"iterations", report.iterations},
             {"timing", timing_json(report.timing)},
             {"original_area", area_json(report.original_area)},
             {"feedback_area", area_json(report.feedback_area)},
             {"savings",
              {{"multipliers", s.multipliers},
               {"complements", s.complements},
               {"roms", s.roms},
               {"logic_blocks", s.logic_blocks},
               {"counters", s.counters},
               {"relative_area", s.relative_area}}},
             {"original_total_cycles", report.original.total_cycles},
             {"feedback_total_cycles", report.feedback.total_cycles},
             {"cycle_delta", report.cycle_delta},
             {"cycle_delta_is_logic_latency", report.cycle_delta_is_logic_latency},
             {"external_reference_cycles", datapath::kExternalReferenceCycles},
             {"external_reference_modelled", false},
             {"claim_holds", report.claim_holds ? json(*report.claim_holds) : json(nullptr)}};
    out << doc.dump(2) << '\n';
  } else {
    const auto& o = report.original_area.units;
    const auto& f = report.feedback_area.units;
    const auto& s = report.savings;
    const auto row = [&out](const std::string& name, auto a, auto b, auto delta) {
      out << std::left << std::setw(16) << name << std::setw(10) << a << std::setw(10) << b
          << delta << '\n';
    };
    out << "iterations = " << report.iterations << '\n'
        << "timing: " << timing_text(report.timing) << '\n';
    row("", "original", "feedback", "saving");
    row("multipliers", o.multipliers, f.multipliers, s.multipliers);
    row("complements", o.complements, f.complements, s.complements);
    row("roms", o.roms, f.roms, s.roms);
    row("logic blocks", o.logic_blocks, f.logic_blocks, s.logic_blocks);
    row("counters", o.counters, f.counters, s.counters);
    row("relative area", report.original_area.relative_area,
        report.feedback_area.relative_area, s.relative_area);
    row("total cycles", report.original.total_cycles, report.feedback.total_cycles,
        "");
    out << "cycle delta = " << report.cycle_delta << " (logic-block latency "
        << report.timing.logic_block_latency << ": "
        << (report.cycle_delta_is_logic_latency ? "equal" : "different") << ")\n"
        << "absolute total of " << datapath::kExternalReferenceCycles
        << " cycles for the external overlapped pipeline: not modelled\n";
    if (report.claim_holds) {
      out << "claim check (3 multipliers and 2 complement blocks saved for 1 cycle): "
          << (*report.claim_holds ? "PASS" : "FAIL") << '\n';
    } else {
      out << "claim check: not applicable at " << report.iterations << " iterations\n";
    }
  }
  if (failed) {
    err << "error: hardware-savings claim not reproduced under this timing\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace gsdiv::harness

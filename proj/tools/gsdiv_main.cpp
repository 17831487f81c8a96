// gsdiv: Goldschmidt division tables, traces, sweeps and datapath reports.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gsdiv/harness.hpp"

namespace {

using gsdiv::harness::OutputFormat;

// "exact" or a fraction-bit count.
std::optional<unsigned> parse_mult_bits(const std::string& text) {
  if (text.empty() || text == "exact") return std::nullopt;
  std::size_t used = 0;
  const unsigned long bits = std::stoul(text, &used);
  if (used != text.size()) throw gsdiv::ArgumentError("--mult-bits: bad value '" + text + "'");
  return static_cast<unsigned>(bits);
}

void add_timing_flags(CLI::App* cmd, gsdiv::datapath::TimingParams& t) {
  cmd->add_option("--mult-latency", t.mult_latency, "Multiplier latency in cycles");
  cmd->add_option("--mult-ii", t.mult_initiation_interval, "Multiplier initiation interval");
  cmd->add_option("--rom-latency", t.rom_latency, "Reciprocal ROM latency");
  cmd->add_option("--complement-latency", t.complement_latency, "Complement block latency");
  cmd->add_option("--logic-latency", t.logic_block_latency, "Logic block register latency");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goldschmidt division with a reciprocal ROM seed and datapath models"};
  app.require_subcommand(1);

  std::string format = "text";
  std::string mult_bits;

  gsdiv::harness::TableOptions table;
  std::string table_out;
  auto* table_cmd = app.add_subcommand("table", "Build (and verify) the reciprocal ROM");
  table_cmd->add_option("--p", table.p, "Index bits")->required();
  table_cmd->add_option("--out", table_out, "Table file (default: standard output)");
  table_cmd->add_flag("--verify", table.verify, "Exhaustively verify the seed error");

  gsdiv::harness::DivideOptions divide;
  auto* divide_cmd = app.add_subcommand("divide", "Run one division and print its trace");
  divide_cmd->add_option("--n", divide.n, "Numerator in [1,2), decimal or binary ('1.01b')")->required();
  divide_cmd->add_option("--d", divide.d, "Denominator in [1,2)")->required();
  divide_cmd->add_option("--p", divide.p, "Table index bits");
  divide_cmd->add_option("--iters", divide.iterations, "Step-2 rounds (3 gives q4)");
  divide_cmd->add_option("--mult-bits", mult_bits, "Multiplier fraction bits, or 'exact'");
  divide_cmd->add_option("--complement", divide.complement, "exact | ones");
  divide_cmd->add_option("--seed", divide.seed, "Force K1 instead of the table entry");
  divide_cmd->add_option("--in-bits", divide.input_frac_bits,
                         "Fraction bits for decimals without an exact binary form");
  divide_cmd->add_option("--format", format, "text | json");

  gsdiv::harness::SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Accuracy sweep against the exact quotient");
  sweep_cmd->add_option("--p", sweep.p, "Table index bits");
  sweep_cmd->add_option("--iters", sweep.iterations, "Step-2 rounds");
  sweep_cmd->add_option("--mult-bits", mult_bits, "Multiplier fraction bits, or 'exact'");
  sweep_cmd->add_option("--complement", sweep.complement, "exact | ones");
  sweep_cmd->add_option("--grid", sweep.grid, "Strata per axis when p > 8");
  sweep_cmd->add_option("--target-bits", sweep.target_bits, "Count rows above 2^-target");
  sweep_cmd->add_option("--threads", sweep.threads, "Worker threads (0 = all cores)");
  sweep_cmd->add_option("--out", sweep.out_path, "CSV file with one row per pair");
  sweep_cmd->add_option("--format", format, "text | json | csv");

  gsdiv::harness::SimulateOptions simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Cycle table of one datapath");
  simulate_cmd->add_option("--topology", simulate.topology, "original | feedback");
  simulate_cmd->add_option("--iters", simulate.iterations, "Step-2 rounds");
  simulate_cmd->add_option("--counter-preset", simulate.counter_preset,
                           "Logic-block counter preset in cycles");
  simulate_cmd->add_option("--format", format, "text | json | csv");
  add_timing_flags(simulate_cmd, simulate.timing);

  gsdiv::harness::CompareOptions compare;
  auto* compare_cmd = app.add_subcommand("compare", "Original vs feedback datapath");
  compare_cmd->add_option("--iters", compare.iterations, "Step-2 rounds");
  compare_cmd->add_option("--format", format, "text | json");
  add_timing_flags(compare_cmd, compare.timing);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gsdiv::harness::kExitUsage;
  }

  OutputFormat fmt;
  try {
    fmt = gsdiv::harness::parse_format(format);
    divide.mult_bits = parse_mult_bits(mult_bits);
    sweep.mult_bits = divide.mult_bits;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gsdiv::harness::kExitUsage;
  }

  if (*table_cmd) {
    if (!table_out.empty()) table.out_path = table_out;
    return gsdiv::harness::cmd_table(table, std::cout, std::cerr);
  }
  if (*divide_cmd) {
    divide.format = fmt;
    return gsdiv::harness::cmd_divide(divide, std::cout, std::cerr);
  }
  if (*sweep_cmd) {
    sweep.format = fmt;
    return gsdiv::harness::cmd_sweep(sweep, std::cout, std::cerr);
  }
  if (*simulate_cmd) {
    simulate.format = fmt;
    return gsdiv::harness::cmd_simulate(simulate, std::cout, std::cerr);
  }
  compare.format = fmt;
  return gsdiv::harness::cmd_compare(compare, std::cout, std::cerr);
}

#pragma once

// Command implementations behind the gsdiv CLI. Each command writes its
// report to `out`, diagnostics to `err`, and returns the process exit code.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gsdiv/datapath.hpp"
#include "gsdiv/fixed_point.hpp"
#include "gsdiv/goldschmidt.hpp"

namespace gsdiv::harness {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitFailure = 2 };

enum class OutputFormat { text, json, csv };
OutputFormat parse_format(const std::string& text);

/// Seed of the stratified sampler used for sweeps with p > 8.
inline constexpr std::uint64_t kSweepSeed = 0x5eed'601d'5c41'd7ULL;
/// Sweeps are exhaustive up to this table width.
inline constexpr unsigned kExhaustiveSweepBits = 8;
inline constexpr unsigned kMaxVerifyBits = 16;

struct TableOptions {
  unsigned p = 8;
  std::optional<std::string> out_path;
  bool verify = false;
};

struct DivideOptions {
  std::string n;
  std::string d;
  unsigned p = 8;
  unsigned iterations = 3;
  std::optional<unsigned> mult_bits;
  std::string complement = "exact";
  std::optional<std::string> seed;
  /// Fraction bits for decimal inputs without an exact binary form.
  unsigned input_frac_bits = 52;
  OutputFormat format = OutputFormat::text;
};

struct SweepOptions {
  unsigned p = 4;
  unsigned iterations = 3;
  std::optional<unsigned> mult_bits;
  std::string complement = "exact";
  /// Strata per axis when sampling (p > 8).
  unsigned grid = 64;
  /// Rows with rel_error > 2^-target_bits are counted; defaults to p * 2^iterations.
  std::optional<unsigned> target_bits;
  std::optional<std::string> out_path;
  OutputFormat format = OutputFormat::text;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct SweepRow {
  FixedValue n;
  FixedValue d;
  FixedValue q_final;
  Rational rel_error;
  Rational one_minus_r;
};

struct SweepResult {
  GoldschmidtConfig config;
  bool exhaustive = true;
  unsigned grid = 0;
  unsigned target_bits = 0;
  std::size_t pairs = 0;
  Rational worst_rel_error;
  double mean_rel_error = 0.0;
  std::size_t exceeding_target = 0;
  Rational max_abs_one_minus_r;
};

/// Deterministic (N, D) grid: every p-bit pair up to kExhaustiveSweepBits,
/// otherwise grid x grid strata sampled with kSweepSeed.
std::vector<std::pair<FixedValue, FixedValue>> sweep_grid(unsigned p, unsigned grid);

/// Runs the sweep; rows come back in grid order when `rows` is non-null.
SweepResult run_sweep(const SweepOptions& options, std::vector<SweepRow>* rows = nullptr);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct SimulateOptions {
  std::string topology = "original";
  unsigned iterations = 3;
  datapath::TimingParams timing;
  std::optional<unsigned> counter_preset;
  OutputFormat format = OutputFormat::text;
};

struct CompareOptions {
  unsigned iterations = 3;
  datapath::TimingParams timing;
  OutputFormat format = OutputFormat::text;
};

int cmd_table(const TableOptions& options, std::ostream& out, std::ostream& err);
int cmd_divide(const DivideOptions& options, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareOptions& options, std::ostream& out, std::ostream& err);

/// log2 of a positive rational, -inf for zero.
double log2_of(const Rational& value);
double to_double(const Rational& value);

}  // namespace gsdiv::harness

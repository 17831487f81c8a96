#pragma once

// Structural, cycle-accurate model of two Goldschmidt datapaths.
//
// original: every multiply and complement of the unrolled iteration has its
//           own unit (2m+1 multipliers, m complement blocks).
// feedback: MULT1/MULT2 produce q1/r1; one complement block and one
//           multiplier pair X (r path) and Y (q path) are reused for every
//           later round. A logic block picks r1 on entry and the fed-back r
//           afterwards; a counter returns it to r1 after a preset.
//
// Multipliers are atomic pipelined units with a fixed latency and
// initiation interval. The logic block registers r1 as it enters the loop;
// fed-back values pass its priority mux without an extra cycle.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gsdiv/fixed_point.hpp"
#include "gsdiv/goldschmidt.hpp"
#include "gsdiv/recip_table.hpp"

namespace gsdiv::datapath {

struct ScheduleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Dataflow graph
// ---------------------------------------------------------------------------

enum class NodeKind { rom_lookup, multiply, complement };
enum class ValuePath { k, q, r };
enum class ExternalInput { none, numerator, denominator };

struct DagNode {
  /// Name of the value the node produces: "K1", "q1", "r1", "K2", ...
  std::string id;
  NodeKind kind;
  ValuePath path;
  /// Subscript of the produced value (K1 -> 1).
  unsigned index;
  /// Operand producers, in operand order (after any external input).
  std::vector<std::size_t> preds;
  ExternalInput external = ExternalInput::none;
};

struct DataflowGraph {
  unsigned iterations = 0;
  /// Topological order; position is the tie-break priority.
  std::vector<DagNode> nodes;

  std::size_t count(NodeKind kind) const;
  std::size_t sink() const;
  std::size_t find(std::string_view id) const;
};

/// Throws ArgumentError when iterations < 1.
DataflowGraph build_dag(unsigned iterations);

// ---------------------------------------------------------------------------
// Topologies and timing
// ---------------------------------------------------------------------------

enum class Topology { original, feedback };

std::string_view to_string(Topology topology);
Topology parse_topology(std::string_view text);

struct TimingParams {
  unsigned mult_latency = 4;
  unsigned mult_initiation_interval = 1;
  unsigned rom_latency = 1;
  unsigned complement_latency = 0;
  unsigned logic_block_latency = 1;

  /// Throws ArgumentError when mult_latency or the initiation interval is 0.
  void validate() const;
};

struct UnitInventory {
  unsigned roms = 1;
  unsigned multipliers = 0;
  unsigned complements = 0;
  unsigned logic_blocks = 0;
  unsigned counters = 0;

  friend bool operator==(const UnitInventory&, const UnitInventory&) = default;
};

struct DatapathSpec {
  Topology topology = Topology::original;
  unsigned iterations = 0;
  UnitInventory units;
  TimingParams timing;
  /// Logic-block counter preset in cycles (feedback only).
  unsigned counter_preset = 0;
};

/// (iterations - 1) * mult_latency: the fed-back rounds after r1 enters.
unsigned default_counter_preset(unsigned iterations, const TimingParams& timing);

DatapathSpec build_topology(Topology kind, unsigned iterations,
                            const TimingParams& timing = {});

// ---------------------------------------------------------------------------
// Logic block
// ---------------------------------------------------------------------------

enum class LogicSelect { r1_path, feedback_path, none };
enum class LogicOutput { none, r1, feedback };

std::string_view to_string(LogicSelect select);
std::string_view to_string(LogicOutput output);

struct LogicBlockState {
  LogicSelect select = LogicSelect::r1_path;
  unsigned counter = 0;
  unsigned preset = 0;

  friend bool operator==(const LogicBlockState&, const LogicBlockState&) = default;
};

struct LogicBlockStep {
  LogicBlockState state;
  LogicOutput output;
};

/// One clock of the logic block.
///
///   r1 fb | out
///    1  0 | r1        (dropped while a feedback window is open)
///    0  1 | feedback
///    1  1 | feedback
///    0  0 | none
///
/// Passing r1 opens a feedback window; each later clock counts up and the
/// select returns to r1 once the counter reaches the preset.
LogicBlockStep logic_block_step(const LogicBlockState& state, bool r1_valid,
                                bool feedback_valid);

// ---------------------------------------------------------------------------
// Scheduling
// ---------------------------------------------------------------------------

enum class UnitType { rom, multiplier, complement, logic_block, counter };

struct UnitId {
  UnitType type;
  unsigned index;  // 0-based within the type

  std::string name() const;
  friend bool operator==(const UnitId&, const UnitId&) = default;
};

struct NodeTiming {
  std::size_t unit;  // index into ScheduleReport::units
  unsigned ready;
  unsigned issue;
  unsigned complete;
};

struct Occupancy {
  std::size_t node;
  unsigned begin;  // issue cycle
  unsigned end;    // exclusive
};

struct LogicCycle {
  unsigned cycle;
  LogicOutput output;
  std::string value;  // id of the r value passed, empty for none
  LogicBlockState state;
};

struct ScheduleReport {
  Topology topology = Topology::original;
  unsigned iterations = 0;
  TimingParams timing;
  /// Canonical column order: rom, mult1.., compl1.., logic, counter.
  std::vector<UnitId> units;
  std::vector<NodeTiming> nodes;  // parallel to DataflowGraph::nodes
  std::vector<std::vector<Occupancy>> occupancy;  // parallel to units
  /// One entry per clock for the feedback topology; empty otherwise.
  std::vector<LogicCycle> logic;
  unsigned total_cycles = 0;
};

/// Extra cycles on the edge pred -> node (logic-block register).
unsigned routing_latency(const DataflowGraph& dag, const DatapathSpec& spec,
                         std::size_t pred, std::size_t node);

/// Cycle-driven list scheduling with fixed unit binding. Throws
/// ScheduleError when a required unit type has no instances or the graph
/// and spec disagree on the iteration count.
ScheduleReport schedule(const DataflowGraph& dag, const DatapathSpec& spec);

/// Resource and dependency violations; empty for a legal schedule.
std::vector<std::string> check_schedule(const DataflowGraph& dag,
                                        const DatapathSpec& spec,
                                        const ScheduleReport& report);

/// Rows are cycles, columns are units in canonical order; cells hold the
/// node ids occupying that unit. sep = ',' gives CSV.
void write_cycle_table(std::ostream& out, const DataflowGraph& dag,
                       const ScheduleReport& report, char sep = ' ');

// ---------------------------------------------------------------------------
// Area and comparison
// ---------------------------------------------------------------------------

/// Model inputs, not measurements.
struct AreaWeights {
  long multiplier = 100;
  long complement = 2;
  long rom = 20;
  long logic_block = 1;
  long counter = 1;
};

struct AreaReport {
  Topology topology = Topology::original;
  UnitInventory units;
  long relative_area = 0;
};

/// baseline - other, per unit type: positive numbers are savings.
struct AreaDelta {
  long multipliers = 0;
  long complements = 0;
  long roms = 0;
  long logic_blocks = 0;
  long counters = 0;
  long relative_area = 0;

  friend bool operator==(const AreaDelta&, const AreaDelta&) = default;
};

AreaReport area_report(const DatapathSpec& spec, const AreaWeights& weights = {});
AreaDelta area_delta(const AreaReport& baseline, const AreaReport& other);

/// Absolute total reported for the overlapped pipeline of the external
/// reference design. Not modelled here.
inline constexpr unsigned kExternalReferenceCycles = 9;

struct ComparisonReport {
  unsigned iterations = 0;
  TimingParams timing;
  ScheduleReport original;
  ScheduleReport feedback;
  AreaReport original_area;
  AreaReport feedback_area;
  AreaDelta savings;  // original - feedback
  long cycle_delta = 0;  // feedback - original
  bool cycle_delta_is_logic_latency = false;
  /// Set only at iterations == 3: savings of 3 multipliers and 2
  /// complement blocks for exactly one extra cycle.
  std::optional<bool> claim_holds;
};

ComparisonReport compare(unsigned iterations, const TimingParams& timing = {});

// ---------------------------------------------------------------------------
// Value replay
// ---------------------------------------------------------------------------

struct ReplayResult {
  std::vector<FixedValue> values;  // parallel to DataflowGraph::nodes
  FixedValue quotient;
};

/// Evaluates every node in schedule issue order with real fixed-point
/// arithmetic, checking that each operand has arrived by the issue cycle.
/// Throws ScheduleError on an operand that is not yet available.
ReplayResult replay(const DataflowGraph& dag, const DatapathSpec& spec,
                    const ScheduleReport& report, const DivisionProblem& problem,
                    const GoldschmidtConfig& config, const ReciprocalTable& table);

}  // namespace gsdiv::datapath

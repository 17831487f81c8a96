#include "gsdiv/datapath.hpp"

#include <string>

namespace gsdiv::datapath {

std::size_t DataflowGraph::count(NodeKind kind) const {
  std::size_t n = 0;
  for (const auto& node : nodes) n += node.kind == kind ? 1 : 0;
  return n;
}

std::size_t DataflowGraph::sink() const {
  std::vector<bool> has_successor(nodes.size(), false);
  for (const auto& node : nodes) {
    for (auto p : node.preds) has_successor[p] = true;
  }
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (has_successor[i]) continue;
    if (found) throw ScheduleError("dataflow graph has more than one sink");
    found = i;
  }
  if (!found) throw ScheduleError("dataflow graph has no sink");
  return *found;
}

std::size_t DataflowGraph::find(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return i;
  }
  throw ArgumentError("no node '" + std::string(id) + "' in dataflow graph");
}

DataflowGraph build_dag(unsigned iterations) {
  if (iterations < 1) throw ArgumentError("dataflow graph needs at least one iteration");

  DataflowGraph dag;
  dag.iterations = iterations;
  auto add = [&](std::string prefix, unsigned index, NodeKind kind, ValuePath path,
                 std::vector<std::size_t> preds, ExternalInput external) {
    dag.nodes.push_back(DagNode{prefix + std::to_string(index), kind, path, index,
                                std::move(preds), external});
    return dag.nodes.size() - 1;
  };

  const auto rom = add("K", 1, NodeKind::rom_lookup, ValuePath::k, {},
                       ExternalInput::denominator);
  auto q = add("q", 1, NodeKind::multiply, ValuePath::q, {rom}, ExternalInput::numerator);
  auto r = add("r", 1, NodeKind::multiply, ValuePath::r, {rom}, ExternalInput::denominator);
  for (unsigned i = 2; i <= iterations + 1; ++i) {
    const auto k = add("K", i, NodeKind::complement, ValuePath::k, {r}, ExternalInput::none);
    q = add("q", i, NodeKind::multiply, ValuePath::q, {q, k}, ExternalInput::none);
    // The last r would only feed a complement that is never used.
    if (i <= iterations) {
      r = add("r", i, NodeKind::multiply, ValuePath::r, {r, k}, ExternalInput::none);
    }
  }
  return dag;
}

std::string_view to_string(Topology topology) {
  return topology == Topology::original ? "original" : "feedback";
}

Topology parse_topology(std::string_view text) {
  if (text == "original") return Topology::original;
  if (text == "feedback") return Topology::feedback;
  throw ArgumentError("unknown topology '" + std::string(text) + "'");
}

void TimingParams::validate() const {
  if (mult_latency < 1) throw ArgumentError("multiplier latency must be at least 1");
  if (mult_initiation_interval < 1) {
    throw ArgumentError("multiplier initiation interval must be at least 1");
  }
}

unsigned default_counter_preset(unsigned iterations, const TimingParams& timing) {
  return iterations > 0 ? (iterations - 1) * timing.mult_latency : 0;
}

DatapathSpec build_topology(Topology kind, unsigned iterations, const TimingParams& timing) {
  if (iterations < 1) throw ArgumentError("datapath needs at least one iteration");
  timing.validate();

  DatapathSpec spec;
  spec.topology = kind;
  spec.iterations = iterations;
  spec.timing = timing;
  if (kind == Topology::original) {
    spec.units = UnitInventory{1, 2 * iterations + 1, iterations, 0, 0};
  } else {
    // MULT1, MULT2, X, Y
    spec.units = UnitInventory{1, 4, 1, 1, 1};
    spec.counter_preset = default_counter_preset(iterations, timing);
  }
  return spec;
}

std::string_view to_string(LogicSelect select) {
  switch (select) {
    case LogicSelect::r1_path: return "r1_path";
    case LogicSelect::feedback_path: return "feedback_path";
    case LogicSelect::none: return "none";
  }
  return "?";
}

std::string_view to_string(LogicOutput output) {
  switch (output) {
    case LogicOutput::none: return "none";
    case LogicOutput::r1: return "r1";
    case LogicOutput::feedback: return "feedback";
  }
  return "?";
}

LogicBlockStep logic_block_step(const LogicBlockState& state, bool r1_valid,
                                bool feedback_valid) {
  LogicBlockStep step{state, LogicOutput::none};
  const bool window_open = state.select == LogicSelect::feedback_path;

  if (feedback_valid) {
    step.output = LogicOutput::feedback;
  } else if (r1_valid && !window_open) {
    step.output = LogicOutput::r1;
  }

  if (window_open) {
    ++step.state.counter;
    if (step.state.counter >= state.preset) {
      step.state.select = LogicSelect::r1_path;
      step.state.counter = 0;
    }
  } else if (step.output == LogicOutput::r1 && state.preset > 0) {
    step.state.select = LogicSelect::feedback_path;
    step.state.counter = 0;
  }
  return step;
}

std::string UnitId::name() const {
  switch (type) {
    case UnitType::rom: return "rom";
    case UnitType::multiplier: return "mult" + std::to_string(index + 1);
    case UnitType::complement: return "compl" + std::to_string(index + 1);
    case UnitType::logic_block: return "logic";
    case UnitType::counter: return "counter";
  }
  return "?";
}

AreaReport area_report(const DatapathSpec& spec, const AreaWeights& weights) {
  AreaReport report;
  report.topology = spec.topology;
  report.units = spec.units;
  const auto& u = spec.units;
  report.relative_area = weights.multiplier * u.multipliers +
                         weights.complement * u.complements + weights.rom * u.roms +
                         weights.logic_block * u.logic_blocks + weights.counter * u.counters;
  return report;
}

AreaDelta area_delta(const AreaReport& baseline, const AreaReport& other) {
  const auto diff = [](unsigned a, unsigned b) {
    return static_cast<long>(a) - static_cast<long>(b);
  };
  const auto& a = baseline.units;
  const auto& b = other.units;
  return AreaDelta{diff(a.multipliers, b.multipliers),
                   diff(a.complements, b.complements),
                   diff(a.roms, b.roms),
                   diff(a.logic_blocks, b.logic_blocks),
                   diff(a.counters, b.counters),
                   baseline.relative_area - other.relative_area};
}

ComparisonReport compare(unsigned iterations, const TimingParams& timing) {
  ComparisonReport report;
  report.iterations = iterations;
  report.timing = timing;

  const DataflowGraph dag = build_dag(iterations);
  const DatapathSpec original = build_topology(Topology::original, iterations, timing);
  const DatapathSpec feedback = build_topology(Topology::feedback, iterations, timing);

  report.original = schedule(dag, original);
  report.feedback = schedule(dag, feedback);
  report.original_area = area_report(original);
  report.feedback_area = area_report(feedback);
  report.savings = area_delta(report.original_area, report.feedback_area);
  report.cycle_delta = static_cast<long>(report.feedback.total_cycles) -
                       static_cast<long>(report.original.total_cycles);
  report.cycle_delta_is_logic_latency =
      report.cycle_delta == static_cast<long>(timing.logic_block_latency);
  if (iterations == 3) {
    report.claim_holds = report.savings.multipliers == 3 &&
                         report.savings.complements == 2 && report.cycle_delta == 1;
  }
  return report;
}

}  // namespace gsdiv::datapath

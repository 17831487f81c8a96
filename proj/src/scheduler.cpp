#include <algorithm>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "gsdiv/datapath.hpp"

namespace gsdiv::datapath {
namespace {

std::vector<UnitId> canonical_units(const UnitInventory& inv) {
  std::vector<UnitId> units;
  for (unsigned i = 0; i < inv.roms; ++i) units.push_back({UnitType::rom, i});
  for (unsigned i = 0; i < inv.multipliers; ++i) units.push_back({UnitType::multiplier, i});
  for (unsigned i = 0; i < inv.complements; ++i) units.push_back({UnitType::complement, i});
  for (unsigned i = 0; i < inv.logic_blocks; ++i) units.push_back({UnitType::logic_block, i});
  for (unsigned i = 0; i < inv.counters; ++i) units.push_back({UnitType::counter, i});
  return units;
}

UnitType unit_type_for(NodeKind kind) {
  switch (kind) {
    case NodeKind::rom_lookup: return UnitType::rom;
    case NodeKind::multiply: return UnitType::multiplier;
    case NodeKind::complement: return UnitType::complement;
  }
  return UnitType::rom;
}

std::string_view type_name(UnitType type) {
  switch (type) {
    case UnitType::rom: return "rom";
    case UnitType::multiplier: return "multiplier";
    case UnitType::complement: return "complement";
    case UnitType::logic_block: return "logic block";
    case UnitType::counter: return "counter";
  }
  return "?";
}

unsigned latency_of(UnitType type, const TimingParams& t) {
  switch (type) {
    case UnitType::rom: return t.rom_latency;
    case UnitType::multiplier: return t.mult_latency;
    case UnitType::complement: return t.complement_latency;
    default: return 0;
  }
}

unsigned interval_of(UnitType type, const TimingParams& t) {
  return type == UnitType::multiplier ? t.mult_initiation_interval : 1;
}

// Fixed binding of each node to a physical unit.
//   original: the k-th multiply owns mult(k+1), round i owns compl(i).
//   feedback: q1 -> MULT1, r1 -> MULT2, later r -> X, later q -> Y, and
//             every complement shares compl1.
std::vector<std::size_t> bind_units(const DataflowGraph& dag, const DatapathSpec& spec,
                                    const std::vector<UnitId>& units) {
  std::map<UnitType, std::size_t> first;
  std::map<UnitType, unsigned> count;
  for (std::size_t u = 0; u < units.size(); ++u) {
    first.try_emplace(units[u].type, u);
    ++count[units[u].type];
  }

  std::vector<std::size_t> binding(dag.nodes.size());
  unsigned multiply_seen = 0;
  for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
    const DagNode& node = dag.nodes[i];
    const UnitType type = unit_type_for(node.kind);
    if (count[type] == 0) {
      throw ScheduleError("structurally infeasible: node " + node.id + " needs a " +
                          std::string(type_name(type)) + " but the datapath has none");
    }
    unsigned preferred = 0;
    if (node.kind == NodeKind::multiply) {
      if (spec.topology == Topology::original) {
        preferred = multiply_seen;
      } else if (node.index == 1) {
        preferred = node.path == ValuePath::q ? 0 : 1;
      } else {
        preferred = node.path == ValuePath::r ? 2 : 3;
      }
      ++multiply_seen;
    } else if (node.kind == NodeKind::complement && spec.topology == Topology::original) {
      preferred = node.index - 2;
    }
    binding[i] = first[type] + preferred % count[type];
  }
  return binding;
}

std::optional<std::size_t> unit_of_type(const std::vector<UnitId>& units, UnitType type) {
  for (std::size_t u = 0; u < units.size(); ++u) {
    if (units[u].type == type) return u;
  }
  return std::nullopt;
}

// Drives the logic-block FSM with the r arrivals of a feedback schedule and
// checks that it routes each value the way the datapath expects.
void trace_logic_block(const DataflowGraph& dag, const DatapathSpec& spec,
                       ScheduleReport& report) {
  std::map<unsigned, std::size_t> r1_arrivals;
  std::map<unsigned, std::size_t> feedback_arrivals;
  for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
    const DagNode& node = dag.nodes[i];
    if (node.kind != NodeKind::multiply || node.path != ValuePath::r) continue;
    auto& arrivals = node.index == 1 ? r1_arrivals : feedback_arrivals;
    arrivals[report.nodes[i].complete] = i;
  }

  const auto logic_unit = unit_of_type(report.units, UnitType::logic_block);
  const unsigned hold = std::max(1u, spec.timing.logic_block_latency);
  LogicBlockState state{LogicSelect::none, 0, spec.counter_preset};
  for (unsigned cycle = 0; cycle < report.total_cycles; ++cycle) {
    const auto r1 = r1_arrivals.find(cycle);
    const auto fb = feedback_arrivals.find(cycle);
    const bool r1_valid = r1 != r1_arrivals.end();
    const bool fb_valid = fb != feedback_arrivals.end();
    const LogicBlockStep step = logic_block_step(state, r1_valid, fb_valid);

    LogicCycle entry{cycle, step.output, "", step.state};
    std::optional<std::size_t> passed;
    if (step.output == LogicOutput::feedback) passed = fb->second;
    if (step.output == LogicOutput::r1) passed = r1->second;
    if (r1_valid && step.output != LogicOutput::r1) {
      throw ScheduleError("logic block dropped r1 at cycle " + std::to_string(cycle));
    }
    if (passed) {
      entry.value = dag.nodes[*passed].id;
      if (logic_unit) report.occupancy[*logic_unit].push_back({*passed, cycle, cycle + hold});
    }
    report.logic.push_back(std::move(entry));
    state = step.state;
  }
}

}  // namespace

unsigned routing_latency(const DataflowGraph& dag, const DatapathSpec& spec,
                         std::size_t pred, std::size_t node) {
  if (spec.topology != Topology::feedback) return 0;
  const DagNode& from = dag.nodes.at(pred);
  const DagNode& to = dag.nodes.at(node);
  const bool enters_loop = from.path == ValuePath::r && from.index == 1 &&
                           to.kind == NodeKind::complement;
  return enters_loop ? spec.timing.logic_block_latency : 0;
}

ScheduleReport schedule(const DataflowGraph& dag, const DatapathSpec& spec) {
  if (dag.iterations != spec.iterations) {
    throw ScheduleError("dataflow graph has " + std::to_string(dag.iterations) +
                        " iterations but the datapath was built for " +
                        std::to_string(spec.iterations));
  }
  spec.timing.validate();

  ScheduleReport report;
  report.topology = spec.topology;
  report.iterations = spec.iterations;
  report.timing = spec.timing;
  report.units = canonical_units(spec.units);
  report.occupancy.resize(report.units.size());
  report.nodes.resize(dag.nodes.size());

  const auto binding = bind_units(dag, spec, report.units);
  std::vector<bool> issued(dag.nodes.size(), false);
  std::vector<std::optional<unsigned>> last_issue(report.units.size());
  std::size_t remaining = dag.nodes.size();

  // Every node can always issue within a bounded window, so this limit is
  // only reached by a scheduler bug.
  const unsigned horizon =
      static_cast<unsigned>(dag.nodes.size()) *
      (spec.timing.mult_latency + spec.timing.mult_initiation_interval +
       spec.timing.rom_latency + spec.timing.complement_latency +
       spec.timing.logic_block_latency + 1) + 1;

  for (unsigned cycle = 0; remaining > 0; ++cycle) {
    if (cycle > horizon) throw ScheduleError("scheduler failed to converge");
    for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
      if (issued[i]) continue;
      const DagNode& node = dag.nodes[i];
      unsigned ready = 0;
      bool operands_known = true;
      for (auto p : node.preds) {
        if (!issued[p]) {
          operands_known = false;
          break;
        }
        ready = std::max(ready, report.nodes[p].complete + routing_latency(dag, spec, p, i));
      }
      if (!operands_known || ready > cycle) continue;

      const std::size_t unit = binding[i];
      const UnitType type = report.units[unit].type;
      if (last_issue[unit] && cycle < *last_issue[unit] + interval_of(type, spec.timing)) {
        continue;
      }

      const unsigned latency = latency_of(type, spec.timing);
      report.nodes[i] = NodeTiming{unit, ready, cycle, cycle + latency};
      report.occupancy[unit].push_back({i, cycle, cycle + std::max(1u, latency)});
      last_issue[unit] = cycle;
      issued[i] = true;
      --remaining;
    }
  }

  for (const auto& t : report.nodes) report.total_cycles = std::max(report.total_cycles, t.complete);
  if (spec.topology == Topology::feedback) trace_logic_block(dag, spec, report);
  return report;
}

std::vector<std::string> check_schedule(const DataflowGraph& dag, const DatapathSpec& spec,
                                        const ScheduleReport& report) {
  std::vector<std::string> problems;
  if (report.nodes.size() != dag.nodes.size()) {
    problems.push_back("schedule covers " + std::to_string(report.nodes.size()) +
                       " nodes, graph has " + std::to_string(dag.nodes.size()));
    return problems;
  }

  unsigned latest = 0;
  for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
    const DagNode& node = dag.nodes[i];
    const NodeTiming& t = report.nodes[i];
    if (t.unit >= report.units.size() ||
        report.units[t.unit].type != unit_type_for(node.kind)) {
      problems.push_back(node.id + " is bound to a unit of the wrong type");
      continue;
    }
    if (t.complete != t.issue + latency_of(report.units[t.unit].type, spec.timing)) {
      problems.push_back(node.id + " completes at the wrong cycle");
    }
    for (auto p : node.preds) {
      const unsigned available =
          report.nodes[p].complete + routing_latency(dag, spec, p, i);
      if (t.issue < available) {
        problems.push_back(node.id + " issues at " + std::to_string(t.issue) +
                           " before " + dag.nodes[p].id + " arrives at " +
                           std::to_string(available));
      }
    }
    latest = std::max(latest, t.complete);
  }
  if (latest != report.total_cycles) problems.push_back("total_cycles disagrees with completions");

  std::vector<std::vector<unsigned>> issues(report.units.size());
  for (const auto& t : report.nodes) {
    if (t.unit < issues.size()) issues[t.unit].push_back(t.issue);
  }
  for (std::size_t u = 0; u < issues.size(); ++u) {
    auto& cycles = issues[u];
    std::sort(cycles.begin(), cycles.end());
    const unsigned ii = interval_of(report.units[u].type, spec.timing);
    for (std::size_t k = 1; k < cycles.size(); ++k) {
      if (cycles[k] < cycles[k - 1] + ii) {
        problems.push_back(report.units[u].name() + " issues at cycles " +
                           std::to_string(cycles[k - 1]) + " and " +
                           std::to_string(cycles[k]) + " inside one initiation interval");
      }
    }
  }
  return problems;
}

void write_cycle_table(std::ostream& out, const DataflowGraph& dag,
                       const ScheduleReport& report, char sep) {
  const bool csv = sep == ',';
  const std::string empty = csv ? "" : ".";

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"cycle"};
  for (const auto& u : report.units) header.push_back(u.name());
  rows.push_back(header);

  for (unsigned cycle = 0; cycle < report.total_cycles; ++cycle) {
    std::vector<std::string> row{std::to_string(cycle)};
    for (std::size_t u = 0; u < report.units.size(); ++u) {
      std::string cell;
      if (report.units[u].type == UnitType::counter) {
        if (cycle < report.logic.size() &&
            report.logic[cycle].state.select == LogicSelect::feedback_path) {
          cell = std::to_string(report.logic[cycle].state.counter);
        }
      } else {
        for (const auto& occ : report.occupancy[u]) {
          if (cycle < occ.begin || cycle >= occ.end) continue;
          if (!cell.empty()) cell += '/';
          cell += dag.nodes[occ.node].id;
        }
      }
      row.push_back(cell.empty() ? empty : cell);
    }
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> width(header.size(), 0);
  if (!csv) {
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
  }
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << sep;
      if (csv || c + 1 == row.size()) {
        out << row[c];
      } else {
        out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      }
    }
    out << '\n';
  }
}

ReplayResult replay(const DataflowGraph& dag, const DatapathSpec& spec,
                    const ScheduleReport& report, const DivisionProblem& problem,
                    const GoldschmidtConfig& config, const ReciprocalTable& table) {
  problem.validate();
  config.validate();
  if (config.iterations != dag.iterations) {
    throw ScheduleError("configuration asks for " + std::to_string(config.iterations) +
                        " iterations but the graph has " + std::to_string(dag.iterations));
  }
  if (table.p() != config.p) throw ArgumentError("table width does not match configuration");
  if (report.nodes.size() != dag.nodes.size()) {
    throw ScheduleError("schedule does not belong to this graph");
  }

  std::vector<std::size_t> order(dag.nodes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.nodes[a].issue < report.nodes[b].issue;
  });

  std::vector<std::optional<FixedValue>> values(dag.nodes.size());
  auto operand = [&](std::size_t node, std::size_t pred) -> const FixedValue& {
    const unsigned arrival =
        report.nodes[pred].complete + routing_latency(dag, spec, pred, node);
    if (!values[pred] || arrival > report.nodes[node].issue) {
      throw ScheduleError(dag.nodes[node].id + " issued at cycle " +
                          std::to_string(report.nodes[node].issue) + " before operand " +
                          dag.nodes[pred].id + " was available");
    }
    return *values[pred];
  };
  auto external = [&](ExternalInput input) -> const FixedValue& {
    return input == ExternalInput::numerator ? problem.n : problem.d;
  };

  for (auto i : order) {
    const DagNode& node = dag.nodes[i];
    switch (node.kind) {
      case NodeKind::rom_lookup:
        values[i] = lookup(table, problem.d);
        break;
      case NodeKind::complement:
        values[i] = complement_stage(operand(i, node.preds.at(0)), config.complement_mode);
        break;
      case NodeKind::multiply: {
        const FixedValue& lhs = node.external != ExternalInput::none
                                    ? external(node.external)
                                    : operand(i, node.preds.at(0));
        const FixedValue& rhs = operand(i, node.preds.back());
        values[i] = multiplier_stage(lhs, rhs, config.mult_frac_bits);
        break;
      }
    }
  }

  ReplayResult result;
  result.values.reserve(values.size());
  for (auto& v : values) result.values.push_back(std::move(*v));
  result.quotient = result.values[dag.sink()];
  return result;
}

}  // namespace gsdiv::datapath

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "gsdiv/datapath.hpp"
#include "oracle.hpp"

namespace gsdiv::datapath {
namespace {

// ----------------------------------------------------------------------------
// Dataflow graph and inventories
// ----------------------------------------------------------------------------

TEST(DataflowGraphTest, node_counts_follow_2m_plus_1_rule) {
  for (unsigned m = 1; m <= 6; ++m) {
    const DataflowGraph dag = build_dag(m);
    EXPECT_EQ(dag.count(NodeKind::rom_lookup), 1u);
    EXPECT_EQ(dag.count(NodeKind::multiply), 2 * m + 1);
    EXPECT_EQ(dag.count(NodeKind::complement), m);
  }
  const DataflowGraph three = build_dag(3);
  EXPECT_EQ(three.count(NodeKind::multiply), 7u);
  EXPECT_EQ(three.count(NodeKind::complement), 3u);
  EXPECT_THROW(build_dag(0), ArgumentError);
}

TEST(DataflowGraphTest, acyclic_with_final_q_as_single_sink) {
  for (unsigned m = 1; m <= 5; ++m) {
    const DataflowGraph dag = build_dag(m);
    for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
      for (auto p : dag.nodes[i].preds) ASSERT_LT(p, i);
    }
    EXPECT_EQ(dag.nodes[dag.sink()].id, "q" + std::to_string(m + 1));
    EXPECT_THROW(dag.find("r" + std::to_string(m + 1)), ArgumentError);
  }
}

TEST(DataflowGraphTest, dependency_shape) {
  const DataflowGraph dag = build_dag(2);
  const auto id = [&](std::size_t i) { return dag.nodes[i].id; };
  const auto preds = [&](const char* name) {
    std::vector<std::string> out;
    for (auto p : dag.nodes[dag.find(name)].preds) out.push_back(id(p));
    return out;
  };
  EXPECT_EQ(preds("q1"), std::vector<std::string>{"K1"});
  EXPECT_EQ(preds("r1"), std::vector<std::string>{"K1"});
  EXPECT_EQ(preds("K2"), std::vector<std::string>{"r1"});
  EXPECT_EQ(preds("q2"), (std::vector<std::string>{"q1", "K2"}));
  EXPECT_EQ(preds("r2"), (std::vector<std::string>{"r1", "K2"}));
  EXPECT_EQ(preds("q3"), (std::vector<std::string>{"q2", "K3"}));
}

TEST(TopologyTest, inventories) {
  const DatapathSpec original = build_topology(Topology::original, 3);
  EXPECT_EQ(original.units, (UnitInventory{1, 7, 3, 0, 0}));
  const DatapathSpec feedback = build_topology(Topology::feedback, 3);
  EXPECT_EQ(feedback.units, (UnitInventory{1, 4, 1, 1, 1}));
  for (unsigned m = 1; m <= 8; ++m) {
    EXPECT_EQ(build_topology(Topology::feedback, m).units, feedback.units);
    EXPECT_EQ(build_topology(Topology::original, m).units.multipliers, 2 * m + 1);
  }
  EXPECT_EQ(feedback.counter_preset, 8u);
  EXPECT_THROW(build_topology(Topology::feedback, 0), ArgumentError);
  EXPECT_THROW(parse_topology("ring"), ArgumentError);
}

// ----------------------------------------------------------------------------
// Logic block
// ----------------------------------------------------------------------------

TEST(LogicBlockTest, truth_table_rows) {
  const LogicBlockState fresh{LogicSelect::r1_path, 0, 8};
  EXPECT_EQ(logic_block_step(fresh, true, false).output, LogicOutput::r1);
  EXPECT_EQ(logic_block_step(fresh, false, true).output, LogicOutput::feedback);
  EXPECT_EQ(logic_block_step(fresh, true, true).output, LogicOutput::feedback);
  EXPECT_EQ(logic_block_step(fresh, false, false).output, LogicOutput::none);

  const LogicBlockState counting{LogicSelect::feedback_path, 3, 8};
  EXPECT_EQ(logic_block_step(counting, true, true).output, LogicOutput::feedback);
  EXPECT_EQ(logic_block_step(counting, false, false).output, LogicOutput::none);
  EXPECT_EQ(logic_block_step(counting, false, true).output, LogicOutput::feedback);
}

TEST(LogicBlockTest, counter_reverts_to_r1_after_preset) {
  const TimingParams timing;  // 4-cycle multiplies
  const unsigned preset = default_counter_preset(3, timing);
  ASSERT_EQ(preset, 8u);  // two remaining rounds of four cycles

  LogicBlockStep step = logic_block_step({LogicSelect::r1_path, 0, preset}, true, false);
  EXPECT_EQ(step.output, LogicOutput::r1);
  EXPECT_EQ(step.state.select, LogicSelect::feedback_path);
  for (unsigned cycle = 1; cycle <= 8; ++cycle) {
    // r1 is ignored while the window is open.
    const LogicBlockStep probe = logic_block_step(step.state, true, false);
    EXPECT_EQ(probe.output, LogicOutput::none) << cycle;
    step = logic_block_step(step.state, false, cycle % 4 == 0);
    if (cycle < 8) {
      EXPECT_EQ(step.state.select, LogicSelect::feedback_path) << cycle;
      EXPECT_EQ(step.state.counter, cycle);
    }
  }
  EXPECT_EQ(step.state.select, LogicSelect::r1_path);
  EXPECT_EQ(step.state.counter, 0u);
  EXPECT_EQ(logic_block_step(step.state, true, false).output, LogicOutput::r1);
}

TEST(LogicBlockTest, zero_preset_never_opens_a_window) {
  const LogicBlockStep step = logic_block_step({LogicSelect::none, 0, 0}, true, false);
  EXPECT_EQ(step.output, LogicOutput::r1);
  EXPECT_EQ(step.state.select, LogicSelect::none);
}

// ----------------------------------------------------------------------------
// Scheduling
// ----------------------------------------------------------------------------

TEST(ScheduleTest, default_totals) {
  const DataflowGraph dag = build_dag(3);
  EXPECT_EQ(schedule(dag, build_topology(Topology::original, 3)).total_cycles, 17u);
  EXPECT_EQ(schedule(dag, build_topology(Topology::feedback, 3)).total_cycles, 18u);
}

TEST(ScheduleTest, unit_latency_collapse) {
  TimingParams t;
  t.mult_latency = 1;
  t.rom_latency = 0;
  t.logic_block_latency = 0;
  const DataflowGraph dag = build_dag(3);
  EXPECT_EQ(schedule(dag, build_topology(Topology::original, 3, t)).total_cycles, 4u);
  EXPECT_EQ(schedule(dag, build_topology(Topology::feedback, 3, t)).total_cycles, 4u);
}

TEST(ScheduleTest, feedback_binding_reuses_x_and_y) {
  const DataflowGraph dag = build_dag(3);
  const ScheduleReport r = schedule(dag, build_topology(Topology::feedback, 3));
  const auto unit = [&](const char* id) { return r.units[r.nodes[dag.find(id)].unit].name(); };
  EXPECT_EQ(unit("q1"), "mult1");
  EXPECT_EQ(unit("r1"), "mult2");
  EXPECT_EQ(unit("r2"), "mult3");
  EXPECT_EQ(unit("r3"), "mult3");
  EXPECT_EQ(unit("q2"), "mult4");
  EXPECT_EQ(unit("q4"), "mult4");
  EXPECT_EQ(unit("K4"), "compl1");
  // r1 crosses the logic-block register before entering the complement.
  EXPECT_EQ(r.nodes[dag.find("K2")].issue, r.nodes[dag.find("r1")].complete + 1);
  EXPECT_EQ(r.nodes[dag.find("K3")].issue, r.nodes[dag.find("r2")].complete);
}

TEST(ScheduleTest, logic_block_trace_in_feedback_schedule) {
  const DataflowGraph dag = build_dag(3);
  const ScheduleReport r = schedule(dag, build_topology(Topology::feedback, 3));
  ASSERT_EQ(r.logic.size(), r.total_cycles);
  std::vector<std::pair<unsigned, std::string>> passed;
  for (const auto& c : r.logic) {
    if (c.output != LogicOutput::none) passed.emplace_back(c.cycle, c.value);
  }
  const std::vector<std::pair<unsigned, std::string>> expected{{5, "r1"}, {10, "r2"}, {14, "r3"}};
  EXPECT_EQ(passed, expected);
  EXPECT_EQ(r.logic[5].output, LogicOutput::r1);
  EXPECT_EQ(r.logic[10].output, LogicOutput::feedback);
  EXPECT_EQ(r.logic[5].state.select, LogicSelect::feedback_path);
  EXPECT_EQ(r.logic[13].state.select, LogicSelect::r1_path);  // 8 cycles after r1
}

TEST(ScheduleTest, legal_across_timing_grid) {
  for (unsigned m = 1; m <= 6; ++m) {
    const DataflowGraph dag = build_dag(m);
    for (unsigned lat : {1u, 2u, 3u, 4u, 8u}) {
      for (unsigned ii = 1; ii <= lat; ++ii) {
        for (unsigned rom : {0u, 1u, 2u}) {
          for (unsigned comp : {0u, 1u}) {
            for (unsigned logic : {0u, 1u, 2u}) {
              const TimingParams t{lat, ii, rom, comp, logic};
              const ScheduleReport o = schedule(dag, build_topology(Topology::original, m, t));
              const ScheduleReport f = schedule(dag, build_topology(Topology::feedback, m, t));
              ASSERT_TRUE(check_schedule(dag, build_topology(Topology::original, m, t), o).empty());
              ASSERT_TRUE(check_schedule(dag, build_topology(Topology::feedback, m, t), f).empty());
              ASSERT_EQ(o.total_cycles, rom + (m + 1) * lat + m * comp);
              ASSERT_EQ(f.total_cycles - o.total_cycles, logic)
                  << "m=" << m << " lat=" << lat << " ii=" << ii << " rom=" << rom;
            }
          }
        }
      }
    }
  }
}

TEST(ScheduleTest, check_schedule_flags_tampering) {
  const DataflowGraph dag = build_dag(2);
  const DatapathSpec spec = build_topology(Topology::feedback, 2);
  ScheduleReport r = schedule(dag, spec);
  ASSERT_TRUE(check_schedule(dag, spec, r).empty());

  ScheduleReport early = r;
  auto& k2 = early.nodes[dag.find("K2")];
  k2.issue -= 1;
  k2.complete -= 1;
  EXPECT_FALSE(check_schedule(dag, spec, early).empty());

  ScheduleReport clash = r;
  auto& q3 = clash.nodes[dag.find("q3")];
  q3.unit = clash.nodes[dag.find("q2")].unit;
  q3.issue = clash.nodes[dag.find("q2")].issue;
  q3.complete = q3.issue + spec.timing.mult_latency;
  EXPECT_FALSE(check_schedule(dag, spec, clash).empty());
}

TEST(ScheduleTest, structural_infeasibility_and_mismatch) {
  const DataflowGraph dag = build_dag(3);
  DatapathSpec spec = build_topology(Topology::feedback, 3);
  spec.units.multipliers = 0;
  EXPECT_THROW(schedule(dag, spec), ScheduleError);
  EXPECT_THROW(schedule(dag, build_topology(Topology::original, 2)), ScheduleError);
  TimingParams bad;
  bad.mult_latency = 0;
  EXPECT_THROW(build_topology(Topology::original, 3, bad), ArgumentError);
}

TEST(ScheduleTest, shared_multiplier_causes_structural_stall) {
  // One multiplier serialises q1 and r1: they cannot issue together.
  const DataflowGraph dag = build_dag(1);
  DatapathSpec spec = build_topology(Topology::original, 1);
  spec.units.multipliers = 1;
  spec.timing.mult_initiation_interval = 4;
  const ScheduleReport r = schedule(dag, spec);
  EXPECT_TRUE(check_schedule(dag, spec, r).empty());
  EXPECT_EQ(r.nodes[dag.find("q1")].issue, 1u);
  EXPECT_EQ(r.nodes[dag.find("r1")].issue, 5u);
}

TEST(CycleTableTest, canonical_columns_and_rows) {
  const DataflowGraph dag = build_dag(3);
  const ScheduleReport r = schedule(dag, build_topology(Topology::feedback, 3));
  std::ostringstream csv;
  write_cycle_table(csv, dag, r, ',');
  std::istringstream lines(csv.str());
  std::string header, row;
  std::getline(lines, header);
  EXPECT_EQ(header, "cycle,rom,mult1,mult2,mult3,mult4,compl1,logic,counter");
  std::size_t rows = 0;
  std::string first;
  while (std::getline(lines, row)) {
    if (rows == 0) first = row;
    if (rows == 6) EXPECT_EQ(row, "6,,,,r2,q2,K2,,1");
    ++rows;
  }
  EXPECT_EQ(rows, 18u);
  EXPECT_EQ(first, "0,K1,,,,,,,");

  const ScheduleReport o = schedule(dag, build_topology(Topology::original, 3));
  std::ostringstream text;
  write_cycle_table(text, dag, o, ' ');
  EXPECT_EQ(text.str().substr(0, text.str().find('\n')),
            "cycle rom mult1 mult2 mult3 mult4 mult5 mult6 mult7 compl1 compl2 compl3");
}

// ----------------------------------------------------------------------------
// Area and comparison
// ----------------------------------------------------------------------------

TEST(AreaTest, deltas) {
  const auto area = [](Topology t, unsigned m) { return area_report(build_topology(t, m)); };
  const AreaDelta three = area_delta(area(Topology::original, 3), area(Topology::feedback, 3));
  EXPECT_EQ(three.multipliers, 3);
  EXPECT_EQ(three.complements, 2);
  EXPECT_EQ(three.logic_blocks, -1);
  EXPECT_EQ(three.counters, -1);
  EXPECT_EQ(three.roms, 0);
  EXPECT_EQ(three.relative_area, 3 * 100 + 2 * 2 - 1 - 1);

  const AreaDelta one = area_delta(area(Topology::original, 1), area(Topology::feedback, 1));
  EXPECT_EQ(one.multipliers, -1);
  EXPECT_EQ(one.complements, 0);
  EXPECT_EQ(one.logic_blocks, -1);
  EXPECT_EQ(one.counters, -1);

  EXPECT_EQ(area_delta(area(Topology::feedback, 3), area(Topology::feedback, 5)), AreaDelta{});
  EXPECT_EQ(area(Topology::original, 3).relative_area, 7 * 100 + 3 * 2 + 20);
}

TEST(CompareTest, examples) {
  const ComparisonReport three = compare(3);
  EXPECT_EQ(three.cycle_delta, 1);
  EXPECT_EQ(three.savings.multipliers, 3);
  EXPECT_EQ(three.savings.complements, 2);
  ASSERT_TRUE(three.claim_holds.has_value());
  EXPECT_TRUE(*three.claim_holds);
  EXPECT_TRUE(three.cycle_delta_is_logic_latency);
  EXPECT_EQ(three.original.total_cycles, 17u);
  EXPECT_EQ(three.feedback.total_cycles, 18u);

  TimingParams free_mux;
  free_mux.logic_block_latency = 0;
  const ComparisonReport free = compare(3, free_mux);
  EXPECT_EQ(free.cycle_delta, 0);
  EXPECT_FALSE(*free.claim_holds);

  const ComparisonReport five = compare(5);
  EXPECT_EQ(five.cycle_delta, 1);
  EXPECT_EQ(five.savings.multipliers, 7);
  EXPECT_FALSE(five.claim_holds.has_value());

  EXPECT_FALSE(compare(1).claim_holds.has_value());
}

// ----------------------------------------------------------------------------
// Replay
// ----------------------------------------------------------------------------

TEST(ReplayTest, both_topologies_match_run_division) {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 40; ++trial) {
    const unsigned m = 1 + static_cast<unsigned>(rng() % 4);
    GoldschmidtConfig c;
    c.p = 2 + static_cast<unsigned>(rng() % 8);
    c.iterations = m;
    if (trial % 2) c.mult_frac_bits = c.p + 1 + static_cast<unsigned>(rng() % 30);
    const ReciprocalTable table = build_table(c.p);
    const DivisionProblem problem{oracle::random_unit(rng, 12), oracle::random_unit(rng, 12)};
    const IterationTrace trace = run_division(problem, c, table);
    const DataflowGraph dag = build_dag(m);
    for (Topology topo : {Topology::original, Topology::feedback}) {
      const DatapathSpec spec = build_topology(topo, m);
      const ReplayResult result = replay(dag, spec, schedule(dag, spec), problem, c, table);
      ASSERT_TRUE(result.quotient.identical(trace.quotient()));
      for (std::size_t i = 1; i <= m; ++i) {
        ASSERT_TRUE(result.values[dag.find("r" + std::to_string(i))].identical(trace.r[i - 1]));
        ASSERT_TRUE(result.values[dag.find("K" + std::to_string(i + 1))].identical(trace.k[i]));
      }
    }
  }
}

TEST(ReplayTest, rejects_operand_before_arrival) {
  const DataflowGraph dag = build_dag(2);
  const DatapathSpec spec = build_topology(Topology::feedback, 2);
  ScheduleReport r = schedule(dag, spec);
  r.nodes[dag.find("q2")].issue = 2;
  GoldschmidtConfig c;
  c.p = 4;
  c.iterations = 2;
  const DivisionProblem problem{parse_fixed("1.5"), parse_fixed("1.25")};
  EXPECT_THROW(replay(dag, spec, r, problem, c, build_table(4)), ScheduleError);
}

}  // namespace
}  // namespace gsdiv::datapath

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "zenoreach/error.hpp"
#include "zenoreach/reach.hpp"
#include "zenoreach/systems.hpp"

using namespace zenoreach;

namespace {

Grid line_grid(double hi, int n) { return Grid({Interval{0.0, hi}}, {n}); }

// Cells whose interiors meet [lo, hi] (lo < hi), or the single cell holding
// the point lo == hi.
GridSet cells(const Grid& g, double lo, double hi) {
  GridSet s = GridSet::empty(g);
  if (lo == hi) {
    s.insert(*g.cell_of(std::vector<double>{lo}));
    return s;
  }
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    auto iv = g.cell_interval(0, static_cast<int>(c));
    if (iv.hi > lo && iv.lo < hi) s.insert(c);
  }
  return s;
}

Box pt(double x) { return {Interval{x}}; }

}  // namespace

TEST(ReachSafe, ExpandFromOne) {
  auto e = make_system(SystemKind::Expand, {{"M", 2.0}});
  Grid g = line_grid(2.0, 256);
  auto r = reach_safe(e.system, {pt(1.0)}, g);
  EXPECT_TRUE(r.stabilized);
  EXPECT_LE(hausdorff_cells(r.set, cells(g, 1.0, 2.0)), 2.0);
  EXPECT_TRUE(cells(g, 1.0, 2.0).subset_of(r.set));
}

TEST(ReachSafe, ExpandFromZeroStaysPut) {
  auto e = make_system(SystemKind::Expand, {{"M", 2.0}});
  Grid g = line_grid(2.0, 256);
  auto r = reach_safe(e.system, {pt(0.0)}, g);
  EXPECT_EQ(r.set, cells(g, 0.0, 0.0));
}

TEST(ReachSafe, DecayRefills) {
  auto d = make_system(SystemKind::Decay, {{"M", 2.0}});
  Grid g = line_grid(2.0, 256);
  auto r = reach_safe(d.system, {pt(1.0)}, g);
  EXPECT_TRUE(r.set.is_full());
  GridSet start = cells(g, 1.0, 1.0);
  EXPECT_TRUE(reach_safe(d.system, start).set.is_full());
}

TEST(ReachSafe, EmptyInitial) {
  auto d = make_system(SystemKind::Decay);
  Grid g = line_grid(2.0, 32);
  auto r = reach_safe(d.system, GridSet::empty(g));
  EXPECT_TRUE(r.set.is_empty());
  EXPECT_TRUE(reach_safe(d.system, std::vector<Box>{}, g).set.is_empty());
}

TEST(ReachSafe, Counterexample1KeepsLimitAndLift) {
  auto c = make_system(SystemKind::Counterexample1);
  Grid g = line_grid(2.5, 256);
  auto r = reach_safe(c.system, {pt(1.0)}, g);
  auto o = oracle_set(SystemKind::Counterexample1, c.params, {1.0}, Analysis::Ss, g);
  EXPECT_TRUE(r.set.contains(0));
  EXPECT_TRUE(r.set.contains(*g.cell_of(std::vector<double>{2.0})));
  EXPECT_LE(hausdorff_cells(r.set, o), 1.0);
}

TEST(ReachSafe, Counterexample2ReachesOneOnlyWhenClosed) {
  auto c = make_system(SystemKind::Counterexample2);
  Grid g = line_grid(4.0, 256);
  auto r = reach_safe(c.system, {pt(2.0)}, g);
  EXPECT_TRUE(r.set.contains(*g.cell_of(std::vector<double>{3.0})));
  EXPECT_TRUE(r.set.contains(*g.cell_of(std::vector<double>{0.3})));
}

TEST(ReachSafe, BouncingBallWithinOneCellOfShells) {
  for (double b : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    auto bb = make_system(SystemKind::BouncingBall, {{"b", b}});
    Grid g(bb.system.window, {128, 128});
    auto r = reach_safe(bb.system, {Box{Interval{0.0}, Interval{1.0}}}, g);
    auto o = oracle_set(SystemKind::BouncingBall, bb.params, {0.0, 1.0}, Analysis::Ss, g);
    EXPECT_TRUE(r.set.subset_of(dilate(o, 1))) << b;
    EXPECT_TRUE(o.subset_of(dilate(r.set, 1))) << b;
  }
}

TEST(ReachSafe, ThreadCountDoesNotChangeResult) {
  auto bb = make_system(SystemKind::BouncingBall, {{"b", -0.5}});
  Grid g(bb.system.window, {64, 64});
  GridSet start = GridSet::empty(g);
  start.insert_box({Interval{0.5, 1.0}, Interval{-1.0, 1.0}});
  ReachOptions one, many;
  one.threads = 1;
  many.threads = 4;
  EXPECT_EQ(reach_safe(bb.system, start, one).set, reach_safe(bb.system, start, many).set);
}

TEST(ReachSafe, LawsOnJumpOnlySystem) {
  auto c = make_system(SystemKind::Counterexample1);
  Grid g = line_grid(2.5, 64);
  GridSet a = cells(g, 1.0, 1.2), b = cells(g, 2.2, 2.4);
  auto ra = reach_safe(c.system, a).set, rb = reach_safe(c.system, b).set;
  auto rab = reach_safe(c.system, a | b).set;
  EXPECT_EQ(rab, ra | rb);
  EXPECT_TRUE(ra.subset_of(rab));
  EXPECT_EQ(reach_safe(c.system, ra).set, ra);
  EXPECT_TRUE(a.subset_of(ra));
}

TEST(ReachSafe, IterationBudget) {
  auto c = make_system(SystemKind::Counterexample1);
  Grid g = line_grid(2.5, 256);
  ReachOptions o;
  o.max_iterations = 2;
  EXPECT_THROW(reach_safe(c.system, {pt(2.0)}, g, o), IterationBudgetExceeded);
}

TEST(ReachSafe, DimensionMismatch) {
  auto e = make_system(SystemKind::Expand);
  Grid g({Interval{0.0, 1.0}, Interval{0.0, 1.0}}, {4, 4});
  EXPECT_THROW(reach_safe(e.system, {pt(0.5)}, g), BadParams);
}

TEST(ReachFinite, Counterexample1Symbolic) {
  auto c = make_system(SystemKind::Counterexample1);
  Grid g = line_grid(2.5, 256);
  FiniteOptions o;
  o.n_transitions = 20;
  auto r = reach_finite(c.system, {{1.0}}, g, o);
  ASSERT_EQ(r.boxes.size(), 21u);
  for (int k = 0; k <= 20; ++k) EXPECT_EQ(r.boxes[static_cast<std::size_t>(k)][0], Interval{std::ldexp(1.0, -k)});
  EXPECT_FALSE(r.result.set.contains(*g.cell_of(std::vector<double>{2.0})));
  for (const auto& b : r.boxes) EXPECT_GT(b[0].lo, 0.0);
}

TEST(ReachFinite, EmptyStart) {
  auto d = make_system(SystemKind::Decay);
  Grid g = line_grid(2.0, 32);
  EXPECT_TRUE(reach_finite(d.system, {}, g).result.set.is_empty());
}

TEST(ReachFinite, DecayStaysInsideOpenInterval) {
  auto d = make_system(SystemKind::Decay, {{"M", 2.0}});
  Grid g = line_grid(2.0, 256);
  FiniteOptions o;
  o.t_max = 4.0;
  auto r = reach_finite(d.system, {{1.0}}, g, o);
  EXPECT_FALSE(r.result.set.contains(0));
  EXPECT_FALSE(r.result.set.contains(255));
  for (const auto& p : r.points) {
    EXPECT_GT(p[0], 0.0);
    EXPECT_LE(p[0], 1.0);
  }
}

TEST(EvolveSafe, MatchesHandClockedDecay) {
  auto d = make_system(SystemKind::Decay, {{"M", 2.0}});
  Grid g = line_grid(2.0, 64);
  Grid cg = clocked_grid(g, 3.0, 64);
  auto es = evolve_safe(d.system, {pt(1.0)}, cg, 3.0);
  auto hand = reach_safe(clock_extend(d.system, 3.0), {Box{Interval{0.0}, Interval{1.0}}}, cg);
  EXPECT_EQ(es.set, hand.set);
  auto proj = project_clock(es.set, g);
  auto rs = reach_safe(d.system, {pt(1.0)}, g).set;
  EXPECT_TRUE(proj.subset_of(rs));
}

TEST(EvolveSafe, ClockMonotone) {
  auto e = make_system(SystemKind::Expand, {{"M", 2.0}});
  Grid g = line_grid(2.0, 32);
  Grid cg = clocked_grid(g, 1.0, 32);
  auto es = evolve_safe(e.system, {pt(1.0)}, cg, 1.0);
  // Reached m at clock t satisfies m ≈ e^t: nothing below the start value.
  for (auto c : es.set.cells()) EXPECT_GE(cg.cell_box(c)[1].hi, 1.0);
  EXPECT_THROW(evolve_safe(e.system, {pt(1.0)}, cg, 0.0), BadParams);
}

TEST(ReachRobust, ExpandFromZeroFillsInterval) {
  auto e = make_system(SystemKind::Expand, {{"M", 2.0}});
  Grid g = line_grid(2.0, 256);
  auto r = reach_robust(e.system, {pt(0.0)}, g, e.hard);
  EXPECT_TRUE(r.stabilized);
  EXPECT_LE(hausdorff_cells(r.set, cells(g, 0.0, 2.0)), 2.0);
  auto rs = reach_safe(e.system, {pt(0.0)}, g).set;
  EXPECT_TRUE(rs.subset_of(r.set));
}

TEST(ReachRobust, ExpandFromOneUnchanged) {
  auto e = make_system(SystemKind::Expand, {{"M", 2.0}});
  Grid g = line_grid(2.0, 256);
  auto r = reach_robust(e.system, {pt(1.0)}, g, e.hard);
  EXPECT_LE(hausdorff_cells(r.set, cells(g, 1.0, 2.0)), 2.0);
}

TEST(ReachRobust, NotRefining) {
  auto e = make_system(SystemKind::Expand);
  auto d = make_system(SystemKind::Decay);
  Grid g = line_grid(2.0, 32);
  EXPECT_THROW(reach_robust(d.system, {pt(1.0)}, g, e.hard), NotRefining);
}

TEST(ReachRobust, ElasticBallFillsEnergyDisc) {
  auto bb = make_system(SystemKind::BouncingBall, {{"b", -1.0}});
  Grid g(bb.system.window, {128, 128});
  auto r = reach_robust(bb.system, {Box{Interval{0.0}, Interval{1.0}}}, g, bb.hard);
  auto o = oracle_set(SystemKind::BouncingBall, bb.params, {0.0, 1.0}, Analysis::SR, g);
  EXPECT_LE(hausdorff_cells(r.set, o), 3.0);
}

TEST(Probe, SafeReachIsNotRobustAtZero) {
  auto e = make_system(SystemKind::Expand, {{"M", 2.0}});
  Grid g = line_grid(2.0, 256);
  SetAnalysis rs = [&](const std::vector<Box>& i) { return reach_safe(e.system, i, g).set; };
  auto rows = robustness_probe(rs, {pt(0.0)}, {0.5, 0.25, 0.125, 0.0625}, g);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& row : rows) EXPECT_GE(row.deviation, 2.0 - 2 * g.max_width());
  std::ostringstream os;
  write_probe_csv(os, rows);
  EXPECT_EQ(os.str().rfind("delta,deviation,deviation_cells\n", 0), 0u);
  EXPECT_THROW(robustness_probe(rs, {pt(0.0)}, {-1.0}, g), BadParams);
}

TEST(InflateInitial, ClipsToWindow) {
  auto out = inflate_initial({pt(0.0), pt(5.0)}, 0.5, {Interval{0.0, 2.0}});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0][0], (Interval{0.0, 0.5}));
}

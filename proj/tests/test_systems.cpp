#include <gtest/gtest.h>

#include <cmath>

#include "zenoreach/error.hpp"
#include "zenoreach/systems.hpp"

using namespace zenoreach;

namespace {

// Brute-force outer cover of the closed set {h ≥ 0, lo ≤ E ≤ hi}: a closed
// cell meets it iff the energy range over the cell (h ≥ 0 part) meets [lo, hi].
GridSet band_oracle(const Grid& g, double lo, double hi) {
  GridSet s = GridSet::empty(g);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    Box b = g.cell_box(c);
    if (b[0].hi < 0) continue;
    const double h0 = std::max(b[0].lo, 0.0);
    const double vmin = b[1].lo <= 0 && b[1].hi >= 0 ? 0.0 : std::min(std::abs(b[1].lo), std::abs(b[1].hi));
    const double vmax = std::max(std::abs(b[1].lo), std::abs(b[1].hi));
    const double emin = h0 + vmin * vmin / 2, emax = b[0].hi + vmax * vmax / 2;
    if (emin <= hi && emax >= lo) s.insert(c);
  }
  return s;
}

GridSet interval_cells(const Grid& g, double lo, double hi) {
  GridSet s = GridSet::empty(g);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    auto iv = g.cell_interval(0, static_cast<int>(c));
    if (iv.hi > lo && iv.lo < hi) s.insert(c);  // interiors meet (lo < hi)
  }
  return s;
}

}  // namespace

TEST(Kinds, ParseNames) {
  EXPECT_EQ(parse_kind("expand"), SystemKind::Expand);
  EXPECT_EQ(parse_kind("bb"), SystemKind::BouncingBall);
  EXPECT_EQ(parse_kind("bouncing_ball"), SystemKind::BouncingBall);
  EXPECT_EQ(parse_kind("ce2"), SystemKind::Counterexample2);
  EXPECT_EQ(parse_kind("counterexample3"), SystemKind::Counterexample3);
  EXPECT_THROW(parse_kind("pendulum"), BadParams);
  EXPECT_EQ(parse_analysis("rs"), Analysis::Ss);
  EXPECT_EQ(parse_analysis("SR"), Analysis::SR);
  EXPECT_THROW(parse_analysis("x"), BadParams);
  for (auto k : {SystemKind::Expand, SystemKind::Decay, SystemKind::BouncingBall, SystemKind::Counterexample1})
    EXPECT_EQ(parse_kind(to_string(k)), k);
}

TEST(Energy, Values) {
  EXPECT_DOUBLE_EQ(energy(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(energy(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(energy(0.5, 0), 0.5);
}

TEST(MakeSystem, ExpandFlowIsIdentityField) {
  auto e = make_system(SystemKind::Expand, {{"M", 2.0}});
  EXPECT_TRUE(e.system.jumps.empty());
  for (double m : {0.0, 0.7, 2.0}) {
    auto v = e.system.velocity({Interval{m}});
    ASSERT_TRUE(v);
    EXPECT_DOUBLE_EQ((*v)[0].lo, m);
    EXPECT_DOUBLE_EQ((*v)[0].hi, m);
  }
  EXPECT_FALSE(e.system.velocity({Interval{2.5}}));
  EXPECT_DOUBLE_EQ(e.params.at("M"), 2.0);
}

TEST(MakeSystem, Counterexample1Jumps) {
  auto c = make_system(SystemKind::Counterexample1);
  EXPECT_FALSE(c.system.has_flow());
  auto t = c.system.jump_targets({Interval{1.0}});
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0][0], Interval{0.5});
  auto z = c.system.jump_targets({Interval{0.0}});
  ASSERT_EQ(z.size(), 2u);
  bool has_two = false;
  for (const auto& b : z) has_two = has_two || b[0] == Interval{2.0};
  EXPECT_TRUE(has_two);
}

TEST(MakeSystem, BouncingBallKick) {
  auto bb = make_system(SystemKind::BouncingBall, {{"b", 0.0}, {"V", 2.0}, {"V0", 3.0}});
  auto t = bb.system.jump_targets({Interval{0.0}, Interval{0.0}});
  bool kick = false;
  for (const auto& b : t) kick = kick || (b[0] == Interval{0.0} && b[1] == Interval{2.0});
  EXPECT_TRUE(kick);
  EXPECT_DOUBLE_EQ(bb.system.window[0].hi, 4.5);
}

TEST(MakeSystem, BadParams) {
  EXPECT_THROW(make_system(SystemKind::Expand, {{"M", 0.0}}), BadParams);
  EXPECT_THROW(make_system(SystemKind::BouncingBall, {{"V", 3.0}, {"V0", 2.0}}), BadParams);
  EXPECT_THROW(make_system(SystemKind::BouncingBall, {{"b", -1.5}}), BadParams);
  EXPECT_NO_THROW(make_system(SystemKind::BouncingBall, {{"b", -1.5}, {"compact", 0.0}}));
}

TEST(MakeSystem, ClosureVariantAddsRestLoop) {
  auto p = make_system(SystemKind::BouncingBall, {}, Variant::Standard);
  auto c = make_system(SystemKind::BouncingBall, {}, Variant::ClosureVariant);
  EXPECT_EQ(c.system.jumps.size(), p.system.jumps.size() + 1);
}

TEST(Oracle, ExpandAndDecay) {
  Grid g({Interval{0.0, 2.0}}, {256});
  EXPECT_EQ(oracle_set(SystemKind::Expand, {{"M", 2.0}}, {1.0}, Analysis::Ss, g), interval_cells(g, 1.0, 2.0));
  EXPECT_EQ(oracle_set(SystemKind::Decay, {{"M", 2.0}}, {1.0}, Analysis::Ss, g), interval_cells(g, 0.0, 2.0));
  EXPECT_EQ(oracle_set(SystemKind::Decay, {{"M", 2.0}}, {1.0}, Analysis::Sf, g), interval_cells(g, 0.0, 1.0));
  EXPECT_EQ(oracle_set(SystemKind::Expand, {{"M", 2.0}}, {0.0}, Analysis::SR, g), interval_cells(g, 0.0, 2.0));
}

TEST(Oracle, ElasticRobustBand) {
  auto bb = make_system(SystemKind::BouncingBall, {{"b", -1.0}});
  Grid g(bb.system.window, {128, 128});
  auto o = oracle_set(SystemKind::BouncingBall, bb.params, {0.0, 1.0}, Analysis::SR, g);
  EXPECT_EQ(o, band_oracle(g, 0.0, 2.0));
  auto s = oracle_set(SystemKind::BouncingBall, bb.params, {0.0, 1.0}, Analysis::Ss, g);
  EXPECT_EQ(s, band_oracle(g, 0.5, 0.5));
}

TEST(Oracle, InclusionChain) {
  for (double b : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    auto bb = make_system(SystemKind::BouncingBall, {{"b", b}});
    Grid g(bb.system.window, {64, 64});
    auto sf = oracle_set(SystemKind::BouncingBall, bb.params, {0.0, 1.0}, Analysis::Sf, g);
    auto ss = oracle_set(SystemKind::BouncingBall, bb.params, {0.0, 1.0}, Analysis::Ss, g);
    auto sr = oracle_set(SystemKind::BouncingBall, bb.params, {0.0, 1.0}, Analysis::Sr, g);
    auto sR = oracle_set(SystemKind::BouncingBall, bb.params, {0.0, 1.0}, Analysis::SR, g);
    EXPECT_TRUE(sf.subset_of(ss)) << b;
    EXPECT_TRUE(ss.subset_of(sr)) << b;
    EXPECT_TRUE(sr.subset_of(sR)) << b;
  }
}

TEST(Oracle, GapWitnesses) {
  Grid g({Interval{0.0, 2.5}}, {256});
  auto f1 = oracle_set(SystemKind::Counterexample1, {}, {1.0}, Analysis::Sf, g);
  auto s1 = oracle_set(SystemKind::Counterexample1, {}, {1.0}, Analysis::Ss, g);
  const std::size_t at2 = *g.cell_of(std::vector<double>{2.0});
  EXPECT_TRUE(f1.subset_of(s1));
  EXPECT_FALSE(f1.contains(at2));
  EXPECT_TRUE(s1.contains(at2));
  EXPECT_TRUE(s1.contains(0));

  auto f3 = oracle_set(SystemKind::Counterexample3, {}, {1.0}, Analysis::Sf, g);
  auto s3 = oracle_set(SystemKind::Counterexample3, {}, {1.0}, Analysis::Ss, g);
  EXPECT_EQ(f3, interval_cells(g, 0.0, 1.0));
  EXPECT_EQ(s3, interval_cells(g, 0.0, 2.0));
}

TEST(Oracle, Unlisted) {
  Grid g({Interval{0.0, 2.5}}, {64});
  EXPECT_THROW(oracle_set(SystemKind::Counterexample1, {}, {1.0}, Analysis::SR, g), NoOracle);
  auto bb = make_system(SystemKind::BouncingBall, {{"b", -0.5}, {"relaxed", 1.0}});
  Grid g2(bb.system.window, {32, 32});
  EXPECT_THROW(oracle_set(SystemKind::BouncingBall, bb.params, {0.0, 1.0}, Analysis::SR, g2), NoOracle);
}

TEST(EnergyClosure, JumpsKeepPositiveEnergyUnlessBIsZero) {
  for (double b : {-1.0, -0.5, 0.5, 1.0}) {
    auto bb = make_system(SystemKind::BouncingBall, {{"b", b}});
    for (double v : {-2.0, -1.0, -0.25}) {
      for (const auto& t : bb.system.jump_targets({Interval{0.0}, Interval{v}})) {
        EXPECT_GT(energy(t[0].lo, t[1].lo), 0.0) << b;
      }
    }
  }
  auto bb0 = make_system(SystemKind::BouncingBall, {{"b", 0.0}});
  auto t = bb0.system.jump_targets({Interval{0.0}, Interval{-1.0}});
  ASSERT_FALSE(t.empty());
  EXPECT_DOUBLE_EQ(energy(t[0][0].lo, t[0][1].lo), 0.0);
}

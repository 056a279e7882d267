#include <gtest/gtest.h>

#include <bit>

#include "zenoreach/error.hpp"
#include "zenoreach/gridset.hpp"
#include "zenoreach/lattice.hpp"

using namespace zenoreach;

namespace {

// Closed sets of the Alexandrov topology of the preorder 0 ≤ 1, 2 ≤ 3 are
// its down-sets.
constexpr Mask kPred[4] = {0b0000, 0b0001, 0b0000, 0b0100};

bool is_down_set(Mask m) {
  for (int i = 0; i < 4; ++i)
    if ((m >> i & 1U) && (kPred[i] & ~m)) return false;
  return true;
}

Mask closure_oracle(Mask u) {
  Mask c = u;
  for (int i = 0; i < 4; ++i)
    if (u >> i & 1U) c |= kPred[i];
  return c;
}

}  // namespace

TEST(LeastPrefixPoint, IdentityGivesBottom) {
  auto lat = powerset_lattice(3);
  auto p = least_prefix_point<Mask>(lat, [](Mask x) { return x; });
  EXPECT_EQ(p.value, 0U);
}

TEST(LeastPrefixPoint, ConstantGivesItsValue) {
  auto lat = powerset_lattice(3);
  auto p = least_prefix_point<Mask>(lat, [](Mask) { return Mask{0b101}; });
  EXPECT_EQ(p.value, 0b101U);
}

TEST(LeastPrefixPoint, ReachabilityOnAChain) {
  // successor graph 0 -> 1 -> 2, seed {0}
  auto lat = powerset_lattice(4);
  auto f = [](Mask x) { return Mask{1} | ((x << 1) & 0b0111); };
  auto p = least_prefix_point<Mask>(lat, f);
  EXPECT_EQ(p.value, 0b0111U);
  EXPECT_EQ(p.iterations, 3U);
}

TEST(LeastPrefixPoint, BudgetExhaustionThrows) {
  Lattice<int> naturals;
  naturals.name = "naturals";
  naturals.leq = [](int a, int b) { return a <= b; };
  naturals.join = [](int a, int b) { return std::max(a, b); };
  EXPECT_THROW(least_prefix_point<int>(naturals, [](int x) { return x + 1; }, 50), IterationBudgetExceeded);
}

TEST(RightAdjoint, InclusionOfClosedSetsHasClosureAsAdjoint) {
  std::vector<Mask> closed;
  std::vector<Mask> all;
  for (Mask m = 0; m < 16; ++m) {
    all.push_back(m);
    if (is_down_set(m)) closed.push_back(m);
  }
  auto src = reverse_inclusion_lattice("closed", closed, 0b1111);
  auto dst = reverse_inclusion_lattice("subsets", all, 0b1111);
  auto g = right_adjoint<Mask, Mask>(src, dst, [](Mask c) { return c; });
  for (Mask u = 0; u < 16; ++u) EXPECT_EQ(g(u), closure_oracle(u)) << "u=" << u;
  EXPECT_TRUE((galois_law_holds<Mask, Mask>(src, dst, [](Mask c) { return c; }, g)));
}

TEST(RightAdjoint, IdentityIsSelfAdjoint) {
  auto lat = powerset_lattice(3);
  auto g = right_adjoint<Mask, Mask>(lat, lat, [](Mask x) { return x; });
  for (Mask x : lat.elements) EXPECT_EQ(g(x), x);
}

TEST(RightAdjoint, ThreeChainCollapsingMap) {
  auto chain = chain_lattice(3);
  MonotoneMap<int> f = [](int x) { return x == 0 ? 0 : 2; };
  auto g = right_adjoint<int, int>(chain, chain, f);
  // brute force: g(y) = max{x | f(x) <= y}
  for (int y = 0; y < 3; ++y) {
    int expect = 0;
    for (int x = 0; x < 3; ++x)
      if (f(x) <= y) expect = std::max(expect, x);
    EXPECT_EQ(g(y), expect);
  }
  EXPECT_EQ(g(0), 0);
  EXPECT_EQ(g(1), 0);
  EXPECT_EQ(g(2), 2);
  EXPECT_TRUE((galois_law_holds<int, int>(chain, chain, f, g)));
}

TEST(RightAdjoint, RejectsMapsThatBreakSups) {
  auto src = powerset_lattice(2);
  auto dst = chain_lattice(3);
  MonotoneMap<Mask, int> f = [](Mask x) { return std::popcount(x); };
  EXPECT_THROW((right_adjoint<Mask, int>(src, dst, f)), NotSupPreserving);
  MonotoneMap<Mask, int> lifts_bottom = [](Mask) { return 1; };
  EXPECT_THROW((right_adjoint<Mask, int>(src, dst, lifts_bottom)), NotSupPreserving);
}

TEST(RightAdjoint, AtomRouteOnLargeGridLattice) {
  Grid g({{0.0, 4.0}}, {16});
  auto lat = closed_set_lattice(g);
  ASSERT_FALSE(lat.enumerable());
  auto id = right_adjoint<GridSet, GridSet>(lat, lat, [](const GridSet& x) { return x; });
  GridSet y = GridSet::empty(g);
  y.insert(3);
  y.insert(9);
  EXPECT_EQ(id(y), y);
  EXPECT_EQ(id(GridSet::full(g)), GridSet::full(g));
}

TEST(StepMap, BottomSourceGivesConstant) {
  auto lat = powerset_lattice(3);
  auto s = step_map<Mask, Mask>(lat, lat, 0, 0b110);
  for (Mask x : lat.elements) EXPECT_EQ(s(x), 0b110U);
}

TEST(StepMap, BottomTargetGivesBottom) {
  auto lat = powerset_lattice(3);
  auto s = step_map<Mask, Mask>(lat, lat, 0b010, 0);
  for (Mask x : lat.elements) EXPECT_EQ(s(x), 0U);
}

TEST(StepMap, GridIntervalLattice) {
  Grid g({{0.0, 2.0}}, {8});
  auto lat = closed_set_lattice(g);
  auto cells = [&](double lo, double hi) { return rasterize(Region::of_box({{lo, hi}}), g, RasterMode::Outer); };
  auto s = step_map<GridSet, GridSet>(lat, lat, cells(0, 1), cells(0, 2));
  EXPECT_EQ(s(cells(0.25, 0.5)), cells(0, 2));
  EXPECT_EQ(s(cells(0, 1)), lat.bottom);
  // distinguishable target
  auto t = step_map<GridSet, GridSet>(lat, lat, cells(0, 1), cells(1, 2));
  EXPECT_EQ(t(cells(0.25, 0.5)), cells(1, 2));
  EXPECT_EQ(t(cells(0, 1)), GridSet::full(g));
}

TEST(Bca, IdentityOnContinuousFiniteLattices) {
  auto lat = powerset_lattice(3);
  auto b = bca<Mask, Mask>(lat, lat, [](Mask x) { return x; });
  for (Mask x : lat.elements) EXPECT_EQ(b(x), x);
  auto chain = chain_lattice(4);
  auto bc = bca<int, int>(chain, chain, [](int x) { return x; });
  for (int x : chain.elements) EXPECT_EQ(bc(x), x);
}

TEST(Bca, ConstantStaysConstant) {
  auto lat = powerset_lattice(3);
  auto b = bca<Mask, Mask>(lat, lat, [](Mask) { return Mask{0b011}; });
  for (Mask x : lat.elements) EXPECT_EQ(b(x), 0b011U);
}

TEST(Bca, IdentityOnGridIsWithinOneCell) {
  Grid g({{0.0, 2.0}, {0.0, 2.0}}, {10, 10});
  auto lat = closed_set_lattice(g);
  auto b = bca<GridSet, GridSet>(lat, lat, [](const GridSet& x) { return x; });
  GridSet x = rasterize(Region::of_box({{0.5, 1.0}, {0.2, 1.5}}), g, RasterMode::Outer);
  GridSet bx = b(x);
  EXPECT_TRUE(x.subset_of(bx));
  EXPECT_LE(hausdorff_cells(x, bx), 1.0 + 1e-12);
}

TEST(Monotone, DetectsAntitoneMap) {
  auto lat = powerset_lattice(2);
  EXPECT_TRUE((is_monotone<Mask, Mask>(lat, lat, [](Mask x) { return x; })));
  EXPECT_FALSE((is_monotone<Mask, Mask>(lat, lat, [](Mask x) { return Mask{0b11} & ~x; })));
}

TEST(GridLattices, SmallGridsEnumerateAndSatisfyLaws) {
  Grid g({{0.0, 1.0}, {0.0, 1.0}}, {2, 2});
  auto rev = closed_set_lattice(g);
  auto inc = inclusion_lattice(g);
  ASSERT_EQ(rev.elements.size(), 16U);
  for (const auto& a : rev.elements)
    for (const auto& b : rev.elements) {
      EXPECT_TRUE(rev.leq(a, rev.join(a, b)));
      EXPECT_TRUE(inc.leq(a, inc.join(a, b)));
      if (rev.way_below(a, b)) {
        EXPECT_TRUE(rev.leq(a, b));
      }
    }
  for (const auto& x : rev.elements) EXPECT_TRUE(rev.way_below(rev.bottom, x));
}

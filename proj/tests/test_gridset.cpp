#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "zenoreach/error.hpp"
#include "zenoreach/gridset.hpp"

using namespace zenoreach;

namespace {

Grid line8() { return Grid({{0.0, 2.0}}, {8}); }

GridSet cells_of(const Grid& g, std::initializer_list<std::size_t> cs) {
  GridSet s = GridSet::empty(g);
  for (auto c : cs) s.insert(c);
  return s;
}

GridSet outer(const Grid& g, Box b) { return rasterize(Region::of_box(std::move(b)), g, RasterMode::Outer); }

// Brute-force Hausdorff between cell centers.
double hausdorff_oracle(const GridSet& a, const GridSet& b) {
  auto directed = [](const GridSet& x, const GridSet& y) {
    double worst = 0;
    for (auto i : x.cells()) {
      double best = INFINITY;
      auto ci = x.grid().cell_center(i);
      for (auto j : y.cells()) {
        auto cj = y.grid().cell_center(j);
        double d = 0;
        for (std::size_t k = 0; k < ci.size(); ++k) d = std::max(d, std::abs(ci[k] - cj[k]));
        best = std::min(best, d);
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace

TEST(Grid, RejectsBadParameters) {
  EXPECT_THROW(Grid({{1.0, 1.0}}, {4}), BadParams);
  EXPECT_THROW(Grid({{0.0, 1.0}}, {0}), BadParams);
  EXPECT_THROW(Grid({{0.0, 1.0}}, {4, 4}), BadParams);
}

TEST(Grid, IndexingRoundTrips) {
  Grid g({{0.0, 1.0}, {-1.0, 1.0}, {0.0, 3.0}}, {3, 4, 5});
  EXPECT_EQ(g.cell_count(), 60U);
  for (std::size_t c = 0; c < g.cell_count(); ++c) EXPECT_EQ(g.linear(g.unravel(c)), c);
  std::vector<int> idx{1, 0, 0};
  EXPECT_EQ(g.linear(idx), 1U);
}

TEST(Grid, CoverUsesHalfOpenFaces) {
  Grid g = line8();
  EXPECT_EQ(g.cover(0, {1.0, 2.0}), (std::pair{4, 7}));
  EXPECT_EQ(g.cover(0, Interval{0.0}), (std::pair{0, 0}));
  EXPECT_EQ(g.cover(0, Interval{0.5}), (std::pair{2, 2}));
  EXPECT_EQ(g.cover(0, Interval{2.0}), (std::pair{7, 7}));
  EXPECT_EQ(g.cover(0, {0.3, 0.6}), (std::pair{1, 2}));
  EXPECT_EQ(g.cover(0, {-5.0, 0.1}), (std::pair{0, 0}));
  EXPECT_FALSE(g.cover(0, {2.5, 3.0}));
}

TEST(Rasterize, WholeBoxAndEmpty) {
  Grid g({{0.0, 1.0}, {0.0, 1.0}}, {4, 4});
  EXPECT_TRUE(rasterize(Region::everything(), g, RasterMode::Outer).is_full());
  EXPECT_TRUE(rasterize(Region::everything(), g, RasterMode::Inner).is_full());
  EXPECT_TRUE(rasterize(Region::of_box(g.box()), g, RasterMode::Inner).is_full());
  EXPECT_TRUE(rasterize(Region::nothing(), g, RasterMode::Outer).is_empty());
}

TEST(Rasterize, AlignedInterval) {
  Grid g = line8();
  auto expect = cells_of(g, {4, 5, 6, 7});
  EXPECT_EQ(rasterize(Region::of_box({{1.0, 2.0}}), g, RasterMode::Outer), expect);
  EXPECT_EQ(rasterize(Region::of_box({{1.0, 2.0}}), g, RasterMode::Inner), expect);
}

TEST(Rasterize, InnerIsInsideOuterAndClassifierAgrees) {
  Grid g({{0.0, 2.0}, {0.0, 2.0}}, {8, 8});
  Box b{{0.3, 1.1}, {0.5, 1.9}};
  auto out = rasterize(Region::of_box(b), g, RasterMode::Outer);
  auto in = rasterize(Region::of_box(b), g, RasterMode::Inner);
  EXPECT_TRUE(in.subset_of(out));
  Region via_classifier{Region::of_box(b).classify, std::nullopt};
  EXPECT_EQ(rasterize(via_classifier, g, RasterMode::Inner), in);
  // The classifier sees closed cells, so it may add face-touching cells.
  EXPECT_TRUE(out.subset_of(rasterize(via_classifier, g, RasterMode::Outer)));
  EXPECT_EQ(in.count(), 2U * 5U);
  EXPECT_EQ(out.count(), 4U * 6U);
}

TEST(Fatten, Examples) {
  Grid g = line8();
  EXPECT_TRUE(fatten(GridSet::empty(g), 0.7).is_empty());
  auto s = cells_of(g, {2, 5});
  EXPECT_EQ(fatten(s, 0.0), s);
  EXPECT_EQ(fatten(cells_of(g, {0}), 0.25), cells_of(g, {0, 1}));
  EXPECT_EQ(fatten(cells_of(g, {3}), 0.3), cells_of(g, {1, 2, 3, 4, 5}));
  EXPECT_THROW(fatten(s, -1.0), BadParams);
}

TEST(Dilate, ChebyshevNeighbourhoodAndErosion) {
  Grid g({{0.0, 1.0}, {0.0, 1.0}}, {5, 5});
  std::vector<int> mid{2, 2};
  GridSet s = GridSet::empty(g);
  s.insert(g.linear(mid));
  auto d = dilate(s, 1);
  EXPECT_EQ(d.count(), 9U);
  EXPECT_EQ(erode(d, 1), s);
  std::vector<int> aniso{2, 0};
  EXPECT_EQ(dilate(s, aniso).count(), 5U);
  EXPECT_TRUE(erode(GridSet::full(g), 3).is_full());
}

TEST(WayBelow, Examples) {
  Grid g = line8();
  auto a = outer(g, {{0.0, 1.0}});
  auto b = outer(g, {{0.25, 0.5}});
  EXPECT_TRUE(way_below(GridSet::full(g), a));
  EXPECT_TRUE(way_below(a, GridSet::empty(g)));
  EXPECT_TRUE(way_below(a, b));
  EXPECT_FALSE(way_below(a, a));
  EXPECT_THROW(way_below(a, GridSet::empty(Grid({{0.0, 2.0}}, {4}))), GridMismatch);
}

TEST(Hausdorff, Examples) {
  Grid g = line8();
  auto a = cells_of(g, {1, 4});
  EXPECT_DOUBLE_EQ(hausdorff(a, a), 0.0);
  EXPECT_DOUBLE_EQ(hausdorff(GridSet::empty(g), GridSet::empty(g)), 0.0);
  EXPECT_DOUBLE_EQ(hausdorff(cells_of(g, {0}), cells_of(g, {7})), 1.75);
  EXPECT_DOUBLE_EQ(hausdorff_cells(cells_of(g, {0}), cells_of(g, {7})), 7.0);
  EXPECT_THROW(hausdorff(a, GridSet::empty(g)), EmptyMismatch);
}

TEST(Hausdorff, MatchesBruteForceOnRandomMasks) {
  Grid g({{0.0, 1.0}, {0.0, 3.0}, {-1.0, 1.0}}, {5, 7, 4});
  std::mt19937_64 rng(7);
  std::bernoulli_distribution coin(0.15);
  for (int trial = 0; trial < 30; ++trial) {
    GridSet a = GridSet::empty(g), b = GridSet::empty(g);
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      if (coin(rng)) a.insert(c);
      if (coin(rng)) b.insert(c);
    }
    if (a.is_empty() || b.is_empty()) continue;
    EXPECT_NEAR(hausdorff(a, b), hausdorff_oracle(a, b), 1e-12);
  }
}

TEST(GridSet, PointMembershipIncludesSharedFaces) {
  Grid g = line8();
  auto s = cells_of(g, {3});
  double on_face = 1.0;
  double inside = 0.8;
  double outside = 1.3;
  EXPECT_TRUE(s.contains_point(std::span(&on_face, 1)));
  EXPECT_TRUE(s.contains_point(std::span(&inside, 1)));
  EXPECT_FALSE(s.contains_point(std::span(&outside, 1)));
}

TEST(GridSet, CsvRoundTrip) {
  Grid g({{0.0, 1.0}, {0.0, 2.0}}, {4, 3});
  auto s = cells_of(g, {0, 5, 11});
  std::stringstream io;
  write_csv(io, s);
  EXPECT_EQ(read_csv(io, g), s);
  std::stringstream bad("i0,i1\n9,0\n");
  EXPECT_THROW(read_csv(bad, g), ConfigError);
}

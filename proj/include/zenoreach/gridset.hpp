#pragma once

// Closed subsets of a compact box, represented as unions of closed grid
// cells. Cells are closed boxes and neighbours share faces, so any mask
// denotes a closed set. Conventions used everywhere:
//   empty mask = ∅   (top in reverse inclusion)
//   full mask  = box (bottom in reverse inclusion)
// Distances use the max norm.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "zenoreach/interval.hpp"
#include "zenoreach/lattice.hpp"

namespace zenoreach {

class Grid {
 public:
  Grid() = default;
  // Throws BadParams unless lower < upper and resolution ≥ 1 per dimension.
  Grid(Box box, std::vector<int> resolution);

  std::size_t dims() const { return box_.size(); }
  const Box& box() const { return box_; }
  const std::vector<int>& resolution() const { return res_; }
  int resolution(std::size_t d) const { return res_[d]; }
  double width(std::size_t d) const { return widths_[d]; }
  std::span<const double> widths() const { return widths_; }
  double max_width() const;
  std::size_t cell_count() const { return count_; }

  std::size_t linear(std::span<const int> idx) const;
  std::vector<int> unravel(std::size_t cell) const;
  Box cell_box(std::size_t cell) const;
  Interval cell_interval(std::size_t d, int i) const;
  std::vector<double> cell_center(std::size_t cell) const;

  // Coordinate of grid line k in dimension d (k = 0 .. resolution).
  double line(std::size_t d, int k) const;
  // Index of the grid line at x, if x sits on one (relative tolerance 1e-12).
  std::optional<int> line_index(std::size_t d, double x) const;

  // Smallest run of cells covering [lo, hi] ∩ box in dimension d, using the
  // half-open assignment of shared faces. Empty when disjoint from the box.
  std::optional<std::pair<int, int>> cover(std::size_t d, const Interval& iv) const;

  // Cell holding the point (half-open assignment, clamped at the upper face).
  std::optional<std::size_t> cell_of(std::span<const double> p) const;

  friend bool operator==(const Grid& a, const Grid& b) { return a.box_ == b.box_ && a.res_ == b.res_; }

 private:
  Box box_;
  std::vector<int> res_;
  std::vector<double> widths_;
  std::size_t count_ = 0;
};

class GridSet {
 public:
  GridSet() = default;
  explicit GridSet(Grid grid, bool full = false);

  static GridSet empty(const Grid& g) { return GridSet(g, false); }
  static GridSet full(const Grid& g) { return GridSet(g, true); }

  const Grid& grid() const { return grid_; }
  std::span<const std::uint8_t> mask() const { return mask_; }

  bool contains(std::size_t cell) const { return mask_[cell] != 0; }
  void insert(std::size_t cell) { mask_[cell] = 1; }
  void erase(std::size_t cell) { mask_[cell] = 0; }
  // Inserts the cells of a closed box (outer cover); ignores parts off-grid.
  void insert_box(const Box& b);

  bool is_empty() const;
  bool is_full() const;
  std::size_t count() const;
  std::vector<std::size_t> cells() const;

  // Denoted-set operations (mask OR / AND). Throw GridMismatch.
  GridSet& operator|=(const GridSet& o);
  GridSet& operator&=(const GridSet& o);
  friend GridSet operator|(GridSet a, const GridSet& b) { return a |= b; }
  friend GridSet operator&(GridSet a, const GridSet& b) { return a &= b; }
  GridSet complement() const;

  bool subset_of(const GridSet& o) const;
  bool contains_point(std::span<const double> p) const;

  friend bool operator==(const GridSet& a, const GridSet& b) {
    return a.grid_ == b.grid_ && a.mask_ == b.mask_;
  }

 private:
  Grid grid_;
  std::vector<std::uint8_t> mask_;
};

void require_same_grid(const GridSet& a, const GridSet& b);

enum class Relation { Disjoint, Intersects, Contains };

// A region given by a conservative classifier of closed boxes. When `box` is
// set the region is exactly that closed box and rasterization uses index
// arithmetic instead of the classifier.
struct Region {
  std::function<Relation(const Box&)> classify;
  std::optional<Box> box;

  static Region of_box(Box b);
  static Region nothing();
  static Region everything();
};

enum class RasterMode { Outer, Inner };

GridSet rasterize(const Region& region, const Grid& grid, RasterMode mode);

// Union of closed cells within max-norm distance δ (grid analogue of the
// closure of B(s, δ)), rounded outward to whole cells.
GridSet fatten(const GridSet& s, double delta);

// Dilation / erosion by k cells per dimension with a box structuring element,
// clipped to the grid.
GridSet dilate(const GridSet& s, std::span<const int> k);
GridSet dilate(const GridSet& s, int k);
GridSet erode(const GridSet& s, int k);

// a ≪ b in reverse inclusion: every cell of b together with all its
// neighbours inside the box belongs to a (conservative b ⊆ int(a)).
bool way_below(const GridSet& a, const GridSet& b);

// For every cell, max-norm distance from its center to the nearest center of
// an occupied cell of `target` (+inf when target is empty).
std::vector<double> distance_field(const GridSet& target);

// Symmetric Hausdorff distance between cell centers, max norm. The denoted
// sets differ from the centers by at most half a cell width, so the true
// distance lies within ±max_width of this value. Throws EmptyMismatch when
// exactly one side is empty.
double hausdorff(const GridSet& a, const GridSet& b);
// Same, in units of the widest cell.
double hausdorff_cells(const GridSet& a, const GridSet& b);

// Directed part: max over cells of a of the distance to b.
double directed_hausdorff(const GridSet& a, const GridSet& b);

// Lattice of grid sets in reverse inclusion: sup = intersection, way-below is
// the interior test, the cofinal part of ↡x is its one-cell dilation, and the
// atoms are the complements of single cells.
Lattice<GridSet> closed_set_lattice(const Grid& grid);
// Same carrier in inclusion order (the orientation fixed points run in).
Lattice<GridSet> inclusion_lattice(const Grid& grid);

// CSV: one row per occupied cell, per-dimension indices then per-dimension
// lower/upper coordinates, with a header row.
void write_csv(std::ostream& os, const GridSet& s);
GridSet read_csv(std::istream& is, const Grid& grid);

}  // namespace zenoreach

#include "zenoreach/gridset.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "zenoreach/error.hpp"

namespace zenoreach {

Grid::Grid(Box box, std::vector<int> resolution) : box_(std::move(box)), res_(std::move(resolution)) {
  if (box_.empty() || box_.size() != res_.size()) throw BadParams("grid: box and resolution dimensions differ");
  count_ = 1;
  for (std::size_t d = 0; d < box_.size(); ++d) {
    if (!(box_[d].lo < box_[d].hi)) throw BadParams("grid: lower bound must be below upper bound");
    if (res_[d] < 1) throw BadParams("grid: resolution must be at least 1");
    widths_.push_back((box_[d].hi - box_[d].lo) / res_[d]);
    count_ *= static_cast<std::size_t>(res_[d]);
  }
}

double Grid::max_width() const { return *std::max_element(widths_.begin(), widths_.end()); }

std::size_t Grid::linear(std::span<const int> idx) const {
  std::size_t out = 0;
  for (std::size_t d = dims(); d-- > 0;) out = out * static_cast<std::size_t>(res_[d]) + idx[d];
  return out;
}

std::vector<int> Grid::unravel(std::size_t cell) const {
  std::vector<int> idx(dims());
  for (std::size_t d = 0; d < dims(); ++d) {
    idx[d] = static_cast<int>(cell % res_[d]);
    cell /= res_[d];
  }
  return idx;
}

double Grid::line(std::size_t d, int k) const {
  if (k >= res_[d]) return box_[d].hi;
  return box_[d].lo + k * widths_[d];
}

Interval Grid::cell_interval(std::size_t d, int i) const { return {line(d, i), line(d, i + 1)}; }

Box Grid::cell_box(std::size_t cell) const {
  const auto idx = unravel(cell);
  Box b(dims());
  for (std::size_t d = 0; d < dims(); ++d) b[d] = cell_interval(d, idx[d]);
  return b;
}

std::vector<double> Grid::cell_center(std::size_t cell) const {
  const auto idx = unravel(cell);
  std::vector<double> c(dims());
  for (std::size_t d = 0; d < dims(); ++d) c[d] = box_[d].lo + (idx[d] + 0.5) * widths_[d];
  return c;
}

std::optional<int> Grid::line_index(std::size_t d, double x) const {
  if (!std::isfinite(x)) return std::nullopt;
  const double t = (x - box_[d].lo) / widths_[d];
  const double k = std::round(t);
  if (k < 0 || k > res_[d]) return std::nullopt;
  const double tol = 1e-12 * (std::abs(box_[d].lo) + std::abs(box_[d].hi) + 1.0);
  if (std::abs(line(d, static_cast<int>(k)) - x) <= tol) return static_cast<int>(k);
  return std::nullopt;
}

std::optional<std::pair<int, int>> Grid::cover(std::size_t d, const Interval& iv) const {
  const double lo = box_[d].lo;
  const double hi = box_[d].hi;
  if (iv.hi < lo || iv.lo > hi || iv.lo > iv.hi) return std::nullopt;
  const double a = std::max(iv.lo, lo);
  const double b = std::min(iv.hi, hi);
  const int last_cell = res_[d] - 1;
  int first = 0;
  if (auto k = line_index(d, a))
    first = *k;
  else
    first = static_cast<int>(std::floor((a - lo) / widths_[d]));
  int last = 0;
  if (auto k = line_index(d, b))
    last = *k - 1;
  else
    last = static_cast<int>(std::floor((b - lo) / widths_[d]));
  first = std::clamp(first, 0, last_cell);
  last = std::clamp(last, 0, last_cell);
  if (last < first) last = first;
  return std::pair{first, last};
}

std::optional<std::size_t> Grid::cell_of(std::span<const double> p) const {
  std::vector<int> idx(dims());
  for (std::size_t d = 0; d < dims(); ++d) {
    auto c = cover(d, Interval{p[d]});
    if (!c) return std::nullopt;
    idx[d] = c->first;
  }
  return linear(idx);
}

// ---------------------------------------------------------------------------

GridSet::GridSet(Grid grid, bool full) : grid_(std::move(grid)), mask_(grid_.cell_count(), full ? 1 : 0) {}

namespace {

// Calls fn(linear index) for every cell in the product of per-dimension runs.
template <class Fn>
void for_each_in_runs(const Grid& g, const std::vector<std::pair<int, int>>& runs, Fn&& fn) {
  std::vector<int> idx(g.dims());
  for (std::size_t d = 0; d < g.dims(); ++d) idx[d] = runs[d].first;
  while (true) {
    fn(g.linear(idx));
    std::size_t d = 0;
    for (; d < g.dims(); ++d) {
      if (idx[d] < runs[d].second) {
        ++idx[d];
        break;
      }
      idx[d] = runs[d].first;
    }
    if (d == g.dims()) return;
  }
}

std::vector<std::uint8_t> dilate_mask(const Grid& g, std::vector<std::uint8_t> mask, std::span<const int> k) {
  std::vector<std::uint8_t> out(mask.size());
  std::size_t stride = 1;
  for (std::size_t d = 0; d < g.dims(); ++d) {
    const int n = g.resolution(d);
    const int r = k[d];
    if (r > 0) {
      std::vector<int> prefix(n + 1);
      for (std::size_t base = 0; base < mask.size(); ++base) {
        // visit each line along d once, from its first cell
        if ((base / stride) % n != 0) continue;
        prefix[0] = 0;
        for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (mask[base + i * stride] ? 1 : 0);
        for (int i = 0; i < n; ++i) {
          const int a = std::max(0, i - r);
          const int b = std::min(n - 1, i + r);
          out[base + i * stride] = prefix[b + 1] - prefix[a] > 0 ? 1 : 0;
        }
      }
      mask.swap(out);
    }
    stride *= static_cast<std::size_t>(n);
  }
  return mask;
}

}  // namespace

void GridSet::insert_box(const Box& b) {
  std::vector<std::pair<int, int>> runs(grid_.dims());
  for (std::size_t d = 0; d < grid_.dims(); ++d) {
    auto c = grid_.cover(d, b[d]);
    if (!c) return;
    runs[d] = *c;
  }
  for_each_in_runs(grid_, runs, [&](std::size_t cell) { mask_[cell] = 1; });
}

bool GridSet::is_empty() const {
  return std::none_of(mask_.begin(), mask_.end(), [](std::uint8_t m) { return m != 0; });
}

bool GridSet::is_full() const {
  return std::all_of(mask_.begin(), mask_.end(), [](std::uint8_t m) { return m != 0; });
}

std::size_t GridSet::count() const {
  return static_cast<std::size_t>(std::count_if(mask_.begin(), mask_.end(), [](std::uint8_t m) { return m != 0; }));
}

std::vector<std::size_t> GridSet::cells() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask_.size(); ++i)
    if (mask_[i]) out.push_back(i);
  return out;
}

void require_same_grid(const GridSet& a, const GridSet& b) {
  if (!(a.grid() == b.grid())) throw GridMismatch("grid sets live on different grids");
}

GridSet& GridSet::operator|=(const GridSet& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < mask_.size(); ++i) mask_[i] |= o.mask_[i];
  return *this;
}

GridSet& GridSet::operator&=(const GridSet& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < mask_.size(); ++i) mask_[i] &= o.mask_[i];
  return *this;
}

GridSet GridSet::complement() const {
  GridSet out(*this);
  for (auto& m : out.mask_) m = m ? 0 : 1;
  return out;
}

bool GridSet::subset_of(const GridSet& o) const {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < mask_.size(); ++i)
    if (mask_[i] && !o.mask_[i]) return false;
  return true;
}

bool GridSet::contains_point(std::span<const double> p) const {
  // A point on a shared face belongs to every cell touching it.
  std::vector<std::pair<int, int>> runs(grid_.dims());
  for (std::size_t d = 0; d < grid_.dims(); ++d) {
    const auto& box = grid_.box()[d];
    if (p[d] < box.lo || p[d] > box.hi) return false;
    int i = std::clamp(static_cast<int>(std::floor((p[d] - box.lo) / grid_.width(d))), 0, grid_.resolution(d) - 1);
    runs[d] = {i, i};
    if (auto k = grid_.line_index(d, p[d]))
      runs[d] = {std::max(0, *k - 1), std::min(grid_.resolution(d) - 1, *k)};
  }
  bool hit = false;
  for_each_in_runs(grid_, runs, [&](std::size_t cell) { hit = hit || mask_[cell]; });
  return hit;
}

// ---------------------------------------------------------------------------

Region Region::of_box(Box b) {
  Region r;
  r.box = b;
  r.classify = [b = std::move(b)](const Box& cell) {
    auto i = intersect(cell, b);
    if (!i) return Relation::Disjoint;
    return box_contains(b, cell) ? Relation::Contains : Relation::Intersects;
  };
  return r;
}

Region Region::nothing() {
  return {[](const Box&) { return Relation::Disjoint; }, std::nullopt};
}

Region Region::everything() {
  return {[](const Box&) { return Relation::Contains; }, std::nullopt};
}

GridSet rasterize(const Region& region, const Grid& grid, RasterMode mode) {
  GridSet out = GridSet::empty(grid);
  if (region.box) {
    const Box& b = *region.box;
    if (mode == RasterMode::Outer) {
      out.insert_box(b);
      return out;
    }
    std::vector<std::pair<int, int>> runs(grid.dims());
    for (std::size_t d = 0; d < grid.dims(); ++d) {
      const double lo = grid.box()[d].lo;
      const double w = grid.width(d);
      int first = 0;
      if (auto k = grid.line_index(d, b[d].lo))
        first = *k;
      else
        first = static_cast<int>(std::ceil((b[d].lo - lo) / w));
      int past = 0;
      if (auto k = grid.line_index(d, b[d].hi))
        past = *k;
      else
        past = static_cast<int>(std::floor((b[d].hi - lo) / w));
      first = std::max(first, 0);
      past = std::min(past, grid.resolution(d));
      if (past <= first) return out;
      runs[d] = {first, past - 1};
    }
    for_each_in_runs(grid, runs, [&](std::size_t cell) { out.insert(cell); });
    return out;
  }
  for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
    const Relation rel = region.classify(grid.cell_box(cell));
    if (rel == Relation::Contains || (mode == RasterMode::Outer && rel == Relation::Intersects)) out.insert(cell);
  }
  return out;
}

GridSet dilate(const GridSet& s, std::span<const int> k) {
  GridSet out = GridSet::empty(s.grid());
  auto mask = dilate_mask(s.grid(), std::vector<std::uint8_t>(s.mask().begin(), s.mask().end()), k);
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.insert(i);
  return out;
}

GridSet dilate(const GridSet& s, int k) {
  std::vector<int> ks(s.grid().dims(), k);
  return dilate(s, ks);
}

GridSet erode(const GridSet& s, int k) { return dilate(s.complement(), k).complement(); }

GridSet fatten(const GridSet& s, double delta) {
  if (delta < 0) throw BadParams("fatten: delta must be nonnegative");
  std::vector<int> ks(s.grid().dims());
  for (std::size_t d = 0; d < ks.size(); ++d)
    ks[d] = static_cast<int>(std::ceil(delta / s.grid().width(d) - 1e-9));
  return dilate(s, ks);
}

bool way_below(const GridSet& a, const GridSet& b) {
  require_same_grid(a, b);
  return dilate(b, 1).subset_of(a);
}

std::vector<double> distance_field(const GridSet& target) {
  const Grid& g = target.grid();
  const std::size_t n_cells = g.cell_count();
  std::vector<double> dist(n_cells, kInf);
  std::vector<double> next(n_cells);
  std::size_t stride = 1;
  for (std::size_t d = 0; d < g.dims(); ++d) {
    const int n = g.resolution(d);
    const double w = g.width(d);
    std::vector<double> line(n);
    for (std::size_t base = 0; base < n_cells; ++base) {
      if ((base / stride) % n != 0) continue;
      for (int i = 0; i < n; ++i) line[i] = d == 0 ? (target.contains(base + i * stride) ? 0.0 : kInf) : dist[base + i * stride];
      if (d == 0) {
        // 1-D nearest occupied cell, two passes
        double run = kInf;
        for (int i = 0; i < n; ++i) {
          run = line[i] == 0.0 ? 0.0 : run + w;
          next[base + i * stride] = run;
        }
        run = kInf;
        for (int i = n; i-- > 0;) {
          run = line[i] == 0.0 ? 0.0 : run + w;
          next[base + i * stride] = std::min(next[base + i * stride], run);
        }
      } else {
        // min over j of max(previous distance at j, |i - j| w): the max norm
        // composes dimension by dimension
        for (int i = 0; i < n; ++i) {
          double best = kInf;
          for (int j = 0; j < n; ++j) {
            const double step = std::abs(i - j) * w;
            if (step >= best) {
              if (j > i) break;
              continue;
            }
            best = std::min(best, std::max(line[j], step));
          }
          next[base + i * stride] = best;
        }
      }
    }
    dist.swap(next);
    stride *= static_cast<std::size_t>(n);
  }
  return dist;
}

double directed_hausdorff(const GridSet& a, const GridSet& b) {
  require_same_grid(a, b);
  if (a.is_empty()) return 0.0;
  if (b.is_empty()) return kInf;
  const auto field = distance_field(b);
  double worst = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i)
    if (a.contains(i)) worst = std::max(worst, field[i]);
  return worst;
}

double hausdorff(const GridSet& a, const GridSet& b) {
  require_same_grid(a, b);
  const bool ea = a.is_empty();
  const bool eb = b.is_empty();
  if (ea && eb) return 0.0;
  if (ea != eb) throw EmptyMismatch("hausdorff: exactly one operand is empty");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double hausdorff_cells(const GridSet& a, const GridSet& b) { return hausdorff(a, b) / a.grid().max_width(); }

// ---------------------------------------------------------------------------

namespace {
constexpr std::size_t kEnumerableCells = 6;  // 2^6 = 64 elements

std::vector<GridSet> all_masks(const Grid& g) {
  std::vector<GridSet> out;
  const std::size_t n = g.cell_count();
  for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
    GridSet s = GridSet::empty(g);
    for (std::size_t i = 0; i < n; ++i)
      if (bits >> i & 1U) s.insert(i);
    out.push_back(std::move(s));
  }
  return out;
}
}  // namespace

Lattice<GridSet> closed_set_lattice(const Grid& grid) {
  Lattice<GridSet> lat;
  lat.name = "closed-sets(reverse inclusion)";
  lat.leq = [](const GridSet& a, const GridSet& b) { return b.subset_of(a); };
  lat.join = [](const GridSet& a, const GridSet& b) { return a & b; };
  lat.bottom = GridSet::full(grid);
  lat.top = GridSet::empty(grid);
  lat.way_below = [](const GridSet& a, const GridSet& b) { return way_below(a, b); };
  // ↡x has a largest element, the one-cell dilation of x.
  lat.way_below_cofinal = [](const GridSet& x) { return std::vector<GridSet>{dilate(x, 1)}; };
  lat.atom_count = grid.cell_count();
  lat.atom = [grid](std::size_t i) {
    GridSet s = GridSet::full(grid);
    s.erase(i);
    return s;
  };
  if (grid.cell_count() <= kEnumerableCells) {
    lat.elements = all_masks(grid);
    lat.base = lat.elements;
  }
  return lat;
}

Lattice<GridSet> inclusion_lattice(const Grid& grid) {
  Lattice<GridSet> lat;
  lat.name = "grid-sets(inclusion)";
  lat.leq = [](const GridSet& a, const GridSet& b) { return a.subset_of(b); };
  lat.join = [](const GridSet& a, const GridSet& b) { return a | b; };
  lat.bottom = GridSet::empty(grid);
  lat.top = GridSet::full(grid);
  lat.way_below = lat.leq;
  lat.atom_count = grid.cell_count();
  lat.atom = [grid](std::size_t i) {
    GridSet s = GridSet::empty(grid);
    s.insert(i);
    return s;
  };
  if (grid.cell_count() <= kEnumerableCells) {
    lat.elements = all_masks(grid);
    lat.base = lat.elements;
    lat.continuous = true;
  }
  return lat;
}

// ---------------------------------------------------------------------------

void write_csv(std::ostream& os, const GridSet& s) {
  const Grid& g = s.grid();
  for (std::size_t d = 0; d < g.dims(); ++d) os << (d ? "," : "") << 'i' << d;
  for (std::size_t d = 0; d < g.dims(); ++d) os << ",lo" << d << ",hi" << d;
  os << '\n';
  const auto old_precision = os.precision(17);
  for (std::size_t cell : s.cells()) {
    const auto idx = g.unravel(cell);
    for (std::size_t d = 0; d < g.dims(); ++d) os << (d ? "," : "") << idx[d];
    for (std::size_t d = 0; d < g.dims(); ++d) {
      const auto iv = g.cell_interval(d, idx[d]);
      os << ',' << iv.lo << ',' << iv.hi;
    }
    os << '\n';
  }
  os.precision(old_precision);
}

GridSet read_csv(std::istream& is, const Grid& grid) {
  GridSet out = GridSet::empty(grid);
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("grid csv: missing header");
  std::vector<int> idx(grid.dims());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    for (std::size_t d = 0; d < grid.dims(); ++d) {
      if (!std::getline(row, field, ',')) throw ConfigError("grid csv: short row");
      idx[d] = std::stoi(field);
      if (idx[d] < 0 || idx[d] >= grid.resolution(d)) throw ConfigError("grid csv: cell index out of range");
    }
    out.insert(grid.linear(idx));
  }
  return out;
}

}  // namespace zenoreach

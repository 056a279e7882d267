#pragma once

// Closed real intervals and axis-aligned boxes.
//
// Arithmetic is plain round-to-nearest: every enclosure built from these
// operations is later snapped outward to grid cells, and the cell slack
// dominates the rounding error by many orders of magnitude.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace zenoreach {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr Interval() = default;
  constexpr Interval(double point) : lo(point), hi(point) {}  // NOLINT: points are intervals
  constexpr Interval(double l, double h) : lo(l), hi(h) {}

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool degenerate() const { return lo == hi; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }

  friend bool operator==(const Interval&, const Interval&) = default;
};

inline Interval operator+(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Interval operator-(const Interval& a, const Interval& b) { return {a.lo - b.hi, a.hi - b.lo}; }
inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

namespace detail {
// 0 * inf is taken as 0: a zero factor pins the product regardless of the
// other operand's magnitude.
inline double mul0(double x, double y) {
  if (x == 0.0 || y == 0.0) return 0.0;
  return x * y;
}
}  // namespace detail

inline Interval operator*(const Interval& a, const Interval& b) {
  const double p[4] = {detail::mul0(a.lo, b.lo), detail::mul0(a.lo, b.hi), detail::mul0(a.hi, b.lo),
                       detail::mul0(a.hi, b.hi)};
  return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}

inline Interval hull(const Interval& a, const Interval& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

inline std::optional<Interval> intersect(const Interval& a, const Interval& b) {
  const double l = std::max(a.lo, b.lo);
  const double h = std::min(a.hi, b.hi);
  if (l > h) return std::nullopt;
  return Interval{l, h};
}

inline Interval inflate(const Interval& a, double r) { return {a.lo - r, a.hi + r}; }

inline Interval exp(const Interval& a) { return {std::exp(a.lo), std::exp(a.hi)}; }

inline Interval sqr(const Interval& a) {
  if (a.lo >= 0) return {a.lo * a.lo, a.hi * a.hi};
  if (a.hi <= 0) return {a.hi * a.hi, a.lo * a.lo};
  return {0.0, std::max(a.lo * a.lo, a.hi * a.hi)};
}

// Square root of the nonnegative part; nullopt when entirely negative.
inline std::optional<Interval> sqrt(const Interval& a) {
  if (a.hi < 0) return std::nullopt;
  return Interval{std::sqrt(std::max(0.0, a.lo)), std::sqrt(a.hi)};
}

using Box = std::vector<Interval>;

inline Box point_box(std::span<const double> p) { return Box(p.begin(), p.end()); }

inline bool box_contains(const Box& outer, const Box& inner) {
  for (std::size_t d = 0; d < outer.size(); ++d)
    if (!outer[d].contains(inner[d])) return false;
  return true;
}

inline bool box_contains(const Box& b, std::span<const double> p) {
  for (std::size_t d = 0; d < b.size(); ++d)
    if (!b[d].contains(p[d])) return false;
  return true;
}

inline std::optional<Box> intersect(const Box& a, const Box& b) {
  Box out(a.size());
  for (std::size_t d = 0; d < a.size(); ++d) {
    auto i = intersect(a[d], b[d]);
    if (!i) return std::nullopt;
    out[d] = *i;
  }
  return out;
}

inline Box hull(const Box& a, const Box& b) {
  Box out(a.size());
  for (std::size_t d = 0; d < a.size(); ++d) out[d] = hull(a[d], b[d]);
  return out;
}

inline Box inflate(const Box& b, double r) {
  Box out(b);
  for (auto& i : out) i = inflate(i, r);
  return out;
}

inline Box inflate(const Box& b, std::span<const double> r) {
  Box out(b);
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = inflate(out[d], r[d]);
  return out;
}

inline bool box_bounded(const Box& b) {
  return std::all_of(b.begin(), b.end(), [](const Interval& i) { return i.bounded(); });
}

}  // namespace zenoreach

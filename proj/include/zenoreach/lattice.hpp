#pragma once

// Finite complete lattices and the order-theoretic toolkit the analyses are
// built on: least prefix-points, right adjoints of sup-preserving maps, step
// maps and the best continuous approximation computed from a base.
//
// A Lattice value carries its order as data. Orientation matters: fixed
// points of transition operators are taken in the inclusion order, while the
// approximation machinery works in reverse inclusion (a smaller
// over-approximation is more informative). Each instance fixes one.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zenoreach/error.hpp"

namespace zenoreach {

template <class X, class Y = X>
using MonotoneMap = std::function<Y(const X&)>;

template <class T>
struct Lattice {
  std::string name;
  std::function<bool(const T&, const T&)> leq;
  std::function<T(const T&, const T&)> join;
  T bottom{};
  T top{};
  // Instance-supplied; must imply leq and contain (bottom, x) for every x.
  std::function<bool(const T&, const T&)> way_below;

  // Whole carrier, when small enough to enumerate. Empty otherwise.
  std::vector<T> elements;
  // Explicit base (enumerable instances only).
  std::vector<T> base;
  // For non-enumerable instances: a subfamily of base ∩ ↡x that is cofinal
  // in it, so sups of monotone images over it equal sups over all of it.
  std::function<std::vector<T>(const T&)> way_below_cofinal;

  // Atom generator, for atomistic lattices too large to enumerate: every
  // element is the sup of the atoms below it.
  std::size_t atom_count = 0;
  std::function<T(std::size_t)> atom;

  // True when x = ⊔(base ∩ ↡x) holds for every x.
  bool continuous = false;

  bool enumerable() const { return !elements.empty(); }

  bool equal(const T& a, const T& b) const { return leq(a, b) && leq(b, a); }

  T sup(std::span<const T> xs) const {
    T acc = bottom;
    for (const auto& x : xs) acc = join(acc, x);
    return acc;
  }

  // base ∩ ↡x (or a cofinal part of it).
  std::vector<T> way_below_base(const T& x) const {
    if (way_below_cofinal) return way_below_cofinal(x);
    std::vector<T> out;
    for (const auto& b : base)
      if (way_below(b, x)) out.push_back(b);
    return out;
  }
};

template <class T>
struct PrefixPoint {
  T value;
  std::size_t iterations = 0;
};

inline constexpr std::size_t kDefaultIterationBudget = 1'000'000;

// Least x with f(x) ≤ x, by the ascending iteration x₀ = ⊥, x' = x ⊔ f(x).
template <class T>
PrefixPoint<T> least_prefix_point(const Lattice<T>& lat, const MonotoneMap<T>& f,
                                  std::size_t max_iters = kDefaultIterationBudget) {
  T x = lat.bottom;
  for (std::size_t k = 0; k < max_iters; ++k) {
    T next = lat.join(x, f(x));
    if (lat.leq(next, x)) return {std::move(x), k};
    x = std::move(next);
  }
  throw IterationBudgetExceeded("least_prefix_point: no stabilization within " +
                                std::to_string(max_iters) + " steps on lattice '" + lat.name + "'");
}

// Sampling source for lattices that cannot be enumerated.
template <class T>
struct Sampler {
  std::function<T(std::mt19937_64&)> draw;
  std::size_t count = 0;
  std::uint64_t seed = 1;
};

// Throws NotSupPreserving on the first counterexample found. Enumerable
// sources are checked on ⊥ and all binary joins, which on a finite lattice
// covers every sup.
template <class X, class Y>
void check_sup_preserving(const Lattice<X>& src, const Lattice<Y>& dst, const MonotoneMap<X, Y>& f,
                          const Sampler<X>* sampler = nullptr) {
  if (!dst.equal(f(src.bottom), dst.bottom))
    throw NotSupPreserving("map does not send bottom to bottom on '" + src.name + "'");
  auto check_pair = [&](const X& a, const X& b) {
    if (!dst.equal(f(src.join(a, b)), dst.join(f(a), f(b))))
      throw NotSupPreserving("map does not preserve a binary sup on '" + src.name + "'");
  };
  if (src.enumerable()) {
    for (const auto& a : src.elements)
      for (const auto& b : src.elements) check_pair(a, b);
    return;
  }
  if (sampler == nullptr) return;
  std::mt19937_64 rng(sampler->seed);
  for (std::size_t i = 0; i < sampler->count; ++i) check_pair(sampler->draw(rng), sampler->draw(rng));
}

// Right adjoint f^R(y) = ⊔{x | f(x) ≤ y} of a sup-preserving map.
template <class X, class Y>
MonotoneMap<Y, X> right_adjoint(const Lattice<X>& src, const Lattice<Y>& dst, MonotoneMap<X, Y> f,
                                const Sampler<X>* sampler = nullptr) {
  check_sup_preserving(src, dst, f, sampler);
  if (src.enumerable()) {
    return [src, dst, f](const Y& y) {
      X acc = src.bottom;
      for (const auto& x : src.elements)
        if (dst.leq(f(x), y)) acc = src.join(acc, x);
      return acc;
    };
  }
  if (src.atom_count > 0 && src.atom) {
    // The set {x | f(x) ≤ y} is closed under sups, so its top is the sup of
    // the atoms it contains.
    std::vector<Y> atom_images;
    atom_images.reserve(src.atom_count);
    for (std::size_t i = 0; i < src.atom_count; ++i) atom_images.push_back(f(src.atom(i)));
    return [src, dst, atom_images = std::move(atom_images)](const Y& y) {
      X acc = src.bottom;
      for (std::size_t i = 0; i < atom_images.size(); ++i)
        if (dst.leq(atom_images[i], y)) acc = src.join(acc, src.atom(i));
      return acc;
    };
  }
  throw NotSupPreserving("right_adjoint: lattice '" + src.name + "' is neither enumerable nor atomistic");
}

// [x, y](x') = y when x ≪ x', else ⊥.
template <class X, class Y>
MonotoneMap<X, Y> step_map(const Lattice<X>& src, const Lattice<Y>& dst, X x, Y y) {
  return [wb = src.way_below, bot = dst.bottom, x = std::move(x), y = std::move(y)](const X& arg) {
    return wb(x, arg) ? y : bot;
  };
}

// ⊔{f(b) | b in the base, b ≪ x}: the best continuous approximation of f at x.
template <class X, class Y>
Y bca_via_base(const Lattice<X>& src, const Lattice<Y>& dst, const MonotoneMap<X, Y>& f, const X& x) {
  Y acc = dst.bottom;
  for (const auto& b : src.way_below_base(x)) acc = dst.join(acc, f(b));
  return acc;
}

template <class X, class Y>
MonotoneMap<X, Y> bca(const Lattice<X>& src, const Lattice<Y>& dst, MonotoneMap<X, Y> f) {
  return [src, dst, f = std::move(f)](const X& x) { return bca_via_base(src, dst, f, x); };
}

template <class X, class Y>
bool is_monotone(const Lattice<X>& src, const Lattice<Y>& dst, const MonotoneMap<X, Y>& f) {
  for (const auto& a : src.elements)
    for (const auto& b : src.elements)
      if (src.leq(a, b) && !dst.leq(f(a), f(b))) return false;
  return true;
}

// ∀x,y. x ≤ g(y) ⟺ f(x) ≤ y, over the enumerated carriers.
template <class X, class Y>
bool galois_law_holds(const Lattice<X>& src, const Lattice<Y>& dst, const MonotoneMap<X, Y>& f,
                      const MonotoneMap<Y, X>& g) {
  for (const auto& x : src.elements)
    for (const auto& y : dst.elements)
      if (src.leq(x, g(y)) != dst.leq(f(x), y)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Small enumerable instances. Finite lattices are algebraic: way-below is the
// order itself and the whole carrier is a base.

using Mask = std::uint32_t;

namespace detail {
template <class T>
void make_finite(Lattice<T>& lat) {
  lat.way_below = lat.leq;
  lat.base = lat.elements;
  lat.continuous = true;
}
}  // namespace detail

// All subsets of an n-point set, ordered by inclusion.
inline Lattice<Mask> powerset_lattice(unsigned n) {
  Lattice<Mask> lat;
  lat.name = "powerset(" + std::to_string(n) + ")";
  lat.leq = [](Mask a, Mask b) { return (a & ~b) == 0; };
  lat.join = [](Mask a, Mask b) { return a | b; };
  lat.bottom = 0;
  lat.top = n >= 32 ? ~Mask{0} : (Mask{1} << n) - 1;
  for (Mask m = 0; m <= lat.top; ++m) {
    lat.elements.push_back(m);
    if (m == lat.top) break;
  }
  detail::make_finite(lat);
  return lat;
}

// A family of subsets closed under intersection and containing `universe`,
// ordered by reverse inclusion (sup = intersection, ⊥ = universe, ⊤ = ∅).
inline Lattice<Mask> reverse_inclusion_lattice(std::string name, std::vector<Mask> family, Mask universe) {
  Lattice<Mask> lat;
  lat.name = std::move(name);
  lat.leq = [](Mask a, Mask b) { return (b & ~a) == 0; };
  lat.join = [](Mask a, Mask b) { return a & b; };
  lat.bottom = universe;
  lat.top = 0;
  lat.elements = std::move(family);
  detail::make_finite(lat);
  return lat;
}

// The chain 0 < 1 < ... < k-1.
inline Lattice<int> chain_lattice(int k) {
  Lattice<int> lat;
  lat.name = "chain(" + std::to_string(k) + ")";
  lat.leq = [](int a, int b) { return a <= b; };
  lat.join = [](int a, int b) { return a < b ? b : a; };
  lat.bottom = 0;
  lat.top = k - 1;
  for (int i = 0; i < k; ++i) lat.elements.push_back(i);
  detail::make_finite(lat);
  return lat;
}

}  // namespace zenoreach

#include "zenoreach/hybrid.hpp"

#include <algorithm>
#include <istream>
#include <iterator>
#include <sstream>

#include "json.hpp"

#include "zenoreach/error.hpp"

namespace zenoreach {

namespace {

const std::vector<double>& no_bound() {
  static const std::vector<double> empty;
  return empty;
}

Box prepend(const Interval& t, const Box& s) {
  Box out;
  out.reserve(s.size() + 1);
  out.push_back(t);
  out.insert(out.end(), s.begin(), s.end());
  return out;
}

Box tail_of(const Box& ts) { return Box(ts.begin() + 1, ts.end()); }

// Guard/reset rules equivalent to the system's raw relation.
std::vector<JumpRule> rules_of(const HybridSystem& h) {
  std::vector<JumpRule> rules = h.jumps;
  if (h.raw_jumps) {
    const auto& raw = *h.raw_jumps;
    for (const auto& [src, dst] : raw.pairs) {
      Box target = raw.grid.cell_box(dst);
      rules.push_back({raw.grid.cell_box(src), [target](const Box&) -> std::optional<Box> { return target; }, "raw"});
    }
  }
  return rules;
}

bool contains_tol(const Box& outer, const Box& inner) {
  constexpr double tol = 1e-12;
  for (std::size_t d = 0; d < outer.size(); ++d)
    if (inner[d].lo < outer[d].lo - tol || inner[d].hi > outer[d].hi + tol) return false;
  return true;
}

}  // namespace

std::optional<Box> HybridSystem::velocity(const Box& x) const {
  if (!flow) return std::nullopt;
  return flow->velocity(x);
}

std::span<const double> HybridSystem::velocity_bound() const {
  return flow ? std::span<const double>(flow->velocity_bound) : std::span<const double>(no_bound());
}

std::vector<Box> HybridSystem::jump_targets(const Box& x) const {
  std::vector<Box> out;
  for (const auto& rule : jumps) {
    auto in = intersect(x, rule.guard);
    if (!in) continue;
    if (auto r = rule.reset(*in)) out.push_back(std::move(*r));
  }
  if (raw_jumps) {
    for (const auto& [src, dst] : raw_jumps->pairs)
      if (intersect(x, raw_jumps->grid.cell_box(src))) out.push_back(raw_jumps->grid.cell_box(dst));
  }
  return out;
}

RawJumps raw_jumps_from_product(const GridSet& product, std::size_t n) {
  const Grid& pg = product.grid();
  if (pg.dims() != 2 * n) throw BadParams("raw jumps: product grid must have twice the state dimension");
  Box box(pg.box().begin(), pg.box().begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<int> res(pg.resolution().begin(), pg.resolution().begin() + static_cast<std::ptrdiff_t>(n));
  RawJumps raw{Grid(box, res), {}};
  for (std::size_t cell : product.cells()) {
    auto idx = pg.unravel(cell);
    std::vector<int> src(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<int> dst(idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end());
    raw.pairs.emplace_back(raw.grid.linear(src), raw.grid.linear(dst));
  }
  return raw;
}

double default_dt(const HybridSystem& h, const Grid& g) {
  double dt = kInf;
  auto vb = h.velocity_bound();
  for (std::size_t d = 0; d < vb.size() && d < g.dims(); ++d)
    if (vb[d] > 0) dt = std::min(dt, g.width(d) / vb[d]);
  return std::isfinite(dt) ? 0.5 * dt : 0.5 * g.max_width();
}

GridSet jump_post(const HybridSystem& h, const GridSet& s) {
  GridSet out = GridSet::empty(s.grid());
  for (std::size_t cell : s.cells())
    for (const auto& target : h.jump_targets(s.grid().cell_box(cell))) out.insert_box(target);
  return out;
}

std::optional<Box> flow_step_box(const HybridSystem& h, const Box& x, double dt) {
  if (!h.flow) return std::nullopt;
  if (h.flow->domain.classify && h.flow->domain.classify(x) == Relation::Disjoint) return std::nullopt;
  const auto vb = h.velocity_bound();
  std::vector<double> pad(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) pad[d] = d < vb.size() ? dt * vb[d] : 0.0;
  auto eval = intersect(inflate(x, pad), h.window);
  if (!eval) return std::nullopt;
  auto v = h.flow->velocity(*eval);
  if (!v) return std::nullopt;
  Box out(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) out[d] = x[d] + Interval{0.0, dt} * (*v)[d];
  return out;
}

GridSet flow_step(const HybridSystem& h, const GridSet& s, double dt) {
  if (!(dt > 0)) throw BadParams("flow_step: dt must be positive");
  const auto vb = h.velocity_bound();
  for (std::size_t d = 0; d < vb.size() && d < h.window.size(); ++d)
    if (dt * vb[d] > h.window[d].width())
      throw StepTooLarge("flow_step: dt times the velocity bound exceeds the window in dimension " +
                         std::to_string(d));
  GridSet out = s;
  for (std::size_t cell : s.cells())
    if (auto b = flow_step_box(h, s.grid().cell_box(cell), dt)) out.insert_box(*b);
  return out;
}

GridSet transition_post(const HybridSystem& h, const GridSet& s, double dt) {
  GridSet out = s | jump_post(h, s);
  if (h.has_flow()) out |= flow_step(h, s, dt);
  return out;
}

GridSet transition_post(const HybridSystem& h, const GridSet& s) {
  return transition_post(h, s, default_dt(h, s.grid()));
}

GridSet support(const HybridSystem& h, const Grid& grid) {
  GridSet out = GridSet::empty(grid);
  if (h.flow) out |= rasterize(h.flow->domain, grid, RasterMode::Outer);
  for (const auto& rule : rules_of(h)) {
    auto g = intersect(rule.guard, h.window);
    if (!g) continue;
    out.insert_box(*g);
    if (auto r = rule.reset(*g)) out.insert_box(*r);
  }
  return out;
}

HybridSystem clock_extend(const HybridSystem& h, double t_max) {
  if (!(t_max > 0)) throw BadParams("clock_extend: t_max must be positive");
  const Interval clock{0.0, t_max};
  HybridSystem out;
  out.name = h.name + "+clock";
  out.dimension = h.dimension + 1;
  out.window = prepend(clock, h.window);
  if (h.flow) {
    auto base = h.flow;
    auto f = std::make_shared<FlowModel>();
    f->velocity = [base, clock](const Box& ts) -> std::optional<Box> {
      if (!intersect(ts[0], clock)) return std::nullopt;
      auto v = base->velocity(tail_of(ts));
      if (!v) return std::nullopt;
      return prepend(Interval{1.0}, *v);
    };
    if (base->solution) {
      f->solution = [base, clock](const Box& ts, const Interval& T) -> std::optional<Box> {
        auto span = intersect(T, Interval{0.0, clock.hi - ts[0].lo});
        if (!span) return std::nullopt;
        auto t = intersect(ts[0] + *span, clock);
        if (!t) return std::nullopt;
        auto s = base->solution(tail_of(ts), *span);
        if (!s) return std::nullopt;
        return prepend(*t, *s);
      };
    }
    if (base->contract) {
      f->contract = [base](const Box& cand, const Box& seed) -> std::optional<Box> {
        auto s = base->contract(tail_of(cand), tail_of(seed));
        if (!s) return std::nullopt;
        return prepend(cand[0], *s);
      };
    }
    f->domain.classify = [base, clock](const Box& ts) {
      auto t = intersect(ts[0], clock);
      if (!t) return Relation::Disjoint;
      const Relation r = base->domain.classify ? base->domain.classify(tail_of(ts)) : Relation::Contains;
      if (r == Relation::Contains && !clock.contains(ts[0])) return Relation::Intersects;
      return r;
    };
    if (base->domain.box) f->domain.box = prepend(clock, *base->domain.box);
    f->velocity_bound = {1.0};
    f->velocity_bound.insert(f->velocity_bound.end(), base->velocity_bound.begin(), base->velocity_bound.end());
    out.flow = std::move(f);
  }
  for (const auto& rule : rules_of(h)) {
    auto reset = rule.reset;
    out.jumps.push_back({prepend(clock, rule.guard),
                         [reset](const Box& ts) -> std::optional<Box> {
                           auto r = reset(tail_of(ts));
                           if (!r) return std::nullopt;
                           return prepend(ts[0], *r);
                         },
                         rule.label});
  }
  return out;
}

HybridSystem fatten_system(const HybridSystem& h, double delta, const HardConstraint& hc) {
  if (delta < 0) throw BadParams("fatten_system: delta must be nonnegative");
  if (delta == 0) return h;
  const HybridSystem& h0 = hc.h0;
  HybridSystem out;
  out.name = h.name + "+delta";
  out.dimension = h.dimension;
  out.window = h.window;
  if (h.flow && h0.flow) {
    if (h.flow == h0.flow) {
      out.flow = h.flow;  // F_δ ∩ F₀ = F when F₀ = F
    } else {
      auto base = h.flow;
      auto bound = h0.flow;
      auto f = std::make_shared<FlowModel>();
      f->velocity = [base, bound, delta](const Box& x) -> std::optional<Box> {
        auto cap = bound->velocity(x);
        if (!cap) return std::nullopt;
        auto v = base->velocity(x);
        if (!v) v = base->velocity(inflate(x, delta));
        if (!v) return std::nullopt;
        return intersect(inflate(*v, delta), *cap);
      };
      f->domain.classify = [base, bound, delta](const Box& x) {
        const Relation outer = bound->domain.classify ? bound->domain.classify(x) : Relation::Contains;
        if (outer == Relation::Disjoint) return outer;
        if (base->domain.classify && base->domain.classify(inflate(x, delta)) == Relation::Disjoint)
          return Relation::Disjoint;
        return Relation::Intersects;
      };
      f->velocity_bound = bound->velocity_bound;
      for (std::size_t d = 0; d < f->velocity_bound.size() && d < base->velocity_bound.size(); ++d)
        f->velocity_bound[d] = std::min(f->velocity_bound[d], base->velocity_bound[d] + delta);
      out.flow = std::move(f);
    }
  }
  const auto mine = rules_of(h);
  const auto allowed = rules_of(h0);
  for (const auto& j : mine) {
    for (const auto& k : allowed) {
      auto guard = intersect(k.guard, inflate(j.guard, delta));
      if (!guard) continue;
      out.jumps.push_back({*guard,
                           [gj = j.guard, rj = j.reset, gk = k.guard, rk = k.reset,
                            delta](const Box& x) -> std::optional<Box> {
                             auto near = intersect(inflate(x, delta), gj);
                             if (!near) return std::nullopt;
                             auto r = rj(*near);
                             if (!r) return std::nullopt;
                             auto in = intersect(x, gk);
                             if (!in) return std::nullopt;
                             auto cap = rk(*in);
                             if (!cap) return std::nullopt;
                             return intersect(inflate(*r, delta), *cap);
                           },
                           j.label + "/" + k.label});
    }
  }
  return out;
}

bool refines(const HybridSystem& h, const HardConstraint& hc, int probe_resolution) {
  const HybridSystem& h0 = hc.h0;
  Grid probe(h.window, std::vector<int>(h.dimension, probe_resolution));
  for (std::size_t cell = 0; cell < probe.cell_count(); ++cell) {
    const Box b = probe.cell_box(cell);
    if (auto v = h.velocity(b)) {
      auto v0 = h0.velocity(b);
      if (!v0 || !contains_tol(*v0, *v)) return false;
    }
    const auto targets = h.jump_targets(b);
    if (targets.empty()) continue;
    const auto allowed = h0.jump_targets(b);
    for (const auto& t : targets) {
      const bool covered =
          std::any_of(allowed.begin(), allowed.end(), [&](const Box& a) { return contains_tol(a, t); });
      if (!covered) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

double number(const json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ConfigError(std::string("jump system: expected a number for ") + what);
}

Box read_box(const json& j, std::size_t n, const char* what) {
  if (!j.is_array() || j.size() != n) throw ConfigError(std::string("jump system: bad ") + what);
  Box b;
  for (const auto& iv : j) {
    if (!iv.is_array() || iv.size() != 2) throw ConfigError(std::string("jump system: bad interval in ") + what);
    b.push_back({number(iv[0], what), number(iv[1], what)});
    if (b.back().lo > b.back().hi) throw ConfigError(std::string("jump system: empty interval in ") + what);
  }
  return b;
}

}  // namespace

HybridSystem parse_jump_system(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("jump system: ") + e.what());
  }
  if (!doc.contains("dimension") || !doc["dimension"].is_number_unsigned())
    throw ConfigError("jump system: missing dimension");
  const auto n = doc["dimension"].get<std::size_t>();
  if (n == 0 || n > 3) throw ConfigError("jump system: dimension must be 1, 2 or 3");
  HybridSystem h;
  h.name = doc.value("name", std::string("json"));
  h.dimension = n;
  h.window = read_box(doc.at("box"), n, "box");
  if (!box_bounded(h.window)) throw ConfigError("jump system: box must be bounded");
  for (const auto& jr : doc.value("jumps", json::array())) {
    Box guard = read_box(jr.at("guard_box"), n, "guard_box");
    const auto& reset = jr.at("reset");
    if (reset.value("kind", std::string()) != "affine") throw ConfigError("jump system: only affine resets");
    const auto& m = reset.at("matrix");
    const auto& off = reset.at("offset");
    if (!m.is_array() || m.size() != n || !off.is_array() || off.size() != n)
      throw ConfigError("jump system: affine reset has wrong shape");
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!m[i].is_array() || m[i].size() != n) throw ConfigError("jump system: affine matrix row has wrong size");
      for (std::size_t k = 0; k < n; ++k) a[i][k] = number(m[i][k], "matrix");
      b[i] = number(off[i], "offset");
    }
    h.jumps.push_back({std::move(guard),
                       [a, b](const Box& x) -> std::optional<Box> {
                         Box y(x.size());
                         for (std::size_t i = 0; i < x.size(); ++i) {
                           Interval acc{b[i]};
                           for (std::size_t k = 0; k < x.size(); ++k) acc = acc + Interval{a[i][k]} * x[k];
                           y[i] = acc;
                         }
                         return y;
                       },
                       jr.value("label", std::string("affine"))});
  }
  return h;
}

HybridSystem load_jump_system(std::istream& is) {
  std::string text{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  return parse_jump_system(text);
}

}  // namespace zenoreach

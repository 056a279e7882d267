#include "zenoreach/systems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "zenoreach/error.hpp"

namespace zenoreach {

namespace {

double param(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

// Closed-form one-dimensional flow ṁ = sign·m on [0, cap].
std::shared_ptr<FlowModel> linear_flow(double sign, double cap, bool keep_cap) {
  auto f = std::make_shared<FlowModel>();
  const Interval dom{0.0, cap};
  f->velocity = [dom, sign](const Box& x) -> std::optional<Box> {
    auto m = intersect(x[0], dom);
    if (!m) return std::nullopt;
    return Box{Interval{sign} * *m};
  };
  f->solution = [dom, sign, keep_cap](const Box& x, const Interval& T) -> std::optional<Box> {
    auto m = intersect(x[0], dom);
    if (!m) return std::nullopt;
    Interval factor = sign > 0 ? exp(T) : exp(-T);
    Interval out = *m * factor;
    if (keep_cap && m->hi >= dom.hi) out.lo = std::min(out.lo, dom.hi);
    auto clipped = intersect(out, dom);
    if (!clipped) return std::nullopt;
    return Box{*clipped};
  };
  f->domain = Region::of_box({dom});
  f->velocity_bound = {cap};
  return f;
}

// F₀ = [0, cap] × [-cap, cap].
std::shared_ptr<FlowModel> slack_flow(double cap) {
  auto f = std::make_shared<FlowModel>();
  const Interval dom{0.0, cap};
  f->velocity = [dom, cap](const Box& x) -> std::optional<Box> {
    if (!intersect(x[0], dom)) return std::nullopt;
    return Box{Interval{-cap, cap}};
  };
  f->domain = Region::of_box({dom});
  f->velocity_bound = {cap};
  return f;
}

std::optional<Box> constant_reset(const Box& target) { return target; }

// Range of v·τ - τ²/2 over τ ∈ T for a fixed v, with T ⊆ [0, inf].
Interval fall_offset(double v, const Interval& T) {
  auto g = [v](double t) { return v * t - 0.5 * t * t; };
  const double peak_t = std::clamp(v, T.lo, T.hi);
  const double hi = std::isfinite(peak_t) ? g(peak_t) : -kInf;
  const double lo = std::isfinite(T.hi) ? std::min(g(T.lo), g(T.hi)) : -kInf;
  return {std::min(lo, hi), hi};
}

BuiltSystem bouncing_ball(Params p, Variant variant) {
  const double b = param(p, "b", -0.5);
  const double V = param(p, "V", 2.0);
  const double V0 = param(p, "V0", 3.0);
  const bool relaxed = param(p, "relaxed", 0.0) != 0.0;
  const bool compact = param(p, "compact", 1.0) != 0.0;
  if (!(V > 0 && V0 > V)) throw BadParams("bouncing_ball: need V0 > V > 0");
  if (compact && std::abs(b) > 1) throw BadParams("bouncing_ball: the compact system needs |b| <= 1");
  const double E0 = compact ? energy(0, V0) : std::max(energy(0, V0), param(p, "E_max", 50.0));
  const double Vw = std::sqrt(2 * E0);
  p["b"] = b;
  p["V"] = V;
  p["V0"] = V0;
  p["relaxed"] = relaxed ? 1 : 0;
  p["compact"] = compact ? 1 : 0;

  const Box window{{0.0, E0}, {-Vw, Vw}};
  const Region s0 = energy_band(0.0, E0);

  auto f = std::make_shared<FlowModel>();
  f->domain = s0;
  f->velocity = [s0, Vw](const Box& x) -> std::optional<Box> {
    if (s0.classify(x) == Relation::Disjoint) return std::nullopt;
    auto v = intersect(x[1], Interval{-Vw, Vw});
    if (!v) return std::nullopt;
    return Box{*v, Interval{-1.0}};
  };
  f->solution = [window](const Box& x, const Interval& T) -> std::optional<Box> {
    auto h0 = intersect(x[0], window[0]);
    if (!h0) return std::nullopt;
    const Interval lo = fall_offset(x[1].lo, T);
    const Interval hi = fall_offset(x[1].hi, T);
    // v·τ - τ²/2 is increasing in v for τ ≥ 0
    Interval h = *h0 + Interval{lo.lo, hi.hi};
    Interval v = x[1] - T;
    return intersect(Box{h, v}, window);
  };
  f->contract = [](const Box& cand, const Box& seed) -> std::optional<Box> {
    const Interval e = seed[0] + sqr(seed[1]) * Interval{0.5};
    auto speed = sqrt(Interval{2.0} * (e - cand[0]));
    if (!speed) return std::nullopt;
    Interval v = cand[1];
    std::optional<Interval> vv;
    if (v.lo >= 0)
      vv = intersect(v, *speed);
    else if (v.hi <= 0)
      vv = intersect(v, -*speed);
    else
      vv = intersect(v, Interval{-speed->hi, speed->hi});
    if (!vv) return std::nullopt;
    auto h = intersect(cand[0], e - sqr(*vv) * Interval{0.5});
    if (!h) return std::nullopt;
    return Box{*h, *vv};
  };
  f->velocity_bound = {Vw, 1.0};

  HybridSystem h;
  h.name = "bouncing_ball";
  h.dimension = 2;
  h.window = window;
  h.flow = f;
  const Box bounce_guard{Interval{0.0}, {-Vw, 0.0}};
  const Box kick_guard{Interval{0.0}, Interval{0.0}};
  const Box kick_target{Interval{0.0}, Interval{V}};
  h.jumps.push_back({bounce_guard,
                     [b](const Box& x) -> std::optional<Box> {
                       return Box{Interval{0.0}, Interval{b} * x[1]};
                     },
                     "bounce"});
  h.jumps.push_back({kick_guard, [kick_target](const Box&) { return constant_reset(kick_target); }, "kick"});
  if (variant == Variant::ClosureVariant)
    h.jumps.push_back({kick_guard, [kick_guard](const Box&) { return constant_reset(kick_guard); }, "rest"});

  HybridSystem h0 = h;
  h0.name = relaxed ? "bouncing_ball/H0'" : "bouncing_ball/H0";
  h0.jumps.clear();
  h0.jumps.push_back({bounce_guard,
                      [relaxed, V0](const Box& x) -> std::optional<Box> {
                        if (relaxed) return Box{Interval{0.0}, Interval{-V0, V0}};
                        return Box{Interval{0.0}, Interval{x[1].lo, -x[1].lo}};
                      },
                      "bounce0"});
  h0.jumps.push_back({kick_guard, [kick_target](const Box&) { return constant_reset(kick_target); }, "kick"});
  if (variant == Variant::ClosureVariant) h0.jumps.push_back(h.jumps.back());
  return {SystemKind::BouncingBall, std::move(p), std::move(h), {std::move(h0)}};
}

}  // namespace

double energy(double h, double v) { return h + v * v / 2; }

Region energy_band(double lo, double hi) {
  Region r;
  r.classify = [lo, hi](const Box& b) {
    auto h = intersect(b[0], Interval{0.0, kInf});
    if (!h) return Relation::Disjoint;
    const Interval e = *h + sqr(b[1]) * Interval{0.5};
    if (e.hi < lo || e.lo > hi) return Relation::Disjoint;
    if (b[0].lo >= 0 && e.lo >= lo && e.hi <= hi) return Relation::Contains;
    return Relation::Intersects;
  };
  return r;
}

SystemKind parse_kind(const std::string& name) {
  if (name == "expand") return SystemKind::Expand;
  if (name == "decay") return SystemKind::Decay;
  if (name == "bouncing_ball" || name == "bb" || name == "bouncingball") return SystemKind::BouncingBall;
  if (name == "ce1" || name == "counterexample1") return SystemKind::Counterexample1;
  if (name == "ce2" || name == "counterexample2") return SystemKind::Counterexample2;
  if (name == "ce3" || name == "counterexample3") return SystemKind::Counterexample3;
  throw BadParams("unknown system kind '" + name + "'");
}

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::Expand: return "expand";
    case SystemKind::Decay: return "decay";
    case SystemKind::BouncingBall: return "bouncing_ball";
    case SystemKind::Counterexample1: return "ce1";
    case SystemKind::Counterexample2: return "ce2";
    case SystemKind::Counterexample3: return "ce3";
  }
  return "?";
}

Analysis parse_analysis(const std::string& name) {
  if (name == "Sf" || name == "sf" || name == "rf") return Analysis::Sf;
  if (name == "Ss" || name == "ss" || name == "rs") return Analysis::Ss;
  if (name == "Sr" || name == "sr") return Analysis::Sr;
  if (name == "SR" || name == "robust") return Analysis::SR;
  throw BadParams("unknown analysis '" + name + "'");
}

std::string to_string(Analysis a) {
  switch (a) {
    case Analysis::Sf: return "Sf";
    case Analysis::Ss: return "Ss";
    case Analysis::Sr: return "Sr";
    case Analysis::SR: return "SR";
  }
  return "?";
}

BuiltSystem make_system(SystemKind kind, const Params& params, Variant variant) {
  Params p = params;
  const bool closure = variant == Variant::ClosureVariant;
  switch (kind) {
    case SystemKind::Expand:
    case SystemKind::Decay: {
      const double M = param(p, "M", 2.0);
      if (!(M > 0) || !std::isfinite(M)) throw BadParams("M must be positive");
      p["M"] = M;
      HybridSystem h;
      h.dimension = 1;
      h.window = {{0.0, M}};
      HybridSystem h0;
      h0.dimension = 1;
      h0.window = h.window;
      h0.flow = slack_flow(M);
      if (kind == SystemKind::Expand) {
        h.name = "expand";
        h.flow = linear_flow(1.0, M, closure);
        h0.name = "expand/H0";
      } else {
        h.name = "decay";
        h.flow = linear_flow(-1.0, M, false);
        const Box target{Interval{M}};
        h.jumps.push_back({{Interval{0.0}}, [target](const Box&) { return constant_reset(target); }, "refill"});
        h0.name = "decay/H0";
        const Box all{{0.0, M}};
        h0.jumps.push_back({all, [all](const Box&) { return constant_reset(all); }, "any"});
      }
      return {kind, std::move(p), std::move(h), {std::move(h0)}};
    }
    case SystemKind::BouncingBall:
      return bouncing_ball(std::move(p), variant);
    case SystemKind::Counterexample1: {
      HybridSystem h;
      h.name = "ce1";
      h.dimension = 1;
      h.window = {{0.0, 2.5}};
      h.jumps.push_back({{{0.0, kInf}},
                         [](const Box& x) -> std::optional<Box> { return Box{Interval{0.5} * x[0]}; },
                         "halve"});
      const Box two{Interval{2.0}};
      h.jumps.push_back({{Interval{0.0}}, [two](const Box&) { return constant_reset(two); }, "restart"});
      HybridSystem h0 = h;
      return {kind, std::move(p), std::move(h), {std::move(h0)}};
    }
    case SystemKind::Counterexample2: {
      HybridSystem h;
      h.name = "ce2";
      h.dimension = 1;
      h.window = {{0.0, 4.0}};
      const Box ray{{2.0, kInf}};
      h.jumps.push_back({{Interval{2.0}}, [ray](const Box&) { return constant_reset(ray); }, "spread"});
      h.jumps.push_back({{{2.0, kInf}},
                         [](const Box& x) -> std::optional<Box> {
                           return Box{Interval{1.0 / x[0].hi, 1.0 / x[0].lo}};
                         },
                         "invert"});
      const Box one{Interval{1.0}};
      h.jumps.push_back({{Interval{0.0}}, [one](const Box&) { return constant_reset(one); }, "restart"});
      HybridSystem h0 = h;
      return {kind, std::move(p), std::move(h), {std::move(h0)}};
    }
    case SystemKind::Counterexample3: {
      HybridSystem h;
      h.name = "ce3";
      h.dimension = 1;
      h.window = {{0.0, 2.5}};
      h.flow = linear_flow(-1.0, 2.5, false);
      const Box two{Interval{2.0}};
      h.jumps.push_back({{Interval{0.0}}, [two](const Box&) { return constant_reset(two); }, "restart"});
      HybridSystem h0 = h;
      return {kind, std::move(p), std::move(h), {std::move(h0)}};
    }
  }
  throw BadParams("unknown system kind");
}

// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void no_oracle(SystemKind kind, Analysis a, const std::string& why) {
  throw NoOracle("no closed form for " + to_string(kind) + "/" + to_string(a) + ": " + why);
}

struct OracleBuilder {
  const Grid& grid;
  GridSet out;

  explicit OracleBuilder(const Grid& g) : grid(g), out(GridSet::empty(g)) {}

  void interval(double lo, double hi) { out.insert_box({{lo, hi}}); }
  void point(double x) { out.insert_box({Interval{x}}); }
  void region(const Region& r) { out |= rasterize(r, grid, RasterMode::Outer); }
  void level(double u) {
    const double e = energy(0, u);
    region(energy_band(e, e));
  }
  // S(|b|^n u) for n ≥ 0 until the speed drops below one cell.
  void level_family(double b, double u) {
    for (double s = u; std::abs(s) >= grid.max_width(); s *= b) {
      level(s);
      if (std::abs(b) >= 1) break;
    }
  }
  // S'(b, u) = {(0, -b^n u)}.
  void slowdowns(double b, double u) {
    for (double s = u; std::abs(s) >= grid.max_width(); s *= b) out.insert_box({Interval{0.0}, Interval{-s}});
  }
  void ground(double lo, double hi) { out.insert_box({Interval{0.0}, {lo, hi}}); }
};

}  // namespace

GridSet oracle_set(SystemKind kind, const Params& params, const std::vector<double>& initial, Analysis a,
                   const Grid& grid) {
  const BuiltSystem sys = make_system(kind, params);
  if (initial.size() != sys.system.dimension) no_oracle(kind, a, "initial state has the wrong dimension");
  if (grid.dims() != sys.system.dimension) throw GridMismatch("oracle grid dimension differs from the system");
  OracleBuilder ob(grid);
  switch (kind) {
    case SystemKind::Expand: {
      const double M = sys.params.at("M");
      const double m0 = initial[0];
      if (m0 < 0 || m0 > M) no_oracle(kind, a, "start outside [0, M]");
      if (m0 > 0 || a == Analysis::Sr || a == Analysis::SR)
        ob.interval(m0, M);
      else
        ob.point(0.0);
      break;
    }
    case SystemKind::Decay: {
      const double M = sys.params.at("M");
      const double m0 = initial[0];
      if (m0 < 0 || m0 > M) no_oracle(kind, a, "start outside [0, M]");
      if (a == Analysis::Sf && m0 > 0)
        ob.interval(0.0, m0);  // closure of (0, m0]
      else
        ob.interval(0.0, M);
      break;
    }
    case SystemKind::BouncingBall: {
      const double b = sys.params.at("b");
      const double V = sys.params.at("V");
      const double V0 = sys.params.at("V0");
      const bool relaxed = sys.params.at("relaxed") != 0;
      const double v0 = initial[1];
      if (initial[0] != 0 || !(v0 > 0 && v0 < V)) no_oracle(kind, a, "start must be (0, v0) with 0 < v0 < V");
      if (relaxed && a == Analysis::SR) {
        if (b == -1) {
          ob.region(energy_band(0, energy(0, V0)));
        } else if (b == 1) {
          ob.level(v0);
          ob.level(V);
          ob.ground(-V0, 0);
        } else {
          no_oracle(kind, a, "relaxed hard constraint listed only for |b| = 1");
        }
        break;
      }
      const bool widened = a == Analysis::SR;
      if (b == -1) {
        if (widened)
          ob.region(energy_band(0, energy(0, V)));
        else
          ob.level(v0);
      } else if (b > -1 && b < 0) {
        ob.level_family(b, v0);
        if (a != Analysis::Sf) {
          ob.level(0);
          ob.level_family(b, V);
        }
      } else if (b == 0) {
        ob.level(v0);
        ob.level(0);
        ob.level(V);
      } else if (b > 0 && b < 1) {
        ob.level(v0);
        ob.slowdowns(b, v0);
        if (a != Analysis::Sf) {
          ob.level(0);
          ob.level(V);
          ob.slowdowns(b, V);
        }
      } else if (b == 1) {
        ob.level(v0);
        if (widened) {
          ob.level(V);
          ob.ground(-V, 0);
        }
      } else {
        no_oracle(kind, a, "compact system requires |b| <= 1");
      }
      break;
    }
    case SystemKind::Counterexample1: {
      if (initial[0] != 1) no_oracle(kind, a, "listed for I = {1} only");
      if (a == Analysis::Sr || a == Analysis::SR) no_oracle(kind, a, "only Rf and Rs are listed");
      for (double x = 1; x >= grid.max_width(); x /= 2) ob.point(x);
      if (a == Analysis::Ss) {
        ob.point(0);
        ob.point(2);
      }
      break;
    }
    case SystemKind::Counterexample2: {
      if (initial[0] != 2) no_oracle(kind, a, "listed for I = {2} only");
      if (a == Analysis::Sr || a == Analysis::SR) no_oracle(kind, a, "only Rf and Rs are listed");
      // clipped at the window: the ray [2, inf) becomes [2, 4] and 1/x covers
      // [1/4, 1/2], so neither 0 nor 1 is reached
      ob.interval(2, 4);
      ob.interval(0.25, 0.5);
      break;
    }
    case SystemKind::Counterexample3: {
      if (initial[0] != 1) no_oracle(kind, a, "listed for I = {1} only");
      if (a == Analysis::Sr || a == Analysis::SR) no_oracle(kind, a, "only Rf and Rs are listed");
      if (a == Analysis::Sf)
        ob.interval(0, 1);  // closure of (0, 1]
      else
        ob.interval(0, 2);
      break;
    }
  }
  return ob.out;
}

}  // namespace zenoreach

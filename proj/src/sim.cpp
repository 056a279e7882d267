#include "zenoreach/sim.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <random>

#include "json.hpp"

namespace zenoreach {

namespace {

double max_norm_diff(const State& a, const State& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

State clamp_to(const State& x, const Box& b) {
  State y(x);
  for (std::size_t d = 0; d < y.size(); ++d) y[d] = std::clamp(y[d], b[d].lo, b[d].hi);
  return y;
}

// Picks a point of a box at fixed per-dimension fractions (0.5 = midpoint).
State pick(const Box& b, const std::vector<double>& frac) {
  State s(b.size());
  for (std::size_t d = 0; d < b.size(); ++d) {
    if (!b[d].bounded()) {
      s[d] = std::isfinite(b[d].lo) ? b[d].lo : (std::isfinite(b[d].hi) ? b[d].hi : 0.0);
    } else {
      s[d] = b[d].degenerate() ? b[d].lo : b[d].lo + frac[d] * (b[d].hi - b[d].lo);
    }
  }
  return s;
}

struct JumpChoice {
  State target;
  std::string label;
};

class Stepper {
 public:
  Stepper(const HybridSystem& h, const SimOptions& opts)
      : h_(h), opts_(opts), rng_(opts.seed), frac_(h.dimension, 0.5) {}

  void refresh_selection() {
    if (!opts_.random_selection) return;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& f : frac_) f = u(rng_);
  }

  bool in_domain(const State& x) const {
    return box_contains(h_.window, x) && h_.velocity(point_box(x)).has_value();
  }

  // Velocity selection, evaluated at the state pulled back into the window
  // so that RK stages slightly past a boundary stay defined.
  std::optional<State> field(const State& x) const {
    auto v = h_.velocity(point_box(clamp_to(x, h_.window)));
    if (!v) return std::nullopt;
    return pick(*v, frac_);
  }

  std::optional<State> rk4(const State& x, double dt) const {
    const std::size_t n = x.size();
    auto axpy = [n](const State& a, double s, const State& b) {
      State out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + s * b[i];
      return out;
    };
    auto k1 = field(x);
    if (!k1) return std::nullopt;
    auto k2 = field(axpy(x, dt / 2, *k1));
    if (!k2) return std::nullopt;
    auto k3 = field(axpy(x, dt / 2, *k2));
    if (!k3) return std::nullopt;
    auto k4 = field(axpy(x, dt, *k3));
    if (!k4) return std::nullopt;
    State out(n);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = x[i] + dt / 6 * ((*k1)[i] + 2 * (*k2)[i] + 2 * (*k3)[i] + (*k4)[i]);
    return out;
  }

  // First jump whose guard holds at x (within tolerance) and whose target
  // differs from the state.
  std::optional<JumpChoice> jump_at(const State& x, double tol) {
    for (const auto& rule : h_.jumps) {
      if (!box_contains(inflate(rule.guard, tol), x)) continue;
      const State xc = clamp_to(x, rule.guard);
      auto r = rule.reset(point_box(xc));
      if (!r) continue;
      State y = pick(*r, jump_frac());
      if (y == xc) continue;
      return JumpChoice{std::move(y), rule.label};
    }
    if (h_.raw_jumps) {
      const auto& raw = *h_.raw_jumps;
      for (const auto& [src, dst] : raw.pairs) {
        if (!box_contains(inflate(raw.grid.cell_box(src), tol), x)) continue;
        State y = raw.grid.cell_center(dst);
        if (max_norm_diff(y, x) == 0) continue;
        return JumpChoice{std::move(y), "raw"};
      }
    }
    return std::nullopt;
  }

 private:
  std::vector<double> jump_frac() {
    if (!opts_.random_selection) return std::vector<double>(h_.dimension, 0.5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> f(h_.dimension);
    for (auto& v : f) v = u(rng_);
    return f;
  }

  const HybridSystem& h_;
  const SimOptions& opts_;
  std::mt19937_64 rng_;
  std::vector<double> frac_;
};

struct JumpLog {
  std::vector<double> times;
  std::vector<State> states;
};

ZenoReport detect_on(const JumpLog& log, std::size_t window, double tol_time) {
  ZenoReport z;
  const std::size_t n = log.times.size();
  if (window < 3 || n < window + 1) return z;
  const std::size_t first = n - window - 1;
  std::vector<double> dwell;
  std::vector<double> step;
  for (std::size_t i = first + 1; i < n; ++i) {
    dwell.push_back(log.times[i] - log.times[i - 1]);
    step.push_back(max_norm_diff(log.states[i], log.states[i - 1]));
  }
  const State& last = log.states[n - 1];
  const State& prev = log.states[n - 2];
  auto extrapolate = [&](double r) {
    State p(last.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = last[i] + (last[i] - prev[i]) * r / (1 - r);
    return p;
  };
  const bool all_instant = std::all_of(dwell.begin(), dwell.end(), [&](double d) { return d <= tol_time; });
  if (all_instant) {
    for (std::size_t i = 1; i < step.size(); ++i)
      if (!(step[i] < step[i - 1]) || step[i] <= 0) return z;
    const double r = step.back() / step[step.size() - 2];
    z.is_zeno = true;
    z.kind = ZenoKind::Chattering;
    z.zeno_time = log.times.back();
    z.zeno_point = extrapolate(r);
    z.jump_count_in_window = window;
    return z;
  }
  std::vector<double> ratios;
  for (std::size_t i = 1; i < dwell.size(); ++i) {
    if (!(dwell[i] < dwell[i - 1]) || dwell[i] <= tol_time) return z;
    ratios.push_back(dwell[i] / dwell[i - 1]);
  }
  const double r = ratios.back();
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  if (*hi - *lo > 0.05 || r >= 1) return z;
  // remaining time of the geometric tail must be resolvable
  const double remaining = dwell.back() * r / (1 - r);
  if (!std::isfinite(remaining)) return z;
  z.is_zeno = true;
  z.kind = ZenoKind::AccumulatingBounces;
  z.zeno_time = log.times.back() + remaining;
  z.zeno_point = extrapolate(r);
  z.jump_count_in_window = window;
  return z;
}

}  // namespace

std::vector<State> Trajectory::states() const {
  std::vector<State> out{start};
  for (const auto& s : segments) {
    if (s.kind == SegmentKind::Flow)
      out.insert(out.end(), s.samples.begin() + (s.samples.empty() ? 0 : 1), s.samples.end());
    else
      out.push_back(s.end);
  }
  return out;
}

SimResult simulate(const HybridSystem& h, const State& start, const SimOptions& opts) {
  SimResult res;
  Trajectory& tr = res.trajectory;
  tr.start = start;
  Stepper stepper(h, opts);

  double step = opts.step;
  if (step <= 0) {
    double cw = opts.cell_width > 0 ? opts.cell_width : h.window[0].width() / 256;
    double vmax = 0;
    for (double v : h.velocity_bound()) vmax = std::max(vmax, v);
    step = vmax > 0 ? std::min(0.01, cw / vmax) : 0.01;
  }

  State x = start;
  double t = 0;
  JumpLog epoch;
  bool reported = false;

  auto push_flow = [&](Segment& seg, double t_end, const State& x_end) {
    seg.duration = t_end - seg.t0;
    seg.end = x_end;
    if (seg.duration > 0) tr.segments.push_back(std::move(seg));
  };

  while (true) {
    if (tr.transition_count >= opts.max_transitions) {
      tr.termination = Termination::TransitionLimit;
      break;
    }
    if (auto j = stepper.jump_at(x, opts.event_tol)) {
      if (!box_contains(inflate(h.window, opts.event_tol), j->target)) {
        tr.termination = Termination::OutOfWindow;
        break;
      }
      Segment seg;
      seg.kind = SegmentKind::Jump;
      seg.start = x;
      seg.end = j->target;
      seg.t0 = t;
      seg.label = j->label;
      tr.segments.push_back(std::move(seg));
      x = j->target;
      ++tr.transition_count;
      epoch.times.push_back(t);
      epoch.states.push_back(x);
      ZenoReport z = detect_on(epoch, opts.zeno_window, opts.zeno_tol_time);
      if (z.is_zeno) {
        if (!reported) {
          res.zeno = z;
          reported = true;
        }
        if (opts.continue_past_zeno && z.zeno_time <= opts.t_max) {
          Segment lim;
          lim.kind = SegmentKind::Limit;
          lim.start = x;
          lim.end = z.zeno_point;
          lim.t0 = t;
          lim.duration = z.zeno_time - t;
          tr.segments.push_back(lim);
          t = z.zeno_time;
          x = z.zeno_point;
          epoch = {};
          continue;
        }
        tr.termination = Termination::Zeno;
        break;
      }
      continue;
    }
    if (t >= opts.t_max) {
      tr.termination = Termination::TimeLimit;
      break;
    }
    if (!stepper.in_domain(x)) {
      tr.termination = Termination::Stuck;
      break;
    }

    stepper.refresh_selection();
    Segment seg;
    seg.kind = SegmentKind::Flow;
    seg.start = x;
    seg.t0 = t;
    seg.sample_times.push_back(t);
    seg.samples.push_back(x);
    auto event = [&](const std::optional<State>& y) {
      if (!y || !stepper.in_domain(*y)) return true;
      return stepper.jump_at(*y, 0.0).has_value();
    };
    bool stuck = false;
    while (t < opts.t_max) {
      const double dt = std::min(step, opts.t_max - t);
      auto y = stepper.rk4(x, dt);
      if (!event(y)) {
        t += dt;
        x = *y;
        seg.sample_times.push_back(t);
        seg.samples.push_back(x);
        continue;
      }
      double lo = 0, hi = dt;
      while (hi - lo > opts.event_tol) {
        const double mid = 0.5 * (lo + hi);
        if (event(stepper.rk4(x, mid)))
          hi = mid;
        else
          lo = mid;
      }
      auto y_hi = stepper.rk4(x, hi);
      std::optional<State> landing;
      if (y_hi) {
        State yc = clamp_to(*y_hi, h.window);
        if (stepper.jump_at(yc, opts.event_tol)) landing = yc;
      }
      if (landing) {
        t += hi;
        x = *landing;
      } else {
        if (auto y_lo = stepper.rk4(x, lo)) x = *y_lo;
        t += lo;
        stuck = true;
      }
      if (t > seg.sample_times.back()) {
        seg.sample_times.push_back(t);
        seg.samples.push_back(x);
      }
      break;
    }
    push_flow(seg, t, x);
    if (stuck) {
      tr.termination = Termination::Stuck;
      break;
    }
    if (t > seg.t0) ++tr.transition_count;
  }
  tr.total_time = t;
  return res;
}

ZenoReport detect_zeno(const Trajectory& traj, std::size_t window, double tol_time) {
  JumpLog log;
  for (const auto& s : traj.segments) {
    if (s.kind == SegmentKind::Limit) {
      log = {};
      continue;
    }
    if (s.kind != SegmentKind::Jump) continue;
    log.times.push_back(s.t0);
    log.states.push_back(s.end);
    ZenoReport z = detect_on(log, window, tol_time);
    if (z.is_zeno) return z;
  }
  return {};
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::TimeLimit: return "time_limit";
    case Termination::TransitionLimit: return "transition_limit";
    case Termination::Zeno: return "zeno";
    case Termination::Stuck: return "stuck";
    case Termination::OutOfWindow: return "out_of_window";
  }
  return "?";
}

std::string to_string(ZenoKind k) {
  switch (k) {
    case ZenoKind::None: return "none";
    case ZenoKind::AccumulatingBounces: return "accumulating-bounces";
    case ZenoKind::Chattering: return "chattering";
  }
  return "?";
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t n = traj.start.size();
  os << 't';
  for (std::size_t i = 0; i < n; ++i) os << ",x" << i;
  os << ",segment,kind\n";
  const auto old = os.precision(17);
  auto row = [&](double t, const State& x, long seg, const char* kind) {
    os << t;
    for (double v : x) os << ',' << v;
    os << ',' << seg << ',' << kind << '\n';
  };
  row(0.0, traj.start, -1, "start");
  for (std::size_t i = 0; i < traj.segments.size(); ++i) {
    const auto& s = traj.segments[i];
    const long idx = static_cast<long>(i);
    switch (s.kind) {
      case SegmentKind::Flow:
        for (std::size_t k = 1; k < s.samples.size(); ++k) row(s.sample_times[k], s.samples[k], idx, "flow");
        break;
      case SegmentKind::Jump:
        row(s.t0, s.end, idx, "jump");
        break;
      case SegmentKind::Limit:
        row(s.t0 + s.duration, s.end, idx, "limit");
        break;
    }
  }
  os.precision(old);
}

std::string zeno_json(const ZenoReport& z, const Trajectory& traj) {
  nlohmann::json j;
  j["is_zeno"] = z.is_zeno;
  j["kind"] = to_string(z.kind);
  j["zeno_time"] = z.is_zeno ? nlohmann::json(z.zeno_time) : nlohmann::json(nullptr);
  j["zeno_point"] = z.is_zeno ? nlohmann::json(z.zeno_point) : nlohmann::json(nullptr);
  j["jump_count_in_window"] = z.jump_count_in_window;
  j["termination"] = to_string(traj.termination);
  j["total_time"] = traj.total_time;
  j["transition_count"] = traj.transition_count;
  return j.dump(2);
}

}  // namespace zenoreach

#include "zenoreach/reach.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <ostream>
#include <set>
#include <thread>

#include "zenoreach/error.hpp"

namespace zenoreach {

namespace {

using Clock = std::chrono::steady_clock;

unsigned thread_count(unsigned requested) {
  unsigned n = requested;
  if (n == 0) {
    n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ZENOREACH_THREADS")) {
      const int v = std::atoi(env);
      if (v >= 1) n = std::min(n, static_cast<unsigned>(v));
    }
  }
  return std::max(1u, n);
}

// Per dimension a piece is either grid line k (index 2k) or cell j (index
// 2j + 1). Pieces are the exact start sets of the engine.
class PieceSpace {
 public:
  explicit PieceSpace(const Grid& g) : g_(g), stride_(g.dims()) {
    size_ = 1;
    for (std::size_t d = 0; d < g.dims(); ++d) {
      stride_[d] = size_;
      size_ *= static_cast<std::size_t>(2 * g.resolution(d) + 1);
    }
  }

  std::size_t size() const { return size_; }

  Box box(std::size_t id) const {
    Box out(g_.dims());
    for (std::size_t d = 0; d < g_.dims(); ++d) {
      const int p = static_cast<int>(id % static_cast<std::size_t>(2 * g_.resolution(d) + 1));
      id /= static_cast<std::size_t>(2 * g_.resolution(d) + 1);
      out[d] = p % 2 == 0 ? Interval(g_.line(d, p / 2)) : g_.cell_interval(d, p / 2);
    }
    return out;
  }

  std::size_t of_cell(std::size_t cell) const {
    const auto idx = g_.unravel(cell);
    std::size_t id = 0;
    for (std::size_t d = 0; d < idx.size(); ++d) id += static_cast<std::size_t>(2 * idx[d] + 1) * stride_[d];
    return id;
  }

  // Appends the pieces covering b ∩ grid box.
  void snap(const Box& b, std::vector<std::size_t>& out) const {
    const std::size_t n = g_.dims();
    std::vector<int> lo(n), hi(n);
    for (std::size_t d = 0; d < n; ++d) {
      auto iv = intersect(b[d], g_.box()[d]);
      if (!iv) return;
      const auto kl = g_.line_index(d, iv->lo);
      if (kl && iv->width() <= 1e-12 * (std::abs(iv->lo) + std::abs(iv->hi) + 1.0) &&
          g_.line_index(d, iv->hi) == kl) {
        lo[d] = hi[d] = 2 * *kl;
        continue;
      }
      auto c = g_.cover(d, *iv);
      if (!c) return;
      lo[d] = 2 * c->first + 1;
      hi[d] = 2 * c->second + 1;
    }
    std::vector<int> p = lo;
    for (;;) {
      std::size_t id = 0;
      for (std::size_t d = 0; d < n; ++d) id += static_cast<std::size_t>(p[d]) * stride_[d];
      out.push_back(id);
      std::size_t d = 0;
      for (; d < n; ++d) {
        const int step = lo[d] % 2 == 0 ? 1 : 2;
        if (p[d] + step <= hi[d]) {
          p[d] += step;
          break;
        }
        p[d] = lo[d];
      }
      if (d == n) return;
    }
  }

 private:
  Grid g_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 0;
};

// Successors of a piece or exact start box.
struct Succ {
  std::vector<std::size_t> pieces;
  std::vector<Box> exact;
};

struct BoxLess {
  bool operator()(const Box& a, const Box& b) const {
    for (std::size_t d = 0; d < a.size(); ++d) {
      if (a[d].lo != b[d].lo) return a[d].lo < b[d].lo;
      if (a[d].hi != b[d].hi) return a[d].hi < b[d].hi;
    }
    return false;
  }
};

class Engine {
 public:
  Engine(const HybridSystem& h, const Grid& g, const ReachOptions& opts)
      : h_(h), g_(g), pieces_(g), opts_(opts), dt_(default_dt(h, g)),
        closed_form_(h.flow && h.flow->solution) {}

  const PieceSpace& pieces() const { return pieces_; }

  // Point start sets whose flow orbit is wider than a cell stay exact; the
  // rest are widened to pieces.
  void target(const Box& r, Succ& succ) const {
    const bool point = std::all_of(r.begin(), r.end(), [](const Interval& i) { return i.degenerate(); });
    if (closed_form_ && point) {
      if (auto in = intersect(r, h_.window)) {
        auto tail = clip(h_.flow->solution(*in, Interval{0.0, kInf}), *in);
        if (tail && !(box_bounded(*tail) && fits_cell(*tail))) {
          succ.exact.push_back(*in);
          return;
        }
      }
    }
    pieces_.snap(r, succ.pieces);
  }

  void post(const Box& x, GridSet& acc, Succ& succ) const {
    emit(x, x, acc, succ);
    if (!h_.flow) return;
    if (closed_form_) {
      flow_closed(x, acc, succ);
    } else if (auto fs = flow_step_box(h_, x, dt_)) {
      pieces_.snap(*fs, succ.pieces);
    }
  }

 private:
  std::optional<Box> clip(std::optional<Box> b, const Box& seed) const {
    if (!b) return b;
    b = intersect(*b, h_.window);
    if (b && h_.flow->contract) b = h_.flow->contract(*b, seed);
    return b;
  }

  bool fits_cell(const Box& b) const {
    for (std::size_t d = 0; d < b.size(); ++d)
      if (b[d].width() > g_.width(d)) return false;
    return true;
  }

  void flow_closed(const Box& x, GridSet& acc, Succ& succ) const {
    for (std::size_t k = 0;; ++k) {
      if (k >= opts_.max_flow_steps)
        throw IterationBudgetExceeded("reach: flow pipe did not settle within " +
                                      std::to_string(opts_.max_flow_steps) + " steps");
      const double t = static_cast<double>(k) * dt_;
      auto tail = clip(h_.flow->solution(x, Interval{t, kInf}), x);
      if (!tail) return;
      if (box_bounded(*tail) && fits_cell(*tail)) {
        emit(*tail, x, acc, succ);
        return;
      }
      auto step = clip(h_.flow->solution(x, Interval{t, static_cast<double>(k + 1) * dt_}), x);
      if (!step) continue;
      emit(*step, x, acc, succ);
      if (box_contains(*step, *tail)) return;
    }
  }

  void emit(const Box& b, const Box& seed, GridSet& acc, Succ& succ) const {
    acc.insert_box(b);
    for (const auto& rule : h_.jumps) {
      auto in = intersect(b, rule.guard);
      if (in && closed_form_ && h_.flow->contract) in = h_.flow->contract(*in, seed);
      if (!in) continue;
      if (auto r = rule.reset(*in)) target(*r, succ);
    }
    if (h_.raw_jumps) {
      const Grid& rg = h_.raw_jumps->grid;
      for (const auto& [src, dst] : h_.raw_jumps->pairs)
        if (intersect(b, rg.cell_box(src))) pieces_.snap(rg.cell_box(dst), succ.pieces);
    }
  }

  const HybridSystem& h_;
  const Grid& g_;
  PieceSpace pieces_;
  ReachOptions opts_;
  double dt_;
  bool closed_form_;
};

// Generation-wise worklist: each round posts every new start set once, so the
// round count equals the number of Kleene steps to the fixed point.
AnalysisResult run_engine(const Grid& g, const Engine& engine, const Succ& seeds, const ReachOptions& opts) {
  const auto started = Clock::now();
  std::vector<std::uint8_t> seen(engine.pieces().size(), 0);
  std::set<Box, BoxLess> seen_exact;
  std::vector<Box> frontier;

  auto admit = [&](const Succ& s) {
    std::vector<Box> next;
    for (std::size_t id : s.pieces)
      if (!seen[id]) {
        seen[id] = 1;
        next.push_back(engine.pieces().box(id));
      }
    for (const auto& b : s.exact) {
      if (seen_exact.size() >= opts.max_exact_starts) {
        std::vector<std::size_t> ids;
        engine.pieces().snap(b, ids);
        for (std::size_t id : ids)
          if (!seen[id]) {
            seen[id] = 1;
            next.push_back(engine.pieces().box(id));
          }
      } else if (seen_exact.insert(b).second) {
        next.push_back(b);
      }
    }
    return next;
  };
  frontier = admit(seeds);

  AnalysisResult res;
  res.set = GridSet::empty(g);
  const unsigned nt = thread_count(opts.threads);
  while (!frontier.empty()) {
    if (++res.iterations > opts.max_iterations)
      throw IterationBudgetExceeded("reach: no fixed point within " + std::to_string(opts.max_iterations) +
                                    " iterations");
    Succ succ;
    const std::size_t chunks = std::min<std::size_t>(nt, frontier.size() / 4);
    if (chunks <= 1) {
      for (const auto& x : frontier) engine.post(x, res.set, succ);
    } else {
      std::vector<GridSet> accs(chunks, GridSet::empty(g));
      std::vector<Succ> outs(chunks);
      std::vector<std::exception_ptr> errors(chunks);
      std::vector<std::thread> workers;
      for (std::size_t c = 0; c < chunks; ++c) {
        workers.emplace_back([&, c] {
          try {
            const std::size_t lo = frontier.size() * c / chunks, hi = frontier.size() * (c + 1) / chunks;
            for (std::size_t i = lo; i < hi; ++i) engine.post(frontier[i], accs[c], outs[c]);
          } catch (...) {
            errors[c] = std::current_exception();
          }
        });
      }
      for (auto& w : workers) w.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
      for (std::size_t c = 0; c < chunks; ++c) {
        res.set |= accs[c];
        succ.pieces.insert(succ.pieces.end(), outs[c].pieces.begin(), outs[c].pieces.end());
        succ.exact.insert(succ.exact.end(), outs[c].exact.begin(), outs[c].exact.end());
      }
    }
    frontier = admit(succ);
  }
  res.stabilized = true;
  res.wall_time = Clock::now() - started;
  return res;
}

void check_dims(const HybridSystem& h, const Grid& g) {
  if (g.dims() != h.dimension)
    throw BadParams("reach: grid has " + std::to_string(g.dims()) + " dimensions, system has " +
                    std::to_string(h.dimension));
}

}  // namespace

AnalysisResult reach_safe(const HybridSystem& h, const std::vector<Box>& initial, const Grid& grid,
                          const ReachOptions& opts) {
  check_dims(h, grid);
  Engine engine(h, grid, opts);
  Succ seeds;
  for (const auto& b : initial) {
    if (b.size() != grid.dims()) throw BadParams("reach: initial box has the wrong dimension");
    engine.target(b, seeds);
  }
  return run_engine(grid, engine, seeds, opts);
}

AnalysisResult reach_safe(const HybridSystem& h, const GridSet& initial, const ReachOptions& opts) {
  check_dims(h, initial.grid());
  Engine engine(h, initial.grid(), opts);
  Succ seeds;
  for (std::size_t cell : initial.cells()) seeds.pieces.push_back(engine.pieces().of_cell(cell));
  return run_engine(initial.grid(), engine, seeds, opts);
}

FiniteReach reach_finite(const HybridSystem& h, const std::vector<State>& initial, const Grid& grid,
                         const FiniteOptions& opts) {
  check_dims(h, grid);
  const auto started = Clock::now();
  FiniteReach out;
  out.result.set = GridSet::empty(grid);
  GridSet& set = out.result.set;

  if (h.has_flow()) {
    for (const auto& s0 : initial) {
      for (std::size_t k = 0; k < std::max<std::size_t>(1, opts.n_samples); ++k) {
        SimOptions so = opts.sim;
        so.t_max = opts.t_max;
        so.max_transitions = opts.n_transitions;
        so.continue_past_zeno = false;
        so.random_selection = opts.sim.random_selection || k > 0;
        so.seed = opts.sim.seed + k;
        const auto r = simulate(h, s0, so);
        for (auto& p : r.trajectory.states()) {
          set.insert_box(point_box(p));
          out.points.push_back(std::move(p));
        }
        out.result.iterations = std::max(out.result.iterations, r.trajectory.transition_count);
      }
    }
    out.result.stabilized = false;
  } else {
    std::vector<Box> frontier;
    for (const auto& s0 : initial) frontier.push_back(point_box(s0));
    auto add = [&](const Box& b) {
      if (std::any_of(out.boxes.begin(), out.boxes.end(), [&](const Box& o) { return o == b; }))
        return false;
      out.boxes.push_back(b);
      set.insert_box(b);
      return true;
    };
    std::vector<Box> start;
    for (const auto& b : frontier)
      if (add(b)) start.push_back(b);
    frontier = std::move(start);
    std::size_t step = 0;
    for (; step < opts.n_transitions && !frontier.empty(); ++step) {
      std::vector<Box> next;
      for (const auto& b : frontier)
        for (const auto& t : h.jump_targets(b))
          if (auto c = intersect(t, h.window); c && add(*c)) next.push_back(*c);
      frontier = std::move(next);
    }
    out.result.iterations = step;
    out.result.stabilized = frontier.empty();
  }
  out.result.wall_time = Clock::now() - started;
  return out;
}

Grid clocked_grid(const Grid& grid, double t_max, int clock_cells) {
  Box box{Interval{0.0, t_max}};
  box.insert(box.end(), grid.box().begin(), grid.box().end());
  std::vector<int> res{clock_cells};
  res.insert(res.end(), grid.resolution().begin(), grid.resolution().end());
  return Grid(std::move(box), std::move(res));
}

GridSet project_clock(const GridSet& clocked, const Grid& target) {
  const Grid& cg = clocked.grid();
  if (cg.dims() != target.dims() + 1) throw GridMismatch("project_clock: dimension mismatch");
  for (std::size_t d = 0; d < target.dims(); ++d)
    if (cg.resolution(d + 1) != target.resolution(d)) throw GridMismatch("project_clock: resolution mismatch");
  GridSet out = GridSet::empty(target);
  for (std::size_t cell : clocked.cells()) {
    auto idx = cg.unravel(cell);
    idx.erase(idx.begin());
    out.insert(target.linear(idx));
  }
  return out;
}

AnalysisResult evolve_safe(const HybridSystem& h, const std::vector<Box>& initial, const Grid& clock_grid,
                           double t_max, const ReachOptions& opts) {
  if (!(t_max > 0)) throw BadParams("evolve_safe: t_max must be positive");
  const HybridSystem hc = clock_extend(h, t_max);
  std::vector<Box> start;
  for (const auto& b : initial) {
    Box s{Interval{0.0}};
    s.insert(s.end(), b.begin(), b.end());
    start.push_back(std::move(s));
  }
  return reach_safe(hc, start, clock_grid, opts);
}

std::vector<Box> inflate_initial(const std::vector<Box>& initial, double delta, const Box& window) {
  std::vector<Box> out;
  for (const auto& b : initial)
    if (auto c = intersect(inflate(b, delta), window)) out.push_back(std::move(*c));
  return out;
}

AnalysisResult reach_robust(const HybridSystem& h, const std::vector<Box>& initial, const Grid& grid,
                            const HardConstraint& hc, const RobustOptions& opts) {
  if (!refines(h, hc)) throw NotRefining("reach_robust: system does not refine the hard constraint");
  if (!(opts.shrink > 0 && opts.shrink < 1)) throw BadParams("reach_robust: shrink must lie in (0, 1)");
  if (opts.max_rounds == 0) throw BadParams("reach_robust: max_rounds must be positive");
  const auto started = Clock::now();
  double delta = opts.delta0 > 0 ? opts.delta0 : 8.0 * grid.max_width();

  AnalysisResult res;
  bool have = false;
  for (std::size_t k = 0; k < opts.max_rounds; ++k, delta *= opts.shrink) {
    const HybridSystem hd = opts.perturb_system ? fatten_system(h, delta, hc) : h;
    const auto round = reach_safe(hd, inflate_initial(initial, delta, grid.box()), grid, opts.reach);
    res.iterations += round.iterations;
    GridSet cur = have ? (res.set & round.set) : round.set;
    if (have) {
      const bool a = cur.is_empty(), b = res.set.is_empty();
      const bool close = a && b ? true : (a != b ? false : hausdorff_cells(cur, res.set) <= opts.tol_cells);
      if (close) {
        res.set = std::move(cur);
        res.stabilized = true;
        break;
      }
    }
    res.set = std::move(cur);
    have = true;
  }
  res.wall_time = Clock::now() - started;
  return res;
}

std::vector<ProbeRow> robustness_probe(const SetAnalysis& analysis, const std::vector<Box>& initial,
                                       const std::vector<double>& deltas, const Grid& grid) {
  const GridSet base = analysis(initial);
  std::vector<ProbeRow> rows;
  for (double delta : deltas) {
    if (delta < 0) throw BadParams("robustness_probe: negative delta");
    const GridSet s = analysis(inflate_initial(initial, delta, grid.box()));
    ProbeRow row{delta, 0.0, 0.0};
    if (s.is_empty() != base.is_empty())
      row.deviation = kInf;
    else if (!s.is_empty())
      row.deviation = hausdorff(s, base);
    row.deviation_cells = row.deviation / grid.max_width();
    rows.push_back(row);
  }
  return rows;
}

void write_probe_csv(std::ostream& os, const std::vector<ProbeRow>& rows) {
  os << "delta,deviation,deviation_cells\n";
  for (const auto& r : rows) os << r.delta << ',' << r.deviation << ',' << r.deviation_cells << '\n';
}

}  // namespace zenoreach

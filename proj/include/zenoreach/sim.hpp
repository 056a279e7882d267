#pragma once

// Trajectory simulation: fixed-step RK4 on a selected velocity, bisection
// event location, and Zeno diagnosis from inter-jump dwell times.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "zenoreach/hybrid.hpp"

namespace zenoreach {

using State = std::vector<double>;

// Limit: the jump to an extrapolated Zeno point when continuing past it.
enum class SegmentKind { Flow, Jump, Limit };

struct Segment {
  SegmentKind kind = SegmentKind::Flow;
  State start;
  State end;
  double t0 = 0.0;
  double duration = 0.0;
  std::vector<double> sample_times;  // flow segments: includes both ends
  std::vector<State> samples;
  std::string label;                 // jump rule label
};

enum class Termination { TimeLimit, TransitionLimit, Zeno, Stuck, OutOfWindow };

struct Trajectory {
  State start;
  std::vector<Segment> segments;
  double total_time = 0.0;
  std::size_t transition_count = 0;
  Termination termination = Termination::TimeLimit;

  const State& final_state() const { return segments.empty() ? start : segments.back().end; }
  // Every recorded state: start, flow samples and jump targets.
  std::vector<State> states() const;
};

enum class ZenoKind { None, AccumulatingBounces, Chattering };

struct ZenoReport {
  bool is_zeno = false;
  double zeno_time = 0.0;
  State zeno_point;
  std::size_t jump_count_in_window = 0;
  ZenoKind kind = ZenoKind::None;
};

struct SimOptions {
  double t_max = 10.0;
  std::size_t max_transitions = 1000;
  double step = 0.0;             // 0: min(0.01, cell_width / velocity bound)
  double cell_width = 0.0;       // 0: window width / 256 in the first dimension
  double event_tol = 1e-9;
  std::size_t zeno_window = 8;
  double zeno_tol_time = 1e-6;
  bool continue_past_zeno = true;
  bool random_selection = false;  // uniform choice in velocity/reset boxes
  std::uint64_t seed = 1;
};

struct SimResult {
  Trajectory trajectory;
  ZenoReport zeno;  // first Zeno accumulation met, if any
};

SimResult simulate(const HybridSystem& h, const State& start, const SimOptions& opts = {});

// Scans the jumps of each stretch between Limit segments for `window`
// consecutive dwell times that are strictly decreasing (accumulating
// bounces) or all below tol_time with shrinking state increments
// (chattering). Reports the first hit.
ZenoReport detect_zeno(const Trajectory& traj, std::size_t window = 8, double tol_time = 1e-6);

std::string to_string(Termination t);
std::string to_string(ZenoKind k);

// Columns: t, x0..x{n-1}, segment, kind.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
std::string zeno_json(const ZenoReport& z, const Trajectory& traj);

}  // namespace zenoreach

#pragma once

// Reachability analyses on grid sets: Rf (sampled / symbolic), Rs (safe,
// least closed transition-closed superset), Es (Rs of the clocked system)
// and the robust approximation bca(Rs).

#include <chrono>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "zenoreach/gridset.hpp"
#include "zenoreach/hybrid.hpp"
#include "zenoreach/lattice.hpp"
#include "zenoreach/sim.hpp"

namespace zenoreach {

struct AnalysisResult {
  GridSet set;
  std::size_t iterations = 0;
  bool stabilized = false;
  std::chrono::duration<double> wall_time{0};
};

struct ReachOptions {
  std::size_t max_iterations = kDefaultIterationBudget;
  std::size_t max_flow_steps = 1'000'000;  // per start set
  std::size_t max_exact_starts = 100'000;  // later jump targets are widened to cells
  unsigned threads = 0;                    // 0: hardware, capped by ZENOREACH_THREADS
};

// Rs over the grid. Start points (initial points and jump targets) stay exact
// while their flow orbit spans more than a cell. Other start sets are widened
// to pieces: grid-line points in degenerate coordinates, whole cells otherwise.
// Flow is followed along closed-form enclosures when the system provides
// them, otherwise by repeated interval flow steps of default_dt.
AnalysisResult reach_safe(const HybridSystem& h, const std::vector<Box>& initial, const Grid& grid,
                          const ReachOptions& opts = {});
// Start set given as cells.
AnalysisResult reach_safe(const HybridSystem& h, const GridSet& initial, const ReachOptions& opts = {});

struct FiniteOptions {
  std::size_t n_transitions = 50;
  std::size_t n_samples = 1;  // simulations per start point; extra runs use random selection
  double t_max = 10.0;
  SimOptions sim;             // t_max, max_transitions and continue_past_zeno are overridden
};

struct FiniteReach {
  AnalysisResult result;
  std::vector<State> points;  // flow systems: every recorded state
  std::vector<Box> boxes;     // jump-only systems: exact reached boxes
};

// Under-approximation of Rf: simulation without passing Zeno points for
// systems with flow, exact breadth-first jump iteration otherwise.
FiniteReach reach_finite(const HybridSystem& h, const std::vector<State>& initial, const Grid& grid,
                         const FiniteOptions& opts = {});

// Es(I) = Rs of the clocked system from {0} × I, on `clock_grid`, whose
// first dimension is the clock over [0, t_max].
AnalysisResult evolve_safe(const HybridSystem& h, const std::vector<Box>& initial, const Grid& clock_grid,
                           double t_max, const ReachOptions& opts = {});
// Grid [0, t_max] × grid.box() with `clock_cells` clock cells.
Grid clocked_grid(const Grid& grid, double t_max, int clock_cells);
// Projection dropping the first (clock) dimension.
GridSet project_clock(const GridSet& clocked, const Grid& target);

struct RobustOptions {
  double delta0 = 0.0;  // 0: eight widest cells
  double shrink = 0.5;
  double tol_cells = 1.0;
  std::size_t max_rounds = 6;
  bool perturb_system = true;  // false: perturb the initial set only
  ReachOptions reach;
};

// Intersection over rounds k of Rs(fatten_system(h, δ_k, hc), I ⊕ δ_k),
// δ_k = delta0·shrink^k, stopped once successive rounds are within tol
// cells. Throws NotRefining unless h refines hc.
AnalysisResult reach_robust(const HybridSystem& h, const std::vector<Box>& initial, const Grid& grid,
                            const HardConstraint& hc, const RobustOptions& opts = {});

using SetAnalysis = std::function<GridSet(const std::vector<Box>& initial)>;

struct ProbeRow {
  double delta = 0;
  double deviation = 0;        // Hausdorff, state units
  double deviation_cells = 0;  // same in widest-cell units
};

// Deviation of A(I ⊕ δ) from A(I) for each δ.
std::vector<ProbeRow> robustness_probe(const SetAnalysis& analysis, const std::vector<Box>& initial,
                                       const std::vector<double>& deltas, const Grid& grid);
void write_probe_csv(std::ostream& os, const std::vector<ProbeRow>& rows);

// Boxes of the initial set inflated by δ and clipped to the box.
std::vector<Box> inflate_initial(const std::vector<Box>& initial, double delta, const Box& window);

}  // namespace zenoreach

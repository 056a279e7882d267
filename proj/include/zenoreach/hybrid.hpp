#pragma once

// Hybrid systems H = (F, G) on a compact box, given by conservative interval
// extensions, and their grid-level transition operators.

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zenoreach/gridset.hpp"
#include "zenoreach/interval.hpp"

namespace zenoreach {

// Flow relation F. `velocity` encloses {v | (s, v) ∈ F, s ∈ box} and returns
// nullopt when the box misses dom F.
struct FlowModel {
  std::function<std::optional<Box>(const Box&)> velocity;
  // Optional closed-form enclosure of {φ(s, τ) | s ∈ box, τ ∈ T} for
  // trajectories that stay in dom F; T may extend to +inf. Result already
  // clipped to dom F; nullopt when empty.
  std::function<std::optional<Box>(const Box&, const Interval&)> solution;
  // Optional contractor: shrinks `candidate` using first integrals fixed by
  // the start box `seed`. nullopt when nothing survives.
  std::function<std::optional<Box>(const Box& candidate, const Box& seed)> contract;
  Region domain;
  std::vector<double> velocity_bound;
};

// Jump pair: G ⊇ {(s, s') | s ∈ guard, s' ∈ reset(s)}. The reset is only
// evaluated on boxes inside the guard.
struct JumpRule {
  Box guard;
  std::function<std::optional<Box>(const Box&)> reset;
  std::string label;
};

// Jump relation given as a set of cell pairs on the 2n-dimensional product
// of a state grid with itself.
struct RawJumps {
  Grid grid;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

struct HybridSystem {
  std::string name;
  std::size_t dimension = 0;
  Box window;
  std::shared_ptr<const FlowModel> flow;  // null: F = ∅
  std::vector<JumpRule> jumps;
  std::optional<RawJumps> raw_jumps;

  bool has_flow() const { return flow != nullptr; }
  std::optional<Box> velocity(const Box& x) const;
  std::span<const double> velocity_bound() const;
  // Boxes of jump targets from states in x (guard/reset pairs and raw pairs).
  std::vector<Box> jump_targets(const Box& x) const;
};

struct HardConstraint {
  HybridSystem h0;
};

// Raw relation from a mask on the product grid (first n dimensions: source).
RawJumps raw_jumps_from_product(const GridSet& product, std::size_t n);

// Default step: half a cell at the velocity bound, smallest over dimensions.
double default_dt(const HybridSystem& h, const Grid& g);

GridSet jump_post(const HybridSystem& h, const GridSet& s);
// Throws StepTooLarge when dt times the velocity bound exceeds the window
// diameter in some dimension.
GridSet flow_step(const HybridSystem& h, const GridSet& s, double dt);
// Box-level flow step used by both flow_step and the reach engine.
std::optional<Box> flow_step_box(const HybridSystem& h, const Box& x, double dt);
GridSet transition_post(const HybridSystem& h, const GridSet& s);
GridSet transition_post(const HybridSystem& h, const GridSet& s, double dt);
GridSet support(const HybridSystem& h, const Grid& grid);

// Adds a clock in front: state (t, s) with ṫ = 1 on [0, t_max].
HybridSystem clock_extend(const HybridSystem& h, double t_max);

// H_δ = (fatten(F, δ) ∩ F₀, fatten(G, δ) ∩ G₀) at box level.
HybridSystem fatten_system(const HybridSystem& h, double delta, const HardConstraint& hc);

// Sampled check that F ⊆ F₀ and G ⊆ G₀ on the cells of a probe grid.
bool refines(const HybridSystem& h, const HardConstraint& hc, int probe_resolution = 16);

// Jump-only system from JSON with affine resets. Throws ConfigError.
HybridSystem load_jump_system(std::istream& is);
HybridSystem parse_jump_system(const std::string& json_text);

}  // namespace zenoreach

#pragma once

// Built-in example systems and their closed-form reach sets.

#include <map>
#include <string>
#include <vector>

#include "zenoreach/gridset.hpp"
#include "zenoreach/hybrid.hpp"

namespace zenoreach {

enum class SystemKind { Expand, Decay, BouncingBall, Counterexample1, Counterexample2, Counterexample3 };
enum class Variant { Standard, ClosureVariant };
enum class Analysis { Sf, Ss, Sr, SR };

using Params = std::map<std::string, double>;

// Accepted names: expand, decay, bouncing_ball (bb), ce1, ce2, ce3 and the
// long counterexample1..3 forms. Throws BadParams.
SystemKind parse_kind(const std::string& name);
std::string to_string(SystemKind kind);
Analysis parse_analysis(const std::string& name);
std::string to_string(Analysis a);

struct BuiltSystem {
  SystemKind kind;
  Params params;  // with defaults filled in
  HybridSystem system;
  HardConstraint hard;
};

// Parameters and defaults:
//   expand, decay:   M = 2
//   bouncing_ball:   b = -0.5, V = 2, V0 = 3, relaxed = 0 (1 selects the
//                    relaxed hard constraint), compact = 1 (0 lifts the
//                    energy cap to E_max = 50 for simulation of |b| > 1)
//   counterexamples: none
// Throws BadParams on invalid values.
BuiltSystem make_system(SystemKind kind, const Params& params = {}, Variant variant = Variant::Standard);

double energy(double h, double v);

// Outer rasterization of the known closed-form reach set for the start
// state `initial`. Throws NoOracle for unlisted combinations.
GridSet oracle_set(SystemKind kind, const Params& params, const std::vector<double>& initial, Analysis analysis,
                   const Grid& grid);

// Region {(h, v) | h ≥ 0, lo ≤ E(h, v) ≤ hi}.
Region energy_band(double lo, double hi);

}  // namespace zenoreach

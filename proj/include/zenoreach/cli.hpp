#pragma once

// Command-line front end: analyze, compare, simulate.
//
// Exit codes: 0 success, 2 configuration error, 3 analysis error,
// 4 oracle comparison failed (including missing oracles).

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "zenoreach/gridset.hpp"
#include "zenoreach/systems.hpp"

namespace zenoreach {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAnalysis = 3;
inline constexpr int kExitCompare = 4;

struct RunConfig {
  std::string command;           // analyze | compare | simulate
  std::string system = "expand";
  std::string system_file;       // JSON jump system; overrides `system`
  Params params;
  std::vector<std::string> initial;  // point:x,y | box:lo:hi,lo:hi | empty
  std::string mode = "rs";           // rf | rs | es | robust | probe | all (compare)
  int resolution = 0;                // 0: 256 (1-D), 128 (2-D), 32 (3-D)
  double delta0 = 0.0;
  double shrink = 0.5;
  std::size_t rounds = 6;
  double t_max = 4.0;                // simulate, rf sampling, es horizon
  std::size_t transitions = 0;       // 0: 50 for rf, 1000 for simulate
  double tolerance = 2.0;            // compare, in cells
  std::string probe_of = "rs";
  std::string out;
  std::string svg;
  std::string json;                  // simulate: Zeno report path
  bool stop_at_zeno = false;
  bool random_selection = false;
  unsigned seed = 1;
};

// Parses "point:1,2", "box:0:1,2:3" or "empty". Throws ConfigError.
std::vector<Box> parse_initial(const std::string& spec, std::size_t dims);

// Flags override values read from --config.
RunConfig parse_config(int argc, const char* const* argv);

int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Layers are drawn in order; each paints the cells it holds that earlier
// layers do not. 1-D sets become a bar, 2-D sets a cell raster.
struct SvgLayer {
  const GridSet* set;
  std::string color;
};
void write_svg(std::ostream& os, const std::vector<SvgLayer>& layers);

}  // namespace zenoreach

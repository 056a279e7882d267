#include "zenoreach/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "zenoreach/error.hpp"
#include "zenoreach/hybrid.hpp"
#include "zenoreach/reach.hpp"
#include "zenoreach/sim.hpp"

namespace zenoreach {

namespace {

using json = nlohmann::json;

std::vector<double> parse_numbers(const std::string& s, char sep) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + item + "'");
    }
  }
  return out;
}

struct Loaded {
  HybridSystem system;
  HardConstraint hard;
  std::optional<SystemKind> kind;
  Params params;
};

Loaded load_system(const RunConfig& cfg) {
  if (!cfg.system_file.empty()) {
    std::ifstream in(cfg.system_file);
    if (!in) throw ConfigError("cannot open system file '" + cfg.system_file + "'");
    Loaded l;
    l.system = load_jump_system(in);
    for (const auto& iv : l.system.window)
      if (!iv.bounded()) throw ConfigError("system box must be bounded for grid analysis");
    l.hard = HardConstraint{l.system};
    return l;
  }
  const SystemKind kind = parse_kind(cfg.system);
  auto built = make_system(kind, cfg.params);
  return {std::move(built.system), std::move(built.hard), kind, std::move(built.params)};
}

int default_resolution(std::size_t dims) { return dims == 1 ? 256 : dims == 2 ? 128 : 32; }

Grid make_grid(const HybridSystem& h, int resolution) {
  const int r = resolution > 0 ? resolution : default_resolution(h.dimension);
  return Grid(h.window, std::vector<int>(h.dimension, r));
}

std::vector<Box> initial_boxes(const RunConfig& cfg, std::size_t dims) {
  if (cfg.initial.empty()) throw ConfigError("no initial set given (use --initial)");
  std::vector<Box> out;
  for (const auto& spec : cfg.initial)
    for (auto& b : parse_initial(spec, dims)) out.push_back(std::move(b));
  return out;
}

std::vector<State> midpoints(const std::vector<Box>& boxes) {
  std::vector<State> out;
  for (const auto& b : boxes) {
    State s;
    for (const auto& iv : b) s.push_back(iv.mid());
    out.push_back(std::move(s));
  }
  return out;
}

// Writes to the file when a path is given, otherwise to the fallback stream.
template <class F>
void emit_to(const std::string& path, std::ostream& fallback, F&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write '" + path + "'");
  write(os);
}

RobustOptions robust_options(const RunConfig& cfg) {
  RobustOptions o;
  o.delta0 = cfg.delta0;
  o.shrink = cfg.shrink;
  o.max_rounds = cfg.rounds;
  return o;
}

FiniteOptions finite_options(const RunConfig& cfg) {
  FiniteOptions o;
  o.n_transitions = cfg.transitions ? cfg.transitions : 50;
  o.t_max = cfg.t_max;
  o.sim.random_selection = cfg.random_selection;
  o.sim.seed = cfg.seed;
  return o;
}

GridSet run_mode(const std::string& mode, const Loaded& sys, const std::vector<Box>& init, const Grid& g,
                 const RunConfig& cfg) {
  if (mode == "rf") return reach_finite(sys.system, midpoints(init), g, finite_options(cfg)).result.set;
  if (mode == "rs") return reach_safe(sys.system, init, g).set;
  if (mode == "robust") return reach_robust(sys.system, init, g, sys.hard, robust_options(cfg)).set;
  throw ConfigError("mode '" + mode + "' does not produce a state-space set");
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BadParams& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const GridMismatch& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NoOracle& e) {
    err << "no oracle: " << e.what() << '\n';
    return kExitCompare;
  } catch (const Error& e) {
    err << "analysis error: " << e.what() << '\n';
    return kExitAnalysis;
  }
}

void set_from_json(RunConfig& cfg, const json& j) {
  auto str = [&](const char* k, std::string& dst) {
    if (j.contains(k)) dst = j.at(k).get<std::string>();
  };
  str("system", cfg.system);
  str("system_file", cfg.system_file);
  str("mode", cfg.mode);
  str("out", cfg.out);
  str("svg", cfg.svg);
  str("json", cfg.json);
  str("probe_of", cfg.probe_of);
  if (j.contains("params"))
    for (const auto& [k, v] : j.at("params").items()) cfg.params[k] = v.get<double>();
  if (j.contains("initial")) {
    const auto& i = j.at("initial");
    cfg.initial = i.is_array() ? i.get<std::vector<std::string>>() : std::vector<std::string>{i.get<std::string>()};
  }
  if (j.contains("resolution")) cfg.resolution = j.at("resolution").get<int>();
  if (j.contains("delta0")) cfg.delta0 = j.at("delta0").get<double>();
  if (j.contains("shrink")) cfg.shrink = j.at("shrink").get<double>();
  if (j.contains("rounds")) cfg.rounds = j.at("rounds").get<std::size_t>();
  if (j.contains("t_max")) cfg.t_max = j.at("t_max").get<double>();
  if (j.contains("transitions")) cfg.transitions = j.at("transitions").get<std::size_t>();
  if (j.contains("tolerance")) cfg.tolerance = j.at("tolerance").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<unsigned>();
}

std::string describe(const Loaded& sys, const State& start) {
  std::ostringstream os;
  os << (sys.kind ? to_string(*sys.kind) : sys.system.name);
  for (const auto& [k, v] : sys.params) os << ' ' << k << '=' << v;
  os << " start=(";
  for (std::size_t i = 0; i < start.size(); ++i) os << (i ? "," : "") << start[i];
  os << ')';
  return os.str();
}

std::vector<State> default_starts(SystemKind k) {
  switch (k) {
    case SystemKind::Expand: return {{1.0}, {0.0}};
    case SystemKind::Decay: return {{1.0}};
    case SystemKind::BouncingBall: return {{0.0, 1.0}};
    case SystemKind::Counterexample2: return {{2.0}};
    default: return {{1.0}};
  }
}

Analysis oracle_analysis(const std::string& mode) {
  if (mode == "rf") return Analysis::Sf;
  if (mode == "rs") return Analysis::Ss;
  if (mode == "robust") return Analysis::SR;
  throw NoOracle("no oracle for mode '" + mode + "'");
}

}  // namespace

std::vector<Box> parse_initial(const std::string& spec, std::size_t dims) {
  if (spec == "empty") return {};
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("initial set '" + spec + "': expected point:, box: or empty");
  const std::string kind = spec.substr(0, colon), rest = spec.substr(colon + 1);
  Box b;
  if (kind == "point") {
    for (double x : parse_numbers(rest, ',')) b.emplace_back(x);
  } else if (kind == "box") {
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto lh = parse_numbers(item, ':');
      if (lh.size() != 2 || lh[0] > lh[1]) throw ConfigError("box component '" + item + "': expected lo:hi");
      b.emplace_back(lh[0], lh[1]);
    }
  } else {
    throw ConfigError("initial set kind '" + kind + "' unknown");
  }
  if (b.size() != dims)
    throw ConfigError("initial set '" + spec + "' has " + std::to_string(b.size()) + " coordinates, expected " +
                      std::to_string(dims));
  return {b};
}

namespace {
struct HelpRequested {
  std::string text;
};
}  // namespace

RunConfig parse_config(int argc, const char* const* argv) {
  CLI::App app{"zenoreach: reachability of hybrid systems on grid sets"};
  app.require_subcommand(1);
  RunConfig cfg;
  RunConfig flags;
  std::string config_path;
  std::vector<std::string> param_kv;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--system", flags.system, "built-in system: expand, decay, bb, ce1, ce2, ce3");
    sub->add_option("--system-file", flags.system_file, "JSON jump-system definition");
    sub->add_option("--param", param_kv, "system parameter k=v (repeatable)");
    sub->add_option("--initial", flags.initial, "point:x,y | box:lo:hi,lo:hi | empty (repeatable)");
    sub->add_option("--resolution", flags.resolution, "cells per dimension");
    sub->add_option("--t-max", flags.t_max, "time horizon");
    sub->add_option("--transitions", flags.transitions, "transition bound for sampling");
    sub->add_option("--out", flags.out, "output file (default: stdout)");
    sub->add_option("--config", config_path, "JSON config; flags override it");
    sub->add_option("--seed", flags.seed, "random seed");
    sub->add_flag("--random", flags.random_selection, "random selection inside velocity/reset boxes");
  };
  auto* analyze = app.add_subcommand("analyze", "run one analysis and write its set as CSV");
  auto* compare = app.add_subcommand("compare", "compare analyses with closed-form sets");
  auto* simulate_cmd = app.add_subcommand("simulate", "simulate one trajectory");
  for (auto* sub : {analyze, compare, simulate_cmd}) add_common(sub);
  for (auto* sub : {analyze, compare}) {
    sub->add_option("--mode", flags.mode, "rf | rs | es | robust | probe (compare: all)");
    sub->add_option("--delta0", flags.delta0, "initial perturbation (default 8 cells)");
    sub->add_option("--shrink", flags.shrink, "perturbation factor per round");
    sub->add_option("--rounds", flags.rounds, "robust rounds / probe rows");
  }
  analyze->add_option("--svg", flags.svg, "SVG raster output");
  analyze->add_option("--probe-of", flags.probe_of, "analysis probed in probe mode: rs | robust");
  compare->add_option("--tolerance", flags.tolerance, "pass threshold in cells");
  simulate_cmd->add_option("--json", flags.json, "Zeno report output");
  simulate_cmd->add_flag("--stop-at-zeno", flags.stop_at_zeno, "stop instead of continuing past Zeno points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg;
    app.exit(e, msg, msg);
    if (e.get_exit_code() == 0) throw HelpRequested(msg.str());
    throw ConfigError(msg.str().empty() ? e.what() : msg.str());
  }

  CLI::App* sub = analyze->parsed() ? analyze : compare->parsed() ? compare : simulate_cmd;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config '" + config_path + "'");
    try {
      set_from_json(cfg, json::parse(in));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  auto given = [&](const char* name) { return sub->get_option_no_throw(name) && sub->count(name) > 0; };
  if (given("--system")) cfg.system = flags.system;
  if (given("--system-file")) cfg.system_file = flags.system_file;
  if (given("--initial")) cfg.initial = flags.initial;
  if (given("--resolution")) cfg.resolution = flags.resolution;
  if (given("--t-max")) cfg.t_max = flags.t_max;
  if (given("--transitions")) cfg.transitions = flags.transitions;
  if (given("--out")) cfg.out = flags.out;
  if (given("--seed")) cfg.seed = flags.seed;
  if (given("--random")) cfg.random_selection = true;
  if (given("--mode")) cfg.mode = flags.mode;
  if (given("--delta0")) cfg.delta0 = flags.delta0;
  if (given("--shrink")) cfg.shrink = flags.shrink;
  if (given("--rounds")) cfg.rounds = flags.rounds;
  if (given("--svg")) cfg.svg = flags.svg;
  if (given("--probe-of")) cfg.probe_of = flags.probe_of;
  if (given("--tolerance")) cfg.tolerance = flags.tolerance;
  if (given("--json")) cfg.json = flags.json;
  if (given("--stop-at-zeno")) cfg.stop_at_zeno = true;
  for (const auto& kv : param_kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--param expects k=v, got '" + kv + "'");
    const auto v = parse_numbers(kv.substr(eq + 1), ',');
    if (v.size() != 1) throw ConfigError("--param " + kv + ": one value expected");
    cfg.params[kv.substr(0, eq)] = v[0];
  }
  cfg.command = sub->get_name();
  if (cfg.command == "compare" && !given("--mode") && config_path.empty()) cfg.mode = "all";
  return cfg;
}

int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Loaded sys = load_system(cfg);
    const Grid g = make_grid(sys.system, cfg.resolution);
    const auto init = initial_boxes(cfg, sys.system.dimension);

    if (cfg.mode == "probe") {
      SetAnalysis a;
      if (cfg.probe_of == "rs")
        a = [&](const std::vector<Box>& i) { return reach_safe(sys.system, i, g).set; };
      else if (cfg.probe_of == "robust")
        a = [&](const std::vector<Box>& i) { return reach_robust(sys.system, i, g, sys.hard, robust_options(cfg)).set; };
      else
        throw ConfigError("--probe-of must be rs or robust");
      std::vector<double> deltas;
      double d = cfg.delta0 > 0 ? cfg.delta0 : 0.5;
      for (std::size_t k = 0; k < cfg.rounds; ++k, d *= cfg.shrink) deltas.push_back(d);
      const auto rows = robustness_probe(a, init, deltas, g);
      emit_to(cfg.out, out, [&](std::ostream& os) { write_probe_csv(os, rows); });
      return kExitOk;
    }

    AnalysisResult res;
    std::vector<GridSet> layers;
    std::vector<std::string> colors;
    if (cfg.mode == "es") {
      const Grid cg = clocked_grid(g, cfg.t_max, g.resolution(0));
      res = evolve_safe(sys.system, init, cg, cfg.t_max);
      layers = {res.set};
      colors = {"green"};
    } else if (cfg.mode == "rf") {
      res = reach_finite(sys.system, midpoints(init), g, finite_options(cfg)).result;
      layers = {res.set};
      colors = {"blue"};
    } else if (cfg.mode == "rs") {
      res = reach_safe(sys.system, init, g);
      layers = {res.set};
      colors = {"green"};
    } else if (cfg.mode == "robust") {
      res = reach_robust(sys.system, init, g, sys.hard, robust_options(cfg));
      layers = {res.set};
      colors = {"red"};
    } else {
      throw ConfigError("unknown mode '" + cfg.mode + "'");
    }
    emit_to(cfg.out, out, [&](std::ostream& os) { write_csv(os, res.set); });
    if (!cfg.out.empty())
      out << cfg.mode << ": " << res.set.count() << " cells, " << res.iterations << " iterations, "
          << (res.stabilized ? "stabilized" : "not stabilized") << '\n';

    if (!cfg.svg.empty()) {
      if (res.set.grid().dims() > 2) throw ConfigError("SVG output needs a 1-D or 2-D set");
      // Lower layers first: Rf in blue, Rs∖Rf green, robust∖Rs red.
      if (cfg.mode == "rs" || cfg.mode == "robust") {
        std::vector<GridSet> below;
        std::vector<std::string> below_colors;
        below.push_back(reach_finite(sys.system, midpoints(init), g, finite_options(cfg)).result.set);
        below_colors.push_back("blue");
        if (cfg.mode == "robust") {
          below.push_back(reach_safe(sys.system, init, g).set);
          below_colors.push_back("green");
        }
        layers.insert(layers.begin(), below.begin(), below.end());
        colors.insert(colors.begin(), below_colors.begin(), below_colors.end());
      }
      std::vector<SvgLayer> svg;
      for (std::size_t i = 0; i < layers.size(); ++i) svg.push_back({&layers[i], colors[i]});
      emit_to(cfg.svg, out, [&](std::ostream& os) { write_svg(os, svg); });
    }
    return kExitOk;
  });
}

int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!cfg.system_file.empty()) throw NoOracle("JSON systems have no closed-form reach sets");
    const Loaded sys = load_system(cfg);
    const Grid g = make_grid(sys.system, cfg.resolution);
    const SystemKind kind = *sys.kind;
    const bool ce = kind == SystemKind::Counterexample1 || kind == SystemKind::Counterexample2 ||
                    kind == SystemKind::Counterexample3;

    std::vector<State> starts;
    if (cfg.initial.empty()) {
      starts = default_starts(kind);
    } else {
      for (const auto& b : initial_boxes(cfg, sys.system.dimension))
        for (const auto& s : midpoints({b})) starts.push_back(s);
    }
    std::vector<std::string> modes;
    if (cfg.mode == "all")
      modes = ce ? std::vector<std::string>{"rf", "rs"} : std::vector<std::string>{"rf", "rs", "robust"};
    else
      modes = {cfg.mode};

    struct Row {
      std::string name, mode, cells, result;
    };
    std::vector<Row> rows;
    int failures = 0;
    std::ostringstream tol;
    tol << std::fixed << std::setprecision(2) << cfg.tolerance;
    for (const auto& s : starts) {
      for (const auto& mode : modes) {
        Row row{describe(sys, s), mode, "-", ""};
        try {
          const GridSet oracle = oracle_set(kind, sys.params, s, oracle_analysis(mode), g);
          Box b;
          for (double x : s) b.emplace_back(x);
          const GridSet got = run_mode(mode, sys, {b}, g, cfg);
          double d = 0.0;
          if (got.is_empty() != oracle.is_empty())
            d = kInf;
          else if (!got.is_empty())
            d = hausdorff_cells(got, oracle);
          const bool pass = d <= cfg.tolerance;
          failures += pass ? 0 : 1;
          std::ostringstream cells;
          cells << std::fixed << std::setprecision(2) << d;
          row.cells = cells.str();
          row.result = pass ? "PASS" : "FAIL";
        } catch (const NoOracle& e) {
          ++failures;
          row.result = std::string("NoOracle (") + e.what() + ")";
        }
        rows.push_back(std::move(row));
      }
    }
    std::size_t width = 4;
    for (const auto& r : rows) width = std::max(width, r.name.size());
    const int w = static_cast<int>(width) + 2;
    out << std::left << std::setw(w) << "case" << std::setw(8) << "mode" << std::setw(10) << "cells" << std::setw(6)
        << "tol" << "result\n";
    for (const auto& r : rows)
      out << std::left << std::setw(w) << r.name << std::setw(8) << r.mode << std::setw(10) << r.cells
          << std::setw(6) << tol.str() << r.result << '\n';
    return failures == 0 ? kExitOk : kExitCompare;
  });
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Loaded sys = load_system(cfg);
    const auto init = initial_boxes(cfg, sys.system.dimension);
    if (init.size() != 1) throw ConfigError("simulate needs exactly one initial point");
    SimOptions o;
    o.t_max = cfg.t_max;
    if (cfg.transitions) o.max_transitions = cfg.transitions;
    o.continue_past_zeno = !cfg.stop_at_zeno;
    o.random_selection = cfg.random_selection;
    o.seed = cfg.seed;
    const auto r = simulate(sys.system, midpoints(init).front(), o);
    emit_to(cfg.out, out, [&](std::ostream& os) { write_trajectory_csv(os, r.trajectory); });
    const std::string report = zeno_json(r.zeno, r.trajectory);
    if (!cfg.json.empty())
      emit_to(cfg.json, out, [&](std::ostream& os) { os << report << '\n'; });
    else if (!cfg.out.empty())
      out << report << '\n';
    return kExitOk;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_config(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.text;
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BadParams& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (cfg.command == "analyze") return cmd_analyze(cfg, out, err);
  if (cfg.command == "compare") return cmd_compare(cfg, out, err);
  return cmd_simulate(cfg, out, err);
}

void write_svg(std::ostream& os, const std::vector<SvgLayer>& layers) {
  if (layers.empty()) throw ConfigError("SVG: nothing to draw");
  const Grid& g = layers.front().set->grid();
  const bool one_d = g.dims() == 1;
  const int nx = g.resolution(0), ny = one_d ? 1 : g.resolution(1);
  const double cw = std::max(1.0, 512.0 / nx), ch = one_d ? 24.0 : std::max(1.0, 512.0 / ny);
  const double w = cw * nx, h = ch * ny;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
     << ' ' << h << "\">\n<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\" stroke=\"black\"/>\n";
  std::vector<std::uint8_t> painted(g.cell_count(), 0);
  for (const auto& layer : layers) {
    require_same_grid(*layer.set, *layers.front().set);
    os << "<g fill=\"" << layer.color << "\">\n";
    for (std::size_t c : layer.set->cells()) {
      if (painted[c]) continue;
      painted[c] = 1;
      const auto idx = g.unravel(c);
      // First dimension runs right; the second runs up.
      const double x = idx[0] * cw, y = one_d ? 0.0 : (ny - 1 - idx[1]) * ch;
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cw << "\" height=\"" << ch << "\"/>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
}

}  // namespace zenoreach

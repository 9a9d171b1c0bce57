#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "matgame/baselines.hpp"
#include "matgame/instances.hpp"
#include "matgame/l2l2.hpp"
#include "matgame/outer.hpp"
#include "matgame/svd.hpp"

namespace matgame {

// ---------------------------------------------------------------------------
// Batch experiment runner: a grid over (solver, epsilon, seed) on one
// instance family, emitting CSV rows and an optional SVG query plot. Rows are
// written in grid order regardless of worker scheduling, so identical
// configs produce identical CSV bytes apart from the wall-time column.
// ---------------------------------------------------------------------------

enum class SolverChoice { Alg8, Alg8PassModel, SugL2L2, MirrorProx, Mwu };

inline const char* solver_name(SolverChoice s) {
  switch (s) {
    case SolverChoice::Alg8: return "alg8";
    case SolverChoice::Alg8PassModel: return "alg8_pass";
    case SolverChoice::SugL2L2: return "l2l2";
    case SolverChoice::MirrorProx: return "mirror_prox";
    case SolverChoice::Mwu: return "mwu";
  }
  return "?";
}

inline SolverChoice solver_from_name(const std::string& s) {
  if (s == "alg8") return SolverChoice::Alg8;
  if (s == "alg8_pass") return SolverChoice::Alg8PassModel;
  if (s == "l2l2") return SolverChoice::SugL2L2;
  if (s == "mirror_prox") return SolverChoice::MirrorProx;
  if (s == "mwu") return SolverChoice::Mwu;
  throw ConfigError("unknown solver: " + s);
}

struct ExperimentConfig {
  SetupKind setup = SetupKind::L1L1;
  InstanceFamily family = InstanceFamily::SignRandom;
  InstanceParams params;
  int m = 8, n = 8;
  std::vector<std::uint64_t> seeds{1};
  std::vector<double> epsilons;
  std::vector<SolverChoice> solvers;
  int threads = 1;

  // parameter overrides; <= 0 means "use the theorem schedule"
  double beta = 0.0;
  double tau = 0.0;
  double p = 2.0;
  double xi = 1.0;
  double cwf_const = 1e-2;
  double gwf_const = 1e-2;

  std::string csv_name = "results.csv";
  std::string svg_name = "queries.svg";
  bool emit_svg = true;

  void validate() const {
    if (m < 2 || n < 2) throw ConfigError("config: dims must be >= 2");
    for (double e : epsilons)
      if (e <= 0.0 || e >= 1.0) throw ConfigError("config: epsilons must lie in (0,1)");
    if (solvers.empty()) throw ConfigError("config: no solvers selected");
    if (threads < 1) throw ConfigError("config: threads must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// TOML-style key/value parsing with line-numbered errors.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw ConfigError("line " + std::to_string(line) + ": bad number '" + v + "'");
  }
}

inline long long parse_int(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw ConfigError("line " + std::to_string(line) + ": bad integer '" + v + "'");
  }
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(std::istream& is) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (val.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value");

    if (key == "setup") {
      if (val == "l1l1")
        cfg.setup = SetupKind::L1L1;
      else if (val == "l2l1")
        cfg.setup = SetupKind::L2L1;
      else if (val == "l2l2")
        cfg.setup = SetupKind::L2L2;
      else
        throw ConfigError("line " + std::to_string(lineno) + ": unknown setup '" + val + "'");
    } else if (key == "family") {
      cfg.family = family_from_name(val);
    } else if (key == "m") {
      cfg.m = static_cast<int>(detail::parse_int(val, lineno));
    } else if (key == "n") {
      cfg.n = static_cast<int>(detail::parse_int(val, lineno));
    } else if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& s : detail::split_list(val))
        cfg.seeds.push_back(static_cast<std::uint64_t>(detail::parse_int(s, lineno)));
    } else if (key == "epsilons") {
      cfg.epsilons.clear();
      for (const auto& s : detail::split_list(val))
        cfg.epsilons.push_back(detail::parse_double(s, lineno));
    } else if (key == "solvers") {
      cfg.solvers.clear();
      for (const auto& s : detail::split_list(val)) cfg.solvers.push_back(solver_from_name(s));
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(detail::parse_int(val, lineno));
    } else if (key == "beta") {
      cfg.beta = detail::parse_double(val, lineno);
    } else if (key == "tau") {
      cfg.tau = detail::parse_double(val, lineno);
    } else if (key == "p") {
      cfg.p = detail::parse_double(val, lineno);
    } else if (key == "xi") {
      cfg.xi = detail::parse_double(val, lineno);
    } else if (key == "cwf_const") {
      cfg.cwf_const = detail::parse_double(val, lineno);
    } else if (key == "gwf_const") {
      cfg.gwf_const = detail::parse_double(val, lineno);
    } else if (key == "rank") {
      cfg.params.rank = static_cast<int>(detail::parse_int(val, lineno));
    } else if (key == "noise") {
      cfg.params.noise = detail::parse_double(val, lineno);
    } else if (key == "decay") {
      cfg.params.decay = detail::parse_double(val, lineno);
    } else if (key == "csv") {
      cfg.csv_name = val;
    } else if (key == "svg") {
      cfg.svg_name = val;
      cfg.emit_svg = true;
    } else {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Single solve dispatch.
// ---------------------------------------------------------------------------

struct CellResult {
  SolveReport report;
  double gap = 0.0;
};

// Deterministic auxiliary composite for l2-l2 benchmark instances; without a
// composite the game's exact solution is the origin.
inline CompositePhi bench_composite(int n, int m, std::uint64_t seed) {
  Xoshiro256pp rng(seed ^ 0x9e3779b97f4a7c15ULL);
  CompositePhi phi = CompositePhi::zero(n, m);
  for (int j = 0; j < n; ++j) phi.b[j] = rng.uniform(-0.5, 0.5);
  for (int i = 0; i < m; ++i) phi.c[i] = rng.uniform(-0.5, 0.5);
  return phi;
}

inline CellResult run_cell(const ExperimentConfig& cfg, SolverChoice solver, double epsilon,
                           std::uint64_t seed) {
  const DenseMatrix a = generate_instance(cfg.family, cfg.setup, cfg.m, cfg.n, seed, cfg.params);
  CountingOracle oracle(a);
  CellResult cell;

  const auto t0 = std::chrono::steady_clock::now();
  switch (solver) {
    case SolverChoice::Alg8:
    case SolverChoice::Alg8PassModel: {
      if (cfg.setup == SetupKind::L2L2)
        throw ConfigError("alg8 solvers apply to l1l1/l2l1 setups only");
      Alg8Options opt;
      opt.beta = cfg.beta;
      opt.tau = cfg.tau;
      opt.outer.pass_model = (solver == SolverChoice::Alg8PassModel);
      opt.outer.sm.p = cfg.p;
      opt.outer.sm.xi = cfg.xi;
      opt.outer.sm.cwf_const = cfg.cwf_const;
      opt.outer.sm.gwf_const = cfg.gwf_const;
      cell.report = solve_l2l1_l1l1(oracle, cfg.setup, epsilon, opt);
      cell.gap = certify_gap(a, cfg.setup, cell.report.z);
      break;
    }
    case SolverChoice::SugL2L2: {
      if (cfg.setup != SetupKind::L2L2) throw ConfigError("l2l2 solver needs the l2l2 setup");
      const CompositePhi phi = bench_composite(cfg.n, cfg.m, seed);
      L2L2Options opt;
      opt.p = cfg.p;
      const double sp = schatten_norm(a, cfg.p);
      opt.tau = cfg.tau > 0.0 ? cfg.tau : l2l2_tau_schedule(sp, cfg.p, epsilon);
      opt.zeta = sp;
      cell.report = solve_l2l2(oracle, phi, epsilon, opt);
      cell.gap = certify_gap(a, cfg.setup, cell.report.z, &phi);
      break;
    }
    case SolverChoice::MirrorProx: {
      MirrorProxOptions opt;
      if (cfg.setup == SetupKind::L2L2) {
        const CompositePhi phi = bench_composite(cfg.n, cfg.m, seed);
        opt.phi = &phi;
        opt.step_lambda = spectral_norm(a);
        if (opt.step_lambda <= 0.0) opt.step_lambda = 1.0;
        cell.report = mirror_prox(oracle, cfg.setup, epsilon, opt);
        cell.gap = certify_gap(a, cfg.setup, cell.report.z, &phi);
      } else {
        cell.report = mirror_prox(oracle, cfg.setup, epsilon, opt);
        cell.gap = certify_gap(a, cfg.setup, cell.report.z);
      }
      break;
    }
    case SolverChoice::Mwu: {
      if (cfg.setup != SetupKind::L1L1) throw ConfigError("mwu applies to the l1l1 setup only");
      cell.report = mwu(oracle, epsilon);
      cell.gap = certify_gap(a, cfg.setup, cell.report.z);
      break;
    }
  }
  const auto t1 = std::chrono::steady_clock::now();
  cell.report.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return cell;
}

// ---------------------------------------------------------------------------
// CSV and SVG emission.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace detail

// Log-log plot of mean queries vs epsilon, one polyline per solver, emitted
// as direct SVG paths.
inline std::string render_query_plot_svg(
    const ExperimentConfig& cfg, const std::map<std::pair<int, double>, std::pair<double, int>>& agg) {
  const double W = 640, H = 480, ml = 70, mr = 20, mt = 30, mb = 50;
  double lx_min = 1e300, lx_max = -1e300, ly_min = 1e300, ly_max = -1e300;
  for (const auto& [key, val] : agg) {
    const double lx = std::log10(key.second);
    const double ly = std::log10(std::max(1.0, val.first / val.second));
    lx_min = std::min(lx_min, lx);
    lx_max = std::max(lx_max, lx);
    ly_min = std::min(ly_min, ly);
    ly_max = std::max(ly_max, ly);
  }
  if (lx_max <= lx_min) lx_max = lx_min + 1.0;
  if (ly_max <= ly_min) ly_max = ly_min + 1.0;
  auto px = [&](double lx) { return ml + (lx - lx_min) / (lx_max - lx_min) * (W - ml - mr); };
  auto py = [&](double ly) { return H - mb - (ly - ly_min) / (ly_max - ly_min) * (H - mt - mb); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
  svg << "<rect width='" << W << "' height='" << H << "' fill='white'/>\n";
  svg << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
      << "' stroke='black'/>\n";
  svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
      << "' stroke='black'/>\n";
  svg << "<text x='" << (W / 2) << "' y='" << (H - 12)
      << "' font-size='14' text-anchor='middle'>epsilon (log)</text>\n";
  svg << "<text x='16' y='" << (H / 2)
      << "' font-size='14' text-anchor='middle' transform='rotate(-90 16 " << (H / 2)
      << ")'>oracle queries (log)</text>\n";

  for (double e : cfg.epsilons) {
    const double x = px(std::log10(e));
    svg << "<line x1='" << x << "' y1='" << H - mb << "' x2='" << x << "' y2='" << H - mb + 5
        << "' stroke='black'/>\n";
    svg << "<text x='" << x << "' y='" << H - mb + 20 << "' font-size='11' text-anchor='middle'>"
        << detail::fmt_double(e) << "</text>\n";
  }

  int ci = 0;
  for (SolverChoice s : cfg.solvers) {
    std::ostringstream path;
    bool first = true;
    std::vector<double> eps_sorted = cfg.epsilons;
    std::sort(eps_sorted.begin(), eps_sorted.end());
    for (double e : eps_sorted) {
      auto it = agg.find({static_cast<int>(s), e});
      if (it == agg.end()) continue;
      const double x = px(std::log10(e));
      const double y = py(std::log10(std::max(1.0, it->second.first / it->second.second)));
      path << (first ? "M" : "L") << x << " " << y << " ";
      first = false;
      svg << "<circle cx='" << x << "' cy='" << y << "' r='3' fill='"
          << colors[ci % 5] << "'/>\n";
    }
    svg << "<path d='" << path.str() << "' fill='none' stroke='" << colors[ci % 5]
        << "' stroke-width='1.5'/>\n";
    svg << "<text x='" << W - mr - 150 << "' y='" << mt + 16 * (ci + 1)
        << "' font-size='12' fill='" << colors[ci % 5] << "'>" << solver_name(s) << "</text>\n";
    ++ci;
  }
  svg << "</svg>\n";
  return svg.str();
}


struct ExperimentOutput {
  std::string csv;
  std::string svg;
};

inline ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  struct Cell {
    SolverChoice solver;
    double epsilon;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (SolverChoice s : cfg.solvers)
    for (double e : cfg.epsilons)
      for (std::uint64_t seed : cfg.seeds) cells.push_back({s, e, seed});

  std::vector<CellResult> results(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        results[i] = run_cell(cfg, cells[i].solver, cells[i].epsilon, cells[i].seed);
      } catch (const std::exception& ex) {
        errors[i] = ex.what();
      }
    }
  };
  const int nthreads = std::min<int>(cfg.threads, static_cast<int>(cells.size()) + 1);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!errors[i].empty()) throw MatGameError(errors[i]);

  std::ostringstream csv;
  csv << "# matgame-csv v1\n";
  csv << "setup,solver,family,m,n,seed,epsilon,queries,progress_iters,guilty_iters,"
         "outer_iters,gap,wall_ms\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const auto& r = results[i];
    csv << setup_name(cfg.setup) << ',' << solver_name(c.solver) << ','
        << family_name(cfg.family) << ',' << cfg.m << ',' << cfg.n << ',' << c.seed << ','
        << detail::fmt_double(c.epsilon) << ',' << r.report.queries << ','
        << r.report.progress_iters << ',' << r.report.guilty_iters << ','
        << r.report.outer_iters << ',' << detail::fmt_double(r.gap) << ','
        << detail::fmt_double(r.report.wall_ms) << '\n';
  }

  ExperimentOutput out;
  out.csv = csv.str();
  if (cfg.emit_svg && !cfg.epsilons.empty()) {
    // mean queries per (solver, epsilon)
    std::map<std::pair<int, double>, std::pair<double, int>> agg;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      auto& slot = agg[{static_cast<int>(cells[i].solver), cells[i].epsilon}];
      slot.first += static_cast<double>(results[i].report.queries);
      slot.second += 1;
    }
    out.svg = render_query_plot_svg(cfg, agg);
  }
  return out;
}

}  // namespace matgame

// Command-line front end: generate benchmark instances, solve single games,
// and run experiment grids producing CSV and SVG reports.
//
// Exit codes: 0 success, 2 configuration error, 3 budget exceeded.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "matgame.hpp"

namespace fs = std::filesystem;
using namespace matgame;

namespace {

SetupKind parse_setup(const std::string& s) {
  if (s == "l1l1") return SetupKind::L1L1;
  if (s == "l2l1") return SetupKind::L2L1;
  if (s == "l2l2") return SetupKind::L2L2;
  throw ConfigError("unknown setup: " + s);
}

int run_gen(const std::string& family, SetupKind setup, int m, int n, std::uint64_t seed,
            const std::string& out, bool binary, const InstanceParams& params) {
  const DenseMatrix a = generate_instance(family_from_name(family), setup, m, n, seed, params);
  save_matrix(a, out, binary);
  std::cout << "wrote " << m << "x" << n << " " << family << " instance to " << out << "\n";
  return 0;
}

int run_solve(const std::string& setup_name_str, double eps, const std::string& matrix_path,
              bool pass_model, double beta, double tau, double p, double xi,
              const std::string& solver) {
  const SetupKind kind = parse_setup(setup_name_str);
  const DenseMatrix a = load_matrix(matrix_path);
  CountingOracle oracle(a);
  SolveReport rep;
  double gap = 0.0;

  if (solver == "mirror_prox") {
    rep = mirror_prox(oracle, kind, eps);
    gap = certify_gap(a, kind, rep.z);
  } else if (solver == "mwu") {
    if (kind != SetupKind::L1L1) throw ConfigError("mwu applies to the l1l1 setup only");
    rep = mwu(oracle, eps);
    gap = certify_gap(a, kind, rep.z);
  } else if (kind == SetupKind::L2L2) {
    CompositePhi phi = CompositePhi::zero(a.cols(), a.rows());
    L2L2Options opt;
    opt.p = p;
    const double sp = schatten_norm(a, p);
    opt.tau = tau > 0.0 ? tau : l2l2_tau_schedule(sp, p, eps);
    opt.zeta = sp;
    rep = solve_l2l2(oracle, phi, eps, opt);
    gap = certify_gap(a, kind, rep.z, &phi);
  } else {
    Alg8Options opt;
    opt.beta = beta;
    opt.tau = tau;
    opt.outer.pass_model = pass_model;
    opt.outer.sm.p = p;
    opt.outer.sm.xi = xi;
    rep = solve_l2l1_l1l1(oracle, kind, eps, opt);
    gap = certify_gap(a, kind, rep.z);
  }

  std::cout << "setup=" << setup_name_str << " eps=" << eps << " queries=" << rep.queries
            << " gap=" << gap << "\n";
  std::cout << "progress_iters=" << rep.progress_iters << " guilty_iters=" << rep.guilty_iters
            << " outer_iters=" << rep.outer_iters << "\n";
  std::cout << "x =";
  for (double v : rep.z.x) std::cout << " " << v;
  std::cout << "\ny =";
  for (double v : rep.z.y) std::cout << " " << v;
  std::cout << "\n";
  return 0;
}

int run_bench(const std::string& config_path, const std::string& out_dir) {
  std::ifstream f(config_path);
  if (!f) throw ConfigError("cannot open config file: " + config_path);
  const ExperimentConfig cfg = parse_experiment_config(f);
  const ExperimentOutput out = run_experiment(cfg);

  fs::create_directories(out_dir);
  const fs::path csv_path = fs::path(out_dir) / cfg.csv_name;
  std::ofstream csv(csv_path);
  csv << out.csv;
  std::cout << "wrote " << csv_path.string() << "\n";
  if (!out.svg.empty()) {
    const fs::path svg_path = fs::path(out_dir) / cfg.svg_name;
    std::ofstream svg(svg_path);
    svg << out.svg;
    std::cout << "wrote " << svg_path.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matgame: matrix-game solvers with query-counted oracles"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a benchmark instance");
  std::string g_family = "sign_random", g_out = "instance.mat", g_setup = "l1l1";
  int g_m = 8, g_n = 8, g_rank = 3;
  std::uint64_t g_seed = 1;
  double g_noise = 0.0, g_decay = 1.0;
  bool g_binary = false;
  gen->add_option("--family,-f", g_family, "instance family");
  gen->add_option("--setup", g_setup, "setup used for normalization");
  gen->add_option("--m,-m", g_m, "rows")->required();
  gen->add_option("--n,-n", g_n, "cols")->required();
  gen->add_option("--seed,-s", g_seed, "seed");
  gen->add_option("--out,-o", g_out, "output file");
  gen->add_option("--rank", g_rank, "planted rank");
  gen->add_option("--noise", g_noise, "planted noise level");
  gen->add_option("--decay", g_decay, "spectral decay exponent");
  gen->add_flag("--binary", g_binary, "write the binary format");

  // solve
  auto* solve = app.add_subcommand("solve", "solve a game from a matrix file");
  std::string s_setup = "l1l1", s_matrix, s_solver = "auto";
  double s_eps = 0.1, s_beta = 0.0, s_tau = 0.0, s_p = 2.0, s_xi = 1.0;
  bool s_pass = false;
  solve->add_option("--setup", s_setup, "l1l1 | l2l1 | l2l2")->required();
  solve->add_option("--eps,-e", s_eps, "target accuracy")->required();
  solve->add_option("--matrix", s_matrix, "matrix file")->required();
  solve->add_flag("--pass-model", s_pass, "carry learned models across subproblems");
  solve->add_option("--beta", s_beta, "minimum regularization level");
  solve->add_option("--tau", s_tau, "smoothness threshold");
  solve->add_option("--p", s_p, "Schatten exponent in [1,2]");
  solve->add_option("--xi", s_xi, "upper bound on Upsilon_p(A)");
  solve->add_option("--solver", s_solver, "auto | mirror_prox | mwu");

  // bench
  auto* bench = app.add_subcommand("bench", "run an experiment grid from a config file");
  std::string b_config, b_out = ".";
  bench->add_option("--config,-c", b_config, "config file")->required();
  bench->add_option("--out,-o", b_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return run_gen(g_family, parse_setup(g_setup), g_m, g_n, g_seed, g_out, g_binary,
                     InstanceParams{g_rank, g_noise, g_decay});
    if (solve->parsed())
      return run_solve(s_setup, s_eps, s_matrix, s_pass, s_beta, s_tau, s_p, s_xi, s_solver);
    if (bench->parsed()) return run_bench(b_config, b_out);
  } catch (const SearchBudgetExceeded& ex) {
    std::cerr << "budget error: " << ex.what() << "\n";
    return 3;
  } catch (const IterationBudgetExceeded& ex) {
    std::cerr << "budget error: " << ex.what() << "\n";
    return 3;
  } catch (const ModelUpdateOverflow& ex) {
    std::cerr << "budget error: " << ex.what() << "\n";
    return 3;
  } catch (const ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 2;
  } catch (const IoError& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

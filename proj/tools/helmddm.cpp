// Command-line front end: a single run, a diagnostics run or a sweep.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "helmddm/harness.hpp"

using namespace helmddm;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << text;
}

std::string strip_json_suffix(const std::string& path) {
  if (path.size() > 5 && path.substr(path.size() - 5) == ".json") return path.substr(0, path.size() - 5);
  return path;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Overlapping Schwarz preconditioned GMRES for 2D Helmholtz"};
  ExperimentConfig cfg;
  std::string kappa = "2pi", epsilon = "0", overlap = "generous", coarse = "none", sweep_file;
  int mesh_n = 0, subdomains = 0, nu = 0, fixed_m = 0;
  double beta = 0.6, rho = 0.0, grid_H = 0.0;
  bool auto_mesh = false, rho_rule = false, nu_rule = false;

  app.add_option("--kappa", kappa, "wavenumber; a trailing 'pi' multiplies by pi (e.g. 10pi)");
  app.add_option("--epsilon", epsilon, "absorption: 0, kappa or a number");
  app.add_option("--order", cfg.order, "finite element order")->check(CLI::IsMember({1, 2}));
  auto* o_mesh = app.add_option("--mesh-n", mesh_n, "mesh intervals per side")->check(CLI::PositiveNumber);
  auto* o_auto = app.add_flag("--auto-mesh", auto_mesh, "n = ceil(kappa^{(2p+1)/(2p)}), capped by --n-max");
  o_mesh->excludes(o_auto);
  app.add_option("--n-max", cfg.n_max, "cap for the automatic mesh")->check(CLI::PositiveNumber);
  auto* o_beta = app.add_option("--beta", beta, "M = round(kappa^beta) subdomains per side");
  auto* o_sub = app.add_option("--subdomains", subdomains, "subdomains per side")->check(CLI::PositiveNumber);
  o_beta->excludes(o_sub);
  app.add_option("--overlap", overlap, "minimal or generous")->check(CLI::IsMember({"minimal", "generous"}));
  app.add_option("--coarse", coarse, "coarse space")
      ->check(CLI::IsMember({"none", "spectral", "economic", "grid", "dtn", "hgeneo"}));
  auto* o_rho = app.add_option("--rho", rho, "eigenvalue threshold rho");
  auto* o_rho_rule = app.add_flag("--rho-rule", rho_rule, "rho = kappa^{(beta-1)/2} / 2 (default)");
  o_rho->excludes(o_rho_rule);
  auto* o_nu = app.add_option("--nu", nu, "intervals of the economic trace mesh")->check(CLI::PositiveNumber);
  auto* o_nu_rule = app.add_flag("--nu-rule", nu_rule, "nu = round(kappa^{1-beta}) (default)");
  o_nu->excludes(o_nu_rule);
  auto* o_fixed = app.add_option("--fixed-m", fixed_m, "fixed number of local coarse functions")
                      ->check(CLI::PositiveNumber);
  auto* o_grid = app.add_option("--grid-H", grid_H, "grid coarse mesh size (default d)");
  app.add_option("--tol", cfg.tol, "GMRES relative residual tolerance");
  app.add_option("--maxit", cfg.maxit, "GMRES iteration limit");
  app.add_option("--seed", cfg.seed, "seed for diagnostic sample vectors");
  app.add_flag("--diagnostics", cfg.diagnostics, "run the identity and inequality checks");
  app.add_option("--sweep", sweep_file, "sweep file")->check(CLI::ExistingFile);
  app.add_option("--out", cfg.out, "report path (JSON); sweeps also write <out>.csv");
  CLI11_PARSE(app, argc, argv);

  try {
    cfg.kappa = parse_kappa(kappa);
    set_epsilon(cfg, epsilon);
    if (o_mesh->count()) cfg.mesh_n = mesh_n;
    if (o_sub->count()) cfg.subdomains = subdomains;
    else cfg.beta = beta;
    cfg.overlap = parse_overlap(overlap);
    cfg.coarse = parse_coarse_kind(coarse);
    if (o_rho->count()) cfg.rho = rho;
    if (o_nu->count()) cfg.nu = nu;
    if (o_fixed->count()) cfg.fixed_m = fixed_m;
    if (o_grid->count()) cfg.grid_H = grid_H;

    if (sweep_file.empty()) {
      const RunReport rep = run_single(cfg);
      const std::string text = rep.to_json().dump(2) + "\n";
      if (cfg.out.empty()) std::cout << text;
      else write_text(cfg.out, text);
      if (!rep.ok) {
        std::cerr << "failed in stage " << rep.stage << ": " << rep.error << "\n";
        return 2;
      }
      std::cerr << "iterations " << rep.iterations << (rep.converged ? "" : " (not converged)") << ", n_c "
                << rep.n_c << ", ratio " << rep.ratio << "\n";
      return 0;
    }

    std::ifstream in(sweep_file);
    ExperimentConfig base = cfg;
    const SweepAxes axes = parse_sweep(in, base);
    const SweepResult res = run_sweep(base, axes);
    const std::string csv = res.to_csv();
    if (cfg.out.empty()) {
      std::cout << res.to_json().dump(2) << "\n" << csv;
    } else {
      write_text(cfg.out, res.to_json().dump(2) + "\n");
      write_text(strip_json_suffix(cfg.out) + ".csv", csv);
      std::cout << csv;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "helmddm/harness.hpp"

using namespace helmddm;

namespace {

constexpr double kPi = std::numbers::pi;

ExperimentConfig small_config(CoarseKind kind) {
  ExperimentConfig cfg;
  cfg.kappa = 2.0 * kPi;
  cfg.epsilon_mode = EpsilonMode::value;
  cfg.epsilon_value = 1.0;
  cfg.mesh_n = 16;
  cfg.subdomains = 2;
  cfg.coarse = kind;
  cfg.rho = 0.5;
  cfg.nu = 2;
  return cfg;
}

}  // namespace

TEST(Parse, Kappa) {
  EXPECT_DOUBLE_EQ(parse_kappa("5pi"), 5.0 * kPi);
  EXPECT_DOUBLE_EQ(parse_kappa("10*pi"), 10.0 * kPi);
  EXPECT_DOUBLE_EQ(parse_kappa("pi"), kPi);
  EXPECT_DOUBLE_EQ(parse_kappa("12.5"), 12.5);
  EXPECT_DOUBLE_EQ(parse_kappa("0.5pi"), 0.5 * kPi);
  EXPECT_THROW(parse_kappa("abc"), Error);
  EXPECT_THROW(parse_kappa("-3"), Error);
  EXPECT_THROW(parse_kappa("5pix"), Error);
}

TEST(Parse, Epsilon) {
  ExperimentConfig cfg;
  cfg.kappa = 7.0;
  set_epsilon(cfg, "0");
  EXPECT_EQ(cfg.epsilon_mode, EpsilonMode::zero);
  set_epsilon(cfg, "kappa");
  EXPECT_EQ(cfg.epsilon_mode, EpsilonMode::kappa);
  EXPECT_EQ(derive(cfg).epsilon, 7.0);
  set_epsilon(cfg, "2.5");
  EXPECT_EQ(cfg.epsilon_mode, EpsilonMode::value);
  EXPECT_EQ(derive(cfg).epsilon, 2.5);
  EXPECT_THROW(set_epsilon(cfg, "-1"), Error);
  EXPECT_THROW(set_epsilon(cfg, "lots"), Error);
  EXPECT_EQ(parse_overlap("minimal"), OverlapMode::minimal);
  EXPECT_THROW(parse_overlap("wide"), Error);
  EXPECT_EQ(parse_coarse_kind("hgeneo"), CoarseKind::hgeneo);
  EXPECT_THROW(parse_coarse_kind("magic"), Error);
}

TEST(Derive, TableConfigurations) {
  struct Row { double kappa; int n, M, L; };
  for (const Row r : {Row{5 * kPi, 63, 5, 2}, Row{10 * kPi, 177, 8, 3}, Row{20 * kPi, 499, 12, 5}}) {
    ExperimentConfig cfg;
    cfg.kappa = r.kappa;
    const DerivedParams d = derive(cfg);
    EXPECT_EQ(d.n, r.n);
    EXPECT_EQ(d.M, r.M);
    EXPECT_EQ(d.L, r.L);
    EXPECT_DOUBLE_EQ(d.beta, 0.6);
    EXPECT_DOUBLE_EQ(d.d, 1.0 / r.M);
    EXPECT_DOUBLE_EQ(d.rho, 0.5 * std::pow(r.kappa, -0.2));
    EXPECT_EQ(d.nu, std::max(1, static_cast<int>(std::lround(std::pow(r.kappa, 0.4)))));
    EXPECT_EQ(d.grid_intervals, r.M);
    EXPECT_EQ(d.dofs, (r.n + 1) * (r.n + 1));
    EXPECT_TRUE(std::isnan(d.alpha));  // eps = 0
    EXPECT_NEAR(d.gamma, -std::log(1.0 / r.n) / std::log(r.kappa) - 1.0, 1e-14);
  }
}

TEST(Derive, ExplicitOverridesAndErrors) {
  ExperimentConfig cfg;
  cfg.kappa = 10.0;
  cfg.mesh_n = 20;
  cfg.subdomains = 4;
  cfg.epsilon_mode = EpsilonMode::kappa;
  cfg.grid_H = 0.1;
  DerivedParams d = derive(cfg);
  EXPECT_EQ(d.n, 20);
  EXPECT_EQ(d.M, 4);
  EXPECT_NEAR(d.beta, std::log(4.0) / std::log(10.0), 1e-14);
  EXPECT_EQ(d.grid_intervals, 10);
  EXPECT_NEAR(d.alpha, 0.0, 1e-14);
  EXPECT_NEAR(d.sigma, 2.0 - d.beta + d.gamma / 2.0, 1e-14);
  cfg.subdomains = 21;
  EXPECT_THROW(derive(cfg), Error);
  cfg.subdomains = 4;
  cfg.coarse = CoarseKind::economic;
  cfg.fixed_m = 6;
  EXPECT_EQ(derive(cfg).nu, 3);
}

TEST(RunSingle, SingleSubdomainConvergesImmediately) {
  ExperimentConfig cfg;
  cfg.kappa = 2.0 * kPi;
  cfg.mesh_n = 10;
  cfg.subdomains = 1;
  const RunReport rep = run_single(cfg);
  ASSERT_TRUE(rep.ok) << rep.error;
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.iterations, 2);
  EXPECT_EQ(rep.residual_history.front(), 1.0);
  EXPECT_LE(rep.residual_history.back(), cfg.tol);
}

TEST(RunSingle, FailureStages) {
  ExperimentConfig cfg;
  cfg.mesh_n = 4;
  cfg.subdomains = 5;
  RunReport rep = run_single(cfg);
  EXPECT_FALSE(rep.ok);
  EXPECT_EQ(rep.stage, "config");
  cfg.subdomains = 2;
  cfg.order = 3;
  rep = run_single(cfg);
  EXPECT_FALSE(rep.ok);
  EXPECT_EQ(rep.stage, "config");
  cfg.order = 1;
  cfg.coarse = CoarseKind::hgeneo;
  cfg.rho = 1e6;  // every local eigenvector from every subdomain: singular A0
  rep = run_single(cfg);
  EXPECT_FALSE(rep.ok);
  EXPECT_EQ(rep.stage, "coarse");
  const Json j = rep.to_json();
  EXPECT_EQ(j["status"], "failed");
  EXPECT_EQ(j["stage"], "coarse");
  EXPECT_FALSE(j["error"].get<std::string>().empty());
}

TEST(RunSingle, JsonSchema) {
  const RunReport rep = run_single(small_config(CoarseKind::economic));
  ASSERT_TRUE(rep.ok) << rep.error;
  const Json j = Json::parse(rep.to_json().dump());
  EXPECT_EQ(j["schema"], "ddm-report/1");
  EXPECT_EQ(j["status"], "ok");
  EXPECT_FALSE(j.contains("stage"));
  for (const char* key : {"config", "derived", "iterations", "converged", "breakdown", "residual_kind",
                          "residual_history", "setup_seconds", "solve_seconds"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["residual_kind"], "unpreconditioned_relative_l2");
  EXPECT_EQ(j["derived"]["M"], 2);
  EXPECT_EQ(j["derived"]["n_c"], rep.n_c);
  EXPECT_EQ(j["config"]["coarse"], "economic");
  EXPECT_EQ(j["iterations"].get<int>() + 1, static_cast<int>(j["residual_history"].size()));
  EXPECT_FALSE(j.contains("diagnostics"));
}

TEST(RunSingle, Deterministic) {
  const RunReport a = run_single(small_config(CoarseKind::spectral));
  const RunReport b = run_single(small_config(CoarseKind::spectral));
  ASSERT_TRUE(a.ok && b.ok);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.residual_history, b.residual_history);
  EXPECT_EQ(a.per_subdomain, b.per_subdomain);
}

TEST(Diagnostics, SingleSubdomain) {
  ExperimentConfig cfg;
  cfg.kappa = 2.0 * kPi;
  cfg.mesh_n = 8;
  cfg.subdomains = 1;
  cfg.epsilon_mode = EpsilonMode::value;
  cfg.epsilon_value = 1.0;
  const RunReport rep = run_diagnostics(cfg);
  ASSERT_TRUE(rep.ok && rep.diagnostics);
  EXPECT_TRUE(rep.diagnostics->identity_pass);
  EXPECT_NEAR(rep.diagnostics->norm_max, 1.0, 1e-10);
  EXPECT_NEAR(rep.diagnostics->fov_min, 1.0, 1e-10);
  EXPECT_TRUE(std::isnan(rep.diagnostics->harmonic_max_angle));
}

TEST(Diagnostics, SmallConfigAllKinds) {
  for (CoarseKind kind : {CoarseKind::none, CoarseKind::spectral, CoarseKind::economic, CoarseKind::grid,
                          CoarseKind::dtn, CoarseKind::hgeneo}) {
    const RunReport rep = run_diagnostics(small_config(kind));
    ASSERT_TRUE(rep.ok) << to_string(kind) << ": " << rep.error;
    const Diagnostics& g = *rep.diagnostics;
    EXPECT_TRUE(g.identity_pass) << to_string(kind) << " " << g.identity_residual;
    EXPECT_TRUE(g.harmonic_pass) << g.harmonic_max_angle;
    EXPECT_TRUE(g.stability_pass) << g.stability_max_ratio;
    if (kind == CoarseKind::spectral) EXPECT_FALSE(std::isnan(g.stability_max_ratio));
    const Json j = rep.to_json();
    EXPECT_TRUE(j["diagnostics"]["identity_pass"].get<bool>());
  }
}

TEST(Sweep, GrammarAndErrors) {
  ExperimentConfig base;
  std::istringstream in(
      "# comment line\n"
      "kappa = 2pi, 4pi   # trailing\n"
      "coarse = none, economic\n"
      "\n"
      "mesh_n = 12\n"
      "subdomains = 3\n"
      "rho = rule\n"
      "tol = 1e-8\n");
  const SweepAxes axes = parse_sweep(in, base);
  EXPECT_EQ(axes.kappa.size(), 2u);
  EXPECT_EQ(axes.coarse.size(), 2u);
  EXPECT_EQ(base.mesh_n, 12);
  EXPECT_EQ(base.subdomains, 3);
  EXPECT_FALSE(base.rho.has_value());
  EXPECT_EQ(base.tol, 1e-8);
  const auto points = expand_sweep(base, axes);
  ASSERT_EQ(points.size(), 4u);
  EXPECT_EQ(points[0].column, "none");
  EXPECT_EQ(points[3].column, "economic");
  for (const char* bad : {"bogus = 1\n", "kappa\n", "tol = 1, 2\n", "coarse = magic\n", "maxit = ten\n", "kappa = 2pi,\n"}) {
    std::istringstream is(bad);
    ExperimentConfig b;
    EXPECT_THROW(parse_sweep(is, b), Error) << bad;
  }
}

TEST(Sweep, ErrorsNameTheLine) {
  std::istringstream is("kappa = 2pi\nmaxit = ten\n");
  ExperimentConfig b;
  try {
    parse_sweep(is, b);
    FAIL() << "expected Error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("sweep line 2"), std::string::npos) << e.what();
  }
}

TEST(Sweep, SinglePointEqualsRunSingle) {
  ExperimentConfig base = small_config(CoarseKind::economic);
  SweepAxes axes;
  axes.kappa = {base.kappa};
  const SweepResult res = run_sweep(base, axes);
  ASSERT_EQ(res.reports.size(), 1u);
  const RunReport direct = run_single(base);
  EXPECT_EQ(res.reports[0].iterations, direct.iterations);
  EXPECT_EQ(res.reports[0].residual_history, direct.residual_history);
  EXPECT_EQ(res.reports[0].n_c, direct.n_c);
}

TEST(Sweep, CsvLayout) {
  ExperimentConfig base = small_config(CoarseKind::none);
  base.mesh_n = 12;
  SweepAxes axes;
  axes.kappa = {kPi, 2.0 * kPi};
  axes.coarse = {CoarseKind::none, CoarseKind::grid};
  base.grid_H = 0.5;
  const SweepResult res = run_sweep(base, axes);
  const std::string csv = res.to_csv();
  std::istringstream is(csv);
  std::string header, row1, row2;
  std::getline(is, header);
  std::getline(is, row1);
  std::getline(is, row2);
  EXPECT_EQ(header, "kappa,none,grid");
  EXPECT_EQ(row1.rfind("1pi,", 0), 0u) << row1;
  EXPECT_EQ(row2.rfind("2pi,", 0), 0u) << row2;
  char cell[64];
  std::snprintf(cell, sizeof cell, "%d(%.2g)", res.reports[3].iterations, res.reports[3].ratio);
  EXPECT_NE(row2.find(cell), std::string::npos) << row2;
  EXPECT_EQ(res.to_json().size(), 4u);

  base.maxit = 1;
  SweepAxes one;
  const SweepResult capped = run_sweep(base, one);
  EXPECT_EQ(capped.to_csv(), "kappa,iterations(ratio)\n2pi,×\n");
  ExperimentConfig broken = base;
  broken.subdomains = 50;
  EXPECT_EQ(run_sweep(broken, one).to_csv(), "kappa,iterations(ratio)\n2pi,fail\n");
}

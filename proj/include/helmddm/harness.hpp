#pragma once

// Experiment runner: configuration, single runs, sweeps, diagnostics and
// JSON/CSV output.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "helmddm/coarse.hpp"
#include "helmddm/decomp.hpp"
#include "helmddm/fem.hpp"
#include "helmddm/harmonic.hpp"
#include "helmddm/krylov.hpp"
#include "helmddm/linalg.hpp"
#include "helmddm/precond.hpp"

namespace helmddm {

using Json = nlohmann::ordered_json;

enum class EpsilonMode { zero, kappa, value };

struct ExperimentConfig {
  double kappa = 2.0 * std::numbers::pi;
  EpsilonMode epsilon_mode = EpsilonMode::zero;
  double epsilon_value = 0.0;
  int order = 1;
  std::optional<int> mesh_n;  // auto mesh when empty
  int n_max = 600;
  std::optional<double> beta;     // M = round(kappa^beta)
  std::optional<int> subdomains;  // explicit M, wins over beta
  OverlapMode overlap = OverlapMode::generous;
  CoarseKind coarse = CoarseKind::none;
  std::optional<double> rho;  // empty: rho = kappa^{(beta-1)/2} / 2
  std::optional<int> nu;      // empty: h_nu = kappa^{beta-1}
  std::optional<int> fixed_m;
  std::optional<double> grid_H;  // empty: H = d
  double tol = 1e-6;
  int maxit = 1000;
  std::uint64_t seed = 1;
  bool diagnostics = false;
  int diagnostic_samples = 20;
  std::string out;
};

inline double parse_kappa(const std::string& text) {
  std::string s = text;
  double factor = 1.0;
  if (s.size() >= 2 && s.substr(s.size() - 2) == "pi") {
    factor = std::numbers::pi;
    s.resize(s.size() - 2);
    if (!s.empty() && s.back() == '*') s.pop_back();
    if (s.empty()) return factor;
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error("bad kappa value: " + text);
  }
  if (used != s.size() || !(v > 0.0) || !std::isfinite(v)) throw Error("bad kappa value: " + text);
  return v * factor;
}

inline void set_epsilon(ExperimentConfig& cfg, const std::string& text) {
  if (text == "0" || text == "zero") {
    cfg.epsilon_mode = EpsilonMode::zero;
    cfg.epsilon_value = 0.0;
  } else if (text == "kappa" || text == "k") {
    cfg.epsilon_mode = EpsilonMode::kappa;
  } else {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      throw Error("bad epsilon value: " + text);
    }
    if (used != text.size() || !(v >= 0.0) || !std::isfinite(v)) throw Error("bad epsilon value: " + text);
    cfg.epsilon_mode = v == 0.0 ? EpsilonMode::zero : EpsilonMode::value;
    cfg.epsilon_value = v;
  }
}

inline std::string epsilon_label(const ExperimentConfig& cfg) {
  switch (cfg.epsilon_mode) {
    case EpsilonMode::zero: return "0";
    case EpsilonMode::kappa: return "kappa";
    case EpsilonMode::value: {
      std::ostringstream os;
      os << cfg.epsilon_value;
      return os.str();
    }
  }
  return "0";
}

inline OverlapMode parse_overlap(const std::string& s) {
  if (s == "minimal") return OverlapMode::minimal;
  if (s == "generous") return OverlapMode::generous;
  throw Error("unknown overlap mode: " + s);
}

inline std::string to_string(OverlapMode m) { return m == OverlapMode::minimal ? "minimal" : "generous"; }

/// Every quantity a run derives from its configuration.
struct DerivedParams {
  double kappa = 0.0;
  double epsilon = 0.0;
  int n = 1;
  double h = 1.0;
  int dofs = 0;
  int M = 1;
  double beta = 0.0;  // effective, log M / log kappa when M is explicit
  double d = 1.0;
  int L = 1;
  double rho = 0.0;
  int nu = 1;
  int grid_intervals = 1;
  double alpha = std::nan("");
  double gamma = 0.0;
  double tau = 0.0;
  double sigma = std::nan("");
};

inline double default_rho(double kappa, double beta) { return 0.5 * std::pow(kappa, (beta - 1.0) / 2.0); }

inline int default_nu(double kappa, double beta) {
  return std::max(1, static_cast<int>(std::lround(std::pow(kappa, 1.0 - beta))));
}

inline DerivedParams derive(const ExperimentConfig& cfg) {
  if (!(cfg.kappa > 0.0)) throw Error("kappa must be positive");
  if (cfg.order != 1 && cfg.order != 2) throw Error("order must be 1 or 2");
  if (!(cfg.tol > 0.0)) throw Error("tol must be positive");
  if (cfg.maxit < 1) throw Error("maxit must be >= 1");
  DerivedParams d;
  d.kappa = cfg.kappa;
  d.epsilon = cfg.epsilon_mode == EpsilonMode::zero    ? 0.0
              : cfg.epsilon_mode == EpsilonMode::kappa ? cfg.kappa
                                                       : cfg.epsilon_value;
  if (d.epsilon < 0.0) throw Error("epsilon must be nonnegative");
  d.n = cfg.mesh_n ? *cfg.mesh_n : auto_mesh_intervals(cfg.kappa, cfg.order, cfg.n_max);
  if (d.n < 1) throw Error("mesh must have at least one interval");
  d.h = 1.0 / d.n;
  d.dofs = (cfg.order * d.n + 1) * (cfg.order * d.n + 1);
  const double log_k = std::log(cfg.kappa);
  if (cfg.subdomains) {
    d.M = *cfg.subdomains;
    d.beta = (cfg.kappa > 1.0 && d.M > 1) ? std::log(static_cast<double>(d.M)) / log_k : 0.0;
  } else {
    d.beta = cfg.beta.value_or(0.6);
    d.M = static_cast<int>(std::lround(std::pow(cfg.kappa, d.beta)));
  }
  d.M = std::max(1, d.M);
  if (d.M > d.n) throw Error("more subdomains per side than mesh intervals");
  d.d = 1.0 / d.M;
  d.L = DecompParams{d.M, cfg.overlap}.layers(d.n);
  d.rho = cfg.rho ? *cfg.rho : default_rho(cfg.kappa, d.beta);
  if (cfg.fixed_m && cfg.coarse == CoarseKind::economic)
    d.nu = std::max(1, *cfg.fixed_m / 2);
  else
    d.nu = cfg.nu ? *cfg.nu : default_nu(cfg.kappa, d.beta);
  const double H = cfg.grid_H ? *cfg.grid_H : d.d;
  if (!(H > 0.0)) throw Error("grid_H must be positive");
  d.grid_intervals = std::clamp(static_cast<int>(std::lround(1.0 / H)), 1, d.n);
  if (cfg.kappa > 1.0) {
    d.gamma = -std::log(d.h) / log_k - 1.0;
    d.tau = -std::log(d.d) / log_k - 1.0;
    if (d.epsilon > 0.0) {
      d.alpha = std::log(d.epsilon) / log_k - 1.0;
      d.sigma = 2.0 - (d.alpha + d.beta) + d.gamma / 2.0;
    }
  }
  return d;
}

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json config_json(const ExperimentConfig& cfg) {
  Json j;
  j["kappa"] = cfg.kappa;
  j["kappa_over_pi"] = cfg.kappa / std::numbers::pi;
  j["epsilon"] = epsilon_label(cfg);
  j["order"] = cfg.order;
  j["mesh"] = cfg.mesh_n ? Json(*cfg.mesh_n) : Json("auto");
  j["n_max"] = cfg.n_max;
  j["beta"] = cfg.beta ? Json(*cfg.beta) : Json(nullptr);
  j["subdomains"] = cfg.subdomains ? Json(*cfg.subdomains) : Json(nullptr);
  j["overlap"] = to_string(cfg.overlap);
  j["coarse"] = std::string(to_string(cfg.coarse));
  j["rho"] = cfg.rho ? Json(*cfg.rho) : Json("rule");
  j["nu"] = cfg.nu ? Json(*cfg.nu) : Json("rule");
  j["fixed_m"] = cfg.fixed_m ? Json(*cfg.fixed_m) : Json(nullptr);
  j["grid_H"] = cfg.grid_H ? Json(*cfg.grid_H) : Json(nullptr);
  j["tol"] = cfg.tol;
  j["maxit"] = cfg.maxit;
  j["seed"] = cfg.seed;
  j["diagnostics"] = cfg.diagnostics;
  return j;
}

struct Diagnostics {
  double identity_residual = std::nan("");  // max ||Pv - ((I-P0)v_d + v)|| / ||v||
  double stability_max_ratio = std::nan("");  // max ||D(I-Pi)v|| / (rho ||v||), spectral only
  double harmonic_max_angle = std::nan("");   // largest principal angle, eps > 0 only
  double fov_min = std::nan("");
  double norm_max = std::nan("");
  bool identity_pass = false;
  bool stability_pass = true;
  bool harmonic_pass = true;
};

struct RunReport {
  ExperimentConfig config;
  bool ok = false;
  std::string stage;  // failing stage when !ok
  std::string error;
  DerivedParams derived;
  int n_c = 0;
  int max_local_dofs = 0;
  double ratio = 0.0;
  std::vector<int> per_subdomain;
  int iterations = 0;
  bool converged = false;
  bool breakdown = false;
  std::vector<double> residual_history;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
  std::optional<Diagnostics> diagnostics;

  Json to_json() const {
    Json j;
    j["schema"] = "ddm-report/1";
    j["status"] = ok ? "ok" : "failed";
    if (!ok) {
      j["stage"] = stage;
      j["error"] = error;
    }
    j["config"] = config_json(config);
    Json d;
    d["kappa"] = derived.kappa;
    d["epsilon"] = derived.epsilon;
    d["n"] = derived.n;
    d["h"] = derived.h;
    d["dofs"] = derived.dofs;
    d["M"] = derived.M;
    d["subdomain_count"] = derived.M * derived.M;
    d["beta"] = derived.beta;
    d["d"] = derived.d;
    d["L"] = derived.L;
    d["rho"] = derived.rho;
    d["nu"] = derived.nu;
    d["grid_intervals"] = derived.grid_intervals;
    d["n_c"] = n_c;
    d["max_local_dofs"] = max_local_dofs;
    d["ratio"] = ratio;
    d["per_subdomain"] = per_subdomain;
    d["alpha"] = number_or_null(derived.alpha);
    d["gamma"] = number_or_null(derived.gamma);
    d["tau"] = number_or_null(derived.tau);
    d["sigma"] = number_or_null(derived.sigma);
    j["derived"] = d;
    j["iterations"] = iterations;
    j["converged"] = converged;
    j["breakdown"] = breakdown;
    j["residual_kind"] = "unpreconditioned_relative_l2";
    j["residual_history"] = residual_history;
    j["setup_seconds"] = setup_seconds;
    j["solve_seconds"] = solve_seconds;
    if (diagnostics) {
      Json g;
      g["identity_residual"] = number_or_null(diagnostics->identity_residual);
      g["identity_pass"] = diagnostics->identity_pass;
      g["stability_max_ratio"] = number_or_null(diagnostics->stability_max_ratio);
      g["stability_pass"] = diagnostics->stability_pass;
      g["harmonic_max_angle"] = number_or_null(diagnostics->harmonic_max_angle);
      g["harmonic_pass"] = diagnostics->harmonic_pass;
      g["field_of_values_min"] = number_or_null(diagnostics->fov_min);
      g["norm_max"] = number_or_null(diagnostics->norm_max);
      j["diagnostics"] = g;
    }
    return j;
  }
};

/// Largest principal angle between the column spans of X and Y (same row
/// count), from the sine formula ||(I - Qy Qy*) Qx||_2.
inline double max_principal_angle(const DenseMatrix& X, const DenseMatrix& Y, double rank_tol = 1e-10) {
  require_dims(X.rows() == Y.rows(), "max_principal_angle");
  auto orthonormal = [rank_tol](const DenseMatrix& A) {
    Eigen::ColPivHouseholderQR<DenseMatrix> qr(A);
    qr.setThreshold(rank_tol);
    const Index r = qr.rank();
    DenseMatrix Q = qr.householderQ() * DenseMatrix::Identity(A.rows(), r);
    return Q;
  };
  const DenseMatrix Qx = orthonormal(X);
  const DenseMatrix Qy = orthonormal(Y);
  if (Qx.cols() != Qy.cols()) return std::numbers::pi / 2.0;
  if (Qx.cols() == 0) return 0.0;
  const DenseMatrix residual = Qx - Qy * (Qy.adjoint() * Qx);
  const Eigen::JacobiSVD<DenseMatrix> svd(residual);
  return std::asin(std::min(1.0, svd.singularValues()(0)));
}

/// ||D_l E_l (I - Pi_rho) v|| / ||v|| for the harmonic function with the given coordinates.
inline double stability_ratio(const HarmonicBasis& basis, const SpectralSelection& sel, const Vector& coords) {
  const Vector rest = coords - project_pi_rho(sel, basis.gram_s, coords);
  const double top = std::sqrt(std::max(0.0, rest.dot(basis.gram_w * rest).real()));
  const double bottom = std::sqrt(std::max(0.0, coords.dot(basis.gram_s * coords).real()));
  return bottom > 0.0 ? top / bottom : 0.0;
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

inline RunReport run_single(const ExperimentConfig& cfg) {
  RunReport rep;
  rep.config = cfg;
  std::string stage = "config";
  try {
    const auto t0 = std::chrono::steady_clock::now();
    rep.derived = derive(cfg);
    const DerivedParams& dp = rep.derived;
    if (cfg.diagnostics && dp.dofs > 50000) throw Error("diagnostics need at most 50000 global DOFs");

    stage = "mesh";
    const auto [mesh, dofs] = build_mesh(MeshParams{dp.n, cfg.order, dp.gamma});
    stage = "assembly";
    const ProblemParams params{cfg.kappa, dp.epsilon};
    const AssembledSystem sys = assemble_global(params, mesh, dofs);
    stage = "decomposition";
    const Decomposition decomp = decompose(params, mesh, dofs, DecompParams{dp.M, cfg.overlap});
    rep.max_local_dofs = decomp.max_local_size();

    stage = "coarse";
    SelectionRule rule{dp.rho, cfg.fixed_m};
    std::vector<HarmonicBasis> bases;
    std::vector<SpectralSelection> selections;
    CoarseSpace cs = empty_coarse_space(decomp);
    switch (cfg.coarse) {
      case CoarseKind::none: break;
      case CoarseKind::spectral:
        bases = build_harmonic_bases(decomp);
        selections = select_spectral(bases, rule);
        cs = build_coarse_spectral(decomp, bases, selections, sys.A_eps);
        break;
      case CoarseKind::economic:
        cs = build_coarse_economic(decomp, mesh, dofs, EconomicParams{dp.nu}, sys.A_eps);
        break;
      case CoarseKind::grid: cs = build_coarse_grid(dp.grid_intervals, decomp, mesh, dofs, sys.A_eps); break;
      case CoarseKind::dtn:
        bases = build_harmonic_bases(decomp);
        cs = build_coarse_dtn(decomp, bases, rule, sys.A_eps);
        break;
      case CoarseKind::hgeneo: cs = build_coarse_hgeneo(decomp, rule, sys.A_eps); break;
    }
    rep.n_c = static_cast<int>(cs.size());
    rep.ratio = rep.max_local_dofs > 0 ? static_cast<double>(rep.n_c) / rep.max_local_dofs : 0.0;
    rep.per_subdomain = cs.per_subdomain;

    stage = "preconditioner";
    const Preconditioner pre = cfg.coarse == CoarseKind::none ? Preconditioner(decomp, sys.A_eps)
                                                              : Preconditioner(decomp, sys.A_eps, cs);
    rep.setup_seconds = detail::seconds_since(t0);

    stage = "solve";
    const auto t1 = std::chrono::steady_clock::now();
    const auto apply_A = [&](const Vector& v) { return Vector(csr_matvec(sys.A_eps, v)); };
    const auto apply_B = [&](const Vector& v) { return pre.apply(v); };
    const KrylovResult kr = gmres(apply_A, apply_B, sys.rhs, GmresOptions{cfg.tol, cfg.maxit});
    rep.solve_seconds = detail::seconds_since(t1);
    rep.iterations = kr.iterations;
    rep.converged = kr.converged;
    rep.breakdown = kr.breakdown;
    rep.residual_history = kr.residual_history;

    if (cfg.diagnostics) {
      stage = "diagnostics";
      Diagnostics g;
      const ProjectionDiagnostics pd =
          diagnostics_global_projection(pre, sys.S_1k, cfg.diagnostic_samples, cfg.seed);
      g.identity_residual = pd.max_identity_residual;
      g.identity_pass = pd.max_identity_residual <= 1e-7;
      g.fov_min = pd.min_field_of_values;
      g.norm_max = pd.max_norm_ratio;
      if (cfg.coarse == CoarseKind::spectral && dp.M > 1) {
        std::mt19937_64 rng(cfg.seed + 1);
        double worst = 0.0;
        for (std::size_t l = 0; l < bases.size(); ++l)
          for (int s = 0; s < cfg.diagnostic_samples; ++s) {
            const Vector c = detail::random_complex_vector(bases[l].dimension(), rng);
            worst = std::max(worst, stability_ratio(bases[l], selections[l], c) / dp.rho);
          }
        g.stability_max_ratio = worst;
        g.stability_pass = worst <= 1.0 + 1e-8;
      }
      if (dp.epsilon > 0.0 && dp.M > 1) {
        double worst = 0.0;
        for (std::size_t l = 0; l < decomp.count(); ++l) {
          const HarmonicBasis hb = build_harmonic_basis(decomp, l);
          worst = std::max(worst, max_principal_angle(hb.H, dirichlet_harmonic_basis(decomp.subdomains[l],
                                                                                     decomp.local[l])));
        }
        g.harmonic_max_angle = worst;
        g.harmonic_pass = worst <= 1e-7;
      }
      rep.diagnostics = g;
    }
    rep.ok = true;
  } catch (const std::exception& e) {
    rep.ok = false;
    rep.stage = stage;
    rep.error = e.what();
  }
  return rep;
}

inline RunReport run_diagnostics(ExperimentConfig cfg) {
  cfg.diagnostics = true;
  return run_single(cfg);
}

/// Sweep axes; every non-empty list multiplies the grid.
struct SweepAxes {
  std::vector<double> kappa;
  std::vector<double> beta;
  std::vector<std::string> epsilon;
  std::vector<CoarseKind> coarse;
  std::vector<OverlapMode> overlap;
  std::vector<int> fixed_m;
};

struct SweepPoint {
  ExperimentConfig config;
  std::string column;  // table column label, empty for a pure kappa sweep
};

inline std::vector<SweepPoint> expand_sweep(const ExperimentConfig& base, const SweepAxes& axes) {
  std::vector<SweepPoint> points{{base, ""}};
  auto join = [](const std::string& a, const std::string& b) { return a.empty() ? b : a + " " + b; };
  auto multiply = [&](auto const& values, auto&& apply, bool label) {
    if (values.empty()) return;
    std::vector<SweepPoint> next;
    for (const auto& p : points)
      for (const auto& v : values) {
        SweepPoint q = p;
        const std::string tag = apply(q.config, v);
        if (label && values.size() > 1) q.column = join(q.column, tag);
        next.push_back(std::move(q));
      }
    points = std::move(next);
  };
  auto num = [](double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };
  multiply(axes.coarse, [](ExperimentConfig& c, CoarseKind k) { c.coarse = k; return std::string(to_string(k)); }, true);
  multiply(axes.beta, [&](ExperimentConfig& c, double b) { c.beta = b; c.subdomains.reset(); return "beta=" + num(b); }, true);
  multiply(axes.epsilon, [](ExperimentConfig& c, const std::string& e) { set_epsilon(c, e); return "eps=" + e; }, true);
  multiply(axes.overlap, [](ExperimentConfig& c, OverlapMode m) { c.overlap = m; return to_string(m); }, true);
  multiply(axes.fixed_m, [&](ExperimentConfig& c, int m) { c.fixed_m = m; return "m=" + std::to_string(m); }, true);
  multiply(axes.kappa, [](ExperimentConfig& c, double k) { c.kappa = k; return std::string(); }, false);
  return points;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  if (const auto last = s.find_last_not_of(" \t"); last != std::string::npos && s[last] == ',')
    throw Error("empty list item in: " + s);
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a == std::string::npos) throw Error("empty list item in: " + s);
    out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

inline int parse_int(const std::string& s) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw Error("bad integer: " + s);
  }
  if (used != s.size()) throw Error("bad integer: " + s);
  return v;
}

inline double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error("bad number: " + s);
  }
  if (used != s.size()) throw Error("bad number: " + s);
  return v;
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error("bad boolean: " + s);
}

/// Parses the sweep file grammar of docs/sweep-format.md, applying scalar
/// keys to `base` and returning the axes.
inline SweepAxes parse_sweep(std::istream& in, ExperimentConfig& base) {
  SweepAxes axes;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("sweep line " + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      s = a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    trim(key);
    trim(value);
    if (value.empty()) throw Error("sweep line " + std::to_string(lineno) + ": empty value");
    try {
      const auto items = split_list(value);
      auto scalar = [&]() -> const std::string& {
        if (items.size() != 1) throw Error("sweep key '" + key + "' takes a single value");
        return items.front();
      };
      if (key == "kappa") {
        for (const auto& s : items) axes.kappa.push_back(parse_kappa(s));
      } else if (key == "beta") {
        for (const auto& s : items) axes.beta.push_back(parse_double(s));
      } else if (key == "epsilon") {
        for (const auto& s : items) {
          ExperimentConfig probe;
          set_epsilon(probe, s);
          axes.epsilon.push_back(s);
        }
      } else if (key == "coarse") {
        for (const auto& s : items) axes.coarse.push_back(parse_coarse_kind(s));
      } else if (key == "overlap") {
        for (const auto& s : items) axes.overlap.push_back(parse_overlap(s));
      } else if (key == "fixed_m") {
        for (const auto& s : items) axes.fixed_m.push_back(parse_int(s));
      } else if (key == "order") {
        base.order = parse_int(scalar());
      } else if (key == "mesh_n") {
        base.mesh_n = parse_int(scalar());
      } else if (key == "auto_mesh") {
        if (parse_bool(scalar())) base.mesh_n.reset();
      } else if (key == "n_max") {
        base.n_max = parse_int(scalar());
      } else if (key == "subdomains") {
        base.subdomains = parse_int(scalar());
      } else if (key == "rho") {
        if (scalar() == "rule") base.rho.reset(); else base.rho = parse_double(scalar());
      } else if (key == "nu") {
        if (scalar() == "rule") base.nu.reset(); else base.nu = parse_int(scalar());
      } else if (key == "grid_H") {
        base.grid_H = parse_double(scalar());
      } else if (key == "tol") {
        base.tol = parse_double(scalar());
      } else if (key == "maxit") {
        base.maxit = parse_int(scalar());
      } else if (key == "seed") {
        base.seed = static_cast<std::uint64_t>(parse_int(scalar()));
      } else if (key == "diagnostics") {
        base.diagnostics = parse_bool(scalar());
      } else {
        throw Error("unknown key '" + key + "'");
      }
    } catch (const Error& e) {
      throw Error("sweep line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return axes;
}

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<RunReport> reports;

  Json to_json() const {
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(r.to_json());
    return arr;
  }

  /// Rows are kappa (in units of pi), columns the other axes; a cell is
  /// "iters(ratio)", "×" without convergence, "fail" on a stage error.
  std::string to_csv() const {
    std::vector<std::string> columns;
    std::vector<double> rows;
    std::map<std::pair<double, std::string>, std::string> cells;
    for (std::size_t k = 0; k < reports.size(); ++k) {
      const std::string col = points[k].column.empty() ? "iterations(ratio)" : points[k].column;
      if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
      const double kap = points[k].config.kappa;
      if (std::find(rows.begin(), rows.end(), kap) == rows.end()) rows.push_back(kap);
      const RunReport& r = reports[k];
      std::string cell;
      if (!r.ok) {
        cell = "fail";
      } else if (!r.converged) {
        cell = "×";
      } else {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%d(%.2g)", r.iterations, r.ratio);
        cell = buf;
      }
      cells[{kap, col}] = cell;
    }
    std::ostringstream os;
    os << "kappa";
    for (const auto& c : columns) os << ',' << c;
    os << '\n';
    for (const double kap : rows) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%gpi", kap / std::numbers::pi);
      os << buf;
      for (const auto& c : columns) {
        const auto it = cells.find({kap, c});
        os << ',' << (it == cells.end() ? "" : it->second);
      }
      os << '\n';
    }
    return os.str();
  }
};

inline SweepResult run_sweep(const ExperimentConfig& base, const SweepAxes& axes) {
  SweepResult res;
  res.points = expand_sweep(base, axes);
  for (const auto& p : res.points) res.reports.push_back(run_single(p.config));
  return res;
}

}  // namespace helmddm

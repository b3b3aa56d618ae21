#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fdcache/analytic.hpp"
#include "fdcache/modes.hpp"
#include "fdcache/quadrature.hpp"
#include "fdcache/simulator.hpp"

namespace fdcache {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

/// Bad command line or configuration; the message names the offending flag.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// --help was given; what() holds the usage text.
class HelpRequested : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class RunMode { analytic, simulate, both };

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Inclusive dB grid start:stop:step.
struct ThetaGrid {
  double start_db = -10.0;
  double stop_db = 30.0;
  double step_db = 1.0;

  std::vector<double> db_values() const {
    const double span = stop_db - start_db;
    const auto count = static_cast<std::size_t>(std::floor(span / step_db + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
      out[i] = start_db + static_cast<double>(i) * step_db;
    return out;
  }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

inline double parse_double(const std::string& text, const std::string& flag) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError(flag + ": cannot parse '" + text + "' as a number");
  }
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

inline ThetaGrid parse_theta_grid(const std::string& text) {
  const auto parts = detail::split(text, ':');
  if (parts.size() != 3)
    throw UsageError("--theta-db: expected start:stop:step, got '" + text + "'");
  ThetaGrid g{detail::parse_double(parts[0], "--theta-db"),
              detail::parse_double(parts[1], "--theta-db"),
              detail::parse_double(parts[2], "--theta-db")};
  if (!(g.step_db > 0.0)) throw UsageError("--theta-db: step must be positive");
  if (g.stop_db < g.start_db) throw UsageError("--theta-db: stop is below start");
  return g;
}

/// One swept parameter and its values.
struct Sweep {
  std::string parameter;  // n_users | gamma_r | radius | beta
  std::vector<double> values;
};

inline Sweep parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos)
    throw UsageError("--sweep: expected param=v1,v2,..., got '" + text + "'");
  Sweep s;
  s.parameter = text.substr(0, eq);
  if (s.parameter != "n_users" && s.parameter != "gamma_r" && s.parameter != "radius" &&
      s.parameter != "beta")
    throw UsageError("--sweep: parameter must be one of n_users, gamma_r, radius, beta; got '" +
                     s.parameter + "'");
  for (const auto& v : detail::split(text.substr(eq + 1), ','))
    s.values.push_back(detail::parse_double(v, "--sweep"));
  if (s.values.empty()) throw UsageError("--sweep: no values given");
  return s;
}

inline void apply_quad_nodes(const std::string& text, QuadratureSpec& spec) {
  for (const auto& item : detail::split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw UsageError("--quad-nodes: expected level=count, got '" + item + "'");
    const auto level = parse_quad_level(item.substr(0, eq));
    if (!level)
      throw UsageError("--quad-nodes: unknown level '" + item.substr(0, eq) +
                       "' (use v, t, z0, angle, zi)");
    const double k = detail::parse_double(item.substr(eq + 1), "--quad-nodes");
    if (k < 4 || k != std::floor(k))
      throw UsageError("--quad-nodes: node counts must be integers >= 4");
    spec[*level] = static_cast<std::size_t>(k);
  }
}

struct ExperimentSpec {
  RunMode mode = RunMode::analytic;
  std::size_t n_users = 0;
  double radius = 30.0;
  std::size_t library_size = 1000;
  double gamma_r = 1.2;
  double alpha = 4.0;
  double beta = 1e-5;
  SelfInterferenceModel si_model = SelfInterferenceModel::per_interferer;
  SimConfig sim;
  ThetaGrid theta_grid;
  std::optional<Sweep> sweep;
  QuadratureSpec quadrature;
  std::string output_path;  // empty: CSV to stdout

  bool analytic() const { return mode != RunMode::simulate; }
  bool simulated() const { return mode != RunMode::analytic; }

  std::size_t sweep_points() const { return sweep ? sweep->values.size() : 1; }

  /// Model for sweep point i (the base model when there is no sweep).
  ModelConfig model_at(std::size_t i) const {
    std::size_t n = n_users;
    double g = gamma_r, r = radius, b = beta;
    if (sweep) {
      const double v = sweep->values.at(i);
      if (sweep->parameter == "n_users") n = static_cast<std::size_t>(v);
      if (sweep->parameter == "gamma_r") g = v;
      if (sweep->parameter == "radius") r = v;
      if (sweep->parameter == "beta") b = v;
    }
    return make_model(n, r, library_size, g, alpha, b, si_model);
  }
};

inline ExperimentSpec parse_args(int argc, const char* const* argv) {
  ExperimentSpec spec;
  std::string mode = "analytic", theta = "-10:30:1", sweep, si = "per-interferer",
              quad, evaluate = "all-users";
  std::size_t n_users = 0;

  CLI::App app{"Full-duplex cache-enabled D2D network: analytic success probability and "
               "Monte Carlo validation"};
  app.set_config("--config", "", "Flat key=value file; command-line flags override it");
  app.add_option("--mode", mode, "analytic | simulate | both")
      ->check(CLI::IsMember({"analytic", "simulate", "both"}));
  app.add_option("--n-users", n_users, "Number of users N (required unless swept)");
  app.add_option("--radius", spec.radius, "Disk radius R (m)");
  app.add_option("--library-size", spec.library_size, "Library size m");
  app.add_option("--zipf", spec.gamma_r, "Zipf skew exponent gamma_r");
  app.add_option("--alpha", spec.alpha, "Path-loss exponent (> 2)");
  app.add_option("--beta", spec.beta, "Residual self-interference ratio in [0, 1]");
  app.add_option("--theta-db", theta, "SIR threshold grid start:stop:step in dB");
  app.add_option("--sweep", sweep, "param=v1,v2,... for n_users, gamma_r, radius or beta");
  app.add_option("--trials", spec.sim.trials, "Monte Carlo trials");
  app.add_option("--seed", spec.sim.master_seed, "Master seed");
  app.add_option("--si-model", si, "per-interferer | single")
      ->check(CLI::IsMember({"per-interferer", "single"}));
  app.add_option("--evaluate", evaluate, "all-users | one-random-user")
      ->check(CLI::IsMember({"all-users", "one-random-user"}));
  app.add_option("--quad-nodes", quad, "level=k,... for levels v, t, z0, angle, zi");
  app.add_option("--quad-tol", spec.quadrature.rel_tol, "Relative tolerance for refinement");
  app.add_option("--out", spec.output_path, "CSV output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + "\n" + app.help());
  }

  spec.mode = mode == "analytic" ? RunMode::analytic
              : mode == "simulate" ? RunMode::simulate
                                   : RunMode::both;
  spec.si_model = si == "single" ? SelfInterferenceModel::single
                                 : SelfInterferenceModel::per_interferer;
  spec.sim.evaluate =
      evaluate == "one-random-user" ? EvaluationScope::one_random_user : EvaluationScope::all_users;
  spec.n_users = n_users;
  spec.theta_grid = parse_theta_grid(theta);
  if (!sweep.empty()) spec.sweep = parse_sweep(sweep);
  if (!quad.empty()) apply_quad_nodes(quad, spec.quadrature);

  if (spec.sweep && spec.sweep->parameter == "n_users" && n_users == 0)
    spec.n_users = static_cast<std::size_t>(
        *std::min_element(spec.sweep->values.begin(), spec.sweep->values.end()));
  if (spec.n_users == 0)
    throw UsageError("--n-users is required (N >= 1)\n" + app.help());
  if (spec.library_size == 0) throw UsageError("--library-size: must be >= 1");
  if (spec.n_users > spec.library_size)
    throw UsageError("--n-users: N = " + std::to_string(spec.n_users) +
                     " exceeds --library-size m = " + std::to_string(spec.library_size));
  if (!(spec.radius > 0.0)) throw UsageError("--radius: must be positive");
  if (!(spec.gamma_r >= 0.0)) throw UsageError("--zipf: must be >= 0");
  if (!(spec.alpha > 2.0)) throw UsageError("--alpha: must be > 2");
  if (!(spec.beta >= 0.0 && spec.beta <= 1.0)) throw UsageError("--beta: must lie in [0, 1]");
  if (spec.simulated() && spec.sim.trials == 0) throw UsageError("--trials: must be >= 1");
  if (!(spec.quadrature.rel_tol > 0.0)) throw UsageError("--quad-tol: must be positive");
  if (spec.sweep) {
    for (double v : spec.sweep->values) {
      const auto& p = spec.sweep->parameter;
      if (p == "n_users" && (v < 1 || v != std::floor(v) ||
                             v > static_cast<double>(spec.library_size)))
        throw UsageError("--sweep: n_users values must be integers in [1, --library-size]");
      if (p == "gamma_r" && v < 0) throw UsageError("--sweep: gamma_r values must be >= 0");
      if (p == "radius" && !(v > 0)) throw UsageError("--sweep: radius values must be > 0");
      if (p == "beta" && !(v >= 0 && v <= 1))
        throw UsageError("--sweep: beta values must lie in [0, 1]");
    }
  }
  return spec;
}

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "theta_db", "theta_linear", "p_cache", "p_sir_analytic", "p_total_analytic",
      "p_total_sim", "ci_halfwidth", "n_users", "gamma_r", "radius", "alpha", "beta",
      "trials", "seed"};
  return cols;
}

/// Results for one sweep point.
struct SweepPointResult {
  ModelConfig model;
  ModeProbabilities modes;
  std::optional<SuccessCurve> analytic;
  std::optional<SimulationReport> simulated;
};

struct ExperimentResult {
  std::vector<double> thetas_db;
  std::vector<SweepPointResult> points;
};

inline ExperimentResult evaluate_experiment(const ExperimentSpec& spec) {
  ExperimentResult result;
  result.thetas_db = spec.theta_grid.db_values();
  std::vector<double> thetas;
  for (double db : result.thetas_db) thetas.push_back(db_to_linear(db));

  const std::size_t workers = worker_count(spec.sim.workers);
  for (std::size_t i = 0; i < spec.sweep_points(); ++i) {
    SweepPointResult point{spec.model_at(i), {}, std::nullopt, std::nullopt};
    point.modes = compute_mode_probabilities(point.model.profile, point.model.n_users);
    if (spec.analytic())
      point.analytic = success_curve(point.model, thetas, spec.quadrature, workers);
    if (spec.simulated()) point.simulated = run_experiment(point.model, spec.sim, thetas);
    result.points.push_back(std::move(point));
  }
  return result;
}

inline void write_csv(const ExperimentSpec& spec, const ExperimentResult& result,
                      std::ostream& out) {
  using detail::format_number;
  const auto& cols = csv_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (const auto& p : result.points) {
    for (std::size_t i = 0; i < result.thetas_db.size(); ++i) {
      const double db = result.thetas_db[i];
      const double p_cache = p.analytic ? p.analytic->p_cache : p.simulated->curve.p_cache;
      out << format_number(db) << ',' << format_number(db_to_linear(db)) << ','
          << format_number(p_cache) << ',';
      if (p.analytic)
        out << format_number(p.analytic->p_sir[i]) << ',' << format_number(p.analytic->p_total[i]);
      else
        out << ',';
      out << ',';
      if (p.simulated)
        out << format_number(p.simulated->curve.p_total[i]) << ','
            << format_number(p.simulated->curve.ci_halfwidth[i]);
      else
        out << ',';
      out << ',' << p.model.n_users << ',' << format_number(p.model.profile.gamma_r()) << ','
          << format_number(p.model.disk.radius()) << ',' << format_number(p.model.channel.alpha)
          << ',' << format_number(p.model.channel.beta) << ',';
      if (p.simulated) out << spec.sim.trials << ',' << spec.sim.master_seed;
      else out << ',';
      out << '\n';
    }
  }
}

inline void write_summary(const ExperimentSpec& spec, const ExperimentResult& result,
                          std::ostream& out) {
  out << std::setprecision(6);
  for (const auto& p : result.points) {
    const auto& m = p.modes;
    out << "N=" << p.model.n_users << " gamma_r=" << p.model.profile.gamma_r()
        << " R=" << p.model.disk.radius() << " alpha=" << p.model.channel.alpha
        << " beta=" << p.model.channel.beta << '\n';
    out << "  P_hit=" << hitting_probability(p.model.profile, p.model.n_users)
        << " P_TX=" << m.p_tx << '\n';
    out << "  SR=" << m.p_sr << " SR-HDTX=" << m.p_sr_hdtx << " FDTR=" << m.p_fdtr
        << " (BFD=" << m.p_bfd << " TNFD=" << m.p_tnfd << ") HDRX=" << m.p_hdrx
        << " HDTX=" << m.p_hdtx << " HO=" << m.p_ho << '\n';
    if (p.analytic && p.analytic->budget_warning)
      out << "  warning: quadrature evaluation budget exceeded\n";
    if (p.analytic && p.simulated) {
      double gap = 0.0;
      for (std::size_t i = 0; i < result.thetas_db.size(); ++i)
        gap = std::max(gap, std::abs(p.analytic->p_total[i] - p.simulated->curve.p_total[i]));
      out << "  max |p_total_analytic - p_total_sim| = " << gap << '\n';
    }
  }
  if (spec.simulated())
    out << "trials=" << spec.sim.trials << " seed=" << spec.sim.master_seed << '\n';
}

/// Runs the experiment and writes CSV plus summary. Returns the process exit code.
inline int run(const ExperimentSpec& spec, std::ostream& stdout_stream,
               std::ostream& stderr_stream) {
  ExperimentResult result;
  try {
    result = evaluate_experiment(spec);
  } catch (const std::invalid_argument& e) {
    stderr_stream << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  for (const auto& p : result.points)
    if (p.analytic && p.analytic->budget_warning)
      stderr_stream << "warning: quadrature evaluation budget exceeded (N=" << p.model.n_users
                    << ")\n";

  if (spec.output_path.empty()) {
    write_csv(spec, result, stdout_stream);
    write_summary(spec, result, stderr_stream);
    return stdout_stream ? kExitOk : kExitIo;
  }
  std::ofstream file(spec.output_path, std::ios::binary | std::ios::trunc);
  if (!file) {
    stderr_stream << "error: --out: cannot open '" << spec.output_path << "' for writing\n";
    return kExitIo;
  }
  write_csv(spec, result, file);
  file.close();
  if (!file) {
    stderr_stream << "error: --out: failed writing '" << spec.output_path << "'\n";
    return kExitIo;
  }
  write_summary(spec, result, stdout_stream);
  return kExitOk;
}

}  // namespace fdcache

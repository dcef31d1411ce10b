#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "l0rls/montecarlo.hpp"
#include "l0rls/msd_model.hpp"
#include "l0rls/theory.hpp"

// Reproduction of the three numerical experiments (penalty sweep, attraction
// sweep, sparsity sweep) with theory and simulation side by side, persisted
// as CSV.

namespace l0rls {

enum class ExperimentKind { KappaSweep, BetaSweep, SparsitySweep, SingleRun, Lemma1 };

/// Sweep grid; values() expands to the concrete points (log grids are
/// geometric between start and stop).
struct GridSpec {
  double start = 0.0;
  double stop = 0.0;
  int points = 20;
  bool log_scale = true;

  std::vector<double> values() const {
    if (points < 1) throw std::invalid_argument("GridSpec: need >= 1 point");
    if (log_scale && !(start > 0.0 && stop > 0.0))
      throw std::invalid_argument("GridSpec: log grid endpoints must be positive");
    std::vector<double> v;
    v.reserve(points);
    if (points == 1) {
      v.push_back(start);
      return v;
    }
    if (log_scale) {
      const double l0 = std::log10(start), l1 = std::log10(stop);
      for (int i = 0; i < points; ++i)
        v.push_back(std::pow(10.0, l0 + (l1 - l0) * i / (points - 1)));
    } else {
      for (int i = 0; i < points; ++i)
        v.push_back(start + (stop - start) * i / (points - 1));
    }
    return v;
  }

  /// Parses "start:stop:points[:log|:lin]".
  static GridSpec parse(const std::string& text) {
    GridSpec g;
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() < 3 || parts.size() > 4)
      throw std::invalid_argument("grid: expected start:stop:points[:log|:lin]");
    try {
      std::size_t used = 0;
      g.start = std::stod(parts[0], &used);
      if (used != parts[0].size()) throw std::invalid_argument("");
      g.stop = std::stod(parts[1], &used);
      if (used != parts[1].size()) throw std::invalid_argument("");
      g.points = std::stoi(parts[2], &used);
      if (used != parts[2].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("grid: malformed number in '" + text + "'");
    }
    if (parts.size() == 4) {
      if (parts[3] == "log") g.log_scale = true;
      else if (parts[3] == "lin") g.log_scale = false;
      else throw std::invalid_argument("grid: scale must be 'log' or 'lin'");
    } else {
      g.log_scale = false;
    }
    if (g.points < 1) throw std::invalid_argument("grid: need >= 1 point");
    return g;
  }
};

/// Full description of one experiment invocation.
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::SingleRun;
  std::optional<GridSpec> grid;  // default grid is experiment-specific
  int taps = 32;                 // N
  int sparsity = 3;              // K
  double lambda = 0.995;
  double beta = 5.0;
  double kappa = 0.0;
  double snr_db = 50.0;
  double input_power = 1.0;  // P_x
  int trials = 50;
  long iters = 4000;
  long steady_window = 0;  // 0: auto
  std::uint64_t seed = 1;
  InputMode input_mode = InputMode::TappedDelay;
  bool redraw_system = false;  // fresh system per trial instead of one fixed draw
  double delta_scale = 0.01;   // delta_init = delta_scale * P_x
  std::string preset = "desk";

  /// Desk preset: shrunk dimensions so the full suite runs in minutes.
  static ExperimentSpec desk() { return ExperimentSpec{}; }

  /// Paper preset: the published experiment parameters (N=64, K=6,
  /// lambda=0.995, beta=5, 100 trials).
  static ExperimentSpec paper() {
    ExperimentSpec s;
    s.preset = "paper";
    s.taps = 64;
    s.sparsity = 6;
    s.lambda = 0.995;
    s.beta = 5.0;
    s.snr_db = 50.0;
    s.trials = 100;
    s.iters = 4000;
    return s;
  }

  static ExperimentSpec from_preset(const std::string& name) {
    if (name == "desk") return desk();
    if (name == "paper") return paper();
    throw std::invalid_argument("unknown preset '" + name + "' (desk|paper)");
  }
};

/// One output record. Every simulation row has a theory companion computed
/// from the identical (s, lambda, beta, kappa, P_nu) tuple.
struct ResultRow {
  std::string experiment;
  std::string sweep_var;
  double sweep_value = 0.0;
  std::string source;  // sim | theory | rls-baseline
  double steady_msd = 0.0;
  double steady_msd_db = 0.0;
  double kappa = 0.0;
  double theta = 0.0;
  std::uint64_t seed = 0;
  int trials = 0;
  long n_iters = 0;
};

inline double to_db(double power) { return 10.0 * std::log10(power); }

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline ResultRow make_row(const std::string& experiment, const std::string& var,
                          double value, const std::string& source, double msd,
                          double kappa, double theta, const ExperimentSpec& spec,
                          int trials, long iters) {
  ResultRow r;
  r.experiment = experiment;
  r.sweep_var = var;
  r.sweep_value = value;
  r.source = source;
  r.steady_msd = msd;
  r.steady_msd_db = to_db(msd);
  r.kappa = kappa;
  r.theta = theta;
  r.seed = spec.seed;
  r.trials = trials;
  r.n_iters = iters;
  return r;
}

inline TrialPlan make_plan(const ExperimentSpec& spec, const SparseSystem& sys,
                           const SignalModel& signal, double kappa) {
  TrialPlan plan;
  plan.filter.taps = sys.taps();
  plan.filter.lambda = spec.lambda;
  plan.filter.kappa = kappa;
  plan.filter.beta = sys.beta;
  plan.filter.delta_init = spec.delta_scale * spec.input_power;
  plan.system = sys;
  plan.signal = signal;
  plan.n_iters = spec.iters;
  plan.n_trials = spec.trials;
  plan.steady_window = spec.steady_window;
  plan.base_seed = spec.seed;
  plan.input_mode = spec.input_mode;
  plan.redraw_system = spec.redraw_system;
  return plan;
}

}  // namespace detail

/// Experiment 1: steady-state MSD versus the penalty kappa, log grid from
/// 5e-7 up to 10^{0.1} kappa_max, with theory, simulation, and the flat
/// conventional-RLS baseline per point. A final theory row at sweep_var
/// "kappa_opt" marks the predicted optimum.
inline std::vector<ResultRow> run_experiment_1(const ExperimentSpec& spec) {
  const SparseSystem sys =
      SparseSystem::generate(spec.taps, spec.sparsity, spec.beta, spec.seed);
  const SignalModel signal =
      make_signal_model(spec.input_power, sys, spec.snr_db, spec.seed);
  const TheoryCoeffs coeffs = make_theory(spec.lambda, 0.0, sys, spec.input_power);
  const SteadyBetas betas =
      steady_betas(coeffs, sys.attraction().g_sq_sum, signal.noise_power);
  const double pinf2 = coeffs.p_inf_sq();
  const double baseline =
      rls_baseline_msd(spec.taps, signal.noise_power, pinf2, spec.lambda);

  GridSpec grid;
  if (spec.grid) {
    grid = *spec.grid;
  } else {
    grid.start = 5e-7;
    grid.stop = std::pow(10.0, 0.1) * kappa_upper_bound(betas, coeffs);
    grid.points = 20;
    grid.log_scale = true;
  }

  std::vector<ResultRow> rows;
  for (double kap : grid.values()) {
    TheoryCoeffs point = coeffs;
    point.kappa = kap;
    const double theta = point.theta();
    const double d_theory =
        steady_msd(theta, betas, spec.taps, signal.noise_power, pinf2, spec.lambda);
    const TrialPlan plan = detail::make_plan(spec, sys, signal, kap);
    const SimResult sim = run_plan(plan);
    rows.push_back(detail::make_row("exp1", "kappa", kap, "sim", sim.steady_msd, kap,
                                    theta, spec, spec.trials, spec.iters));
    rows.push_back(detail::make_row("exp1", "kappa", kap, "theory", d_theory, kap,
                                    theta, spec, 0, 0));
    rows.push_back(detail::make_row("exp1", "kappa", kap, "rls-baseline", baseline,
                                    0.0, 0.0, spec, 0, 0));
  }
  try {
    const double t_opt = theta_opt(betas);
    const double k_opt = coeffs.kappa_from_theta(t_opt);
    rows.push_back(detail::make_row(
        "exp1", "kappa_opt", k_opt, "theory",
        min_msd(betas, spec.taps, signal.noise_power, pinf2, spec.lambda), k_opt,
        t_opt, spec, 0, 0));
  } catch (const std::domain_error& e) {
    std::cerr << "exp1: optimum unavailable: " << e.what() << "\n";
  }
  return rows;
}

/// Experiment 2: steady-state MSD versus the attraction parameter beta, the
/// penalty re-optimized per point (partition, G(s) and kappa_opt recomputed).
/// Also emits the large-beta asymptote ratio as sweep_var "ratio_limit".
inline std::vector<ResultRow> run_experiment_2(const ExperimentSpec& spec) {
  const SparseSystem base_sys =
      SparseSystem::generate(spec.taps, spec.sparsity, spec.beta, spec.seed);
  const SignalModel signal =
      make_signal_model(spec.input_power, base_sys, spec.snr_db, spec.seed);

  GridSpec grid;
  if (spec.grid) {
    grid = *spec.grid;
  } else {
    grid.start = 0.1;
    grid.stop = 50.0;
    grid.points = (spec.preset == "paper") ? 20 : 12;
    grid.log_scale = true;
  }

  std::vector<ResultRow> rows;
  for (double beta : grid.values()) {
    const SparseSystem sys = base_sys.with_beta(beta);
    const TheoryCoeffs coeffs = make_theory(spec.lambda, 0.0, sys, spec.input_power);
    const SteadyBetas betas =
        steady_betas(coeffs, sys.attraction().g_sq_sum, signal.noise_power);
    const double pinf2 = coeffs.p_inf_sq();
    const double baseline =
        rls_baseline_msd(spec.taps, signal.noise_power, pinf2, spec.lambda);
    double t_opt = 0.0, k_opt = 0.0, d_min = 0.0;
    try {
      t_opt = theta_opt(betas);
      k_opt = coeffs.kappa_from_theta(t_opt);
      d_min = min_msd(betas, spec.taps, signal.noise_power, pinf2, spec.lambda);
    } catch (const std::domain_error& e) {
      std::cerr << "exp2: skipping beta=" << beta << ": " << e.what() << "\n";
      continue;
    }
    TrialPlan plan = detail::make_plan(spec, sys, signal, k_opt);
    const SimResult sim = run_plan(plan);
    rows.push_back(detail::make_row("exp2", "beta", beta, "sim", sim.steady_msd,
                                    k_opt, t_opt, spec, spec.trials, spec.iters));
    rows.push_back(detail::make_row("exp2", "beta", beta, "theory", d_min, k_opt,
                                    t_opt, spec, 0, 0));
    rows.push_back(detail::make_row("exp2", "beta", beta, "rls-baseline", baseline,
                                    0.0, 0.0, spec, 0, 0));
  }
  rows.push_back(detail::make_row(
      "exp2", "ratio_limit", 0.0, "theory",
      min_msd_ratio_limit(spec.lambda, spec.sparsity, spec.taps), 0.0, 0.0, spec, 0,
      0));
  return rows;
}

/// Experiment 3: steady-state MSD versus the sparsity K, a fresh system drawn
/// at every K and the penalty re-optimized per point.
inline std::vector<ResultRow> run_experiment_3(const ExperimentSpec& spec) {
  std::vector<int> k_values;
  if (spec.grid) {
    for (double v : spec.grid->values())
      k_values.push_back(static_cast<int>(std::lround(v)));
  } else if (spec.preset == "paper") {
    for (int k = 1; k <= 61; k += 4) k_values.push_back(k);
  } else {
    k_values = {1, 4, 8, 16, 24};
  }

  std::vector<ResultRow> rows;
  for (int k : k_values) {
    if (k < 0 || k > spec.taps) {
      std::cerr << "exp3: skipping out-of-range sparsity K=" << k << "\n";
      continue;
    }
    // per-point seed so every sparsity gets an independent draw
    const std::uint64_t draw_seed = derive_seed(spec.seed, StreamKind::System, k);
    const SparseSystem sys =
        SparseSystem::generate(spec.taps, k, spec.beta, draw_seed);
    const SignalModel signal =
        make_signal_model(spec.input_power, sys, spec.snr_db, spec.seed);
    const TheoryCoeffs coeffs = make_theory(spec.lambda, 0.0, sys, spec.input_power);
    const SteadyBetas betas =
        steady_betas(coeffs, sys.attraction().g_sq_sum, signal.noise_power);
    const double pinf2 = coeffs.p_inf_sq();
    const double baseline =
        rls_baseline_msd(spec.taps, signal.noise_power, pinf2, spec.lambda);
    double t_opt = 0.0, k_opt = 0.0, d_min = 0.0;
    try {
      t_opt = theta_opt(betas);
      k_opt = coeffs.kappa_from_theta(t_opt);
      d_min = min_msd(betas, spec.taps, signal.noise_power, pinf2, spec.lambda);
    } catch (const std::domain_error& e) {
      std::cerr << "exp3: skipping K=" << k << ": " << e.what() << "\n";
      continue;
    }
    TrialPlan plan = detail::make_plan(spec, sys, signal, k_opt);
    const SimResult sim = run_plan(plan);
    rows.push_back(detail::make_row("exp3", "sparsity", k, "sim", sim.steady_msd,
                                    k_opt, t_opt, spec, spec.trials, spec.iters));
    rows.push_back(detail::make_row("exp3", "sparsity", k, "theory", d_min, k_opt,
                                    t_opt, spec, 0, 0));
    rows.push_back(detail::make_row("exp3", "sparsity", k, "rls-baseline", baseline,
                                    0.0, 0.0, spec, 0, 0));
  }
  return rows;
}

/// One simulation/theory comparison at a fixed parameter point.
inline std::vector<ResultRow> run_single(const ExperimentSpec& spec) {
  const SparseSystem sys =
      SparseSystem::generate(spec.taps, spec.sparsity, spec.beta, spec.seed);
  const SignalModel signal =
      make_signal_model(spec.input_power, sys, spec.snr_db, spec.seed);
  const TheoryCoeffs coeffs =
      make_theory(spec.lambda, spec.kappa, sys, spec.input_power);
  const SteadyBetas betas =
      steady_betas(coeffs, sys.attraction().g_sq_sum, signal.noise_power);
  const double pinf2 = coeffs.p_inf_sq();
  const double theta = coeffs.theta();
  const double d_theory =
      steady_msd(theta, betas, spec.taps, signal.noise_power, pinf2, spec.lambda);
  const double baseline =
      rls_baseline_msd(spec.taps, signal.noise_power, pinf2, spec.lambda);
  const TrialPlan plan = detail::make_plan(spec, sys, signal, spec.kappa);
  const SimResult sim = run_plan(plan);
  std::vector<ResultRow> rows;
  rows.push_back(detail::make_row("single", "kappa", spec.kappa, "sim",
                                  sim.steady_msd, spec.kappa, theta, spec,
                                  spec.trials, spec.iters));
  rows.push_back(detail::make_row("single", "kappa", spec.kappa, "theory", d_theory,
                                  spec.kappa, theta, spec, 0, 0));
  rows.push_back(detail::make_row("single", "kappa", spec.kappa, "rls-baseline",
                                  baseline, 0.0, 0.0, spec, 0, 0));
  return rows;
}

inline constexpr char kCsvHeader[] =
    "experiment,sweep_var,sweep_value,source,steady_msd,steady_msd_db,kappa,theta,"
    "seed,trials,n_iters";

/// Serializes rows in deterministic order (sweep value, then source) with
/// full round-trip precision.
inline std::string to_csv(std::vector<ResultRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) {
                     if (a.sweep_value != b.sweep_value)
                       return a.sweep_value < b.sweep_value;
                     return a.source < b.source;
                   });
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += r.experiment;
    out += ',';
    out += r.sweep_var;
    out += ',';
    out += detail::format_double(r.sweep_value);
    out += ',';
    out += r.source;
    out += ',';
    out += detail::format_double(r.steady_msd);
    out += ',';
    out += detail::format_double(r.steady_msd_db);
    out += ',';
    out += detail::format_double(r.kappa);
    out += ',';
    out += detail::format_double(r.theta);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += std::to_string(r.trials);
    out += ',';
    out += std::to_string(r.n_iters);
    out += '\n';
  }
  return out;
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("emit_csv: no rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open '" + path + "' for writing");
  out << to_csv(rows);
  if (!out) throw std::runtime_error("emit_csv: write to '" + path + "' failed");
}

/// Parses a file produced by emit_csv back into rows (exact round trip).
inline std::vector<ResultRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::runtime_error("parse_csv: unexpected header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 11) throw std::runtime_error("parse_csv: bad field count");
    ResultRow r;
    r.experiment = f[0];
    r.sweep_var = f[1];
    r.sweep_value = std::strtod(f[2].c_str(), nullptr);
    r.source = f[3];
    r.steady_msd = std::strtod(f[4].c_str(), nullptr);
    r.steady_msd_db = std::strtod(f[5].c_str(), nullptr);
    r.kappa = std::strtod(f[6].c_str(), nullptr);
    r.theta = std::strtod(f[7].c_str(), nullptr);
    r.seed = std::strtoull(f[8].c_str(), nullptr, 10);
    r.trials = std::atoi(f[9].c_str());
    r.n_iters = std::atol(f[10].c_str());
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<ResultRow> parse_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("parse_csv: cannot open '" + path + "'");
  return parse_csv(in);
}

}  // namespace l0rls

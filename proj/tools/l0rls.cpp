// Command-line front end: reproduces the three numerical experiments at
// configurable scale, runs single simulation/theory comparisons, and exposes
// the lemma-1 check and the assumption audit.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "l0rls/experiments.hpp"
#include "l0rls/montecarlo.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct CommonOptions {
  std::string preset = "desk";
  std::string config_path;
  std::string grid_text;
  std::string mode_text = "tapped";
  std::string out_path;
  l0rls::ExperimentSpec spec = l0rls::ExperimentSpec::desk();
};

// Resolves the output path: bare file names land in $L0RLS_OUT_DIR (or the
// working directory) while paths containing a separator are used verbatim.
std::string resolve_out_path(const std::string& requested, const std::string& fallback) {
  std::string name = requested.empty() ? fallback : requested;
  if (name.find('/') != std::string::npos) return name;
  const char* dir = std::getenv("L0RLS_OUT_DIR");
  if (dir && *dir) return std::string(dir) + "/" + name;
  return name;
}

void apply_config_file(l0rls::ExperimentSpec& spec, const std::string& path,
                       std::string& grid_text, std::string& mode_text,
                       bool allow_preset) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  if (allow_preset && j.contains("preset"))
    spec = l0rls::ExperimentSpec::from_preset(j["preset"]);
  if (j.contains("n")) spec.taps = j["n"];
  if (j.contains("k")) spec.sparsity = j["k"];
  if (j.contains("lambda")) spec.lambda = j["lambda"];
  if (j.contains("beta")) spec.beta = j["beta"];
  if (j.contains("kappa")) spec.kappa = j["kappa"];
  if (j.contains("snr-db")) spec.snr_db = j["snr-db"];
  if (j.contains("px")) spec.input_power = j["px"];
  if (j.contains("trials")) spec.trials = j["trials"];
  if (j.contains("iters")) spec.iters = j["iters"];
  if (j.contains("steady-window")) spec.steady_window = j["steady-window"];
  if (j.contains("seed")) spec.seed = j["seed"];
  if (j.contains("redraw-system")) spec.redraw_system = j["redraw-system"];
  if (j.contains("grid")) grid_text = j["grid"];
  if (j.contains("mode")) mode_text = j["mode"];
}

// Shared flags; every numeric flag names the symbol it sets in the analysis.
void add_common_options(CLI::App* cmd, CommonOptions& opt, bool with_kappa) {
  cmd->add_option("--config", opt.config_path,
                  "JSON config file; explicit flags override its values");
  cmd->add_option("--preset", opt.preset, "parameter preset: desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--n", opt.spec.taps, "filter length N");
  cmd->add_option("--k", opt.spec.sparsity, "system sparsity K (nonzero taps)");
  cmd->add_option("--lambda", opt.spec.lambda, "forgetting factor lambda in (0,1)");
  cmd->add_option("--beta", opt.spec.beta,
                  "attraction parameter beta (attraction range is 1/beta)");
  if (with_kappa)
    cmd->add_option("--kappa", opt.spec.kappa, "zero-attraction strength kappa");
  cmd->add_option("--snr-db", opt.spec.snr_db,
                  "output SNR in dB: P_x ||s||^2 / P_nu (inf for noiseless)");
  cmd->add_option("--px", opt.spec.input_power, "input power P_x");
  cmd->add_option("--trials", opt.spec.trials, "Monte-Carlo trials per point");
  cmd->add_option("--iters", opt.spec.iters, "iterations per trial");
  cmd->add_option("--steady-window", opt.spec.steady_window,
                  "trailing samples averaged for the steady-state readout "
                  "(0: max(200, iters/10))");
  cmd->add_option("--seed", opt.spec.seed, "base RNG seed");
  cmd->add_option("--grid", opt.grid_text,
                  "sweep grid start:stop:points[:log|:lin]");
  cmd->add_option("--mode", opt.mode_text, "input vectors: tapped or independent")
      ->check(CLI::IsMember({"tapped", "independent"}));
  cmd->add_flag("--redraw-system", opt.spec.redraw_system,
                "draw a fresh system per trial instead of one fixed draw");
  cmd->add_option("--out", opt.out_path,
                  "output CSV path (bare names land in $L0RLS_OUT_DIR)");
}

// Flag > config file > preset > built-in default. CLI11 writes flag values
// straight into opt.spec, so "given" flags are copied from there.
l0rls::ExperimentSpec finalize(CLI::App* cmd, CommonOptions& opt) {
  auto given = [&](const std::string& name) {
    const auto* o = cmd->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  };
  l0rls::ExperimentSpec spec = l0rls::ExperimentSpec::from_preset(opt.preset);
  std::string grid_text, mode_text;
  if (!opt.config_path.empty())
    apply_config_file(spec, opt.config_path, grid_text, mode_text,
                      /*allow_preset=*/!given("--preset"));
  const auto& flags = opt.spec;
  if (given("--n")) spec.taps = flags.taps;
  if (given("--k")) spec.sparsity = flags.sparsity;
  if (given("--lambda")) spec.lambda = flags.lambda;
  if (given("--beta")) spec.beta = flags.beta;
  if (given("--kappa")) spec.kappa = flags.kappa;
  if (given("--snr-db")) spec.snr_db = flags.snr_db;
  if (given("--px")) spec.input_power = flags.input_power;
  if (given("--trials")) spec.trials = flags.trials;
  if (given("--iters")) spec.iters = flags.iters;
  if (given("--steady-window")) spec.steady_window = flags.steady_window;
  if (given("--seed")) spec.seed = flags.seed;
  if (given("--redraw-system")) spec.redraw_system = flags.redraw_system;
  if (given("--grid")) grid_text = opt.grid_text;
  if (given("--mode")) mode_text = opt.mode_text;
  if (!grid_text.empty()) spec.grid = l0rls::GridSpec::parse(grid_text);
  if (!mode_text.empty())
    spec.input_mode = (mode_text == "independent") ? l0rls::InputMode::Independent
                                                   : l0rls::InputMode::TappedDelay;
  return spec;
}

void report_sweep(const std::vector<l0rls::ResultRow>& rows, const std::string& path) {
  l0rls::emit_csv(rows, path);
  int sim_rows = 0;
  for (const auto& r : rows) sim_rows += r.source == "sim";
  std::cout << rows.size() << " rows (" << sim_rows << " simulation points) -> "
            << path << "\n";
}

void write_trajectory_csv(const l0rls::MsdTrajectory& sim,
                          const l0rls::MsdTrajectory& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("trajectory: cannot open '" + path + "'");
  out << "n,source,msd,zero_tap_power,zero_tap_rms\n";
  auto dump = [&](const l0rls::MsdTrajectory& t, const char* tag) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%ld,%s,%.17g,%.17g,%.17g\n", t.n[i], tag,
                    t.msd[i], t.zero_tap_power[i], t.zero_tap_rms[i]);
      out << buf;
    }
  };
  dump(sim, "sim");
  dump(model, "model");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "l0-RLS sparse system identification: adaptive-filter simulations and "
      "closed-form steady-state theory, cross-validated and exported as CSV"};
  app.require_subcommand(1);

  CommonOptions o1, o2, o3, osingle, olemma, oaudit;
  std::string traj_path, per_trial_path;

  auto* exp1 = app.add_subcommand(
      "exp1", "steady-state MSD vs penalty kappa (log sweep up to 10^0.1 kappa_max)");
  add_common_options(exp1, o1, false);
  auto* exp2 = app.add_subcommand(
      "exp2", "steady-state MSD vs attraction beta at the per-point optimal kappa");
  add_common_options(exp2, o2, false);
  auto* exp3 = app.add_subcommand(
      "exp3", "steady-state MSD vs sparsity K, fresh system per point");
  add_common_options(exp3, o3, false);
  auto* single = app.add_subcommand(
      "single", "one simulation/theory comparison at fixed parameters");
  add_common_options(single, osingle, true);
  single->add_option("--traj", traj_path,
                     "also write the averaged MSD trajectory (sim + model) here");
  single->add_option("--per-trial", per_trial_path,
                     "verbose per-trial dump of the final squared deviations");
  auto* lemma = app.add_subcommand(
      "lemma1", "empirical vs predicted correlation-matrix concentration limit");
  add_common_options(lemma, olemma, false);
  auto* audit = app.add_subcommand(
      "audit", "empirical check of the per-tap modeling assumptions");
  add_common_options(audit, oaudit, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (exp1->parsed()) {
      auto spec = finalize(exp1, o1);
      spec.kind = l0rls::ExperimentKind::KappaSweep;
      report_sweep(l0rls::run_experiment_1(spec),
                   resolve_out_path(o1.out_path, "exp1.csv"));
    } else if (exp2->parsed()) {
      auto spec = finalize(exp2, o2);
      spec.kind = l0rls::ExperimentKind::BetaSweep;
      report_sweep(l0rls::run_experiment_2(spec),
                   resolve_out_path(o2.out_path, "exp2.csv"));
    } else if (exp3->parsed()) {
      auto spec = finalize(exp3, o3);
      spec.kind = l0rls::ExperimentKind::SparsitySweep;
      report_sweep(l0rls::run_experiment_3(spec),
                   resolve_out_path(o3.out_path, "exp3.csv"));
    } else if (single->parsed()) {
      auto spec = finalize(single, osingle);
      spec.kind = l0rls::ExperimentKind::SingleRun;
      const auto rows = l0rls::run_single(spec);
      report_sweep(rows, resolve_out_path(osingle.out_path, "single.csv"));
      for (const auto& r : rows) {
        std::printf("  %-13s steady MSD = %.6e (%.2f dB)\n", r.source.c_str(),
                    r.steady_msd, r.steady_msd_db);
      }
      if (!traj_path.empty() || !per_trial_path.empty()) {
        const auto sys = l0rls::SparseSystem::generate(spec.taps, spec.sparsity,
                                                       spec.beta, spec.seed);
        const auto signal = l0rls::make_signal_model(spec.input_power, sys,
                                                     spec.snr_db, spec.seed);
        const auto plan = l0rls::detail::make_plan(spec, sys, signal, spec.kappa);
        if (!traj_path.empty()) {
          const auto sim = l0rls::run_plan(plan);
          const auto coeffs =
              l0rls::make_theory(spec.lambda, spec.kappa, sys, spec.input_power);
          const auto att = sys.attraction();
          const l0rls::MsdModel model(coeffs, att.g_sq_sum, att.s_g_sum,
                                      signal.noise_power);
          const auto mtraj = model.run(spec.iters, {sys.norm_sq(), 0.0});
          write_trajectory_csv(sim.trajectory, mtraj,
                               resolve_out_path(traj_path, "trajectory.csv"));
          std::cout << "trajectory -> " << traj_path << "\n";
        }
        if (!per_trial_path.empty()) {
          std::ofstream out(per_trial_path, std::ios::binary);
          if (!out) throw std::runtime_error("per-trial: cannot open file");
          out << "trial,final_dev_sq,final_zero_tap_sq\n";
          for (int t = 0; t < spec.trials; ++t) {
            const auto trace = l0rls::run_trial(plan, t);
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", t,
                          trace.dev_sq.back(), trace.zero_tap_sq.back());
            out << buf;
          }
          std::cout << "per-trial dump -> " << per_trial_path << "\n";
        }
      }
    } else if (lemma->parsed()) {
      auto spec = finalize(lemma, olemma);
      const auto r = l0rls::lemma1_check(spec.lambda, spec.taps, spec.input_power,
                                         spec.iters, spec.trials, spec.seed);
      std::printf("lemma-1 concentration check (lambda=%g, N=%d, n=%ld, %d trials)\n",
                  spec.lambda, spec.taps, spec.iters, spec.trials);
      std::printf("  empirical (direction-averaged) = %.6e\n", r.empirical);
      std::printf("  empirical (spectral norm)      = %.6e\n", r.empirical_spectral);
      std::printf("  predicted limit                = %.6e\n", r.predicted);
      std::printf("  ratio empirical/predicted      = %.4f\n",
                  r.empirical / r.predicted);
    } else if (audit->parsed()) {
      auto spec = finalize(audit, oaudit);
      const auto sys = l0rls::SparseSystem::generate(spec.taps, spec.sparsity,
                                                     spec.beta, spec.seed);
      const auto signal =
          l0rls::make_signal_model(spec.input_power, sys, spec.snr_db, spec.seed);
      const auto plan = l0rls::detail::make_plan(spec, sys, signal, spec.kappa);
      const auto a = l0rls::assumption_audit(plan);
      std::printf("assumption audit (%d trials, final iteration)\n", a.n_trials);
      if (a.normality_vacuous)
        std::printf("  zero-tap normality: vacuous (no zero taps)\n");
      else
        std::printf("  zero-tap normality: median Jarque-Bera = %.3f\n",
                    a.zero_tap_normality_stat);
      if (a.sign_check_vacuous)
        std::printf("  sign agreement: vacuous (no nonzero taps)\n");
      else
        std::printf("  sign agreement on C_L u C_S: %.4f\n", a.sign_match_fraction);
      std::printf("  |w| > 1/beta on C_L: %.4f\n", a.large_out_of_range_fraction);
      std::printf("  |w| <= 1/beta on C_0 u C_S: %.4f\n", a.rest_in_range_fraction);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

// Experiment runner: one subcommand per invocation, JSON in, JSON/CSV out.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "vagt/config.hpp"
#include "vagt/effective.hpp"
#include "vagt/invariants.hpp"
#include "vagt/parallel.hpp"
#include "vagt/report.hpp"
#include "vagt/vagt.hpp"

namespace fs = std::filesystem;
using namespace vagt;

namespace {

enum Exit { kOk = 0, kConfig = 1, kBreakdown = 2 };

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> strategy;
};

RunConfig resolve(const Options &o) {
  RunConfig c = load_run_config(o.config);
  if (o.out) c.output_dir = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.strategy) {
    c.strategy.mode = parse_strategy_mode(*o.strategy);
    if (c.strategy.mode == StrategyMode::CircuitShots && c.strategy.shots == 0)
      throw Error(ErrorKind::ConfigError, "circuit-shots needs strategy.shots > 0");
  }
  fs::create_directories(c.output_dir);
  return c;
}

std::vector<double> mu_grid(const RunConfig &c) {
  std::vector<double> mus;
  for (int i = 0; i < c.sweep_points; ++i) mus.push_back(c.lambda * i / (c.sweep_points - 1));
  return mus;
}

void emit_effective(const RunConfig &c, const VagtResult &r, const fs::path &dir) {
  const LowEnergyProjector p = build_projector(c, r.pair.n_qubits);
  const EffectiveHamiltonian h = extract_heff(r, p, c.strategy);
  write_json(dir / "heff.json", heff_json(h, p, r));
  std::printf("heff: %zu terms on qubits", h.terms.terms().size());
  for (int q : p.effective()) std::printf(" %d", q);
  std::printf("\n");
  if (!c.wants("fidelities")) return;
  const auto times = c.effective.grid.times();
  const auto states = random_states(p.n_effective(), c.effective.states, derive_seed(c.seed, {5}));
  const FidelitySeries f = fidelities(r.pair, h, p, states, times);
  write_stats(dir / "fidelity_f1.csv", times, f.f1_stats);
  write_stats(dir / "fidelity_f2.csv", times, f.f2_stats);
  std::printf("fidelity: min mean F1 %.4f, min F2 %.4f\n", f.f1_stats.mean.minCoeff(), f.f2.minCoeff());
}

void emit_correlations(const RunConfig &c, const VagtResult &r, const fs::path &dir) {
  const auto times = c.correlation.grid.times();
  std::vector<CorrelationSeries> got, exact;
  double worst = 0.0;
  for (const std::string &a : c.correlation.axes) {
    got.push_back(correlation(r, a[0], times, {c.correlation.qubit, c.correlation.diagonal_only}));
    exact.push_back(exact_correlation(r.pair, a[0], times, c.correlation.qubit));
    for (std::size_t i = 0; i < times.size(); ++i)
      worst = std::max(worst, std::abs(got.back().values[i] - exact.back().values[i]));
  }
  write_correlations(dir / "correlations.csv", c.correlation.axes, got);
  write_correlations(dir / "correlations_exact.csv", c.correlation.axes, exact);
  std::printf("correlations: sup |C - C_exact| = %.3e\n", worst);
}

int cmd_run(const Options &o, bool force_effective, bool force_correlations) {
  RunConfig c = resolve(o);
  if (force_effective && !c.wants("heff")) c.outputs.push_back("heff");
  if (force_effective && !c.wants("fidelities")) c.outputs.push_back("fidelities");
  if (force_correlations && !c.wants("correlations")) c.outputs.push_back("correlations");
  const VagtConfig vc = to_vagt_config(c);
  const fs::path dir = c.output_dir;
  const VagtResult r = run(vc);
  write_json(dir / "result.json", result_json(r, c));
  std::printf("%s T=%d strategy=%s: residual %.4e -> %.4e (%s), %zu parameters\n", r.pair.name.c_str(), c.steps,
              to_string(c.strategy.mode), r.initial_residual, r.final_residual, to_string(r.residual_kind),
              static_cast<std::size_t>(r.spec.n_params()));
  if (c.wants("htilde-matrix")) write_htilde_matrix(dir / "htilde_abs.csv", r.htilde_dense);
  if (c.wants("energy-levels")) write_energy_levels(dir / "energy_levels.csv", energy_levels(r.pair, mu_grid(c)));
  if (c.wants("step-dumps")) {
    write_steps(dir / "steps.csv", r);
    write_step_htilde(dir / "step_htilde.json", r);
  }
  if (c.wants("heff")) emit_effective(c, r, dir);
  if (c.wants("correlations")) emit_correlations(c, r, dir);
  return kOk;
}

int cmd_sweep(const Options &o) {
  const RunConfig c = resolve(o);
  const HamiltonianPair pair = build_model(c);
  const fs::path path = fs::path(c.output_dir) / "energy_levels.csv";
  write_energy_levels(path, energy_levels(pair, mu_grid(c)));
  std::printf("wrote %s (%d points)\n", path.string().c_str(), c.sweep_points);
  return kOk;
}

int cmd_validate(const Options &o) {
  const auto checks = run_invariant_suite(100, o.seed.value_or(0));
  bool ok = true;
  for (const InvariantCheck &c : checks) {
    std::printf("%s %-26s max error %.2e (tol %.0e, %d cases)\n", c.passed() ? "PASS" : "FAIL", c.name.c_str(),
                c.max_error, c.tolerance, c.cases);
    ok = ok && c.passed();
  }
  return ok ? kOk : kConfig;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Variational adiabatic gauge transformation runner"};
  app.require_subcommand(1);
  Options o;
  std::string strategy_help = "override strategy.mode (analytic, circuit-exact, circuit-shots, cheap-n2)";

  auto add_common = [&](CLI::App *sub, bool needs_config) {
    auto *cfg = sub->add_option("--config", o.config, "run configuration (JSON)")->check(CLI::ExistingFile);
    if (needs_config) cfg->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--threads", o.threads, "worker cap (falls back to VAGT_THREADS)")->check(CLI::PositiveNumber);
    sub->add_option("--strategy", o.strategy, strategy_help);
  };
  auto *run_cmd = app.add_subcommand("run", "run the transformation and write result.json");
  auto *sweep_cmd = app.add_subcommand("sweep", "energy levels of H_mu on the configured grid");
  auto *corr_cmd = app.add_subcommand("correlate", "run, then write ground-state correlation functions");
  auto *eff_cmd = app.add_subcommand("effective", "run, then write H_eff and fidelities");
  auto *val_cmd = app.add_subcommand("validate", "algebra and circuit invariant suite");
  for (auto *s : {run_cmd, sweep_cmd, corr_cmd, eff_cmd}) add_common(s, true);
  add_common(val_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }
  if (o.threads) set_max_threads(*o.threads);

  try {
    if (*run_cmd) return cmd_run(o, false, false);
    if (*sweep_cmd) return cmd_sweep(o);
    if (*corr_cmd) return cmd_run(o, false, true);
    if (*eff_cmd) return cmd_run(o, true, false);
    return cmd_validate(o);
  } catch (const Error &e) {
    std::cerr << "vagt: " << e.what() << '\n';
    return e.kind() == ErrorKind::NumericalBreakdown ? kBreakdown : kConfig;
  } catch (const std::exception &e) {
    std::cerr << "vagt: " << e.what() << '\n';
    return kConfig;
  }
}

#include "revrl/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "revrl/config.hpp"
#include "revrl/experiment.hpp"
#include "revrl/io.hpp"

namespace revrl {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string env;
  std::string agent = "fullmodel";
  int episodes = 100000;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::vector<std::string> overrides;
  int step_limit = 0;
  bool continual = false;

  CLI::Option* env_opt = nullptr;
  CLI::Option* episodes_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* step_limit_opt = nullptr;
  CLI::Option* continual_opt = nullptr;
};

void add_env(CLI::App& cmd, CommonOptions& o) {
  o.env_opt = cmd.add_option("--env", o.env, "Environment: cliffwalking | taxi");
}

void add_budget(CLI::App& cmd, CommonOptions& o) {
  o.episodes_opt = cmd.add_option("--episodes", o.episodes, "Episodes per run (default 100000)");
  o.seed_opt = cmd.add_option("--seed", o.seed, "Base seed; episode i uses seed + i (default 0)");
  cmd.add_option("--out", o.out, "Output directory");
}

void add_agent(CLI::App& cmd, CommonOptions& o) {
  cmd.add_option("--agent", o.agent, "Preset name (e.g. fullmodel, rollbackonly-taxi) or JSON config file");
  cmd.add_option("--set", o.overrides, "Override a config key: key=value (repeatable)");
  o.step_limit_opt = cmd.add_option("--step-limit", o.step_limit, "Per-episode step cap (default: env protocol)");
  o.continual_opt = cmd.add_flag("--continual", o.continual, "Keep Q/phi tables across episodes");
}

EnvKind env_or(const CommonOptions& o, EnvKind fallback) {
  if (o.env_opt == nullptr || o.env_opt->count() == 0) return fallback;
  try {
    return parse_env_kind(o.env);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("env", e.what());
  }
}

/// Preset or config file, then --env, --set and budget flags on top.
ExperimentConfig resolve_config(const CommonOptions& o) {
  const EnvKind flag_env = env_or(o, EnvKind::kCliffWalking);
  const bool env_given = o.env_opt && o.env_opt->count() > 0;

  ExperimentConfig cfg;
  std::error_code ec;
  if (fs::is_regular_file(o.agent, ec)) {
    cfg = load_config(o.agent);
    if (env_given) cfg.env = flag_env;
  } else {
    if (o.agent.ends_with(".json")) throw IoError("config file '" + o.agent + "' not found");
    cfg = preset_config(o.agent, flag_env);
    if (env_given && cfg.env != flag_env) {
      throw ConfigError("env", "--env " + o.env + " conflicts with preset '" + o.agent + "'");
    }
  }
  if (!o.overrides.empty()) cfg = config_from_json(parse_overrides(o.overrides), cfg);
  if (o.episodes_opt && o.episodes_opt->count()) cfg.episodes = o.episodes;
  if (o.seed_opt && o.seed_opt->count()) cfg.base_seed = o.seed;
  if (o.step_limit_opt && o.step_limit_opt->count()) cfg.step_limit = o.step_limit;
  if (o.continual_opt && o.continual_opt->count()) cfg.continual = o.continual;
  cfg.validate();
  return cfg;
}

void print_summary(std::ostream& out, std::span<const MetricSummary> summary) {
  out << std::left << std::setw(16) << "metric" << std::right << std::setw(14) << "mean" << std::setw(14) << "std"
      << std::setw(28) << "95% CI" << '\n';
  for (const auto& m : summary) {
    std::ostringstream ci;
    ci << std::fixed << std::setprecision(4) << '[' << m.stats.ci_low << ", " << m.stats.ci_high << ']';
    out << std::left << std::setw(16) << m.metric << std::right << std::fixed << std::setprecision(4) << std::setw(14)
        << m.stats.mean << std::setw(14) << m.stats.std << std::setw(28) << ci.str() << '\n';
  }
}

std::string pct(const std::optional<double>& v) {
  if (!v) return "n/a";
  std::ostringstream s;
  s << std::showpos << std::fixed << std::setprecision(1) << *v << '%';
  return s.str();
}

int cmd_run(const CommonOptions& o, std::ostream& out, bool dump_tables) {
  ExperimentConfig cfg = resolve_config(o);
  const fs::path dir = o.out;
  cfg.output_path = dir / "episodes.csv";
  {
    std::ofstream cfg_out = open_for_writing(dir / "config.json");
    cfg_out << experiment_to_json(cfg).dump(2) << '\n';
  }
  const RunResult result = run_experiment(cfg);
  const auto summary = summarize(result.episodes);
  write_summary_csv(dir / "summary.csv", summary);
  if (dump_tables) {
    result.agent.q().dump_csv(dir / "q_dump.csv");
    if (const PhiTable* phi = result.agent.phi()) phi->dump_csv(dir / "phi_dump.csv");
  }
  out << to_string(cfg.env) << ", " << cfg.episodes << " episodes, base seed " << cfg.base_seed << '\n';
  print_summary(out, summary);
  return kExitOk;
}

int cmd_ablate(const CommonOptions& o, std::ostream& out) {
  const EnvKind env = env_or(o, EnvKind::kCliffWalking);
  if (o.episodes < 1) throw ConfigError("episodes", "must be >= 1");
  const AblationReport report = run_ablation(env, o.seed, o.episodes, o.out);
  out << "Ablation on " << to_string(env) << " (" << o.episodes << " episodes per agent)\n";
  out << std::left << std::setw(18) << "agent" << std::right << std::setw(12) << "reward" << std::setw(10) << "std"
      << std::setw(12) << "d_reward" << std::setw(10) << "d%" << std::setw(12) << "failures" << std::setw(10)
      << "d_fail%" << std::setw(11) << "rollbacks" << '\n';
  for (const auto& r : report.rows) {
    out << std::left << std::setw(18) << preset_name(r.preset) << std::right << std::fixed << std::setprecision(1)
        << std::setw(12) << r.reward().mean << std::setw(10) << r.reward().std << std::showpos << std::setw(12)
        << r.delta_reward << std::noshowpos << std::setw(10) << pct(r.pct_delta_reward) << std::setprecision(3)
        << std::setw(12) << r.failures() << std::setw(10)
        << (r.preset == Preset::kBaseline ? std::string("n/a") : pct(r.pct_failure_reduction)) << std::setw(11);
    if (r.uses_rollback) {
      out << std::setprecision(1) << r.rollbacks();
    } else {
      out << "n/a";
    }
    out << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const CommonOptions& o, const std::string& param, const std::vector<double>& values, std::ostream& out) {
  const SweepParam p = parse_sweep_param(param);
  if (values.empty()) throw ConfigError("values", "at least one value is required");
  const ExperimentConfig cfg = resolve_config(o);
  const fs::path csv = fs::path(o.out) / ("sweep_" + std::string(to_string(p)) + ".csv");
  const auto points = run_sweep(cfg.env, p, values, cfg.agent, cfg.episodes, cfg.base_seed, csv);
  out << "Sweep of " << to_string(p) << " on " << to_string(cfg.env) << " -> " << csv.string() << '\n';
  for (const auto& pt : points) {
    out << std::setw(10) << format_double(pt.value) << std::fixed << std::setprecision(2) << std::setw(12)
        << pt.reward.mean << " +/- " << pt.reward.std << "  failures " << std::setprecision(4) << pt.failures_mean
        << "  rollbacks " << pt.rollbacks_mean << '\n';
  }
  return kExitOk;
}

int cmd_report(const std::string& baseline, const std::string& variant, const std::string& out_dir,
               std::ostream& out) {
  const auto base = summarize(read_episodes_csv(baseline));
  const auto var = summarize(read_episodes_csv(variant));
  const auto rows = compare(base, var);
  if (!out_dir.empty()) write_comparison_csv(fs::path(out_dir) / "comparison.csv", rows);
  out << std::left << std::setw(16) << "metric" << std::right << std::setw(13) << "baseline" << std::setw(11)
      << "sd" << std::setw(13) << "variant" << std::setw(11) << "sd" << std::setw(13) << "d_mean" << std::setw(10)
      << "d%" << std::setw(11) << "d_sd" << std::setw(10) << "d_sd%" << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(16) << r.metric << std::right << std::fixed << std::setprecision(4) << std::setw(13)
        << r.baseline_mean << std::setw(11) << r.baseline_std << std::setw(13) << r.variant_mean << std::setw(11)
        << r.variant_std << std::showpos << std::setw(13) << r.delta_mean << std::noshowpos << std::setw(10)
        << pct(r.pct_delta_mean) << std::showpos << std::setw(11) << r.delta_std << std::noshowpos << std::setw(10)
        << pct(r.pct_delta_std) << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reversibility-aware tabular Q-learning / SARSA experiments", "revrl"};
  app.require_subcommand(0, 1);

  std::string dump_name;
  auto* dump_opt = app.add_option("--dump-preset", dump_name, "Print a preset as JSON (e.g. fullmodel-taxi)");

  CommonOptions run_o;
  bool dump_tables = false;
  auto* run = app.add_subcommand("run", "Train one agent and write per-episode and summary CSVs");
  add_env(*run, run_o);
  add_agent(*run, run_o);
  add_budget(*run, run_o);
  run->add_flag("--dump-tables", dump_tables, "Also write q_dump.csv / phi_dump.csv of the final tables");

  CommonOptions ablate_o;
  auto* ablate = app.add_subcommand("ablate", "Run all eight ablation presets with shared seeds");
  add_env(*ablate, ablate_o);
  add_budget(*ablate, ablate_o);

  CommonOptions sweep_o;
  std::string param;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "Vary one parameter of an agent");
  add_env(*sweep, sweep_o);
  add_agent(*sweep, sweep_o);
  add_budget(*sweep, sweep_o);
  sweep->add_option("--param", param, "K | lambda | penalty | phi_init | threshold | q_init")->required();
  sweep->add_option("--values", values, "Comma-separated values")->delimiter(',')->required();

  std::string baseline;
  std::string variant;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Compare two per-episode CSVs");
  report->add_option("--baseline", baseline, "Baseline episodes CSV")->required();
  report->add_option("--variant", variant, "Variant episodes CSV")->required();
  report->add_option("--out", report_out, "Directory for comparison.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfigError;
  }

  try {
    if (dump_opt->count()) {
      const EnvKind env = env_or(run_o, EnvKind::kCliffWalking);
      out << dump_preset(dump_name, env);
      if (app.get_subcommands().empty()) return kExitOk;
    }
    if (run->parsed()) return cmd_run(run_o, out, dump_tables);
    if (ablate->parsed()) return cmd_ablate(ablate_o, out);
    if (sweep->parsed()) return cmd_sweep(sweep_o, param, values, out);
    if (report->parsed()) return cmd_report(baseline, variant, report_out, out);
    err << app.help();
    return kExitConfigError;
  } catch (const IoError& e) {
    err << "revrl: I/O error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const std::invalid_argument& e) {
    err << "revrl: configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::runtime_error& e) {
    err << "revrl: error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const std::exception& e) {
    err << "revrl: internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace revrl

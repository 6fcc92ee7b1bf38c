#include "revrl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "revrl/io.hpp"

namespace revrl {

// ---------------------------------------------------------------------------
// Runner

int ExperimentConfig::effective_step_limit() const {
  return step_limit.value_or(make_environment(env)->default_step_limit());
}

void ExperimentConfig::validate() const {
  agent.validate();
  if (episodes < 1) throw ConfigError("episodes", "must be >= 1");
  if (step_limit && *step_limit < 1) throw ConfigError("step_limit", "must be >= 1");
}

EpisodeStats run_episode(const Environment& env, Agent& agent, int step_limit, std::uint64_t seed,
                         std::int64_t episode_idx, std::span<const ActionId> scripted_actions) {
  if (step_limit < 1) throw std::invalid_argument("run_episode: step_limit must be >= 1");
  Rng rng(seed);
  agent.begin_episode(env.reset(rng));

  EpisodeStats stats;
  stats.episode_idx = episode_idx;
  stats.seed = seed;
  while (stats.steps < step_limit) {
    const auto i = static_cast<std::size_t>(stats.steps);
    const StepResult r = i < scripted_actions.size() ? agent.act(env, scripted_actions[i], rng) : agent.step(env, rng);
    ++stats.steps;
    if (r.rollback_fired) {
      ++stats.rollbacks;
      continue;
    }
    stats.total_reward += r.outcome.reward;
    if (r.outcome.has(Event::kFellOffCliff)) ++stats.falls;
    if (r.outcome.has(Event::kIllegalAction)) ++stats.illegal_actions;
    if (r.outcome.has(Event::kDelivered)) ++stats.deliveries;
    if (r.outcome.terminated) {
      stats.reached_goal = true;
      break;
    }
  }
  return stats;
}

RunResult run_experiment(const ExperimentConfig& cfg, const std::function<void(const EpisodeStats&)>& on_episode) {
  cfg.validate();
  const auto env = make_environment(cfg.env);
  const int limit = cfg.effective_step_limit();

  std::ofstream csv;
  if (!cfg.output_path.empty()) {
    csv = open_for_writing(cfg.output_path);
    csv << kEpisodeCsvHeader << '\n';
  }

  Agent agent(cfg.agent, env->num_states(), env->num_actions());
  std::vector<EpisodeStats> episodes;
  episodes.reserve(static_cast<std::size_t>(cfg.episodes));
  for (int i = 0; i < cfg.episodes; ++i) {
    if (!cfg.continual) agent.reset_tables();
    const EpisodeStats stats = run_episode(*env, agent, limit, cfg.base_seed + static_cast<std::uint64_t>(i), i);
    if (csv.is_open()) csv << episode_csv_row(stats) << '\n';
    if (on_episode) on_episode(stats);
    episodes.push_back(stats);
  }
  if (csv.is_open()) {
    csv.flush();
    if (!csv) throw IoError("failed writing '" + cfg.output_path.string() + "'");
  }
  return RunResult{std::move(episodes), std::move(agent)};
}

// ---------------------------------------------------------------------------
// Statistics

Aggregate aggregate_from_moments(double mean, double std, std::size_t n) {
  if (n == 0) throw std::invalid_argument("aggregate: no samples");
  const double half = 1.96 * std / std::sqrt(static_cast<double>(n));
  return {mean, std, mean - half, mean + half, n};
}

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate: no samples");
  // Welford
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  const double std = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
  return aggregate_from_moments(mean, std, n);
}

std::vector<MetricSummary> summarize(std::span<const EpisodeStats> episodes) {
  using Getter = double (*)(const EpisodeStats&);
  static const std::pair<const char*, Getter> kMetrics[] = {
      {"total_reward", [](const EpisodeStats& e) { return e.total_reward; }},
      {"steps", [](const EpisodeStats& e) { return double(e.steps); }},
      {"falls", [](const EpisodeStats& e) { return double(e.falls); }},
      {"illegal_actions", [](const EpisodeStats& e) { return double(e.illegal_actions); }},
      {"failures", [](const EpisodeStats& e) { return double(e.failures()); }},
      {"deliveries", [](const EpisodeStats& e) { return double(e.deliveries); }},
      {"rollbacks", [](const EpisodeStats& e) { return double(e.rollbacks); }},
      {"reached_goal", [](const EpisodeStats& e) { return e.reached_goal ? 1.0 : 0.0; }},
  };
  std::vector<MetricSummary> out;
  std::vector<double> column(episodes.size());
  for (const auto& [name, get] : kMetrics) {
    std::transform(episodes.begin(), episodes.end(), column.begin(), get);
    out.push_back({name, aggregate(column)});
  }
  return out;
}

const MetricSummary& find_metric(std::span<const MetricSummary> summary, std::string_view metric) {
  const auto it = std::find_if(summary.begin(), summary.end(), [&](const auto& m) { return m.metric == metric; });
  if (it == summary.end()) throw std::invalid_argument("no metric named '" + std::string(metric) + "'");
  return *it;
}

std::vector<ComparisonRow> compare(std::span<const MetricSummary> baseline, std::span<const MetricSummary> variant) {
  if (baseline.size() != variant.size()) throw std::invalid_argument("compare: metric sets differ");
  std::vector<ComparisonRow> rows;
  for (const auto& b : baseline) {
    const auto& v = find_metric(variant, b.metric);
    ComparisonRow row;
    row.metric = b.metric;
    row.baseline_mean = b.stats.mean;
    row.baseline_std = b.stats.std;
    row.variant_mean = v.stats.mean;
    row.variant_std = v.stats.std;
    row.delta_mean = v.stats.mean - b.stats.mean;
    row.delta_std = v.stats.std - b.stats.std;
    if (b.stats.mean != 0.0) row.pct_delta_mean = row.delta_mean / std::abs(b.stats.mean) * 100.0;
    if (b.stats.std != 0.0) row.pct_delta_std = row.delta_std / std::abs(b.stats.std) * 100.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string optional_number(const std::optional<double>& v) { return v ? format_double(*v) : "n/a"; }

template <typename T>
T parse_field(const std::string& text, const std::filesystem::path& path, std::size_t line) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": bad field '" + text + "'");
  }
  return value;
}

}  // namespace

std::string episode_csv_row(const EpisodeStats& e) {
  std::string row;
  row += std::to_string(e.episode_idx) + ',' + std::to_string(e.seed) + ',' + format_double(e.total_reward) + ',';
  row += std::to_string(e.steps) + ',' + std::to_string(e.falls) + ',' + std::to_string(e.illegal_actions) + ',';
  row += std::to_string(e.deliveries) + ',' + std::to_string(e.rollbacks) + ',' + (e.reached_goal ? "1" : "0");
  return row;
}

void write_episodes_csv(const std::filesystem::path& path, std::span<const EpisodeStats> episodes) {
  std::ofstream out = open_for_writing(path);
  out << kEpisodeCsvHeader << '\n';
  for (const auto& e : episodes) out << episode_csv_row(e) << '\n';
}

std::vector<EpisodeStats> read_episodes_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kEpisodeCsvHeader) {
    throw std::runtime_error(path.string() + ": missing or unexpected episode CSV header");
  }
  std::vector<EpisodeStats> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 9) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected 9 fields");
    EpisodeStats e;
    e.episode_idx = parse_field<std::int64_t>(f[0], path, lineno);
    e.seed = parse_field<std::uint64_t>(f[1], path, lineno);
    e.total_reward = parse_field<double>(f[2], path, lineno);
    e.steps = parse_field<int>(f[3], path, lineno);
    e.falls = parse_field<int>(f[4], path, lineno);
    e.illegal_actions = parse_field<int>(f[5], path, lineno);
    e.deliveries = parse_field<int>(f[6], path, lineno);
    e.rollbacks = parse_field<int>(f[7], path, lineno);
    e.reached_goal = parse_field<int>(f[8], path, lineno) != 0;
    out.push_back(e);
  }
  return out;
}

void write_summary_csv(const std::filesystem::path& path, std::span<const MetricSummary> summary) {
  std::ofstream out = open_for_writing(path);
  out << kSummaryCsvHeader << '\n';
  for (const auto& m : summary) {
    out << m.metric << ',' << format_double(m.stats.mean) << ',' << format_double(m.stats.std) << ','
        << format_double(m.stats.ci_low) << ',' << format_double(m.stats.ci_high) << ',' << m.stats.n << '\n';
  }
}

void write_comparison_csv(const std::filesystem::path& path, std::span<const ComparisonRow> rows) {
  std::ofstream out = open_for_writing(path);
  out << kComparisonCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.metric << ',' << format_double(r.baseline_mean) << ',' << format_double(r.baseline_std) << ','
        << format_double(r.variant_mean) << ',' << format_double(r.variant_std) << ',' << format_double(r.delta_mean)
        << ',' << optional_number(r.pct_delta_mean) << ',' << format_double(r.delta_std) << ','
        << optional_number(r.pct_delta_std) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Ablation

const AblationRow& AblationReport::row(Preset p) const {
  const auto it = std::find_if(rows.begin(), rows.end(), [p](const auto& r) { return r.preset == p; });
  if (it == rows.end()) throw std::invalid_argument("ablation report has no row for " + std::string(preset_name(p)));
  return *it;
}

AblationReport run_ablation(EnvKind env, std::uint64_t base_seed, int episodes, const std::filesystem::path& out_dir) {
  AblationReport report;
  report.env = env;
  for (Preset p : all_presets()) {
    ExperimentConfig cfg;
    cfg.env = env;
    cfg.agent = make_preset(p, env);
    cfg.episodes = episodes;
    cfg.base_seed = base_seed;
    const std::string name(preset_name(p));
    if (!out_dir.empty()) cfg.output_path = out_dir / (name + ".csv");

    AblationRow row;
    row.preset = p;
    row.uses_rollback = cfg.agent.use_rollback;
    row.summary = summarize(run_experiment(cfg).episodes);
    if (!out_dir.empty()) write_summary_csv(out_dir / (name + "_summary.csv"), row.summary);
    report.rows.push_back(std::move(row));
  }

  const AblationRow base = report.row(Preset::kBaseline);
  const double base_reward = base.reward().mean;
  const double base_fail = base.failures();
  for (auto& row : report.rows) {
    row.delta_reward = row.reward().mean - base_reward;
    if (base_reward != 0.0) row.pct_delta_reward = row.delta_reward / std::abs(base_reward) * 100.0;
    if (base_fail != 0.0) row.pct_failure_reduction = (base_fail - row.failures()) / base_fail * 100.0;
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const AblationRow& a, const AblationRow& b) { return a.reward().mean > b.reward().mean; });

  if (!out_dir.empty()) write_ablation_csv(out_dir / "ablation_report.csv", report);
  return report;
}

void write_ablation_csv(const std::filesystem::path& path, const AblationReport& report) {
  std::ofstream out = open_for_writing(path);
  out << kAblationCsvHeader << '\n';
  for (const auto& r : report.rows) {
    out << preset_name(r.preset) << ',' << format_double(r.reward().mean) << ',' << format_double(r.reward().std)
        << ',' << format_double(r.delta_reward) << ',' << optional_number(r.pct_delta_reward) << ','
        << format_double(r.failures()) << ','
        << (r.preset == Preset::kBaseline ? std::string("n/a") : optional_number(r.pct_failure_reduction)) << ','
        << (r.uses_rollback ? format_double(r.rollbacks()) : std::string("n/a")) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Sweeps

SweepParam parse_sweep_param(std::string_view name) {
  if (name == "K" || name == "horizon_K") return SweepParam::kHorizon;
  if (name == "lambda" || name == "penalty_weight") return SweepParam::kPenaltyWeight;
  if (name == "penalty" || name == "penalty_factor") return SweepParam::kPenaltyFactor;
  if (name == "phi_init") return SweepParam::kPhiInit;
  if (name == "threshold") return SweepParam::kThreshold;
  if (name == "q_init") return SweepParam::kQInit;
  throw ConfigError("param", "unknown sweep parameter '" + std::string(name) +
                                 "' (expected K, lambda, penalty, phi_init, threshold or q_init)");
}

std::string_view to_string(SweepParam p) {
  switch (p) {
    case SweepParam::kHorizon:
      return "K";
    case SweepParam::kPenaltyWeight:
      return "lambda";
    case SweepParam::kPenaltyFactor:
      return "penalty";
    case SweepParam::kPhiInit:
      return "phi_init";
    case SweepParam::kThreshold:
      return "threshold";
    case SweepParam::kQInit:
      return "q_init";
  }
  return "unknown";
}

AgentConfig with_parameter(AgentConfig cfg, SweepParam p, double value) {
  switch (p) {
    case SweepParam::kHorizon:
      if (value < 0 || value != std::floor(value)) throw ConfigError("horizon_K", "must be a non-negative integer");
      cfg.horizon_K = static_cast<std::int64_t>(value);
      break;
    case SweepParam::kPenaltyWeight:
      cfg.penalty_weight = value;
      break;
    case SweepParam::kPenaltyFactor:
      cfg.penalty_factor = value;
      break;
    case SweepParam::kPhiInit:
      cfg.phi_init = value;
      break;
    case SweepParam::kThreshold:
      cfg.threshold = value;
      break;
    case SweepParam::kQInit:
      cfg.q_init = value;
      break;
  }
  cfg.validate();
  return cfg;
}

std::vector<SweepPoint> run_sweep(EnvKind env, SweepParam p, std::span<const double> values, const AgentConfig& base,
                                  int episodes, std::uint64_t base_seed, const std::filesystem::path& out_csv) {
  if (values.empty()) throw ConfigError("values", "sweep needs at least one value");
  std::vector<AgentConfig> configs;
  for (double v : values) configs.push_back(with_parameter(base, p, v));

  std::ofstream out;
  if (!out_csv.empty()) {
    out = open_for_writing(out_csv);
    out << kSweepCsvHeader << '\n';
  }

  std::vector<SweepPoint> points;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig cfg;
    cfg.env = env;
    cfg.agent = configs[i];
    cfg.episodes = episodes;
    cfg.base_seed = base_seed;
    const auto summary = summarize(run_experiment(cfg).episodes);

    SweepPoint pt;
    pt.value = values[i];
    pt.reward = find_metric(summary, "total_reward").stats;
    pt.failures_mean = find_metric(summary, "failures").stats.mean;
    pt.rollbacks_mean = find_metric(summary, "rollbacks").stats.mean;
    if (out.is_open()) {
      out << to_string(p) << ',' << format_double(pt.value) << ',' << format_double(pt.reward.mean) << ','
          << format_double(pt.reward.std) << ',' << format_double(pt.reward.ci_low) << ','
          << format_double(pt.reward.ci_high) << ',' << pt.reward.n << ',' << format_double(pt.failures_mean) << ','
          << format_double(pt.rollbacks_mean) << '\n';
    }
    points.push_back(pt);
  }
  return points;
}

}  // namespace revrl

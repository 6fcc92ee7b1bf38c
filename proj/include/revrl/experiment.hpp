// Episode runner, seed schedule, aggregation and result files.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "revrl/agent.hpp"
#include "revrl/env.hpp"

namespace revrl {

struct EpisodeStats {
  std::int64_t episode_idx = 0;
  std::uint64_t seed = 0;
  double total_reward = 0.0;
  int steps = 0;
  int falls = 0;
  int illegal_actions = 0;
  int deliveries = 0;
  int rollbacks = 0;
  bool reached_goal = false;

  int failures() const { return falls + illegal_actions; }
  bool operator==(const EpisodeStats&) const = default;
};

struct ExperimentConfig {
  EnvKind env = EnvKind::kCliffWalking;
  AgentConfig agent;
  int episodes = 100000;
  /// Defaults to the environment's protocol limit (700 / 1500).
  std::optional<int> step_limit;
  std::uint64_t base_seed = 0;
  /// Keep Q/phi across episodes instead of starting every episode from
  /// freshly initialised tables.
  bool continual = false;
  /// Per-episode CSV destination; empty means no file.
  std::filesystem::path output_path;

  int effective_step_limit() const;
  /// Throws ConfigError on invalid values.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Runs one episode with an RNG seeded from `seed`. The reset draws first,
/// then action selection consumes the same stream. Every loop iteration
/// counts as a step, including rolled-back ones; rolled-back steps add no
/// reward and no events. When `scripted_actions` is non-empty, step i
/// executes scripted_actions[i] instead of the agent's choice while it lasts.
EpisodeStats run_episode(const Environment& env, Agent& agent, int step_limit, std::uint64_t seed,
                         std::int64_t episode_idx = 0, std::span<const ActionId> scripted_actions = {});

struct RunResult {
  std::vector<EpisodeStats> episodes;
  /// Agent state after the final episode.
  Agent agent;
};

/// Episode i is seeded with base_seed + i. Writes the per-episode CSV when
/// cfg.output_path is set. `on_episode` sees every row as it is produced.
RunResult run_experiment(const ExperimentConfig& cfg,
                         const std::function<void(const EpisodeStats&)>& on_episode = {});

// ---------------------------------------------------------------------------
// Statistics

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
};

/// Mean, sample std and mean -/+ 1.96 std / sqrt(n). Throws on empty input.
Aggregate aggregate(std::span<const double> values);
/// Interval from already-known moments.
Aggregate aggregate_from_moments(double mean, double std, std::size_t n);

struct MetricSummary {
  std::string metric;
  Aggregate stats;
};

/// Summaries for total_reward, steps, falls, illegal_actions, failures,
/// deliveries, rollbacks and reached_goal, in that order.
std::vector<MetricSummary> summarize(std::span<const EpisodeStats> episodes);
const MetricSummary& find_metric(std::span<const MetricSummary> summary, std::string_view metric);

struct ComparisonRow {
  std::string metric;
  double baseline_mean = 0.0;
  double baseline_std = 0.0;
  double variant_mean = 0.0;
  double variant_std = 0.0;
  double delta_mean = 0.0;
  std::optional<double> pct_delta_mean;  // empty when the baseline mean is 0
  double delta_std = 0.0;
  std::optional<double> pct_delta_std;  // empty when the baseline std is 0
};

/// Variant minus baseline per metric; percentages are relative to
/// |baseline| so that an improvement in a negative return reads positive.
std::vector<ComparisonRow> compare(std::span<const MetricSummary> baseline, std::span<const MetricSummary> variant);

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kEpisodeCsvHeader =
    "episode,seed,total_reward,steps,falls,illegal_actions,deliveries,rollbacks,reached_goal";
inline constexpr std::string_view kSummaryCsvHeader = "metric,mean,std,ci_low,ci_high,n";
inline constexpr std::string_view kComparisonCsvHeader =
    "metric,baseline_mean,baseline_std,variant_mean,variant_std,delta_mean,pct_delta_mean,delta_std,pct_delta_std";

std::string episode_csv_row(const EpisodeStats& e);
void write_episodes_csv(const std::filesystem::path& path, std::span<const EpisodeStats> episodes);
/// Throws IoError if unreadable, std::runtime_error on a malformed file.
std::vector<EpisodeStats> read_episodes_csv(const std::filesystem::path& path);
void write_summary_csv(const std::filesystem::path& path, std::span<const MetricSummary> summary);
void write_comparison_csv(const std::filesystem::path& path, std::span<const ComparisonRow> rows);

// ---------------------------------------------------------------------------
// Ablation

struct AblationRow {
  Preset preset{};
  std::vector<MetricSummary> summary;
  double delta_reward = 0.0;
  std::optional<double> pct_delta_reward;
  /// Failure reduction relative to the baseline, positive when fewer.
  std::optional<double> pct_failure_reduction;
  bool uses_rollback = false;

  const Aggregate& reward() const { return find_metric(summary, "total_reward").stats; }
  double failures() const { return find_metric(summary, "failures").stats.mean; }
  double rollbacks() const { return find_metric(summary, "rollbacks").stats.mean; }
};

struct AblationReport {
  EnvKind env{};
  /// Sorted by mean reward, best first.
  std::vector<AblationRow> rows;

  const AblationRow& row(Preset p) const;
};

inline constexpr std::string_view kAblationCsvHeader =
    "agent,reward_mean,reward_std,delta_reward,pct_delta_reward,failures,pct_delta_fail,rollbacks";

/// Runs the eight presets with a shared seed schedule. With a non-empty
/// `out_dir`, writes <Agent>.csv, <Agent>_summary.csv and ablation_report.csv.
AblationReport run_ablation(EnvKind env, std::uint64_t base_seed, int episodes,
                            const std::filesystem::path& out_dir = {});
void write_ablation_csv(const std::filesystem::path& path, const AblationReport& report);

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepParam { kHorizon, kPenaltyWeight, kPenaltyFactor, kPhiInit, kThreshold, kQInit };

/// Accepts K, lambda, penalty, phi_init, threshold, q_init or the matching
/// config field names.
SweepParam parse_sweep_param(std::string_view name);
std::string_view to_string(SweepParam p);
/// `base` with one parameter replaced. Throws ConfigError if invalid.
AgentConfig with_parameter(AgentConfig base, SweepParam p, double value);

struct SweepPoint {
  double value = 0.0;
  Aggregate reward;
  double failures_mean = 0.0;
  double rollbacks_mean = 0.0;
};

inline constexpr std::string_view kSweepCsvHeader =
    "parameter,value,mean,std,ci_low,ci_high,n,failures_mean,rollbacks_mean";

/// One experiment per value; all other settings come from `base`.
std::vector<SweepPoint> run_sweep(EnvKind env, SweepParam p, std::span<const double> values, const AgentConfig& base,
                                  int episodes, std::uint64_t base_seed, const std::filesystem::path& out_csv = {});

}  // namespace revrl

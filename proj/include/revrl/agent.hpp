// Tabular Q-learning / SARSA with optional reversibility penalty,
// threshold-amplified updates and rollback.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "revrl/env.hpp"
#include "revrl/precedence.hpp"

namespace revrl {

/// Invalid configuration value; `field()` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Algorithm { kQLearning, kSarsa };

/// How the greedy branch of epsilon-greedy picks among equal maxima.
enum class TieBreak {
  kFirst,    // lowest action index
  kUniform,  // uniformly among maximizers
};

/// What a rollback restores.
enum class RollbackScope {
  kAgent,        // the agent's effective state; the environment keeps its transition
  kEnvironment,  // the environment is stepped from the pre-transition state again
};

std::string_view to_string(Algorithm v);
std::string_view to_string(TieBreak v);
std::string_view to_string(RollbackScope v);
Algorithm parse_algorithm(std::string_view s);
TieBreak parse_tie_break(std::string_view s);
RollbackScope parse_rollback_scope(std::string_view s);

struct AgentConfig {
  Algorithm algorithm = Algorithm::kQLearning;
  bool use_precedence = false;
  bool use_threshold_penalty = false;
  bool use_rollback = false;

  double alpha = 0.1;
  double gamma = 0.99;
  double epsilon = 0.1;
  double q_init = 0.0;

  // Precedence (required when use_precedence).
  std::optional<std::int64_t> horizon_K;
  std::optional<double> ema_rate;
  std::optional<double> penalty_weight;
  std::optional<double> phi_init;

  // Threshold (required when use_threshold_penalty or use_rollback).
  std::optional<double> threshold;
  // Update amplification P (required when use_threshold_penalty).
  std::optional<double> penalty_factor;

  bool threshold_on_penalized_target = true;
  TieBreak tie_break = TieBreak::kFirst;
  RollbackScope rollback_scope = RollbackScope::kAgent;

  /// Throws ConfigError naming the first offending field.
  void validate() const;

  bool operator==(const AgentConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Ablation presets

enum class Preset {
  kBaseline,
  kRollbackOnly,
  kThresholdPeAgent,
  kRollThreshold,
  kPrecedenceOnly,
  kPrecedenceR,
  kPrecedenceTh,
  kFullModel,
};

std::span<const Preset> all_presets();
/// Display name as used in result tables, e.g. "Roll_Threshold".
std::string_view preset_name(Preset p);
/// Case-insensitive; throws ConfigError("agent", ...) on unknown names.
Preset parse_preset(std::string_view name);
/// The parameter row for `p` on `env`.
AgentConfig make_preset(Preset p, EnvKind env);

// ---------------------------------------------------------------------------
// Q table

class QTable {
 public:
  QTable(int num_states, int num_actions, double init_value);

  double operator()(StateId s, ActionId a) const { return values_[offset(s, a)]; }
  double& operator()(StateId s, ActionId a) { return values_[offset(s, a)]; }
  std::span<const double> row(StateId s) const;

  void reset();
  bool all_finite() const;

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  std::span<const double> values() const { return values_; }

  /// Writes `state,action,q` rows.
  void dump_csv(const std::filesystem::path& path) const;

 private:
  std::size_t offset(StateId s, ActionId a) const;

  int num_states_;
  int num_actions_;
  double init_value_;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Update building blocks

/// Epsilon-greedy. Always draws one uniform real first, then one integer for
/// exploration or (kUniform only) for breaking a tie among several maxima.
ActionId select_action(std::span<const double> q_row, double epsilon, TieBreak tie_break, Rng& rng);

/// r - lambda * (1 - phi).
double penalized_reward(double reward, double phi_sa, double lambda);

double q_learning_target(double reward, std::span<const double> next_row, double gamma, bool done);
double sarsa_target(double reward, double q_next, double gamma, bool done);

struct ThresholdDecision {
  double beta = 1.0;
  bool rollback = false;
};

/// Fires when target <= T * q_sa (inclusive). Then beta = P if the threshold
/// penalty is enabled and rollback = use_rollback; otherwise (1, false).
ThresholdDecision threshold_decision(double target, double q_sa, const AgentConfig& cfg);

/// q[s, a] += alpha * beta * delta. Throws std::domain_error if the result
/// is not finite.
void apply_update(QTable& q, StateId s, ActionId a, double alpha, double beta, double delta);

// ---------------------------------------------------------------------------
// Agent

struct StepResult {
  ActionId action{};
  StepOutcome outcome;
  double target = 0.0;
  double td_error = 0.0;
  double beta_applied = 1.0;
  bool rollback_fired = false;
  /// State the agent acts from on the next step.
  StateId effective_next_state{};
  /// SARSA only: action committed for the next step.
  std::optional<ActionId> effective_next_action;
};

class Agent {
 public:
  Agent(AgentConfig cfg, int num_states, int num_actions);

  /// Refill Q and phi with their initial values.
  void reset_tables();
  /// Start an episode at `start`: clears pending records, the step counter
  /// and any committed SARSA action. Learned tables are kept.
  void begin_episode(StateId start);

  /// One interaction: choose an action (or use the committed SARSA action),
  /// step `env`, update the estimators and decide on rollback.
  StepResult step(const Environment& env, Rng& rng);
  /// Same as step() with the action supplied by the caller.
  StepResult act(const Environment& env, ActionId action, Rng& rng);

  const AgentConfig& config() const { return cfg_; }
  const QTable& q() const { return q_; }
  const PhiTable* phi() const { return phi_ ? &*phi_ : nullptr; }
  const PrecedenceBuffer* buffer() const { return buffer_ ? &*buffer_ : nullptr; }

  StateId state() const { return state_; }
  /// State the environment will be stepped from next.
  StateId env_state() const { return env_state_; }
  std::int64_t step_count() const { return t_; }

 private:
  AgentConfig cfg_;
  QTable q_;
  std::optional<PhiTable> phi_;
  std::optional<PrecedenceBuffer> buffer_;

  StateId state_{};
  StateId env_state_{};
  std::optional<ActionId> committed_action_;
  std::int64_t t_ = 0;
};

}  // namespace revrl

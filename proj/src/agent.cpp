#include "revrl/agent.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>

#include "revrl/io.hpp"

namespace revrl {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

template <typename T>
const T& require(const std::optional<T>& v, const char* field, const char* why) {
  if (!v) throw ConfigError(field, std::string("required when ") + why);
  return *v;
}

void check(bool ok, const char* field, const char* message) {
  if (!ok) throw ConfigError(field, message);
}

}  // namespace

std::string_view to_string(Algorithm v) { return v == Algorithm::kSarsa ? "sarsa" : "q_learning"; }
std::string_view to_string(TieBreak v) { return v == TieBreak::kUniform ? "uniform" : "first"; }
std::string_view to_string(RollbackScope v) { return v == RollbackScope::kEnvironment ? "environment" : "agent"; }

Algorithm parse_algorithm(std::string_view s) {
  if (s == "q_learning") return Algorithm::kQLearning;
  if (s == "sarsa") return Algorithm::kSarsa;
  throw ConfigError("algorithm", "expected q_learning or sarsa, got '" + std::string(s) + "'");
}

TieBreak parse_tie_break(std::string_view s) {
  if (s == "first") return TieBreak::kFirst;
  if (s == "uniform") return TieBreak::kUniform;
  throw ConfigError("tie_break", "expected first or uniform, got '" + std::string(s) + "'");
}

RollbackScope parse_rollback_scope(std::string_view s) {
  if (s == "agent") return RollbackScope::kAgent;
  if (s == "environment") return RollbackScope::kEnvironment;
  throw ConfigError("rollback_scope", "expected agent or environment, got '" + std::string(s) + "'");
}

void AgentConfig::validate() const {
  check(alpha > 0.0 && alpha <= 1.0, "alpha", "must be in (0, 1]");
  check(gamma >= 0.0 && gamma <= 1.0, "gamma", "must be in [0, 1]");
  check(epsilon >= 0.0 && epsilon <= 1.0, "epsilon", "must be in [0, 1]");
  check(std::isfinite(q_init), "q_init", "must be finite");

  if (horizon_K) check(*horizon_K >= 0, "horizon_K", "must be >= 0");
  if (ema_rate) check(*ema_rate > 0.0 && *ema_rate < 1.0, "ema_rate", "must be in (0, 1)");
  if (penalty_weight) check(*penalty_weight >= 0.0 && std::isfinite(*penalty_weight), "penalty_weight", "must be >= 0");
  if (phi_init) check(*phi_init >= 0.0 && *phi_init <= 1.0, "phi_init", "must be in [0, 1]");
  if (threshold) check(*threshold > 0.0, "threshold", "must be > 0");
  if (penalty_factor) check(*penalty_factor > 0.0, "penalty_factor", "must be > 0");

  if (use_precedence) {
    require(horizon_K, "horizon_K", "use_precedence is set");
    require(ema_rate, "ema_rate", "use_precedence is set");
    require(penalty_weight, "penalty_weight", "use_precedence is set");
    require(phi_init, "phi_init", "use_precedence is set");
  }
  if (use_threshold_penalty || use_rollback) {
    require(threshold, "threshold", "use_threshold_penalty or use_rollback is set");
  }
  if (use_threshold_penalty) require(penalty_factor, "penalty_factor", "use_threshold_penalty is set");
}

// ---------------------------------------------------------------------------
// Presets

namespace {

constexpr std::array<Preset, 8> kPresets = {
    Preset::kBaseline,       Preset::kRollbackOnly, Preset::kThresholdPeAgent, Preset::kRollThreshold,
    Preset::kPrecedenceOnly, Preset::kPrecedenceR,  Preset::kPrecedenceTh,     Preset::kFullModel,
};

}  // namespace

std::span<const Preset> all_presets() { return kPresets; }

std::string_view preset_name(Preset p) {
  switch (p) {
    case Preset::kBaseline:
      return "Baseline";
    case Preset::kRollbackOnly:
      return "RollbackOnly";
    case Preset::kThresholdPeAgent:
      return "ThresholdPeAgent";
    case Preset::kRollThreshold:
      return "Roll_Threshold";
    case Preset::kPrecedenceOnly:
      return "PrecedenceOnly";
    case Preset::kPrecedenceR:
      return "Precedence_R";
    case Preset::kPrecedenceTh:
      return "Precedence_Th";
    case Preset::kFullModel:
      return "FullModel";
  }
  return "unknown";
}

Preset parse_preset(std::string_view name) {
  const std::string wanted = lowercase(name);
  for (Preset p : kPresets) {
    if (lowercase(preset_name(p)) == wanted) return p;
  }
  throw ConfigError("agent", "unknown preset '" + std::string(name) + "'");
}

AgentConfig make_preset(Preset p, EnvKind env) {
  AgentConfig cfg;
  cfg.alpha = 0.1;
  cfg.gamma = 0.99;
  cfg.epsilon = 0.1;
  cfg.q_init = p == Preset::kBaseline ? 0.0 : -1.0;

  const bool precedence = p == Preset::kPrecedenceOnly || p == Preset::kPrecedenceR || p == Preset::kPrecedenceTh ||
                          p == Preset::kFullModel;
  const bool rollback = p == Preset::kRollbackOnly || p == Preset::kRollThreshold || p == Preset::kPrecedenceR ||
                        p == Preset::kFullModel;
  const bool amplify = p == Preset::kThresholdPeAgent || p == Preset::kRollThreshold ||
                       p == Preset::kPrecedenceTh || p == Preset::kFullModel;

  if (precedence) {
    cfg.use_precedence = true;
    cfg.horizon_K = 2;
    cfg.ema_rate = 0.01;
    cfg.penalty_weight = env == EnvKind::kTaxi ? 0.8 : 0.6;
    cfg.phi_init = env == EnvKind::kTaxi ? 0.8 : 0.1;
  }
  if (rollback || amplify) cfg.threshold = 3.0;
  cfg.use_rollback = rollback;
  if (amplify) {
    cfg.use_threshold_penalty = true;
    cfg.penalty_factor = 1.1;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// QTable

QTable::QTable(int num_states, int num_actions, double init_value)
    : num_states_(num_states),
      num_actions_(num_actions),
      init_value_(init_value),
      values_(static_cast<std::size_t>(num_states) * static_cast<std::size_t>(num_actions), init_value) {
  if (num_states <= 0 || num_actions <= 0) throw std::invalid_argument("QTable: empty table");
}

std::size_t QTable::offset(StateId s, ActionId a) const {
  return static_cast<std::size_t>(index(s)) * static_cast<std::size_t>(num_actions_) +
         static_cast<std::size_t>(index(a));
}

std::span<const double> QTable::row(StateId s) const {
  return std::span<const double>(values_).subspan(offset(s, ActionId{0}), static_cast<std::size_t>(num_actions_));
}

void QTable::reset() { std::fill(values_.begin(), values_.end(), init_value_); }

bool QTable::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void QTable::dump_csv(const std::filesystem::path& path) const {
  std::ofstream out = open_for_writing(path);
  out << "state,action,q\n";
  for (int s = 0; s < num_states_; ++s) {
    for (int a = 0; a < num_actions_; ++a) {
      out << s << ',' << a << ',' << format_double((*this)(StateId{s}, ActionId{a})) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Building blocks

ActionId select_action(std::span<const double> q_row, double epsilon, TieBreak tie_break, Rng& rng) {
  if (q_row.empty()) throw std::invalid_argument("select_action: empty action-value row");
  const int n = static_cast<int>(q_row.size());

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < epsilon) {
    std::uniform_int_distribution<int> any(0, n - 1);
    return ActionId{any(rng)};
  }

  const auto best = std::max_element(q_row.begin(), q_row.end());
  if (tie_break == TieBreak::kFirst) return ActionId{static_cast<std::int32_t>(best - q_row.begin())};

  const auto ties = std::count(q_row.begin(), q_row.end(), *best);
  if (ties == 1) return ActionId{static_cast<std::int32_t>(best - q_row.begin())};
  std::uniform_int_distribution<long> pick(0, ties - 1);
  long k = pick(rng);
  for (int a = 0; a < n; ++a) {
    if (q_row[static_cast<std::size_t>(a)] == *best && k-- == 0) return ActionId{a};
  }
  return ActionId{static_cast<std::int32_t>(best - q_row.begin())};
}

double penalized_reward(double reward, double phi_sa, double lambda) { return reward - lambda * (1.0 - phi_sa); }

double q_learning_target(double reward, std::span<const double> next_row, double gamma, bool done) {
  if (done) return reward;
  return reward + gamma * *std::max_element(next_row.begin(), next_row.end());
}

double sarsa_target(double reward, double q_next, double gamma, bool done) {
  return done ? reward : reward + gamma * q_next;
}

ThresholdDecision threshold_decision(double target, double q_sa, const AgentConfig& cfg) {
  if (!(cfg.use_threshold_penalty || cfg.use_rollback) || !cfg.threshold) return {};
  if (!(target <= *cfg.threshold * q_sa)) return {};
  return {cfg.use_threshold_penalty ? cfg.penalty_factor.value_or(1.0) : 1.0, cfg.use_rollback};
}

void apply_update(QTable& q, StateId s, ActionId a, double alpha, double beta, double delta) {
  double& v = q(s, a);
  const double updated = v + alpha * beta * delta;
  if (!std::isfinite(updated)) {
    throw std::domain_error("non-finite Q value at (" + std::to_string(index(s)) + ", " + std::to_string(index(a)) +
                            ")");
  }
  v = updated;
}

// ---------------------------------------------------------------------------
// Agent

Agent::Agent(AgentConfig cfg, int num_states, int num_actions)
    : cfg_(std::move(cfg)), q_(num_states, num_actions, cfg_.q_init) {
  cfg_.validate();
  if (cfg_.use_precedence) {
    phi_.emplace(num_states, num_actions, *cfg_.phi_init, *cfg_.ema_rate);
    buffer_.emplace(*cfg_.horizon_K);
  }
}

void Agent::reset_tables() {
  q_.reset();
  if (phi_) phi_->reset();
}

void Agent::begin_episode(StateId start) {
  state_ = start;
  env_state_ = start;
  committed_action_.reset();
  t_ = 0;
  if (buffer_) buffer_->clear();
}

StepResult Agent::step(const Environment& env, Rng& rng) {
  const ActionId a = committed_action_ ? *committed_action_ : select_action(q_.row(state_), cfg_.epsilon, cfg_.tie_break, rng);
  return act(env, a, rng);
}

StepResult Agent::act(const Environment& env, ActionId a, Rng& rng) {
  const StateId s = state_;
  StepResult res;
  res.action = a;
  res.outcome = env.step(env_state_, a);
  const StateId next = res.outcome.next_state;
  const bool done = res.outcome.terminated;
  ++t_;

  double reward = res.outcome.reward;
  if (cfg_.use_precedence) {
    buffer_->resolve_and_update(*phi_, next, t_);
    buffer_->enqueue(s, a, t_);
    reward = penalized_reward(reward, (*phi_)(s, a), *cfg_.penalty_weight);
  }

  std::optional<ActionId> next_action;
  if (!done && cfg_.algorithm == Algorithm::kSarsa) {
    next_action = select_action(q_.row(next), cfg_.epsilon, cfg_.tie_break, rng);
  }
  const auto target_for = [&](double r) {
    if (cfg_.algorithm == Algorithm::kSarsa) return sarsa_target(r, next_action ? q_(next, *next_action) : 0.0, cfg_.gamma, done);
    return q_learning_target(r, q_.row(next), cfg_.gamma, done);
  };
  res.target = target_for(reward);

  const double q_sa = q_(s, a);
  const double tested = cfg_.threshold_on_penalized_target ? res.target : target_for(res.outcome.reward);
  const ThresholdDecision decision = threshold_decision(tested, q_sa, cfg_);

  res.td_error = res.target - q_sa;
  res.beta_applied = decision.beta;
  apply_update(q_, s, a, cfg_.alpha, decision.beta, res.td_error);

  res.rollback_fired = decision.rollback && !done;
  if (res.rollback_fired) {
    state_ = s;
    env_state_ = cfg_.rollback_scope == RollbackScope::kEnvironment ? s : next;
    committed_action_ = cfg_.algorithm == Algorithm::kSarsa ? std::optional<ActionId>(a) : std::nullopt;
  } else {
    state_ = next;
    env_state_ = next;
    committed_action_ = next_action;
  }
  res.effective_next_state = state_;
  res.effective_next_action = committed_action_;
  return res;
}

}  // namespace revrl

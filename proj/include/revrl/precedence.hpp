// Empirical reversibility estimation.
//
// Every transition (s0, a0) taken at step t leaves a pending record with
// deadline t + K. A record resolves with label 1 when the agent observes s0
// again, or with label 0 once the step counter passes the deadline. Labels
// feed an exponential moving average per (s, a).

#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <vector>

#include "revrl/env.hpp"

namespace revrl {

struct PendingRecord {
  StateId origin_state{};
  ActionId origin_action{};
  std::int64_t deadline = 0;

  bool operator==(const PendingRecord&) const = default;
};

/// Reversibility estimates, one per state-action pair, each in [0, 1].
class PhiTable {
 public:
  PhiTable(int num_states, int num_actions, double init_value, double ema_rate);

  double operator()(StateId s, ActionId a) const;
  /// Folds one binary return label into the estimate for (s, a).
  void update(StateId s, ActionId a, bool returned);
  /// Refill every entry with the initial value.
  void reset();

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double init_value() const { return init_value_; }
  double ema_rate() const { return ema_rate_; }

  /// Writes `state,action,phi` rows.
  void dump_csv(const std::filesystem::path& path) const;

 private:
  std::size_t offset(StateId s, ActionId a) const;

  int num_states_;
  int num_actions_;
  double init_value_;
  double ema_rate_;
  std::vector<double> values_;
};

class PrecedenceBuffer {
 public:
  explicit PrecedenceBuffer(std::int64_t horizon);

  void enqueue(StateId s, ActionId a, std::int64_t t);

  /// Scans all pending records in FIFO order against the state observed at
  /// step t. A record whose origin equals `current` resolves with y=1 (this
  /// takes precedence over expiry); otherwise it resolves with y=0 when
  /// t > deadline. Resolved records update `phi` at their origin pair and are
  /// removed. Returns the number of records removed.
  int resolve_and_update(PhiTable& phi, StateId current, std::int64_t t);

  void clear() { records_.clear(); }

  std::int64_t horizon() const { return horizon_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::deque<PendingRecord>& records() const { return records_; }

 private:
  std::int64_t horizon_;
  std::deque<PendingRecord> records_;
};

}  // namespace revrl

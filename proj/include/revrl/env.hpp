// Tabular toy-text environments: CliffWalking (4x12) and Taxi (5x5).
//
// Environments are pure functions of (state, action). The only randomness is
// in reset(), which draws from a caller-owned generator, so a single instance
// can be shared freely between threads.

#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>

namespace revrl {

using Rng = std::mt19937_64;

enum class StateId : std::int32_t {};
enum class ActionId : std::int32_t {};

constexpr std::int32_t index(StateId s) { return static_cast<std::int32_t>(s); }
constexpr std::int32_t index(ActionId a) { return static_cast<std::int32_t>(a); }

/// Bit flags for notable transitions reported by an environment step.
enum class Event : std::uint8_t {
  kNone = 0,
  kFellOffCliff = 1u << 0,
  kIllegalAction = 1u << 1,
  kDelivered = 1u << 2,
};

struct StepOutcome {
  StateId next_state{};
  double reward = 0.0;
  bool terminated = false;
  std::uint8_t events = 0;

  bool has(Event e) const { return (events & static_cast<std::uint8_t>(e)) != 0; }
  bool operator==(const StepOutcome&) const = default;
};

enum class EnvKind { kCliffWalking, kTaxi };

std::string_view to_string(EnvKind kind);
/// Accepts "cliffwalking"/"cliff" and "taxi"; throws std::invalid_argument otherwise.
EnvKind parse_env_kind(std::string_view name);

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view name() const = 0;
  virtual int num_states() const = 0;
  virtual int num_actions() const = 0;
  /// Step cap used by the experiment protocol for this environment.
  virtual int default_step_limit() const = 0;

  virtual StateId reset(Rng& rng) const = 0;
  virtual StepOutcome step(StateId state, ActionId action) const = 0;
};

// ---------------------------------------------------------------------------
// CliffWalking
// ---------------------------------------------------------------------------

/// Row-major 4x12 grid. Actions: 0=up, 1=right, 2=down, 3=left.
/// Cliff cells (3,1)..(3,10) cost -100 and teleport back to the start
/// without ending the episode; (3,11) is the goal.
class CliffWalking final : public Environment {
 public:
  static constexpr int kRows = 4;
  static constexpr int kCols = 12;
  static constexpr StateId kStart{36};
  static constexpr StateId kGoal{47};

  enum Action : std::int32_t { kUp = 0, kRight = 1, kDown = 2, kLeft = 3 };

  static constexpr StateId encode(int row, int col) { return StateId{row * kCols + col}; }
  static constexpr int row_of(StateId s) { return index(s) / kCols; }
  static constexpr int col_of(StateId s) { return index(s) % kCols; }
  static constexpr bool is_cliff(int row, int col) { return row == kRows - 1 && col >= 1 && col <= kCols - 2; }

  std::string_view name() const override { return "cliffwalking"; }
  int num_states() const override { return kRows * kCols; }
  int num_actions() const override { return 4; }
  int default_step_limit() const override { return 700; }

  StateId reset(Rng& rng) const override;
  /// Throws std::invalid_argument when called from the goal or with an
  /// out-of-range state/action.
  StepOutcome step(StateId state, ActionId action) const override;
};

// ---------------------------------------------------------------------------
// Taxi
// ---------------------------------------------------------------------------

/// Decoded Taxi state. passenger_loc 0..3 are the landmarks R, G, Y, B;
/// 4 means the passenger is in the taxi.
struct TaxiSituation {
  int taxi_row = 0;
  int taxi_col = 0;
  int passenger_loc = 0;
  int destination = 0;

  bool operator==(const TaxiSituation&) const = default;
};

StateId taxi_encode(const TaxiSituation& sit);
TaxiSituation taxi_decode(StateId s);

/// Canonical 5x5 Taxi map. Actions: 0=south, 1=north, 2=east, 3=west,
/// 4=pickup, 5=dropoff.
///
///   +---------+
///   |R: | : :G|
///   | : | : : |
///   | : : : : |
///   | | : | : |
///   |Y| : |B: |
///   +---------+
class Taxi final : public Environment {
 public:
  static constexpr int kSize = 5;
  static constexpr int kInTaxi = 4;
  static constexpr int kNumValidStarts = 300;

  enum Action : std::int32_t { kSouth = 0, kNorth = 1, kEast = 2, kWest = 3, kPickup = 4, kDropoff = 5 };

  struct Cell {
    int row;
    int col;
    bool operator==(const Cell&) const = default;
  };
  static constexpr Cell kLandmarks[4] = {{0, 0}, {0, 4}, {4, 0}, {4, 3}};

  /// True when a wall separates (row, col) from (row, col + 1).
  static bool wall_east_of(int row, int col);

  std::string_view name() const override { return "taxi"; }
  int num_states() const override { return 500; }
  int num_actions() const override { return 6; }
  int default_step_limit() const override { return 1500; }

  /// Uniform over taxi position x passenger landmark x destination with
  /// passenger != destination.
  StateId reset(Rng& rng) const override;
  StepOutcome step(StateId state, ActionId action) const override;
};

std::unique_ptr<Environment> make_environment(EnvKind kind);

}  // namespace revrl

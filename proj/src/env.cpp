#include "revrl/env.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>

namespace revrl {

namespace {

constexpr std::uint8_t flag(Event e) { return static_cast<std::uint8_t>(e); }

void check_range(std::int32_t value, int limit, const char* what) {
  if (value < 0 || value >= limit) {
    throw std::out_of_range(std::string(what) + " index " + std::to_string(value) + " out of range [0, " +
                            std::to_string(limit) + ")");
  }
}

// Valid Taxi start states in ascending index order.
const std::array<StateId, Taxi::kNumValidStarts>& taxi_start_states() {
  static const auto states = [] {
    std::array<StateId, Taxi::kNumValidStarts> out{};
    std::size_t n = 0;
    for (std::int32_t s = 0; s < 500; ++s) {
      const TaxiSituation sit = taxi_decode(StateId{s});
      if (sit.passenger_loc != Taxi::kInTaxi && sit.passenger_loc != sit.destination) out[n++] = StateId{s};
    }
    return out;
  }();
  return states;
}

}  // namespace

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::kCliffWalking:
      return "cliffwalking";
    case EnvKind::kTaxi:
      return "taxi";
  }
  return "unknown";
}

EnvKind parse_env_kind(std::string_view name) {
  if (name == "cliffwalking" || name == "cliff") return EnvKind::kCliffWalking;
  if (name == "taxi") return EnvKind::kTaxi;
  throw std::invalid_argument("unknown environment '" + std::string(name) + "' (expected cliffwalking or taxi)");
}

std::unique_ptr<Environment> make_environment(EnvKind kind) {
  switch (kind) {
    case EnvKind::kCliffWalking:
      return std::make_unique<CliffWalking>();
    case EnvKind::kTaxi:
      return std::make_unique<Taxi>();
  }
  throw std::invalid_argument("unknown environment kind");
}

// ---------------------------------------------------------------------------
// CliffWalking

StateId CliffWalking::reset(Rng& /*rng*/) const { return kStart; }

StepOutcome CliffWalking::step(StateId state, ActionId action) const {
  check_range(index(state), num_states(), "state");
  check_range(index(action), num_actions(), "action");
  if (state == kGoal) throw std::invalid_argument("cliffwalking: step called from the terminal goal state");

  int row = row_of(state);
  int col = col_of(state);
  switch (index(action)) {
    case kUp:
      row = std::max(row - 1, 0);
      break;
    case kRight:
      col = std::min(col + 1, kCols - 1);
      break;
    case kDown:
      row = std::min(row + 1, kRows - 1);
      break;
    case kLeft:
      col = std::max(col - 1, 0);
      break;
  }

  if (is_cliff(row, col)) return {kStart, -100.0, false, flag(Event::kFellOffCliff)};
  const StateId next = encode(row, col);
  return {next, -1.0, next == kGoal, 0};
}

// ---------------------------------------------------------------------------
// Taxi

StateId taxi_encode(const TaxiSituation& sit) {
  check_range(sit.taxi_row, Taxi::kSize, "taxi_row");
  check_range(sit.taxi_col, Taxi::kSize, "taxi_col");
  check_range(sit.passenger_loc, 5, "passenger_loc");
  check_range(sit.destination, 4, "destination");
  return StateId{((sit.taxi_row * 5 + sit.taxi_col) * 5 + sit.passenger_loc) * 4 + sit.destination};
}

TaxiSituation taxi_decode(StateId s) {
  check_range(index(s), 500, "taxi state");
  std::int32_t v = index(s);
  TaxiSituation sit;
  sit.destination = v % 4;
  v /= 4;
  sit.passenger_loc = v % 5;
  v /= 5;
  sit.taxi_col = v % 5;
  sit.taxi_row = v / 5;
  return sit;
}

bool Taxi::wall_east_of(int row, int col) {
  switch (row) {
    case 0:
    case 1:
      return col == 1;
    case 3:
    case 4:
      return col == 0 || col == 2;
    default:
      return false;
  }
}

StateId Taxi::reset(Rng& rng) const {
  std::uniform_int_distribution<int> pick(0, kNumValidStarts - 1);
  return taxi_start_states()[static_cast<std::size_t>(pick(rng))];
}

StepOutcome Taxi::step(StateId state, ActionId action) const {
  check_range(index(action), num_actions(), "action");
  TaxiSituation sit = taxi_decode(state);
  const Cell here{sit.taxi_row, sit.taxi_col};

  StepOutcome out;
  out.reward = -1.0;
  switch (index(action)) {
    case kSouth:
      sit.taxi_row = std::min(sit.taxi_row + 1, kSize - 1);
      break;
    case kNorth:
      sit.taxi_row = std::max(sit.taxi_row - 1, 0);
      break;
    case kEast:
      if (!wall_east_of(sit.taxi_row, sit.taxi_col)) sit.taxi_col = std::min(sit.taxi_col + 1, kSize - 1);
      break;
    case kWest:
      if (sit.taxi_col > 0 && !wall_east_of(sit.taxi_row, sit.taxi_col - 1)) sit.taxi_col -= 1;
      break;
    case kPickup:
      if (sit.passenger_loc != kInTaxi && here == kLandmarks[sit.passenger_loc]) {
        sit.passenger_loc = kInTaxi;
      } else {
        out.reward = -10.0;
        out.events = flag(Event::kIllegalAction);
      }
      break;
    case kDropoff: {
      const auto* landmark = std::find(std::begin(kLandmarks), std::end(kLandmarks), here);
      if (sit.passenger_loc == kInTaxi && here == kLandmarks[sit.destination]) {
        sit.passenger_loc = sit.destination;
        out.reward = 20.0;
        out.terminated = true;
        out.events = flag(Event::kDelivered);
      } else if (sit.passenger_loc == kInTaxi && landmark != std::end(kLandmarks)) {
        // Legal drop at another landmark: the passenger waits there.
        sit.passenger_loc = static_cast<int>(landmark - std::begin(kLandmarks));
      } else {
        out.reward = -10.0;
        out.events = flag(Event::kIllegalAction);
      }
      break;
    }
  }
  out.next_state = taxi_encode(sit);
  return out;
}

}  // namespace revrl

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "revrl/env.hpp"

namespace revrl::test_support {

/// Two states; every action flips the state, so each origin recurs two steps
/// later. Never terminates.
class TwoStateChain final : public Environment {
 public:
  std::string_view name() const override { return "two_state_chain"; }
  int num_states() const override { return 2; }
  int num_actions() const override { return 2; }
  int default_step_limit() const override { return 1000; }
  StateId reset(Rng&) const override { return StateId{0}; }
  StepOutcome step(StateId s, ActionId) const override { return {StateId{1 - index(s)}, -1.0, false, 0}; }
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("revrl_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace revrl::test_support

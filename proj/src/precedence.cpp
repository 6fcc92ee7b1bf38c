#include "revrl/precedence.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <string>

#include "revrl/io.hpp"

namespace revrl {

PhiTable::PhiTable(int num_states, int num_actions, double init_value, double ema_rate)
    : num_states_(num_states),
      num_actions_(num_actions),
      init_value_(init_value),
      ema_rate_(ema_rate),
      values_(static_cast<std::size_t>(num_states) * static_cast<std::size_t>(num_actions), init_value) {
  if (num_states <= 0 || num_actions <= 0) throw std::invalid_argument("PhiTable: empty table");
  if (!(init_value >= 0.0 && init_value <= 1.0)) throw std::invalid_argument("PhiTable: init value outside [0, 1]");
  if (!(ema_rate > 0.0 && ema_rate < 1.0)) throw std::invalid_argument("PhiTable: ema rate outside (0, 1)");
}

std::size_t PhiTable::offset(StateId s, ActionId a) const {
  if (index(s) < 0 || index(s) >= num_states_ || index(a) < 0 || index(a) >= num_actions_) {
    throw std::out_of_range("PhiTable: index (" + std::to_string(index(s)) + ", " + std::to_string(index(a)) +
                            ") out of range");
  }
  return static_cast<std::size_t>(index(s)) * static_cast<std::size_t>(num_actions_) +
         static_cast<std::size_t>(index(a));
}

double PhiTable::operator()(StateId s, ActionId a) const { return values_[offset(s, a)]; }

void PhiTable::update(StateId s, ActionId a, bool returned) {
  double& v = values_[offset(s, a)];
  v = (1.0 - ema_rate_) * v + ema_rate_ * (returned ? 1.0 : 0.0);
}

void PhiTable::reset() { std::fill(values_.begin(), values_.end(), init_value_); }

void PhiTable::dump_csv(const std::filesystem::path& path) const {
  std::ofstream out = open_for_writing(path);
  out << "state,action,phi\n";
  for (int s = 0; s < num_states_; ++s) {
    for (int a = 0; a < num_actions_; ++a) {
      out << s << ',' << a << ',' << format_double((*this)(StateId{s}, ActionId{a})) << '\n';
    }
  }
}

PrecedenceBuffer::PrecedenceBuffer(std::int64_t horizon) : horizon_(horizon) {
  if (horizon < 0) throw std::invalid_argument("PrecedenceBuffer: negative horizon");
}

void PrecedenceBuffer::enqueue(StateId s, ActionId a, std::int64_t t) { records_.push_back({s, a, t + horizon_}); }

int PrecedenceBuffer::resolve_and_update(PhiTable& phi, StateId current, std::int64_t t) {
  int removed = 0;
  auto keep = records_.begin();
  for (auto it = records_.begin(); it != records_.end(); ++it) {
    if (it->origin_state == current) {
      phi.update(it->origin_state, it->origin_action, true);
    } else if (t > it->deadline) {
      phi.update(it->origin_state, it->origin_action, false);
    } else {
      *keep++ = *it;
      continue;
    }
    ++removed;
  }
  records_.erase(keep, records_.end());
  return removed;
}

}  // namespace revrl

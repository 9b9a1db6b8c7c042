#include "sola/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sola {

int count_switches(const SelectingSignal& s, int k1, int k2) {
  if (k1 < 0 || k2 >= s.size() || k1 >= k2)
    throw std::invalid_argument("count_switches: need 0 <= k1 < k2 < signal length");
  int n = 0;
  for (int k = k1 + 1; k <= k2; ++k) n += s.sigma[k] != s.sigma[k - 1];
  return n;
}

double dwell_tau(double mu_bar, double beta_bar) {
  if (mu_bar <= 1.0) throw std::invalid_argument("dwell_tau: mu_bar must exceed 1");
  if (beta_bar <= 0.0 || beta_bar >= 1.0)
    throw std::invalid_argument("dwell_tau: beta_bar must lie in (0,1)");
  return -std::log(mu_bar) / std::log(beta_bar);
}

AdmissibilityResult is_admissible(const SelectingSignal& s, const DwellParams& p) {
  if (s.size() == 0) throw std::invalid_argument("is_admissible: empty signal");
  int n = s.size();
  // prefix[k] = switches in positions 1..k, so N(k1,k2) = prefix[k2]-prefix[k1]
  std::vector<int> prefix(n, 0);
  for (int k = 1; k < n; ++k) prefix[k] = prefix[k - 1] + (s.sigma[k] != s.sigma[k - 1]);
  for (int k1 = 0; k1 < n - 1; ++k1) {
    for (int k2 = k1 + 1; k2 < n; ++k2) {
      int sw = prefix[k2] - prefix[k1];
      double bound = p.n0 + (k2 - k1) / p.tau;
      if (sw > bound) return {false, k1, k2, sw, bound};
    }
  }
  return {true, -1, -1, 0, 0.0};
}

SelectingSignal periodic_signal(const EventSchedule& schedule, int period,
                                const std::vector<int>& order) {
  if (period < 1) throw std::invalid_argument("periodic_signal: period must be >= 1");
  if (order.empty()) throw std::invalid_argument("periodic_signal: empty agent order");
  for (int id : order)
    if (std::find(schedule.agent_ids.begin(), schedule.agent_ids.end(), id) ==
        schedule.agent_ids.end())
      throw std::invalid_argument("periodic_signal: agent " + std::to_string(id) +
                                  " absent from schedule");
  SelectingSignal out;
  out.sigma.reserve(schedule.size());
  out.forced.reserve(schedule.size());
  std::size_t block = 0;
  int held = 0;
  for (const Event& e : schedule.events) {
    int owner = order[block % order.size()];
    if (e.agent == owner) {
      out.sigma.push_back(owner);
      out.forced.push_back(0);
      if (++held == period) {
        held = 0;
        ++block;
      }
    } else {
      // availability constraint: the block owner has no data here
      out.sigma.push_back(e.agent);
      out.forced.push_back(1);
    }
  }
  return out;
}

int greedy_pick(const std::vector<int>& available, const std::map<int, double>& last_perf) {
  if (available.empty()) throw std::invalid_argument("greedy_pick: no agent available");
  int best = available[0];
  double best_p = -1.0;
  for (int id : available) {
    auto it = last_perf.find(id);
    double p = it == last_perf.end() ? 0.0 : it->second;
    if (p > best_p || (p == best_p && id < best)) {
      best = id;
      best_p = p;
    }
  }
  return best;
}

}  // namespace sola

#pragma once

#include <map>
#include <vector>

#include "sola/data.hpp"

namespace sola {

// sigma maps each event (0-based position over the merged schedule) to the
// acting agent; by construction that agent has new data at the event. forced
// marks events where the periodic block owner had no data and the event's own
// agent was selected instead.
struct SelectingSignal {
  std::vector<int> sigma;
  std::vector<std::uint8_t> forced;
  int size() const { return static_cast<int>(sigma.size()); }
};

struct DwellParams {
  double n0 = 1.0;
  double tau = 1.0;
  double mu_bar = 0.0;    // informational; admissibility uses n0 and tau
  double beta_bar = 0.0;
};

// transitions between consecutive entries at positions k1+1..k2
int count_switches(const SelectingSignal& s, int k1, int k2);

double dwell_tau(double mu_bar, double beta_bar);

struct AdmissibilityResult {
  bool admissible = true;
  int k1 = -1, k2 = -1;   // first violating window, lexicographic
  int switches = 0;
  double bound = 0.0;
};

// checks N(k1,k2) <= N0 + (k2-k1)/tau over every window exactly
AdmissibilityResult is_admissible(const SelectingSignal& s, const DwellParams& p);

// Block-periodic selection: hold each agent in `order` for `period` of its own
// events, cycling. Events owned by another agent inside a block are selected as
// forced (availability constraint) and don't advance the block.
SelectingSignal periodic_signal(const EventSchedule& schedule, int period,
                                const std::vector<int>& order);

// argmax of last-known performance among currently available agents, ties to
// the lowest id; building block of the greedy selector
int greedy_pick(const std::vector<int>& available, const std::map<int, double>& last_perf);

}  // namespace sola

#pragma once

#include <functional>
#include <memory>
#include <string>

#include "sola/local.hpp"
#include "sola/metric.hpp"
#include "sola/signal.hpp"

namespace sola {

// performance-weighted blend weight; falls back to 1/2 when both performances
// are below the division guard (0/0 in the defining ratio)
double fusing_variable(double p_new, double p_prev);

struct TraceRow {
  int k = 0;
  double t = 0.0;
  int sigma = 0;
  double alpha = 0.0;
  double loss = 0.0;    // F(x(k), D^sigma(k))
  double p_new = 0.0;
  double p_prev = 0.0;  // cached handoff actually used at this event
  double param_norm = 0.0;
  std::uint8_t forced = 0;
  Parameter x;          // blended x(k); empty unless store_params
  Parameter x_plus;     // local update A(x(k-1), D); empty unless store_params
};

struct RunTrace {
  std::vector<TraceRow> rows;
  std::uint64_t seed = 0;
  int dim = 0;
  bool naive = false;
  bool stored_params = false;
};

struct RunOutcome {
  RunTrace trace;
  bool diverged = false;
  int failed_k = -1;
  std::string message;
};

// message an agent hands to the next selected agent
struct Handoff {
  Parameter x;
  double p = 0.0;
};
Handoff handoff(const Handoff& state);

inline constexpr int kStoreParamsMaxDim = 4096;

struct Scenario {
  EventSchedule schedule;
  std::vector<LocalAlgorithm> agents;          // one entry per agent id
  std::shared_ptr<Problem> problem;
  Metric metric;
  SelectingSignal signal;                      // ignored in greedy mode
  bool greedy = false;
  bool naive = false;                          // alpha forced to 1
  Parameter x0;                                // empty -> zero vector
  double divergence_threshold = 1e12;
  int store_params = -1;                       // -1 auto: dim <= kStoreParamsMaxDim
  std::uint64_t seed = 0;

  // streaming consumer called after each event with the blended parameter,
  // available even when the trace does not store parameters
  std::function<void(const TraceRow&, const Parameter&)> observer;

  std::map<int, Dataset> datasets;             // filled during the run
  LocalAlgorithm& agent(int id);
};

// The fusion loop: per event, ingest the batch, apply the selected agent's
// local algorithm, blend by the fusing variable, hand off performance.
RunOutcome run(Scenario& s);

// trace.csv schema: k,t,sigma,alpha,loss,p_new,p_prev,param_norm,err_to_opt,forced
void write_trace_csv(const RunTrace& trace, const std::string& path,
                     const std::vector<double>* err_to_opt = nullptr);

std::string format_g17(double v);

}  // namespace sola

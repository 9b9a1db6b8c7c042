#pragma once

#include <functional>

#include "sola/runner.hpp"

namespace sola {

struct BatchOptimum {
  Parameter x;
  bool regularized = false;  // ridge fallback used on a rank-deficient system
  bool approximate = false;  // budgeted iterative solve, not a closed form
};

struct BatchOptOptions {
  int budget_epochs = 200;   // full-batch steps when no closed form exists
  double budget_eta = 0.5;
};

// minimizer of F(., all_data): closed form when the problem has one, otherwise
// a budgeted full-batch descent flagged approximate
BatchOptimum batch_optimum(const Dataset& all_data, const Problem& problem,
                           const BatchOptOptions& opts = {});

struct RegretReport {
  std::vector<double> r;        // R(K), K = 1..T
  std::vector<double> r_over_k;
  std::vector<double> f_x;      // F(x(k), D(k))
  std::vector<double> f_star;   // F(x*, D(k))
  Parameter x_star;
  // behavior of R(K)/K over the final half of the horizon
  double final_half_slope = 0.0;
  bool final_half_decreased = false;
};

// Cumulative loss gap against x* with D(k) = the selected agent's dataset at k,
// the loss the algorithm actually faced. Replays the schedule to rebuild D(k).
RegretReport regret(const RunTrace& trace, const EventSchedule& schedule,
                    const Parameter& x_star, const Problem& problem);

struct StabilityReport {
  std::vector<double> eps;      // |loss(k) - loss(k-1)|, k >= 2
  double log_tail_slope = 0.0;  // least-squares slope of log(eps) past the burn-in
  double tail_fraction = 0.75;  // fitted tail: last 75% of the series
};

StabilityReport stability_series(const RunTrace& trace, double tail_fraction = 0.75);

// squared metric distance induced by the algorithm's linearization: |J(x) d|^2
double v_distance(LocalAlgorithm& alg, const Parameter& x, const Eigen::VectorXd& delta,
                  const Dataset& d, const Problem& problem);

using DatasetSampler = std::function<Dataset(Rng&)>;

struct BetaEstimate {
  double beta = 0.0;
  bool contracting = true;  // false when the sampled sup exceeded 1
  int samples = 0;
};

// empirical one-step contraction factor: sup over sampled (x, d) of the largest
// V-ratio across directions (exact top eigenvalue of J'J per sample)
BetaEstimate estimate_beta(LocalAlgorithm& alg, const Problem& problem,
                           const DatasetSampler& sampler, int sample_count, Rng& rng,
                           double radius = 10.0);

struct MuEstimate {
  double mu = 1.0;
  int samples = 0;
};

// sup of V_i/V_j over sampled points, floored at 1
MuEstimate estimate_mu(LocalAlgorithm& alg_i, LocalAlgorithm& alg_j, const Problem& problem,
                       const DatasetSampler& sampler, int sample_count, Rng& rng,
                       double radius = 10.0);

struct ContractionEstimate {
  std::map<int, double> beta;                    // per agent id
  std::map<std::pair<int, int>, double> mu;      // ordered pairs
  double beta_bar = 0.0;
  double mu_bar = 1.0;
  double gamma1 = 1.0, gamma2 = 1.0;             // Euclidean metric bounds
  int samples = 0;
  bool all_contracting = true;
};

ContractionEstimate build_contraction_estimate(std::vector<LocalAlgorithm>& agents,
                                               const Problem& problem,
                                               const DatasetSampler& sampler, int sample_count,
                                               Rng& rng, double radius = 10.0);

struct ChainReport {
  int windows_checked = 0;
  int violations = 0;
  double max_ratio = 0.0;  // observed V_end / bound, worst case
};

// Checks the switched-contraction bound V(k2) <= mu_bar^N * beta_bar^(k2-k1) * V(k1)
// on a naive-mode trace by propagating sampled directions through the recorded
// trajectory's Jacobians. `fresh` is an unconsumed scenario matching the trace's
// run; it is replayed to rebuild per-event datasets and shard states.
ChainReport certify_switching_chain(const RunTrace& trace, Scenario& fresh,
                                    const ContractionEstimate& est, int n_windows, int n_dirs,
                                    Rng& rng);

// regret.csv schema: K,R,R_over_K,stability_eps,cum_stability
void write_regret_csv(const std::string& path, const RegretReport& rep,
                      const StabilityReport& stab);

// contraction.csv schema: name,estimate,samples,violations
void write_contraction_csv(const std::string& path, const ContractionEstimate& est,
                           const ChainReport* chain = nullptr);

}  // namespace sola

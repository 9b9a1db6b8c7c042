#pragma once

#include <memory>
#include <vector>

#include "sola/problem.hpp"
#include "sola/rng.hpp"

namespace sola {

// Gradient step with an optional multiplicative perturbation: the injected noise
// has covariance (noise_scale * |grad|)^2 * I, so it vanishes as the iterate
// converges. noise_scale 0 draws nothing and gives exact gradient descent.
struct PerturbedGDModel {
  double eta = 0.1;
  double noise_scale = 0.0;
  Rng noise_rng{0};
};

// Per-sub-unit parameters and data shards for the decentralized variants.
// Shards partition the owning agent's data.
struct SubUnitState {
  std::vector<Parameter> params;
  std::vector<Dataset> shards;
  int count() const { return static_cast<int>(params.size()); }
};

enum class AlgorithmKind { GD, SGD, DSGD, FedAvg };

// how arriving samples are routed to sub-unit shards
enum class ShardRouting { RoundRobin, ByLabel };

struct LocalAlgorithm {
  AlgorithmKind kind = AlgorithmKind::GD;
  int agent_id = 0;
  PerturbedGDModel model;

  int sgd_batch = 1;          // SGD
  Rng batch_rng{0};           // SGD / DSGD mini-batching

  SubUnitState subunits;      // DSGD / FedAvg
  int local_steps = 1;        // FedAvg
  int dsgd_batch = 0;         // 0 = full shard
  ShardRouting routing = ShardRouting::RoundRobin;
  int labels_per_shard = 0;   // ByLabel routing
  int rr_cursor = 0;
  std::vector<int> shard_caps;  // optional per-shard size limits
};

Parameter gd_step(PerturbedGDModel& m, const Parameter& x, const Dataset& d,
                  const Problem& problem);

Parameter sgd_step(PerturbedGDModel& m, const Parameter& x, const Dataset& d,
                   const Problem& problem, int batch_size, Rng& rng);

// One decentralized round: local step per sub-unit on its shard, then uniform
// (complete-graph) mixing. Returns the mixed state's average parameter.
std::pair<SubUnitState, Parameter> dsgd_round(SubUnitState state, double eta,
                                              const Problem& problem, int batch_size = 0,
                                              Rng* batch_rng = nullptr);

// One federated round: each sub-unit runs local full-batch steps from its
// current parameter, then all are reset to the shard-size-weighted average.
std::pair<SubUnitState, Parameter> fedavg_round(SubUnitState state, double eta, int local_steps,
                                                const Problem& problem);

// The one-event update map A(x, D). Decentralized variants re-seat every
// sub-unit at x first, so the map is a pure function of (x, shards).
Parameter apply(LocalAlgorithm& alg, const Parameter& x, const Dataset& d,
                const Problem& problem);

// route a new batch into sub-unit shards (round-robin or by class label)
void route_to_shards(LocalAlgorithm& alg, const Batch& batch);

// Jacobian of the noise-free update map at x: analytic I - eta*H when the
// problem exposes a Hessian (GD/SGD), else central finite differences.
Eigen::MatrixXd jacobian(LocalAlgorithm& alg, const Parameter& x, const Dataset& d,
                         const Problem& problem);

inline constexpr int kFiniteDiffMaxDim = 512;

}  // namespace sola

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sola/local.hpp"
#include "sola/metric.hpp"
#include "solatools/toml.hpp"

namespace solatools {

struct AgentConfig {
  int id = 0;
  sola::AlgorithmKind algorithm = sola::AlgorithmKind::GD;
  double eta = 0.05;
  double noise_scale = 0.0;  // gradient perturbation (relative scale)
  double noise_var = 1.0;    // regression target noise variance
  int subunits = 0;          // dsgd / fedavg
  int local_steps = 1;       // fedavg
  int batch = 0;             // sgd minibatch / dsgd per-unit minibatch (0 = full)
};

struct SignalConfig {
  std::string kind = "periodic";  // periodic | greedy | explicit
  int period = 10;                // events per agent block (periodic)
  std::vector<int> order;         // periodic rotation; defaults to listed agents
  std::vector<int> sequence;      // explicit per-event owner/selection
};

struct LinRegConfig {
  int dim = 3;
  double feature_var = 0.5;
  int batch_size = 10;  // samples per event
};

struct QuadraticConfig {
  std::vector<double> diag;  // curvature spectrum
  double offset = 0.0;
};

struct MnistConfig {
  std::string images_path, labels_path;
  std::string test_images_path, test_labels_path;  // optional pair
  int hidden = 128;
  int labels_per_shard = 2;
  int shard_cap = 128;
  double shard_noise_var = 0.5;
  int gd_batch = 256;  // clean stream batch per event
  int eval_every = 1;  // test-set cadence for eval.csv
};

struct AnalysisConfig {
  bool regret = false;
  bool stability = false;
  bool contraction = false;
  bool chain = false;
  int estimator_samples = 256;
  int chain_windows = 20;
  int chain_dirs = 5;
};

struct ExperimentConfig {
  std::string kind;  // linreg | mnist | custom
  std::uint64_t seed = 0;
  int events = 200;
  bool naive = false;
  sola::MetricKind metric = sola::MetricKind::InverseLoss;
  int store_params = -1;  // -1 auto
  double divergence_threshold = 1e12;
  double n0 = 1.0;           // admissibility chatter slack
  std::vector<double> x0;    // start point (linreg/custom); empty = zero vector

  SignalConfig signal;
  std::vector<AgentConfig> agents;
  LinRegConfig linreg;
  QuadraticConfig quadratic;
  MnistConfig mnist;
  AnalysisConfig analysis;
};

// Strict parse: unknown keys, type mismatches, and missing required keys are
// ConfigErrors naming the key and its location. Relative dataset paths
// resolve against the config file's directory.
ExperimentConfig parse_config(const std::string& path);

// validation core, exposed for tests; base_dir resolves relative paths
ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& origin,
                                  const std::string& base_dir = "");

}  // namespace solatools

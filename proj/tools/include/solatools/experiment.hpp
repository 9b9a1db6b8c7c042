#pragma once

#include <memory>
#include <string>

#include "sola/mlp.hpp"
#include "sola/runner.hpp"
#include "solatools/config.hpp"

namespace solatools {

struct BuiltExperiment {
  sola::Scenario scenario;
  Eigen::VectorXd x_ref;                  // known reference point for err curves; empty if none
  sola::Dataset test_set;                 // held-out mnist data; empty if none
  std::shared_ptr<sola::MlpProblem> mlp;  // set for mnist
};

// Assembles streams, schedule, signal, agents, and problem from a validated
// config. Deterministic: all randomness derives from cfg.seed.
BuiltExperiment build_experiment(const ExperimentConfig& cfg);

struct RunOptions {
  std::string out_dir = "./out";
  bool quiet = false;
};

// Runs the experiment and writes trace.csv, summary.txt, and — as applicable —
// err.csv, eval.csv, regret.csv, contraction.csv into out_dir.
// Returns the process exit code: 0 ok, 1 divergence/runtime failure.
int run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

}  // namespace solatools

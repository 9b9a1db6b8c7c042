#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sola/data.hpp"
#include "sola/rng.hpp"

namespace sola {

// Builds per-sub-unit data pools by carving a labeled image set into
// contiguous label ranges (shard s owns labels [s*labels_per_shard,
// (s+1)*labels_per_shard)). Each shard uniformly samples up to `cap`
// of its images and corrupts pixels with additive gaussian noise,
// clamped back into [0,1].
struct ShardSpec {
  int subunits = 5;
  int labels_per_shard = 2;
  int classes = 10;
  int cap = 128;           // images kept per shard (0 = keep all)
  double noise_var = 0.5;  // variance of the pixel noise
};

std::vector<Batch> make_shards(const Eigen::MatrixXd& images, const Eigen::VectorXi& labels,
                               const ShardSpec& spec, Rng& rng);

}  // namespace sola

#include "sola/shards.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sola {

std::vector<Batch> make_shards(const Eigen::MatrixXd& images, const Eigen::VectorXi& labels,
                               const ShardSpec& spec, Rng& rng) {
  if (images.rows() != labels.size())
    throw std::invalid_argument("make_shards: image/label count mismatch");
  if (spec.subunits < 1 || spec.labels_per_shard < 1)
    throw std::invalid_argument("make_shards: bad shard shape");
  if (spec.subunits * spec.labels_per_shard != spec.classes)
    throw std::invalid_argument("make_shards: shards must tile the label set");

  double sd = std::sqrt(std::max(0.0, spec.noise_var));
  std::vector<Batch> shards(spec.subunits);
  for (int s = 0; s < spec.subunits; ++s) {
    int lo = s * spec.labels_per_shard;
    int hi = lo + spec.labels_per_shard;
    std::vector<int> pool;
    for (Eigen::Index i = 0; i < labels.size(); ++i)
      if (labels[i] >= lo && labels[i] < hi) pool.push_back(static_cast<int>(i));

    int keep = spec.cap > 0 ? std::min<int>(spec.cap, static_cast<int>(pool.size()))
                            : static_cast<int>(pool.size());
    std::vector<int> picks = rng.sample_indices(static_cast<int>(pool.size()), keep);

    Batch& out = shards[s];
    out.reserve(keep);
    for (int p : picks) {
      int row = pool[p];
      Sample smp;
      smp.features = images.row(row).transpose();
      if (sd > 0)
        smp.features = (smp.features + sd * rng.gaussian_vec(images.cols()))
                           .cwiseMax(0.0)
                           .cwiseMin(1.0);
      smp.target = Eigen::VectorXd::Constant(1, static_cast<double>(labels[row]));
      out.push_back(std::move(smp));
    }
  }
  return shards;
}

}  // namespace sola

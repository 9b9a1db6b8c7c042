#pragma once

#include <cstdint>
#include <random>
#include <Eigen/Core>

namespace sola {

// Fixed per-component tags so toggling one randomness consumer (noise, batching, ...)
// never shifts the draws of another.
enum class SeedTag : std::uint64_t {
  data = 1,
  noise = 2,
  batching = 3,
  signal = 4,
  init = 5,
  analysis = 6,
};

std::uint64_t splitmix64(std::uint64_t& state);

// master seed + component tag (+ per-agent index) -> independent sub-seed
std::uint64_t derive_seed(std::uint64_t master, SeedTag tag, std::uint64_t index = 0);

// mt19937_64 with a hand-rolled Box-Muller gaussian. std::normal_distribution is
// implementation-defined, which would break byte-identical reruns across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double gaussian();

  Eigen::VectorXd gaussian_vec(Eigen::Index n);
  Eigen::MatrixXd gaussian_mat(Eigen::Index rows, Eigen::Index cols);

  // uniform index in [0, n)
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

  // first k of a seeded shuffle of 0..n-1 (sampling without replacement)
  std::vector<int> sample_indices(int n, int k);

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sola

#include "sola/rng.hpp"

#include <cmath>
#include <numbers>

namespace sola {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, SeedTag tag, std::uint64_t index) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s ^= static_cast<std::uint64_t>(tag) * 0xd1342543de82ef95ULL;
  std::uint64_t b = splitmix64(s);
  s ^= (index + 1) * 0xaf251af3b0f025b5ULL;
  std::uint64_t c = splitmix64(s);
  return a ^ (b + 0x9e3779b97f4a7c15ULL) ^ (c << 1);
}

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // 1 - uniform() keeps u1 in (0, 1]
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

Eigen::VectorXd Rng::gaussian_vec(Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = gaussian();
  return v;
}

Eigen::MatrixXd Rng::gaussian_mat(Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  // row-major fill order so a sample-per-row matrix matches per-sample generation
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = gaussian();
  return m;
}

std::vector<int> Rng::sample_indices(int n, int k) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    std::size_t j = i + index(static_cast<std::size_t>(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace sola

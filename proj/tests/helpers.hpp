#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "sola/data.hpp"
#include "sola/linreg.hpp"
#include "sola/local.hpp"
#include "sola/problem.hpp"
#include "sola/rng.hpp"

namespace testutil {

inline sola::Sample sample(std::initializer_list<double> f, double target) {
  sola::Sample s;
  s.features = Eigen::VectorXd(static_cast<Eigen::Index>(f.size()));
  Eigen::Index i = 0;
  for (double v : f) s.features[i++] = v;
  s.target = Eigen::VectorXd::Constant(1, target);
  return s;
}

inline sola::Sample placeholder_sample() { return sample({0.0}, 0.0); }

inline sola::Dataset placeholder_dataset() {
  sola::Dataset d;
  d.append(placeholder_sample());
  return d;
}

// x ~ random point, targets x_true.b + noise; the workhorse regression fixture
inline sola::Dataset random_linreg_data(int m, int p, sola::Rng& rng, double noise_sd = 1.0,
                                        double feature_sd = 0.7071067811865476) {
  Eigen::VectorXd x_true = rng.gaussian_vec(p);
  sola::Dataset d;
  for (int i = 0; i < m; ++i) {
    sola::Sample s;
    s.features = feature_sd * rng.gaussian_vec(p);
    s.target = Eigen::VectorXd::Constant(1, x_true.dot(s.features) + noise_sd * rng.gaussian());
    d.append(s);
  }
  return d;
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// central finite differences of the noise-free update map, the independent
// oracle the analytic jacobian is held against
inline Eigen::MatrixXd fd_jacobian(const std::function<sola::Parameter(const sola::Parameter&)>& map,
                                   const sola::Parameter& x) {
  int n = static_cast<int>(x.size());
  double h = 1e-5 * (1.0 + x.cwiseAbs().maxCoeff());
  Eigen::MatrixXd j(n, n);
  sola::Parameter xp = x, xm = x;
  for (int c = 0; c < n; ++c) {
    xp[c] = x[c] + h;
    xm[c] = x[c] - h;
    j.col(c) = (map(xp) - map(xm)) / (2.0 * h);
    xp[c] = x[c];
    xm[c] = x[c];
  }
  return j;
}

inline bool exact_eq(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

template <class F>
inline std::string thrown_message(F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

inline bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

// fresh scratch directory under the build tree; reused names are wiped first
inline std::string scratch_dir(const std::string& name) {
  namespace fs = std::filesystem;
  fs::path p = fs::path("scratch") / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

}  // namespace testutil

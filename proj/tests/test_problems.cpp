#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "helpers.hpp"
#include "sola/linreg.hpp"

using namespace sola;
using testutil::sample;
using testutil::vec;

TEST_CASE("quadratic loss, gradient, hessian, and modulus agree") {
  QuadraticProblem p = QuadraticProblem::diagonal(vec({2, 4}));
  Dataset d = testutil::placeholder_dataset();
  Parameter x = vec({1, 1});
  CHECK(p.loss(x, d) == doctest::Approx(3.0));          // 0.5*(2 + 4)
  CHECK(testutil::exact_eq(p.grad(x, d), vec({2, 4})));
  CHECK(testutil::exact_eq(p.hessian(x, d), Eigen::MatrixXd(vec({2, 4}).asDiagonal())));
  CHECK(p.convexity_modulus() == doctest::Approx(2.0));
  CHECK(p.has_hessian());
  CHECK(p.dim() == 2);
}

TEST_CASE("regression loss on one hand-checked sample") {
  LinRegProblem p(3);
  Dataset d;
  d.append(sample({1, 0, 0}, 2.0));
  Parameter x = Parameter::Zero(3);
  CHECK(p.loss(x, d) == doctest::Approx(4.0));
  CHECK(p.grad(x, d).isApprox(vec({-4, 0, 0}), 1e-14));
}

TEST_CASE("regression loss vanishes at the generating parameter") {
  Rng rng(3);
  Eigen::VectorXd x_true = rng.gaussian_vec(3);
  LinRegProblem p(3);
  Dataset d;
  for (int i = 0; i < 20; ++i) {
    Sample s;
    s.features = rng.gaussian_vec(3);
    s.target = Eigen::VectorXd::Constant(1, x_true.dot(s.features));
    d.append(s);
  }
  CHECK(p.loss(x_true, d) <= 1e-24);
  CHECK(p.grad(x_true, d).norm() <= 1e-12);
}

TEST_CASE("regression gradient matches central differences") {
  Rng rng(17);
  LinRegProblem p(4);
  for (int rep = 0; rep < 10; ++rep) {
    Dataset d = testutil::random_linreg_data(15, 4, rng);
    Parameter x = rng.gaussian_vec(4);
    Parameter g = p.grad(x, d);
    double h = 1e-6 * (1.0 + x.cwiseAbs().maxCoeff());
    for (int c = 0; c < 4; ++c) {
      Parameter xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      double fd = (p.loss(xp, d) - p.loss(xm, d)) / (2 * h);
      CHECK(g[c] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("regression hessian is positive definite once samples cover the space") {
  Rng rng(29);
  LinRegProblem p(3);
  for (int rep = 0; rep < 20; ++rep) {
    Dataset d = testutil::random_linreg_data(3 + static_cast<int>(rng.index(30)), 3, rng);
    Eigen::MatrixXd h = p.hessian(Parameter::Zero(3), d);
    CHECK(h.isApprox(h.transpose(), 1e-12));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    CHECK(es.eigenvalues().minCoeff() >= p.convexity_modulus());
  }
}

TEST_CASE("noiseless streams satisfy the generating relation exactly") {
  Rng rng(41);
  LinRegStreamSpec spec;
  spec.x_true = rng.gaussian_vec(3);
  spec.noise_var = 0.0;
  spec.batch_size = 5;
  Rng stream_rng(42);
  AgentStream s = gen_linreg_stream(spec, {1, 2, 3}, stream_rng);
  REQUIRE(s.size() == 3);
  for (const auto& [t, batch] : s) {
    REQUIRE(batch.size() == 5);
    for (const Sample& smp : batch)
      CHECK(smp.target[0] == doctest::Approx(spec.x_true.dot(smp.features)).epsilon(1e-14));
  }
}

TEST_CASE("stream noise variance lands where it was dialed") {
  Rng rng(43);
  LinRegStreamSpec spec;
  spec.x_true = rng.gaussian_vec(3);
  spec.noise_var = 30.0;
  spec.batch_size = 100;
  std::vector<double> times(1000);
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = static_cast<double>(i + 1);
  Rng stream_rng(44);
  AgentStream s = gen_linreg_stream(spec, times, stream_rng);  // 1e5 residual draws
  double sum = 0, sq = 0;
  int n = 0;
  for (const auto& [t, batch] : s)
    for (const Sample& smp : batch) {
      double r = smp.target[0] - spec.x_true.dot(smp.features);
      sum += r;
      sq += r * r;
      ++n;
    }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(var >= 29.0);
  CHECK(var <= 31.0);
}

TEST_CASE("stream generation is seed deterministic") {
  LinRegStreamSpec spec;
  spec.x_true = vec({1, -2, 0.5});
  Rng a(7), b(7);
  AgentStream sa = gen_linreg_stream(spec, {1, 2}, a);
  AgentStream sb = gen_linreg_stream(spec, {1, 2}, b);
  REQUIRE(sa.size() == sb.size());
  for (std::size_t i = 0; i < sa.size(); ++i) {
    REQUIRE(sa[i].second.size() == sb[i].second.size());
    for (std::size_t j = 0; j < sa[i].second.size(); ++j) {
      CHECK(sa[i].second[j].features == sb[i].second[j].features);
      CHECK(sa[i].second[j].target == sb[i].second[j].target);
    }
  }
}

TEST_CASE("closed-form least squares recovers interpolable data") {
  Rng rng(53);
  Eigen::VectorXd x_true = rng.gaussian_vec(3);
  LinRegProblem p(3);
  Dataset d;
  for (int i = 0; i < 50; ++i) {
    Sample s;
    s.features = rng.gaussian_vec(3);
    s.target = Eigen::VectorXd::Constant(1, x_true.dot(s.features));
    d.append(s);
  }
  bool regularized = true;
  auto x = p.closed_form_optimum(d, &regularized);
  REQUIRE(x.has_value());
  CHECK(!regularized);
  CHECK((*x - x_true).norm() < 1e-10);
}

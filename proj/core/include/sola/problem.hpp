#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "sola/data.hpp"

namespace sola {

using Parameter = Eigen::VectorXd;

// A loss F(x, D) with gradient, optional Hessian, and a declared convexity
// modulus. Losses are means over samples so values stay comparable across
// datasets of different sizes.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual int dim() const = 0;
  virtual double loss(const Parameter& x, const Dataset& d) const = 0;
  virtual Parameter grad(const Parameter& x, const Dataset& d) const = 0;

  virtual bool has_hessian() const { return false; }
  virtual Eigen::MatrixXd hessian(const Parameter&, const Dataset&) const {
    throw std::logic_error("problem has no hessian");
  }

  // declared lower bound on the Hessian spectrum (checkable on quadratics)
  virtual double convexity_modulus() const { return 0.0; }

  // closed-form minimizer over a pooled dataset, when one exists
  virtual std::optional<Parameter> closed_form_optimum(const Dataset&, bool* regularized) const {
    (void)regularized;
    return std::nullopt;
  }
};

// F(x) = 1/2 (x-c)' Q (x-c) + offset, independent of the dataset. Test/oracle problem.
class QuadraticProblem : public Problem {
 public:
  QuadraticProblem(Eigen::MatrixXd q, Parameter c, double offset = 0.0)
      : q_(std::move(q)), c_(std::move(c)), offset_(offset) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q_);
    ell_ = es.eigenvalues().minCoeff();
  }
  static QuadraticProblem diagonal(const Eigen::VectorXd& diag, double offset = 0.0) {
    return QuadraticProblem(Eigen::MatrixXd(diag.asDiagonal()),
                            Parameter::Zero(diag.size()), offset);
  }

  int dim() const override { return static_cast<int>(c_.size()); }
  double loss(const Parameter& x, const Dataset&) const override {
    return 0.5 * (x - c_).dot(q_ * (x - c_)) + offset_;
  }
  Parameter grad(const Parameter& x, const Dataset&) const override { return q_ * (x - c_); }
  bool has_hessian() const override { return true; }
  Eigen::MatrixXd hessian(const Parameter&, const Dataset&) const override { return q_; }
  double convexity_modulus() const override { return ell_; }

 private:
  Eigen::MatrixXd q_;
  Parameter c_;
  double offset_;
  double ell_;
};

}  // namespace sola

#pragma once

#include "sola/problem.hpp"
#include "sola/rng.hpp"

namespace sola {

// mean squared error over the dataset: F(x, D) = (1/m) * sum (b_j' x - a_j)^2
class LinRegProblem : public Problem {
 public:
  explicit LinRegProblem(int p, double declared_modulus = 1e-6)
      : p_(p), ell_(declared_modulus) {}

  int dim() const override { return p_; }
  double loss(const Parameter& x, const Dataset& d) const override;
  Parameter grad(const Parameter& x, const Dataset& d) const override;
  bool has_hessian() const override { return true; }
  Eigen::MatrixXd hessian(const Parameter&, const Dataset& d) const override;
  double convexity_modulus() const override { return ell_; }
  std::optional<Parameter> closed_form_optimum(const Dataset& d,
                                               bool* regularized) const override;

 private:
  int p_;
  double ell_;
};

struct LinRegStreamSpec {
  Parameter x_true;          // targets are x_true . features + noise
  double noise_var = 1.0;
  double feature_var = 0.5;
  int batch_size = 10;
};

// one agent's stream: a batch per wall time in `times`
AgentStream gen_linreg_stream(const LinRegStreamSpec& spec, const std::vector<double>& times,
                              Rng& rng);

}  // namespace sola

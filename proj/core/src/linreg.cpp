#include "sola/linreg.hpp"

#include <cmath>
#include <Eigen/Cholesky>

namespace sola {

double LinRegProblem::loss(const Parameter& x, const Dataset& d) const {
  if (d.empty()) throw std::invalid_argument("linreg loss: empty dataset");
  return (d.features() * x - d.targets().col(0)).squaredNorm() / d.size();
}

Parameter LinRegProblem::grad(const Parameter& x, const Dataset& d) const {
  if (d.empty()) throw std::invalid_argument("linreg grad: empty dataset");
  return 2.0 / d.size() * (d.features().transpose() * (d.features() * x - d.targets().col(0)));
}

Eigen::MatrixXd LinRegProblem::hessian(const Parameter&, const Dataset& d) const {
  return 2.0 / d.size() * (d.features().transpose() * d.features());
}

std::optional<Parameter> LinRegProblem::closed_form_optimum(const Dataset& d,
                                                            bool* regularized) const {
  Eigen::MatrixXd gram = d.features().transpose() * d.features();
  Eigen::VectorXd rhs = d.features().transpose() * d.targets().col(0);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  bool ridge = ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
               ldlt.vectorD().minCoeff() <= 0;
  if (!ridge) {
    Parameter x = ldlt.solve(rhs);
    // scale-relative residual check catches near-singular systems LDLT accepted
    double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    if ((gram * x - rhs).cwiseAbs().maxCoeff() > 1e-8 * scale) ridge = true;
    if (!ridge) {
      if (regularized) *regularized = false;
      return x;
    }
  }
  Eigen::MatrixXd reg = gram + 1e-9 * Eigen::MatrixXd::Identity(p_, p_);
  if (regularized) *regularized = true;
  return Parameter(reg.ldlt().solve(rhs));
}

AgentStream gen_linreg_stream(const LinRegStreamSpec& spec, const std::vector<double>& times,
                              Rng& rng) {
  AgentStream out;
  out.reserve(times.size());
  int p = static_cast<int>(spec.x_true.size());
  double sd = std::sqrt(spec.noise_var);
  double fsd = std::sqrt(spec.feature_var);
  for (double t : times) {
    Batch b;
    b.reserve(spec.batch_size);
    for (int i = 0; i < spec.batch_size; ++i) {
      Sample s;
      s.features = fsd * rng.gaussian_vec(p);
      s.target = Eigen::VectorXd::Constant(1, spec.x_true.dot(s.features) + sd * rng.gaussian());
      b.push_back(std::move(s));
    }
    out.emplace_back(t, std::move(b));
  }
  return out;
}

}  // namespace sola

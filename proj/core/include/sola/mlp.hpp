#pragma once

#include "sola/problem.hpp"
#include "sola/rng.hpp"

namespace sola {

// One-hidden-layer ReLU classifier trained with mean cross-entropy.
// Parameters live in a single flat vector laid out [W1 | b1 | W2 | b2],
// where W1 is inputs x hidden and W2 is hidden x classes (column-major
// blocks via Eigen::Map). Targets are class labels stored as a 1-dim
// vector per sample.
class MlpProblem : public Problem {
 public:
  MlpProblem(int inputs, int hidden, int classes);

  int dim() const override { return n_; }
  double loss(const Parameter& x, const Dataset& data) const override;
  Parameter grad(const Parameter& x, const Dataset& data) const override;

  // fraction of samples whose argmax score matches the label;
  // ties resolve to the lowest class index
  double accuracy(const Parameter& x, const Dataset& data) const;

  // class probabilities for a single input
  Eigen::VectorXd probabilities(const Parameter& x, const Eigen::VectorXd& input) const;

  // scaled gaussian init (zero biases); zero init cannot break symmetry
  Parameter he_init(Rng& rng) const;

  int inputs() const { return in_; }
  int hidden() const { return hid_; }
  int classes() const { return out_; }

 private:
  int in_, hid_, out_, n_;
};

}  // namespace sola

#include "sola/metric.hpp"

#include <cmath>
#include <stdexcept>

namespace sola {

MetricValue evaluate_metric_with_loss(const Metric& m, const Parameter& x, const Dataset& d,
                                      const Problem& problem) {
  if (d.empty()) throw std::invalid_argument("metric: empty dataset");
  double f = problem.loss(x, d);
  switch (m.kind) {
    case MetricKind::InverseLoss:
      return {1.0 / (f + kDivGuard), f};
    case MetricKind::InverseErrorNorm:
      // root-mean-square prediction error; exact for the mean squared-error loss
      return {1.0 / (std::sqrt(f) + kDivGuard), f};
  }
  throw std::logic_error("metric: unknown kind");
}

double evaluate_metric(const Metric& m, const Parameter& x, const Dataset& d,
                       const Problem& problem) {
  return evaluate_metric_with_loss(m, x, d, problem).p;
}

}  // namespace sola

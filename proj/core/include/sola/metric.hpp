#pragma once

#include "sola/problem.hpp"

namespace sola {

// guard added to inverse-metric denominators; P is an inverse and zero loss is
// otherwise a division by zero
inline constexpr double kDivGuard = 1e-12;

enum class MetricKind { InverseLoss, InverseErrorNorm };

struct Metric {
  MetricKind kind = MetricKind::InverseLoss;
};

double evaluate_metric(const Metric& m, const Parameter& x, const Dataset& d,
                       const Problem& problem);

// same evaluation, with the loss reported too so callers next to the trace
// recorder don't pay for it twice
struct MetricValue {
  double p;
  double loss;
};
MetricValue evaluate_metric_with_loss(const Metric& m, const Parameter& x, const Dataset& d,
                                      const Problem& problem);

}  // namespace sola

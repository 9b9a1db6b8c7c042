#include "sola/local.hpp"

#include <stdexcept>

namespace sola {

namespace {

Parameter checked(Parameter x, const char* what) {
  if (!x.allFinite()) throw std::runtime_error(what);
  return x;
}

Parameter noise(PerturbedGDModel& m, const Parameter& g) {
  if (m.noise_scale == 0.0) return Parameter::Zero(g.size());
  return m.noise_scale * g.norm() * m.noise_rng.gaussian_vec(g.size());
}

Parameter full_batch_step(double eta, const Parameter& x, const Dataset& d,
                          const Problem& problem) {
  return x - eta * problem.grad(x, d);
}

// the deterministic map each variant realizes once noise and mini-batching are
// stripped; this is what the Jacobian differentiates
Parameter apply_noisefree(const LocalAlgorithm& alg, const Parameter& x, const Dataset& d,
                          const Problem& problem) {
  switch (alg.kind) {
    case AlgorithmKind::GD:
    case AlgorithmKind::SGD:
      return full_batch_step(alg.model.eta, x, d, problem);
    case AlgorithmKind::DSGD: {
      Parameter avg = Parameter::Zero(x.size());
      for (const auto& shard : alg.subunits.shards) {
        if (shard.empty()) throw std::runtime_error("sub-unit has no data");
        avg += full_batch_step(alg.model.eta, x, shard, problem);
      }
      return avg / alg.subunits.count();
    }
    case AlgorithmKind::FedAvg: {
      Parameter avg = Parameter::Zero(x.size());
      double total = 0;
      for (const auto& shard : alg.subunits.shards) {
        if (shard.empty()) throw std::runtime_error("sub-unit has no data");
        Parameter p = x;
        for (int s = 0; s < alg.local_steps; ++s)
          p = full_batch_step(alg.model.eta, p, shard, problem);
        avg += shard.size() * p;
        total += shard.size();
      }
      return avg / total;
    }
  }
  throw std::logic_error("unknown algorithm kind");
}

}  // namespace

Parameter gd_step(PerturbedGDModel& m, const Parameter& x, const Dataset& d,
                  const Problem& problem) {
  if (d.empty()) throw std::invalid_argument("gd_step: empty dataset");
  Parameter g = problem.grad(x, d);
  if (!g.allFinite()) throw std::runtime_error("diverged");
  return checked(x - m.eta * (g + noise(m, g)), "diverged");
}

Parameter sgd_step(PerturbedGDModel& m, const Parameter& x, const Dataset& d,
                   const Problem& problem, int batch_size, Rng& rng) {
  if (d.empty()) throw std::invalid_argument("sgd_step: empty dataset");
  if (batch_size < 1 || batch_size > d.size())
    throw std::invalid_argument("sgd_step: batch size out of range");
  Dataset mini = d.rows(rng.sample_indices(d.size(), batch_size));
  Parameter g = problem.grad(x, mini);
  if (!g.allFinite()) throw std::runtime_error("diverged");
  return checked(x - m.eta * (g + noise(m, g)), "diverged");
}

std::pair<SubUnitState, Parameter> dsgd_round(SubUnitState state, double eta,
                                              const Problem& problem, int batch_size,
                                              Rng* batch_rng) {
  if (state.count() == 0) throw std::invalid_argument("dsgd_round: no sub-units");
  Parameter avg = Parameter::Zero(state.params[0].size());
  for (int i = 0; i < state.count(); ++i) {
    const Dataset& shard = state.shards[i];
    if (shard.empty()) throw std::runtime_error("sub-unit has no data");
    const Dataset* d = &shard;
    Dataset mini;
    if (batch_size > 0 && batch_size < shard.size()) {
      if (!batch_rng) throw std::invalid_argument("dsgd_round: mini-batching needs an rng");
      mini = shard.rows(batch_rng->sample_indices(shard.size(), batch_size));
      d = &mini;
    }
    state.params[i] = full_batch_step(eta, state.params[i], *d, problem);
    avg += state.params[i];
  }
  avg /= state.count();
  if (!avg.allFinite()) throw std::runtime_error("diverged");
  for (auto& p : state.params) p = avg;  // uniform mixing, complete graph
  return {std::move(state), std::move(avg)};
}

std::pair<SubUnitState, Parameter> fedavg_round(SubUnitState state, double eta, int local_steps,
                                                const Problem& problem) {
  if (state.count() == 0) throw std::invalid_argument("fedavg_round: no sub-units");
  if (local_steps < 1) throw std::invalid_argument("fedavg_round: local_steps must be >= 1");
  Parameter avg = Parameter::Zero(state.params[0].size());
  double total = 0;
  for (int i = 0; i < state.count(); ++i) {
    const Dataset& shard = state.shards[i];
    if (shard.empty()) throw std::runtime_error("sub-unit has no data");
    for (int s = 0; s < local_steps; ++s)
      state.params[i] = full_batch_step(eta, state.params[i], shard, problem);
    avg += shard.size() * state.params[i];
    total += shard.size();
  }
  avg /= total;
  if (!avg.allFinite()) throw std::runtime_error("diverged");
  for (auto& p : state.params) p = avg;
  return {std::move(state), std::move(avg)};
}

Parameter apply(LocalAlgorithm& alg, const Parameter& x, const Dataset& d,
                const Problem& problem) {
  switch (alg.kind) {
    case AlgorithmKind::GD:
      return gd_step(alg.model, x, d, problem);
    case AlgorithmKind::SGD:
      return sgd_step(alg.model, x, d, problem, alg.sgd_batch, alg.batch_rng);
    case AlgorithmKind::DSGD: {
      for (auto& p : alg.subunits.params) p = x;
      auto [st, avg] = dsgd_round(std::move(alg.subunits), alg.model.eta, problem,
                                  alg.dsgd_batch, &alg.batch_rng);
      alg.subunits = std::move(st);
      return avg;
    }
    case AlgorithmKind::FedAvg: {
      for (auto& p : alg.subunits.params) p = x;
      auto [st, avg] =
          fedavg_round(std::move(alg.subunits), alg.model.eta, alg.local_steps, problem);
      alg.subunits = std::move(st);
      return avg;
    }
  }
  throw std::logic_error("unknown algorithm kind");
}

void route_to_shards(LocalAlgorithm& alg, const Batch& batch) {
  int n = alg.subunits.count();
  if (n == 0) return;
  for (const auto& s : batch) {
    int target;
    if (alg.routing == ShardRouting::ByLabel) {
      if (alg.labels_per_shard < 1) throw std::logic_error("label routing needs labels_per_shard");
      target = static_cast<int>(s.target[0]) / alg.labels_per_shard;
      if (target < 0 || target >= n) throw std::invalid_argument("label outside shard range");
    } else {
      target = alg.rr_cursor;
      alg.rr_cursor = (alg.rr_cursor + 1) % n;
    }
    if (!alg.shard_caps.empty() && alg.subunits.shards[target].size() >= alg.shard_caps[target])
      continue;
    alg.subunits.shards[target].append(s);
  }
}

Eigen::MatrixXd jacobian(LocalAlgorithm& alg, const Parameter& x, const Dataset& d,
                         const Problem& problem) {
  int n = static_cast<int>(x.size());
  bool gd_form = alg.kind == AlgorithmKind::GD || alg.kind == AlgorithmKind::SGD;
  if (gd_form && problem.has_hessian()) {
    Eigen::MatrixXd j =
        Eigen::MatrixXd::Identity(n, n) - alg.model.eta * problem.hessian(x, d);
    if (!j.allFinite()) throw std::runtime_error("jacobian: non-finite entries");
    return j;
  }
  if (n > kFiniteDiffMaxDim)
    throw std::runtime_error("finite-difference jacobian limited to dim <= " +
                             std::to_string(kFiniteDiffMaxDim));
  double h = 1e-5 * (1.0 + x.cwiseAbs().maxCoeff());
  Eigen::MatrixXd j(n, n);
  Parameter xp = x, xm = x;
  for (int c = 0; c < n; ++c) {
    xp[c] = x[c] + h;
    xm[c] = x[c] - h;
    j.col(c) = (apply_noisefree(alg, xp, d, problem) - apply_noisefree(alg, xm, d, problem)) /
               (2.0 * h);
    xp[c] = x[c];
    xm[c] = x[c];
  }
  if (!j.allFinite()) throw std::runtime_error("jacobian: non-finite entries");
  return j;
}

}  // namespace sola

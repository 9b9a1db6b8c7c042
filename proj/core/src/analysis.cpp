#include "sola/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <Eigen/Eigenvalues>

namespace sola {

namespace {

// least-squares slope of y over 0..n-1
double ls_slope(const double* y, std::size_t n) {
  if (n < 2) return 0.0;
  double mx = (n - 1) / 2.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) my += y[i];
  my /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (i - mx) * (y[i] - my);
    den += (i - mx) * (i - mx);
  }
  return num / den;
}

Parameter sample_in_ball(double radius, int dim, Rng& rng) {
  Parameter dir = rng.gaussian_vec(dim);
  double n = dir.norm();
  if (n == 0) return Parameter::Zero(dim);
  double r = radius * std::pow(rng.uniform(), 1.0 / dim);
  return (r / n) * dir;
}

}  // namespace

BatchOptimum batch_optimum(const Dataset& all_data, const Problem& problem,
                           const BatchOptOptions& opts) {
  if (all_data.empty()) throw std::invalid_argument("batch_optimum: empty dataset");
  BatchOptimum out;
  if (auto x = problem.closed_form_optimum(all_data, &out.regularized)) {
    out.x = *x;
    return out;
  }
  out.approximate = true;
  Parameter x = Parameter::Zero(problem.dim());
  for (int e = 0; e < opts.budget_epochs; ++e) x -= opts.budget_eta * problem.grad(x, all_data);
  out.x = std::move(x);
  return out;
}

RegretReport regret(const RunTrace& trace, const EventSchedule& schedule,
                    const Parameter& x_star, const Problem& problem) {
  RegretReport rep;
  rep.x_star = x_star;
  std::size_t n = trace.rows.size();
  rep.r.resize(n);
  rep.r_over_k.resize(n);
  rep.f_x.resize(n);
  rep.f_star.resize(n);

  // replay ingestion in processed order to rebuild D^{sigma(k)}(k)
  std::map<int, Dataset> datasets;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const TraceRow& row = trace.rows[i];
    const Event& e = schedule.events[static_cast<std::size_t>(row.k) - 1];
    accumulate(datasets[row.sigma], e.batch);
    const Dataset& d = datasets.at(row.sigma);
    rep.f_x[i] = row.loss;
    rep.f_star[i] = problem.loss(x_star, d);
    acc += rep.f_x[i] - rep.f_star[i];
    rep.r[i] = acc;
    rep.r_over_k[i] = acc / static_cast<double>(i + 1);
  }

  std::size_t half = n / 2;
  if (n >= 4 && half >= 2) {
    rep.final_half_slope = ls_slope(rep.r_over_k.data() + half, n - half);
    rep.final_half_decreased = rep.r_over_k[n - 1] < rep.r_over_k[half - 1];
  }
  return rep;
}

StabilityReport stability_series(const RunTrace& trace, double tail_fraction) {
  if (trace.rows.size() < 2) throw std::invalid_argument("stability_series: need >= 2 events");
  StabilityReport rep;
  rep.tail_fraction = tail_fraction;
  rep.eps.reserve(trace.rows.size() - 1);
  for (std::size_t i = 1; i < trace.rows.size(); ++i)
    rep.eps.push_back(std::abs(trace.rows[i].loss - trace.rows[i - 1].loss));

  std::size_t n = rep.eps.size();
  std::size_t start = static_cast<std::size_t>(std::floor(n * (1.0 - tail_fraction)));
  if (start >= n) start = n - 1;
  std::vector<double> logs(n - start);
  for (std::size_t i = start; i < n; ++i) logs[i - start] = std::log(std::max(rep.eps[i], 1e-300));
  rep.log_tail_slope = ls_slope(logs.data(), logs.size());
  return rep;
}

double v_distance(LocalAlgorithm& alg, const Parameter& x, const Eigen::VectorXd& delta,
                  const Dataset& d, const Problem& problem) {
  if (delta.size() == 0 || delta.isZero(0))
    throw std::invalid_argument("v_distance: zero direction");
  return (jacobian(alg, x, d, problem) * delta).squaredNorm();
}

BetaEstimate estimate_beta(LocalAlgorithm& alg, const Problem& problem,
                           const DatasetSampler& sampler, int sample_count, Rng& rng,
                           double radius) {
  if (sample_count < 1) throw std::invalid_argument("estimate_beta: sample_count must be >= 1");
  BetaEstimate est;
  est.samples = sample_count;
  int dim = problem.dim();
  for (int s = 0; s < sample_count; ++s) {
    Parameter x = sample_in_ball(radius, dim, rng);
    Dataset d = sampler(rng);
    Eigen::MatrixXd j = jacobian(alg, x, d, problem);
    // the direction sup of |J delta|^2/|delta|^2 is the top eigenvalue of J'J
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j.transpose() * j);
    est.beta = std::max(est.beta, es.eigenvalues().maxCoeff());
  }
  est.contracting = est.beta <= 1.0 + 1e-12;
  return est;
}

MuEstimate estimate_mu(LocalAlgorithm& alg_i, LocalAlgorithm& alg_j, const Problem& problem,
                       const DatasetSampler& sampler, int sample_count, Rng& rng,
                       double radius) {
  if (sample_count < 1) throw std::invalid_argument("estimate_mu: sample_count must be >= 1");
  MuEstimate est;
  est.samples = sample_count;
  int dim = problem.dim();
  for (int s = 0; s < sample_count; ++s) {
    Parameter x = sample_in_ball(radius, dim, rng);
    Dataset d = sampler(rng);
    Eigen::MatrixXd ji = jacobian(alg_i, x, d, problem);
    Eigen::MatrixXd jj = jacobian(alg_j, x, d, problem);
    Eigen::MatrixXd mi = ji.transpose() * ji;
    Eigen::MatrixXd mj = jj.transpose() * jj;
    // sup of the V-ratio is the top generalized eigenvalue of (M_i, M_j)
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> check(mj);
    double floor_eig = check.eigenvalues().minCoeff();
    if (floor_eig <= 1e-12 * std::max(1.0, mj.norm()))
      mj += 1e-12 * std::max(1.0, mj.norm()) * Eigen::MatrixXd::Identity(dim, dim);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(mi, mj);
    est.mu = std::max(est.mu, ges.eigenvalues().maxCoeff());
  }
  est.mu = std::max(est.mu, 1.0);
  return est;
}

ContractionEstimate build_contraction_estimate(std::vector<LocalAlgorithm>& agents,
                                               const Problem& problem,
                                               const DatasetSampler& sampler, int sample_count,
                                               Rng& rng, double radius) {
  ContractionEstimate est;
  est.samples = sample_count;
  for (auto& a : agents) {
    BetaEstimate b = estimate_beta(a, problem, sampler, sample_count, rng, radius);
    est.beta[a.agent_id] = b.beta;
    est.beta_bar = std::max(est.beta_bar, b.beta);
    est.all_contracting = est.all_contracting && b.contracting;
  }
  for (auto& ai : agents)
    for (auto& aj : agents) {
      if (ai.agent_id == aj.agent_id) continue;
      MuEstimate m = estimate_mu(ai, aj, problem, sampler, sample_count, rng, radius);
      est.mu[{ai.agent_id, aj.agent_id}] = m.mu;
      est.mu_bar = std::max(est.mu_bar, m.mu);
    }
  return est;
}

ChainReport certify_switching_chain(const RunTrace& trace, Scenario& fresh,
                                    const ContractionEstimate& est, int n_windows, int n_dirs,
                                    Rng& rng) {
  if (!trace.naive)
    throw std::invalid_argument("certify_switching_chain: needs a naive-mode trace");
  if (!trace.stored_params)
    throw std::invalid_argument("certify_switching_chain: trace lacks stored parameters");
  int n = static_cast<int>(trace.rows.size());
  if (n < 2) throw std::invalid_argument("certify_switching_chain: trace too short");

  // replay ingestion; J_prop[i] moves a direction across event i (at x(k-1)),
  // J_v[i] evaluates the selected algorithm's metric at x(k)
  std::vector<Eigen::MatrixXd> j_prop(n), j_v(n);
  for (int i = 0; i < n; ++i) {
    const TraceRow& row = trace.rows[i];
    const Event& e = fresh.schedule.events[static_cast<std::size_t>(row.k) - 1];
    LocalAlgorithm& alg = fresh.agent(row.sigma);
    // mirror the runner's ingestion exactly
    accumulate(fresh.datasets[row.sigma], e.batch);
    route_to_shards(alg, e.batch);
    const Dataset& d = fresh.datasets.at(row.sigma);
    if (i > 0) j_prop[i] = jacobian(alg, trace.rows[i - 1].x, d, *fresh.problem);
    j_v[i] = jacobian(alg, row.x, d, *fresh.problem);
  }

  SelectingSignal sig;
  sig.sigma.reserve(n);
  for (const TraceRow& r : trace.rows) sig.sigma.push_back(r.sigma);

  ChainReport rep;
  int dim = trace.dim;
  for (int w = 0; w < n_windows; ++w) {
    int k1, k2;
    if (w == 0) {  // always cover the full span
      k1 = 0;
      k2 = n - 1;
    } else {
      k1 = static_cast<int>(rng.index(static_cast<std::size_t>(n - 1)));
      k2 = k1 + 1 + static_cast<int>(rng.index(static_cast<std::size_t>(n - 1 - k1)));
    }
    int sw = count_switches(sig, k1, k2);
    double factor = std::pow(est.mu_bar, sw) * std::pow(est.beta_bar, k2 - k1);
    for (int t = 0; t < n_dirs; ++t) {
      Eigen::VectorXd delta = rng.gaussian_vec(dim);
      if (delta.norm() == 0) continue;
      delta.normalize();
      double v_start = (j_v[k1] * delta).squaredNorm();
      Eigen::VectorXd cur = delta;
      for (int k = k1 + 1; k <= k2; ++k) cur = j_prop[k] * cur;
      double v_end = (j_v[k2] * cur).squaredNorm();
      ++rep.windows_checked;
      if (v_start <= 0) continue;
      double ratio = v_end / (factor * v_start);
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      if (ratio > 1.0 + 1e-9) ++rep.violations;
    }
  }
  return rep;
}

void write_regret_csv(const std::string& path, const RegretReport& rep,
                      const StabilityReport& stab) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "K,R,R_over_K,stability_eps,cum_stability\n";
  double cum = 0.0;
  for (std::size_t i = 0; i < rep.r.size(); ++i) {
    double eps = i == 0 ? 0.0 : stab.eps[i - 1];
    cum += eps;
    f << (i + 1) << ',' << format_g17(rep.r[i]) << ',' << format_g17(rep.r_over_k[i]) << ','
      << format_g17(eps) << ',' << format_g17(cum) << '\n';
  }
}

void write_contraction_csv(const std::string& path, const ContractionEstimate& est,
                           const ChainReport* chain) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "name,estimate,samples,violations\n";
  for (const auto& [id, b] : est.beta)
    f << "beta_" << id << ',' << format_g17(b) << ',' << est.samples << ",\n";
  for (const auto& [pair, m] : est.mu)
    f << "mu_" << pair.first << '_' << pair.second << ',' << format_g17(m) << ',' << est.samples
      << ",\n";
  f << "beta_bar," << format_g17(est.beta_bar) << ',' << est.samples << ",\n";
  f << "mu_bar," << format_g17(est.mu_bar) << ',' << est.samples << ",\n";
  f << "gamma1," << format_g17(est.gamma1) << ",,\n";
  f << "gamma2," << format_g17(est.gamma2) << ",,\n";
  if (chain)
    f << "chain_max_ratio," << format_g17(chain->max_ratio) << ',' << chain->windows_checked
      << ',' << chain->violations << '\n';
}

}  // namespace sola

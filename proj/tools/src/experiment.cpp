#include "solatools/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sola/analysis.hpp"
#include "sola/idx.hpp"
#include "sola/linreg.hpp"
#include "sola/shards.hpp"

namespace solatools {

using namespace sola;

namespace {

bool is_decentralized(AlgorithmKind k) {
  return k == AlgorithmKind::DSGD || k == AlgorithmKind::FedAvg;
}

// Arrival times per agent. Periodic/explicit signals drive ownership directly
// (one batch per event, owner per block or per sequence entry); greedy gives
// every agent a batch at every time step and lets performance pick the order.
std::map<int, std::vector<double>> arrival_times(const ExperimentConfig& cfg) {
  std::map<int, std::vector<double>> times;
  for (const AgentConfig& a : cfg.agents) times[a.id];  // ensure presence
  if (cfg.signal.kind == "greedy") {
    for (int t = 1; t <= cfg.events; ++t)
      for (const AgentConfig& a : cfg.agents) times[a.id].push_back(t);
    return times;
  }
  if (cfg.signal.kind == "explicit") {
    for (int t = 1; t <= cfg.events; ++t)
      times[cfg.signal.sequence[static_cast<std::size_t>(t - 1)]].push_back(t);
    return times;
  }
  const std::vector<int>& order = cfg.signal.order;
  for (int t = 1; t <= cfg.events; ++t) {
    int block = (t - 1) / cfg.signal.period;
    times[order[static_cast<std::size_t>(block) % order.size()]].push_back(t);
  }
  return times;
}

LocalAlgorithm make_agent(const AgentConfig& a, const ExperimentConfig& cfg) {
  LocalAlgorithm alg;
  alg.kind = a.algorithm;
  alg.agent_id = a.id;
  alg.model.eta = a.eta;
  alg.model.noise_scale = a.noise_scale;
  alg.model.noise_rng = Rng(derive_seed(cfg.seed, SeedTag::noise, a.id));
  alg.sgd_batch = std::max(1, a.batch);
  alg.batch_rng = Rng(derive_seed(cfg.seed, SeedTag::batching, a.id));
  if (is_decentralized(a.algorithm)) {
    alg.subunits.params.assign(a.subunits, Parameter());
    alg.subunits.shards.assign(a.subunits, Dataset());
    alg.local_steps = a.local_steps;
    alg.dsgd_batch = a.batch;
    if (cfg.kind == "mnist") {
      alg.routing = ShardRouting::ByLabel;
      alg.labels_per_shard = cfg.mnist.labels_per_shard;
      alg.shard_caps.assign(a.subunits, cfg.mnist.shard_cap);
    } else {
      alg.routing = ShardRouting::RoundRobin;
    }
  }
  return alg;
}

void attach_signal(Scenario& s, const ExperimentConfig& cfg) {
  if (cfg.signal.kind == "greedy") {
    s.greedy = true;
    return;
  }
  if (cfg.signal.kind == "explicit") {
    SelectingSignal sig;
    for (const Event& e : s.schedule.events) sig.sigma.push_back(e.agent);
    sig.forced.assign(sig.sigma.size(), 0);
    s.signal = std::move(sig);
    return;
  }
  s.signal = periodic_signal(s.schedule, cfg.signal.period, cfg.signal.order);
}

void common_scenario_fields(Scenario& s, const ExperimentConfig& cfg) {
  s.metric.kind = cfg.metric;
  s.naive = cfg.naive;
  s.divergence_threshold = cfg.divergence_threshold;
  s.store_params = cfg.store_params;
  s.seed = cfg.seed;
  if (!cfg.x0.empty())
    s.x0 = Eigen::Map<const Eigen::VectorXd>(cfg.x0.data(),
                                             static_cast<Eigen::Index>(cfg.x0.size()));
}

BuiltExperiment build_linreg(const ExperimentConfig& cfg) {
  BuiltExperiment be;
  int dim = cfg.linreg.dim;
  Rng init_rng(derive_seed(cfg.seed, SeedTag::init, 0));
  Eigen::VectorXd x_true = init_rng.gaussian_vec(dim);
  be.x_ref = x_true;

  auto times = arrival_times(cfg);
  std::vector<std::pair<int, AgentStream>> per_agent;
  for (const AgentConfig& a : cfg.agents) {
    LinRegStreamSpec spec;
    spec.x_true = x_true;
    spec.noise_var = a.noise_var;
    spec.feature_var = cfg.linreg.feature_var;
    spec.batch_size = cfg.linreg.batch_size;
    Rng rng(derive_seed(cfg.seed, SeedTag::data, static_cast<std::uint64_t>(a.id)));
    per_agent.emplace_back(a.id, gen_linreg_stream(spec, times.at(a.id), rng));
  }
  be.scenario.schedule = merge_schedules(per_agent);
  be.scenario.problem = std::make_shared<LinRegProblem>(dim);
  for (const AgentConfig& a : cfg.agents) be.scenario.agents.push_back(make_agent(a, cfg));
  common_scenario_fields(be.scenario, cfg);
  attach_signal(be.scenario, cfg);
  return be;
}

BuiltExperiment build_custom(const ExperimentConfig& cfg) {
  BuiltExperiment be;
  Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(
      cfg.quadratic.diag.data(), static_cast<Eigen::Index>(cfg.quadratic.diag.size()));
  be.scenario.problem =
      std::make_shared<QuadraticProblem>(QuadraticProblem::diagonal(diag, cfg.quadratic.offset));
  be.x_ref = Eigen::VectorXd::Zero(diag.size());  // curvature is centered at the origin

  // the loss ignores data; events still carry a placeholder sample so the
  // arrival bookkeeping stays uniform
  auto times = arrival_times(cfg);
  std::vector<std::pair<int, AgentStream>> per_agent;
  for (const AgentConfig& a : cfg.agents) {
    AgentStream stream;
    for (double t : times.at(a.id)) {
      Sample s;
      s.features = Eigen::VectorXd::Zero(1);
      s.target = Eigen::VectorXd::Zero(1);
      stream.emplace_back(t, Batch{s});
    }
    per_agent.emplace_back(a.id, std::move(stream));
  }
  be.scenario.schedule = merge_schedules(per_agent);
  for (const AgentConfig& a : cfg.agents) be.scenario.agents.push_back(make_agent(a, cfg));
  common_scenario_fields(be.scenario, cfg);
  attach_signal(be.scenario, cfg);
  return be;
}

Sample image_sample(const Eigen::MatrixXd& images, const Eigen::VectorXi& labels, int row) {
  Sample s;
  s.features = images.row(row).transpose();
  s.target = Eigen::VectorXd::Constant(1, static_cast<double>(labels[row]));
  return s;
}

BuiltExperiment build_mnist(const ExperimentConfig& cfg) {
  BuiltExperiment be;
  Eigen::MatrixXd images = load_idx_images(cfg.mnist.images_path);
  Eigen::VectorXi labels = load_idx_labels(cfg.mnist.labels_path);
  if (images.rows() != labels.size())
    throw ConfigError("mnist: image count " + std::to_string(images.rows()) +
                      " does not match label count " + std::to_string(labels.size()));

  auto mlp = std::make_shared<MlpProblem>(static_cast<int>(images.cols()), cfg.mnist.hidden, 10);
  be.mlp = mlp;
  be.scenario.problem = mlp;
  Rng init_rng(derive_seed(cfg.seed, SeedTag::init, 0));
  be.scenario.x0 = mlp->he_init(init_rng);

  if (!cfg.mnist.test_images_path.empty()) {
    Eigen::MatrixXd ti = load_idx_images(cfg.mnist.test_images_path);
    Eigen::VectorXi tl = load_idx_labels(cfg.mnist.test_labels_path);
    if (ti.rows() != tl.size())
      throw ConfigError("mnist: test image/label count mismatch");
    be.test_set.append_rows(ti, tl.cast<double>());
  }

  auto times = arrival_times(cfg);
  std::vector<std::pair<int, AgentStream>> per_agent;
  for (const AgentConfig& a : cfg.agents) {
    const std::vector<double>& own = times.at(a.id);
    AgentStream stream;
    Rng rng(derive_seed(cfg.seed, SeedTag::data, static_cast<std::uint64_t>(a.id)));
    if (!is_decentralized(a.algorithm)) {
      // clean uniform stream
      for (double t : own) {
        Batch b;
        b.reserve(cfg.mnist.gd_batch);
        for (int i = 0; i < cfg.mnist.gd_batch; ++i)
          b.push_back(image_sample(images, labels, static_cast<int>(rng.index(
                                                       static_cast<std::size_t>(images.rows())))));
        stream.emplace_back(t, std::move(b));
      }
    } else {
      // label-partitioned noisy pool, fed incrementally across the agent's
      // own events (interleaved across shards so labels mix early)
      ShardSpec spec;
      spec.subunits = a.subunits;
      spec.labels_per_shard = cfg.mnist.labels_per_shard;
      spec.classes = 10;
      spec.cap = cfg.mnist.shard_cap;
      spec.noise_var = cfg.mnist.shard_noise_var;
      std::vector<Batch> pool = make_shards(images, labels, spec, rng);

      Batch flat;
      std::size_t longest = 0;
      for (const Batch& b : pool) longest = std::max(longest, b.size());
      for (std::size_t r = 0; r < longest; ++r)
        for (const Batch& b : pool)
          if (r < b.size()) flat.push_back(b[r]);

      if (own.empty()) throw ConfigError("agent " + std::to_string(a.id) + " owns no events");
      std::size_t n_events = own.size();
      if (flat.size() < n_events)
        throw ConfigError("agent " + std::to_string(a.id) + ": only " +
                          std::to_string(flat.size()) + " shard images for " +
                          std::to_string(n_events) + " events");
      std::size_t base = flat.size() / n_events, rem = flat.size() % n_events;
      std::size_t cursor = 0;
      for (std::size_t i = 0; i < n_events; ++i) {
        std::size_t take = base + (i < rem ? 1 : 0);
        Batch b(flat.begin() + static_cast<std::ptrdiff_t>(cursor),
                flat.begin() + static_cast<std::ptrdiff_t>(cursor + take));
        cursor += take;
        stream.emplace_back(own[i], std::move(b));
      }
    }
    per_agent.emplace_back(a.id, std::move(stream));
  }
  be.scenario.schedule = merge_schedules(per_agent);
  for (const AgentConfig& a : cfg.agents) be.scenario.agents.push_back(make_agent(a, cfg));
  common_scenario_fields(be.scenario, cfg);
  attach_signal(be.scenario, cfg);
  return be;
}

// pooled dataset across every event, the "all data a priori" reference
Dataset pool_all_data(const EventSchedule& schedule) {
  Dataset d;
  for (const Event& e : schedule.events) accumulate(d, e.batch);
  return d;
}

DatasetSampler make_sampler(const ExperimentConfig& cfg, const Eigen::VectorXd& x_true) {
  if (cfg.kind == "custom") {
    return [](Rng&) {
      Dataset d;
      Sample s;
      s.features = Eigen::VectorXd::Zero(1);
      s.target = Eigen::VectorXd::Zero(1);
      d.append(s);
      return d;
    };
  }
  int dim = cfg.linreg.dim;
  double fvar = cfg.linreg.feature_var;
  int batch = cfg.linreg.batch_size;
  Eigen::VectorXd xt = x_true;
  return [dim, fvar, batch, xt](Rng& r) {
    Dataset d;
    double fs = std::sqrt(fvar);
    for (int i = 0; i < batch; ++i) {
      Sample s;
      s.features = fs * r.gaussian_vec(dim);
      s.target = Eigen::VectorXd::Constant(1, xt.dot(s.features) + r.gaussian());
      d.append(s);
    }
    return d;
  };
}

std::string yn(bool b) { return b ? "yes" : "no"; }

}  // namespace

BuiltExperiment build_experiment(const ExperimentConfig& cfg) {
  if (cfg.kind == "linreg") return build_linreg(cfg);
  if (cfg.kind == "custom") return build_custom(cfg);
  return build_mnist(cfg);
}

int run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  namespace fs = std::filesystem;
  fs::create_directories(opts.out_dir);
  auto path = [&](const char* name) { return (fs::path(opts.out_dir) / name).string(); };

  BuiltExperiment be = build_experiment(cfg);
  Scenario& sc = be.scenario;

  // test-set evaluation hooks in as an observer so it works even when the
  // trace does not store parameters
  struct EvalRow {
    int k;
    double acc, loss;
  };
  std::vector<EvalRow> eval_rows;
  int seen = 0, total = sc.schedule.size();
  if (be.mlp && !be.test_set.empty()) {
    sc.observer = [&](const TraceRow& row, const Parameter& x) {
      ++seen;
      if (seen % cfg.mnist.eval_every == 0 || seen == total)
        eval_rows.push_back(
            {row.k, be.mlp->accuracy(x, be.test_set), be.mlp->loss(x, be.test_set)});
    };
  }

  RunOutcome out = run(sc);
  const RunTrace& trace = out.trace;

  std::vector<double> err;
  if (be.x_ref.size() && trace.stored_params) {
    err.reserve(trace.rows.size());
    for (const TraceRow& r : trace.rows) err.push_back((r.x - be.x_ref).norm());
  }
  write_trace_csv(trace, path("trace.csv"), err.empty() ? nullptr : &err);
  if (!err.empty()) {
    std::ofstream f(path("err.csv"), std::ios::binary);
    f << "k,err_to_opt\n";
    for (std::size_t i = 0; i < err.size(); ++i)
      f << trace.rows[i].k << ',' << format_g17(err[i]) << '\n';
  }
  if (!eval_rows.empty()) {
    std::ofstream f(path("eval.csv"), std::ios::binary);
    f << "k,test_accuracy,test_loss\n";
    for (const EvalRow& r : eval_rows)
      f << r.k << ',' << format_g17(r.acc) << ',' << format_g17(r.loss) << '\n';
  }

  std::ostringstream sum;
  sum << "kind: " << cfg.kind << '\n';
  sum << "seed: " << cfg.seed << '\n';
  sum << "events: " << trace.rows.size() << '\n';
  sum << "naive: " << yn(cfg.naive) << '\n';

  if (out.diverged) {
    sum << "diverged: yes at k=" << out.failed_k << " (" << out.message << ")\n";
    std::ofstream f(path("summary.txt"), std::ios::binary);
    f << sum.str();
    if (!opts.quiet) std::cout << sum.str();
    std::cerr << "run diverged at event " << out.failed_k << ": " << out.message << '\n';
    return 1;
  }

  const TraceRow& last = trace.rows.back();
  sum << "final_loss: " << format_g17(last.loss) << '\n';
  if (!err.empty()) sum << "final_err_to_opt: " << format_g17(err.back()) << '\n';
  if (!eval_rows.empty()) {
    sum << "final_test_accuracy: " << format_g17(eval_rows.back().acc) << '\n';
    sum << "final_test_loss: " << format_g17(eval_rows.back().loss) << '\n';
  }

  // realized selection sequence (covers greedy, where it emerges at runtime)
  SelectingSignal realized;
  for (const TraceRow& r : trace.rows) {
    realized.sigma.push_back(r.sigma);
    realized.forced.push_back(r.forced);
  }
  int switches = realized.size() > 1 ? count_switches(realized, 0, realized.size() - 1) : 0;
  sum << "switches: " << switches << '\n';

  // ---- analyses
  bool want_regret = cfg.analysis.regret || cfg.analysis.stability;
  if (want_regret) {
    Dataset pooled = pool_all_data(sc.schedule);
    BatchOptimum xs = batch_optimum(pooled, *sc.problem);
    RegretReport rep = regret(trace, sc.schedule, xs.x, *sc.problem);
    StabilityReport stab = stability_series(trace);
    write_regret_csv(path("regret.csv"), rep, stab);
    sum << "x_star: " << (xs.approximate ? "approximate (budgeted)"
                                         : xs.regularized ? "ridge-regularized" : "exact")
        << '\n';
    sum << "regret_final: " << format_g17(rep.r.back()) << '\n';
    sum << "regret_over_k_final: " << format_g17(rep.r_over_k.back()) << '\n';
    sum << "regret_over_k_final_half_decreasing: "
        << yn(rep.final_half_slope < 0 && rep.final_half_decreased) << '\n';
    sum << "stability_tail_slope: " << format_g17(stab.log_tail_slope) << '\n';
    double cum = 0.0;
    bool within = true;
    for (std::size_t i = 0; i < rep.r.size(); ++i) {
      if (i > 0) cum += stab.eps[i - 1];
      if (rep.r[i] > cum && i > 0) within = false;
    }
    sum << "regret_le_envelope: " << yn(within) << '\n';
  }

  if (cfg.analysis.contraction || cfg.analysis.chain) {
    Rng est_rng(derive_seed(cfg.seed, SeedTag::analysis, 0));
    DatasetSampler sampler = make_sampler(cfg, be.x_ref);
    ContractionEstimate est = build_contraction_estimate(
        sc.agents, *sc.problem, sampler, cfg.analysis.estimator_samples, est_rng);

    ChainReport chain;
    bool have_chain = false;
    if (cfg.analysis.chain) {
      ExperimentConfig ncfg = cfg;
      ncfg.naive = true;
      ncfg.store_params = 1;
      BuiltExperiment nrun = build_experiment(ncfg);
      RunOutcome nout = run(nrun.scenario);
      if (nout.diverged) {
        sum << "chain: n/a (naive certification run diverged at k=" << nout.failed_k << ")\n";
      } else {
        BuiltExperiment fresh = build_experiment(ncfg);
        Rng chain_rng(derive_seed(cfg.seed, SeedTag::analysis, 1));
        chain = certify_switching_chain(nout.trace, fresh.scenario, est,
                                        cfg.analysis.chain_windows, cfg.analysis.chain_dirs,
                                        chain_rng);
        have_chain = true;
      }
    }
    write_contraction_csv(path("contraction.csv"), est, have_chain ? &chain : nullptr);

    sum << "beta_bar: " << format_g17(est.beta_bar) << '\n';
    sum << "mu_bar: " << format_g17(est.mu_bar) << '\n';
    sum << "all_contracting: " << yn(est.all_contracting) << '\n';
    if (have_chain) {
      sum << "chain_violations: " << chain.violations << '/' << chain.windows_checked << '\n';
      sum << "chain_max_ratio: " << format_g17(chain.max_ratio) << '\n';
    }

    if (est.beta_bar > 0 && est.beta_bar < 1 && est.mu_bar == 1.0) {
      // identical differential dynamics: switches cost nothing, any signal is fine
      sum << "dwell_tau: 0 (no switch inflation measured)\n";
      sum << "n0: " << format_g17(cfg.n0) << '\n';
      sum << "admissible: yes\n";
    } else if (est.beta_bar > 0 && est.beta_bar < 1 && est.mu_bar > 1) {
      double tau = dwell_tau(est.mu_bar, est.beta_bar);
      sum << "dwell_tau: " << format_g17(tau) << '\n';
      sum << "n0: " << format_g17(cfg.n0) << '\n';
      DwellParams dp{cfg.n0, tau, est.mu_bar, est.beta_bar};
      AdmissibilityResult adm = is_admissible(realized, dp);
      if (adm.admissible) {
        sum << "admissible: yes\n";
      } else {
        sum << "admissible: no (window [" << adm.k1 << ',' << adm.k2 << "]: " << adm.switches
            << " switches > bound " << format_g17(adm.bound) << ")\n";
      }
    } else {
      sum << "dwell_tau: n/a (estimates outside the contracting regime)\n";
      sum << "n0: " << format_g17(cfg.n0) << '\n';
      sum << "admissible: n/a\n";
    }
  }

  sum << "diverged: no\n";
  std::ofstream f(path("summary.txt"), std::ios::binary);
  f << sum.str();
  if (!opts.quiet) std::cout << sum.str();
  return 0;
}

}  // namespace solatools

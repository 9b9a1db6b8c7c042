#include "sola/runner.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sola {

double fusing_variable(double p_new, double p_prev) {
  if (p_new < 0 || p_prev < 0) throw std::invalid_argument("fusing_variable: negative performance");
  if (p_new < kDivGuard && p_prev < kDivGuard) return 0.5;
  return p_new / (p_new + p_prev);
}

Handoff handoff(const Handoff& state) { return state; }

LocalAlgorithm& Scenario::agent(int id) {
  for (auto& a : agents)
    if (a.agent_id == id) return a;
  throw std::invalid_argument("scenario: unknown agent " + std::to_string(id));
}

RunOutcome run(Scenario& s) {
  RunOutcome out;
  int n_events = s.schedule.size();
  if (n_events == 0) throw std::invalid_argument("run: empty schedule");
  if (!s.greedy && s.signal.size() != n_events)
    throw std::invalid_argument("run: signal length does not match schedule");

  int dim = s.problem->dim();
  bool store = s.store_params >= 0 ? s.store_params > 0 : dim <= kStoreParamsMaxDim;
  out.trace.seed = s.seed;
  out.trace.dim = dim;
  out.trace.naive = s.naive;
  out.trace.stored_params = store;
  out.trace.rows.reserve(n_events);

  Handoff prev;
  prev.x = s.x0.size() ? s.x0 : Parameter::Zero(dim);

  // processing order; greedy mode permutes events inside equal-time groups
  std::vector<int> order(static_cast<std::size_t>(n_events));
  for (int j = 0; j < n_events; ++j) order[j] = j;
  std::map<int, double> last_perf;
  std::size_t group_start = 0;

  for (int processed = 0; processed < n_events; ++processed) {
    int j;
    std::uint8_t forced = 0;
    if (s.greedy) {
      std::size_t g_end = group_start;
      double t0 = s.schedule.events[order[group_start]].t;
      while (g_end < order.size() && s.schedule.events[order[g_end]].t == t0) ++g_end;
      std::vector<int> avail;
      for (std::size_t i = group_start; i < g_end; ++i)
        avail.push_back(s.schedule.events[order[i]].agent);
      int pick = greedy_pick(avail, last_perf);
      std::size_t pos = group_start;
      while (s.schedule.events[order[pos]].agent != pick) ++pos;
      std::swap(order[group_start], order[pos]);
      j = order[group_start];
      ++group_start;
    } else {
      j = order[static_cast<std::size_t>(processed)];
      forced = s.signal.forced.empty() ? 0 : s.signal.forced[j];
    }
    const Event& e = s.schedule.events[j];
    int sigma = s.greedy ? e.agent : s.signal.sigma[j];

    LocalAlgorithm& alg = s.agent(sigma);
    Dataset& d = s.datasets[sigma];
    accumulate(d, e.batch);
    route_to_shards(alg, e.batch);

    if (processed == 0) {
      // initialization: the handoff into the first event carries P(x(0), first batch)
      prev.p = evaluate_metric(s.metric, prev.x, d, *s.problem);
    }

    Parameter x_plus;
    try {
      x_plus = apply(alg, prev.x, d, *s.problem);
    } catch (const std::runtime_error& ex) {
      out.diverged = true;
      out.failed_k = e.k;
      out.message = ex.what();
      return out;
    }
    double p_new = evaluate_metric(s.metric, x_plus, d, *s.problem);
    double alpha = s.naive ? 1.0 : fusing_variable(p_new, prev.p);
    Parameter x = alpha * x_plus + (1.0 - alpha) * prev.x;
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > s.divergence_threshold) {
      out.diverged = true;
      out.failed_k = e.k;
      out.message = "diverged";
      return out;
    }
    auto [p_handoff, loss] = evaluate_metric_with_loss(s.metric, x, d, *s.problem);

    TraceRow row;
    row.k = e.k;
    row.t = e.t;
    row.sigma = sigma;
    row.alpha = alpha;
    row.loss = loss;
    row.p_new = p_new;
    row.p_prev = prev.p;
    row.param_norm = x.norm();
    row.forced = forced;
    if (store) {
      row.x = x;
      row.x_plus = std::move(x_plus);
    }
    out.trace.rows.push_back(std::move(row));
    if (s.observer) s.observer(out.trace.rows.back(), x);
    prev.x = std::move(x);
    prev.p = p_handoff;
    last_perf[sigma] = p_handoff;
  }
  return out;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(const RunTrace& trace, const std::string& path,
                     const std::vector<double>* err_to_opt) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "k,t,sigma,alpha,loss,p_new,p_prev,param_norm,err_to_opt,forced\n";
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const TraceRow& r = trace.rows[i];
    f << r.k << ',' << format_g17(r.t) << ',' << r.sigma << ',' << format_g17(r.alpha) << ','
      << format_g17(r.loss) << ',' << format_g17(r.p_new) << ',' << format_g17(r.p_prev) << ','
      << format_g17(r.param_norm) << ',';
    if (err_to_opt && i < err_to_opt->size()) f << format_g17((*err_to_opt)[i]);
    f << ',' << int(r.forced) << '\n';
  }
}

}  // namespace sola

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "helpers.hpp"
#include "sola/analysis.hpp"
#include "sola/linreg.hpp"
#include "sola/runner.hpp"

using namespace sola;
using testutil::vec;

namespace {

AgentStream stream_at(const std::vector<double>& times) {
  AgentStream s;
  for (double t : times) s.push_back({t, Batch{testutil::placeholder_sample()}});
  return s;
}

// two regression agents with interleaved arrivals: GD on odd ticks, SGD on even
Scenario linreg_scenario(std::uint64_t seed, bool naive, int per_agent = 15) {
  Scenario s;
  LinRegStreamSpec spec;
  Rng init(derive_seed(seed, SeedTag::init, 0));
  spec.x_true = init.gaussian_vec(2);
  spec.batch_size = 5;
  spec.noise_var = 0.5;
  std::vector<double> t1, t2;
  for (int i = 1; i <= per_agent; ++i) {
    t1.push_back(2 * i - 1);
    t2.push_back(2 * i);
  }
  Rng r1(derive_seed(seed, SeedTag::data, 1)), r2(derive_seed(seed, SeedTag::data, 2));
  s.schedule = merge_schedules({{1, gen_linreg_stream(spec, t1, r1)},
                                {2, gen_linreg_stream(spec, t2, r2)}});
  LocalAlgorithm g1;
  g1.agent_id = 1;
  g1.model.eta = 0.1;
  LocalAlgorithm g2;
  g2.agent_id = 2;
  g2.kind = AlgorithmKind::SGD;
  g2.sgd_batch = 3;
  g2.model.eta = 0.05;
  g2.batch_rng = Rng(derive_seed(seed, SeedTag::batching, 2));
  s.agents = {g1, g2};
  s.problem = std::make_shared<LinRegProblem>(2);
  s.signal = periodic_signal(s.schedule, 5, {1, 2});
  s.naive = naive;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("fusing_variable on hand-checked pairs") {
  CHECK(fusing_variable(1, 1) == 0.5);
  CHECK(fusing_variable(3, 1) == 0.75);
  CHECK(fusing_variable(0, 5) == 0.0);
  CHECK(fusing_variable(5, 0) == 1.0);
  CHECK(fusing_variable(0, 0) == 0.5);              // guarded 0/0
  CHECK(fusing_variable(1e-13, 5e-13) == 0.5);      // both below the guard
  CHECK_THROWS_WITH_AS(fusing_variable(-1, 1), "fusing_variable: negative performance",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(fusing_variable(1, -1e-9), "fusing_variable: negative performance",
                       std::invalid_argument);
}

TEST_CASE("fusing_variable stays in [0,1] and grows with new performance") {
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    double a = rng.uniform() * 10, b = rng.uniform() * 10;
    double al = fusing_variable(a, b);
    CHECK(al >= 0.0);
    CHECK(al <= 1.0);
    CHECK(fusing_variable(a + 0.5, b) >= al);
    CHECK(fusing_variable(a, b + 0.5) <= al);
  }
}

TEST_CASE("handoff passes the message through unchanged") {
  Handoff h;
  h.x = vec({1, 2, 3});
  h.p = 0.7;
  Handoff out = handoff(handoff(h));
  CHECK(testutil::exact_eq(out.x, h.x));
  CHECK(out.p == h.p);
}

TEST_CASE("scenario agent lookup by id") {
  Scenario s = linreg_scenario(0, false);
  CHECK(s.agent(1).agent_id == 1);
  CHECK(s.agent(2).kind == AlgorithmKind::SGD);
  CHECK_THROWS_WITH_AS(s.agent(9), "scenario: unknown agent 9", std::invalid_argument);
}

TEST_CASE("a single naive gradient agent reproduces plain descent exactly") {
  Scenario s;
  s.schedule = merge_schedules({{1, stream_at({1, 2, 3, 4, 5, 6})}});
  LocalAlgorithm g;
  g.agent_id = 1;
  g.model.eta = 0.1;
  s.agents = {g};
  s.problem = std::make_shared<QuadraticProblem>(
      QuadraticProblem(Eigen::MatrixXd(vec({2, 4}).asDiagonal()), vec({1, -1})));
  s.signal = periodic_signal(s.schedule, 3, {1});
  s.naive = true;
  s.x0 = vec({5, 5});
  RunOutcome out = run(s);
  REQUIRE(!out.diverged);
  REQUIRE(out.trace.rows.size() == 6);
  CHECK(out.trace.naive);
  CHECK(out.trace.stored_params);

  PerturbedGDModel m;
  m.eta = 0.1;
  Dataset d;
  Parameter x = vec({5, 5});
  for (int k = 0; k < 6; ++k) {
    accumulate(d, s.schedule.events[k].batch);
    x = gd_step(m, x, d, *s.problem);
    CHECK(testutil::exact_eq(out.trace.rows[k].x_plus, x));
    CHECK(testutil::exact_eq(out.trace.rows[k].x, x));  // alpha pinned to 1
    CHECK(out.trace.rows[k].alpha == 1.0);
    CHECK(out.trace.rows[k].k == k + 1);
    CHECK(out.trace.rows[k].sigma == 1);
  }
}

TEST_CASE("weighted runs blend convexly and keep alpha in [0,1]") {
  Scenario s = linreg_scenario(4, false);
  RunOutcome out = run(s);
  REQUIRE(!out.diverged);
  REQUIRE(out.trace.rows.size() == 30);
  Parameter prev = Parameter::Zero(2);
  for (const TraceRow& r : out.trace.rows) {
    CHECK(r.alpha >= 0.0);
    CHECK(r.alpha <= 1.0);
    CHECK(r.p_new > 0.0);
    CHECK(r.p_prev > 0.0);
    Parameter blend = r.alpha * r.x_plus + (1.0 - r.alpha) * prev;
    CHECK((r.x - blend).norm() < 1e-15);
    CHECK(r.param_norm == doctest::Approx(r.x.norm()));
    prev = r.x;
  }
}

TEST_CASE("the handoff performance is the previous event's post-blend metric") {
  Scenario s = linreg_scenario(8, false);
  RunOutcome out = run(s);
  REQUIRE(!out.diverged);
  const auto& rows = out.trace.rows;
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].p_prev == doctest::Approx(1.0 / (rows[i - 1].loss + 1e-12)).epsilon(1e-14));

  // the very first handoff scores the start point on the first batch
  Scenario probe = linreg_scenario(8, false);
  Dataset d0;
  accumulate(d0, probe.schedule.events[0].batch);
  double p0 = evaluate_metric(probe.metric, Parameter::Zero(2), d0, *probe.problem);
  CHECK(rows[0].p_prev == p0);
}

TEST_CASE("identically seeded runs are identical to the bit") {
  Scenario a = linreg_scenario(12, false);
  Scenario b = linreg_scenario(12, false);
  RunOutcome ra = run(a), rb = run(b);
  REQUIRE(ra.trace.rows.size() == rb.trace.rows.size());
  for (std::size_t i = 0; i < ra.trace.rows.size(); ++i) {
    CHECK(ra.trace.rows[i].alpha == rb.trace.rows[i].alpha);
    CHECK(ra.trace.rows[i].loss == rb.trace.rows[i].loss);
    CHECK(testutil::exact_eq(ra.trace.rows[i].x, rb.trace.rows[i].x));
  }
}

TEST_CASE("greedy mode reorders simultaneous arrivals by last-known performance") {
  Scenario s;
  std::vector<double> times = {1, 2, 3, 4};
  s.schedule = merge_schedules({{1, stream_at(times)}, {2, stream_at(times)}});
  LocalAlgorithm slow;
  slow.agent_id = 1;
  slow.model.eta = 0.1;
  LocalAlgorithm fast;
  fast.agent_id = 2;
  fast.model.eta = 0.4;
  s.agents = {slow, fast};
  s.problem = std::make_shared<QuadraticProblem>(QuadraticProblem::diagonal(vec({2, 2})));
  s.greedy = true;
  s.naive = true;
  s.x0 = vec({1, 1});
  RunOutcome out = run(s);
  REQUIRE(!out.diverged);
  REQUIRE(out.trace.rows.size() == 8);

  // tick 1: nobody has a record, lowest id leads. After that, whoever stepped
  // last landed nearest the optimum, so the lead alternates every tick.
  std::vector<int> want_sigma = {1, 2, 2, 1, 1, 2, 2, 1};
  std::vector<int> want_k = {1, 2, 4, 3, 5, 6, 8, 7};
  for (int i = 0; i < 8; ++i) {
    CHECK(out.trace.rows[i].sigma == want_sigma[i]);
    CHECK(out.trace.rows[i].k == want_k[i]);
  }
}

TEST_CASE("divergence aborts the run and keeps the partial trace") {
  Scenario s;
  s.schedule = merge_schedules({{1, stream_at({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12})}});
  LocalAlgorithm g;
  g.agent_id = 1;
  g.model.eta = 2.0;  // way past 2/L on the stiff coordinate
  s.agents = {g};
  s.problem = std::make_shared<QuadraticProblem>(QuadraticProblem::diagonal(vec({2, 4})));
  s.signal = periodic_signal(s.schedule, 1, {1});
  s.naive = true;
  s.x0 = vec({1, 1});
  s.divergence_threshold = 1e6;
  RunOutcome out = run(s);
  CHECK(out.diverged);
  CHECK(out.message == "diverged");
  CHECK(out.failed_k == 8);  // |x2| grows by 7x per event from 1
  CHECK(out.trace.rows.size() == 7);
  for (const TraceRow& r : out.trace.rows) CHECK(r.param_norm <= 1e6);
}

TEST_CASE("store_params can be forced off") {
  Scenario s = linreg_scenario(3, true);
  s.store_params = 0;
  RunOutcome out = run(s);
  CHECK(!out.trace.stored_params);
  for (const TraceRow& r : out.trace.rows) {
    CHECK(r.x.size() == 0);
    CHECK(r.x_plus.size() == 0);
  }
}

TEST_CASE("the observer sees every blended parameter even without storage") {
  Scenario s = linreg_scenario(5, false);
  s.store_params = 0;
  std::vector<double> norms;
  std::vector<int> ks;
  s.observer = [&](const TraceRow& r, const Parameter& x) {
    ks.push_back(r.k);
    norms.push_back(x.norm());
  };
  RunOutcome out = run(s);
  REQUIRE(!out.diverged);
  REQUIRE(norms.size() == out.trace.rows.size());
  for (std::size_t i = 0; i < norms.size(); ++i) {
    CHECK(norms[i] == out.trace.rows[i].param_norm);
    CHECK(ks[i] == out.trace.rows[i].k);
  }
}

TEST_CASE("forced selections from the signal are recorded on the trace") {
  Scenario s;
  s.schedule = merge_schedules({{1, stream_at({3, 4})}, {2, stream_at({1, 2})}});
  LocalAlgorithm g1, g2;
  g1.agent_id = 1;
  g2.agent_id = 2;
  s.agents = {g1, g2};
  s.problem = std::make_shared<QuadraticProblem>(QuadraticProblem::diagonal(vec({1, 1})));
  s.signal = periodic_signal(s.schedule, 2, {1, 2});  // agent 2 arrives during 1's block
  s.naive = true;
  RunOutcome out = run(s);
  REQUIRE(out.trace.rows.size() == 4);
  CHECK(out.trace.rows[0].forced == 1);
  CHECK(out.trace.rows[1].forced == 1);
  CHECK(out.trace.rows[2].forced == 0);
  CHECK(out.trace.rows[3].forced == 0);
  CHECK(out.trace.rows[0].sigma == 2);
  CHECK(out.trace.rows[2].sigma == 1);
}

TEST_CASE("run validates schedule, signal, and agent wiring") {
  Scenario empty;
  empty.problem = std::make_shared<LinRegProblem>(2);
  CHECK_THROWS_WITH_AS(run(empty), "run: empty schedule", std::invalid_argument);

  Scenario s = linreg_scenario(0, true);
  s.signal.sigma.pop_back();
  s.signal.forced.pop_back();
  CHECK_THROWS_WITH_AS(run(s), "run: signal length does not match schedule",
                       std::invalid_argument);

  Scenario bad = linreg_scenario(0, true);
  bad.signal.sigma[0] = 9;
  CHECK_THROWS_WITH_AS(run(bad), "scenario: unknown agent 9", std::invalid_argument);
}

TEST_CASE("trace csv carries one line per event plus the header") {
  RunTrace tr;
  tr.stored_params = false;
  TraceRow r1;
  r1.k = 1;
  r1.t = 0.5;
  r1.sigma = 3;
  r1.alpha = 0.25;
  r1.loss = 2.0;
  TraceRow r2 = r1;
  r2.k = 2;
  r2.forced = 1;
  tr.rows = {r1, r2};
  std::string dir = testutil::scratch_dir("trace_csv");
  std::string path = dir + "/trace.csv";
  std::vector<double> err = {0.5};  // deliberately shorter than the trace
  write_trace_csv(tr, path, &err);

  std::string text = testutil::read_file(path);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,t,sigma,alpha,loss,p_new,p_prev,param_norm,err_to_opt,forced");
  std::getline(in, line);
  CHECK(testutil::contains(line, "1,0.5,3,0.25,2,"));
  CHECK(testutil::contains(line, ",0.5,0"));  // err column filled, unforced
  std::getline(in, line);
  CHECK(testutil::contains(line, ",,1"));  // err column empty, forced
  CHECK(!std::getline(in, line));
}

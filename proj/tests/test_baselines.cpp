#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <acfw/baselines.hpp>
#include <acfw/random.hpp>

using namespace acfw;

TEST_CASE("open-loop schedule") {
  CHECK(open_loop_gamma(0, true) == doctest::Approx(1.0));
  CHECK(open_loop_gamma(2, true) == doctest::Approx(0.5));
  CHECK(open_loop_gamma(3, false) == doctest::Approx(0.5));
  for (count_t t = 0; t < 10000; t += 13) {
    CHECK(open_loop_gamma(t, true) > 0.0);
    CHECK(open_loop_gamma(t, true) <= 1.0);
    CHECK(open_loop_gamma(t, false) > 0.0);
    CHECK(open_loop_gamma(t, false) <= 1.0);
  }
}

TEST_CASE("fixed-L step shares the closed-loop arithmetic") {
  CHECK(fixed_L_gamma(2, 1, 4, 1) == step_size(2, 1, 4, 1));
  CHECK(fixed_L_gamma(8, 1, 4, 1) == step_size(8, 1, 4, 1));
  const scalar_t inf = std::numeric_limits<scalar_t>::infinity();
  CHECK(fixed_L_gamma(8, 1, 4, inf) == step_size(8, 1, 4, inf));

  Rng rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const scalar_t g = rng.uniform(0.0, 5.0);
    const scalar_t L = rng.uniform(0.1, 5.0);
    const scalar_t n = rng.uniform(0.1, 5.0);
    const scalar_t gmax = rng.uniform(0.1, 2.0);
    CHECK(fixed_L_gamma(g, L, n, gmax) == step_size(g, L, n, gmax));
  }

  // Over-estimating L by 10x shrinks the unclipped step by 10x.
  CHECK(fixed_L_gamma(1, 10, 4, 100) ==
        doctest::Approx(fixed_L_gamma(1, 1, 4, 100) / 10.0));
}

TEST_CASE("fixed-L steps satisfy the quadratic decrease bound") {
  Rng rng(5);
  vector_t q(6);
  for (int i = 0; i < 6; ++i) q[i] = rng.uniform(0.5, 4.0);
  QuadraticObjective obj =
      QuadraticObjective::centered_diag(q, rng.normal_vector(6));
  const scalar_t L = *obj.lipschitz_constant();
  for (int rep = 0; rep < 20; ++rep) {
    const vector_t x = rng.normal_vector(6);
    const vector_t g = obj.gradient(x);
    vector_t d = rng.normal_vector(6);
    if (g.dot(d) < 0.0) d = -d;
    const scalar_t gd = g.dot(d);
    if (gd <= 0.0) continue;
    const scalar_t gamma = fixed_L_gamma(gd, L, d.squaredNorm(), 1.0);
    const scalar_t f0 = obj.value(x);
    const scalar_t f1 = obj.value(x - gamma * d);
    CHECK(f1 <= f0 - 0.5 * gamma * gd + 1e-12);
  }
}

TEST_CASE("backtracking passes on the first try at the true curvature") {
  vector_t q = vector_t::Ones(2);
  QuadraticObjective obj(q, vector_t::Zero(2));  // f = |x|^2/2
  vector_t x(2);
  x << 1, 0;
  const scalar_t f_x = obj.value(x);
  const vector_t grad = obj.gradient(x);
  BacktrackState state;
  state.L_hat = 1.0;
  const BacktrackResult res = backtracking_step(obj, x, f_x, grad, x, 10.0, state);
  CHECK(res.evals == 1);
  CHECK(res.gamma == doctest::Approx(1.0));
  CHECK(res.f_new == doctest::Approx(0.0));
}

TEST_CASE("backtracking doubles its way up from a low estimate") {
  vector_t q = vector_t::Ones(2);
  QuadraticObjective obj(q, vector_t::Zero(2));
  vector_t x(2);
  x << 1, 0;
  const scalar_t f_x = obj.value(x);
  const vector_t grad = obj.gradient(x);
  BacktrackState state;
  state.L_hat = 0.01;
  const BacktrackResult res =
      backtracking_step(obj, x, f_x, grad, x, 1.0, state);
  CHECK(res.evals > 1);
  CHECK(state.L_hat >= 0.5);  // doubled until the test held
  // The returned step satisfies the sufficient-decrease inequality.
  const scalar_t gd = grad.dot(x);
  CHECK(res.f_new <= f_x - res.gamma * gd +
                         0.5 * state.L_hat * res.gamma * res.gamma +
                         1e-12);
}

TEST_CASE("backtracking rejects invalid state") {
  vector_t q = vector_t::Ones(2);
  QuadraticObjective obj(q, vector_t::Zero(2));
  vector_t x(2);
  x << 1, 0;
  BacktrackState bad;
  bad.tau_up = 0.5;
  CHECK_THROWS_AS(
      backtracking_step(obj, x, 0.5, obj.gradient(x), x, 1.0, bad),
      std::invalid_argument);
}

namespace {

QuadraticObjective bench_quadratic(index_t d, std::uint64_t seed) {
  Rng rng(seed);
  vector_t q(d);
  for (index_t i = 0; i < d; ++i) q[i] = rng.uniform(1.0, 4.0);
  return QuadraticObjective::centered_diag(q, rng.simplex_point(d));
}

BaselineConfig baseline(StepRule rule, count_t iters) {
  BaselineConfig cfg;
  cfg.rule = rule;
  cfg.base.max_iters = iters;
  cfg.base.gap_tol = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("backtracking driver is monotone on the simplex quadratic") {
  QuadraticObjective obj = bench_quadratic(12, 44);
  const Trace trace = run_baseline(obj, Dictionary::simplex(12),
                                   SubroutineKind::CFW,
                                   baseline(StepRule::Backtracking, 500));
  for (std::size_t i = 1; i < trace.records.size(); ++i)
    CHECK(trace.records[i].f_value <= trace.records[i - 1].f_value);
  CHECK(trace.summary.n_f_evals >= trace.summary.iterations + 2);
}

TEST_CASE("open-loop pairs with CFW only") {
  QuadraticObjective obj = bench_quadratic(4, 45);
  CHECK_THROWS_AS(
      run_baseline(obj, Dictionary::simplex(4), SubroutineKind::PFW,
                   baseline(StepRule::OpenLoop, 10)),
      std::invalid_argument);
}

TEST_CASE("fixed-L needs a constant") {
  // Huber has no analytic constant exported; FIXED must refuse.
  std::vector<ObservedEntry> obs{{0, 0, 1.0}};
  HuberCompletionObjective obj(obs, 1, 1, 1.0);
  CHECK_THROWS_AS(
      run_baseline(obj, Dictionary::nuclear_ball(1, 1, 1.0), SubroutineKind::CFW,
                   baseline(StepRule::FixedL, 10)),
      std::invalid_argument);
}

TEST_CASE("auto-conditioning beats the open loop at equal budget") {
  QuadraticObjective ac_obj = bench_quadratic(30, 46);
  QuadraticObjective ol_obj = bench_quadratic(30, 46);
  SolverConfig cfg;
  cfg.max_iters = 2000;
  cfg.gap_tol = 0.0;
  const Trace ac = run(ac_obj, Dictionary::simplex(30), SubroutineKind::CFW, cfg);
  const Trace ol = run_baseline(ol_obj, Dictionary::simplex(30),
                                SubroutineKind::CFW,
                                baseline(StepRule::OpenLoop, 2000));
  CHECK(ac.summary.final_gap <= ol.summary.final_gap);
}

TEST_CASE("baseline drivers reuse the shared trace format and counters") {
  QuadraticObjective obj = bench_quadratic(8, 47);
  const Trace trace = run_baseline(obj, Dictionary::simplex(8),
                                   SubroutineKind::CFW,
                                   baseline(StepRule::OpenLoop, 100));
  CHECK(trace.meta.method == "OPEN");
  REQUIRE(trace.summary.iterations == 100);
  CHECK(trace.summary.n_f_evals == 102);  // same accounting as the AC driver
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <acfw/problems.hpp>
#include <acfw/random.hpp>

#include <cmath>

using namespace acfw;

TEST_CASE("quadratic evaluation") {
  vector_t x(2);
  x << 1, 0;
  {
    auto [f, g] = eval_quadratic(matrix_t::Identity(2, 2), vector_t::Zero(2), x);
    CHECK(f == doctest::Approx(0.5));
    CHECK(g.isApprox(x));
  }
  {
    vector_t q(2), b(2);
    q << 2, 1;
    b << -2, 0;
    auto [f, g] = eval_quadratic_diag(q, b, x);
    CHECK(f == doctest::Approx(-1.0));  // stationary point of the diagonal model
    CHECK(g.norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("quadratic objective exports its exact constants") {
  vector_t q(3);
  q << 0.5, 4, 2;
  QuadraticObjective obj(q, vector_t::Zero(3));
  CHECK(*obj.lipschitz_constant() == doctest::Approx(4.0));
  CHECK(*obj.strong_convexity() == doctest::Approx(0.5));
  CHECK(obj.convex());
}

TEST_CASE("quadratic gradient passes finite differences") {
  Rng rng(3);
  vector_t q(5);
  for (int i = 0; i < 5; ++i) q[i] = rng.uniform(0.5, 3.0);
  QuadraticObjective obj(q, rng.normal_vector(5));
  for (int rep = 0; rep < 10; ++rep)
    CHECK(gradient_check_error(obj, rng.normal_vector(5)) < 1e-6);
}

namespace {

LogisticObjective tiny_logistic(scalar_t lambda) {
  std::vector<Eigen::Triplet<scalar_t>> trip;
  trip.emplace_back(0, 0, 1.0);
  trip.emplace_back(0, 2, -2.0);
  trip.emplace_back(1, 1, 0.5);
  trip.emplace_back(2, 0, -1.0);
  trip.emplace_back(2, 1, 1.5);
  sparse_matrix_t A(3, 3);
  A.setFromTriplets(trip.begin(), trip.end());
  vector_t y(3);
  y << 1, 0, 1;
  return LogisticObjective(std::move(A), y, lambda);
}

}  // namespace

TEST_CASE("logistic loss at zero is log 2") {
  LogisticObjective obj = tiny_logistic(0.0);
  CHECK(obj.value(vector_t::Zero(3)) ==
        doctest::Approx(0.6931471805599453).epsilon(1e-12));
}

TEST_CASE("logistic evaluation is overflow-safe at large margins") {
  std::vector<Eigen::Triplet<scalar_t>> trip;
  trip.emplace_back(0, 0, 1.0);
  sparse_matrix_t A(1, 1);
  A.setFromTriplets(trip.begin(), trip.end());
  vector_t y(1);
  y << 1;
  LogisticObjective obj(std::move(A), y, 0.0);

  vector_t x(1);
  x << 10;
  // log(1 + e^10) - 10 evaluated stably.
  CHECK(obj.value(x) == doctest::Approx(4.539889921686465e-05).epsilon(1e-10));
  x << 1000;
  CHECK(std::isfinite(obj.value(x)));
  CHECK(std::isfinite(obj.gradient(x)[0]));
  x << -1000;
  CHECK(std::isfinite(obj.value(x)));
}

TEST_CASE("logistic gradient passes finite differences") {
  LogisticObjective obj = tiny_logistic(0.01);
  Rng rng(8);
  for (int rep = 0; rep < 10; ++rep)
    CHECK(gradient_check_error(obj, rng.normal_vector(3)) < 1e-5);
}

TEST_CASE("huber branches") {
  std::vector<ObservedEntry> obs{{0, 0, 0.5}, {1, 1, 2.0}};
  // X = 0: residuals 0.5 (quadratic branch) and 2.0 (linear branch).
  auto [f, g] = eval_huber_completion(obs, 2, 2, 1.0, vector_t::Zero(4));
  CHECK(f == doctest::Approx((0.125 + 1.5) / 2.0));
  // Gradient supported on observed entries only.
  CHECK(g[1] == 0.0);
  CHECK(g[2] == 0.0);
  CHECK(g[0] == doctest::Approx(-0.5 / 2.0));
  CHECK(g[3] == doctest::Approx(-1.0 / 2.0));
}

TEST_CASE("huber gradient passes finite differences") {
  Rng rng(14);
  std::vector<ObservedEntry> obs;
  for (int k = 0; k < 10; ++k) {
    ObservedEntry e;
    e.row = static_cast<index_t>(rng.uniform_index(5));
    e.col = static_cast<index_t>(rng.uniform_index(4));
    e.value = 2.0 * rng.normal();
    obs.push_back(e);
  }
  HuberCompletionObjective obj(obs, 5, 4, 1.0);
  for (int rep = 0; rep < 10; ++rep)
    CHECK(gradient_check_error(obj, rng.normal_vector(20)) < 1e-5);
}

TEST_CASE("dictionary learning objective") {
  Rng rng(23);
  const index_t m = 4, n = 3, p = 2;
  const matrix_t D = rng.normal_matrix(m, p);
  const matrix_t X = rng.normal_matrix(p, n);
  const matrix_t A = D * X;
  DictionaryLearningObjective obj(A, p);

  vector_t z(m * p + p * n);
  Eigen::Map<matrix_t>(z.data(), m, p) = D;
  Eigen::Map<matrix_t>(z.data() + m * p, p, n) = X;
  auto [f, g] = obj.value_and_gradient(z);
  CHECK(f == doctest::Approx(0.0));  // exact fit
  CHECK(g.norm() < 1e-12);

  vector_t z0 = z;
  z0.head(m * p).setZero();  // D = 0
  CHECK(obj.value(z0) == doctest::Approx(0.5 * A.squaredNorm() / n));
}

TEST_CASE("dictionary learning gradient passes finite differences") {
  Rng rng(29);
  const matrix_t A = rng.normal_matrix(6, 5);
  DictionaryLearningObjective obj(A, 3);
  for (int rep = 0; rep < 10; ++rep)
    CHECK(gradient_check_error(obj, 0.5 * rng.normal_vector(obj.dimension())) <
          1e-5);
}

TEST_CASE("central differences are near-exact on quadratics and linear maps") {
  vector_t q = vector_t::Ones(2);
  QuadraticObjective quad(q, vector_t::Zero(2));
  vector_t x(2);
  x << 2, 0;
  const vector_t fd = finite_diff_gradient(quad, x, 1e-5);
  CHECK(std::abs(fd[0] - 2.0) < 1e-8);
  CHECK(std::abs(fd[1]) < 1e-8);

  vector_t b(2);
  b << 3, -1;
  QuadraticObjective linear(vector_t(vector_t::Zero(2)), b);
  const vector_t fd_lin = finite_diff_gradient(linear, x, 0.37);
  CHECK(fd_lin.isApprox(b, 1e-12));  // exact for any spacing
}

TEST_CASE("the checker reports the best-h error, not a fixed-h error") {
  LogisticObjective obj = tiny_logistic(0.01);
  Rng rng(31);
  const vector_t x = rng.normal_vector(3);
  const vector_t g = obj.gradient(x);
  const scalar_t scale = std::max(g.norm(), scalar_t(1.0));
  // At h = 1e-12 cancellation dominates; the sweep must beat it.
  const scalar_t coarse = (finite_diff_gradient(obj, x, 1e-12) - g).norm() / scale;
  const scalar_t best = gradient_check_error(obj, x);
  CHECK(best < 1e-5);
  CHECK(best < coarse);
}

TEST_CASE("evaluation counters are exact and resettable") {
  LogisticObjective obj = tiny_logistic(0.0);
  obj.reset_counts();
  const vector_t x = vector_t::Zero(3);
  obj.value(x);
  obj.value(x);
  obj.gradient(x);
  obj.value_and_gradient(x);
  CHECK(obj.counts().n_value == 3);
  CHECK(obj.counts().n_gradient == 2);
  obj.reset_counts();
  CHECK(obj.counts().n_value == 0);
}

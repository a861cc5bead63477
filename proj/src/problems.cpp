#include <acfw/problems.hpp>

#include <cmath>
#include <stdexcept>

namespace acfw {

namespace {

// log(1 + e^y), overflow-safe for large |y|.
inline scalar_t log1p_exp(scalar_t y) {
  if (y > 0.0) return y + std::log1p(std::exp(-y));
  return std::log1p(std::exp(y));
}

inline scalar_t sigmoid(scalar_t y) {
  if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
  const scalar_t e = std::exp(y);
  return e / (1.0 + e);
}

}  // namespace

std::pair<scalar_t, vector_t> eval_quadratic(const matrix_t& Q, const vector_t& b,
                                             const vector_t& x) {
  vector_t Qx = Q * x;
  const scalar_t f = 0.5 * x.dot(Qx) + b.dot(x);
  return {f, Qx + b};
}

std::pair<scalar_t, vector_t> eval_quadratic_diag(const vector_t& q_diag,
                                                  const vector_t& b,
                                                  const vector_t& x) {
  vector_t Qx = q_diag.cwiseProduct(x);
  const scalar_t f = 0.5 * x.dot(Qx) + b.dot(x);
  return {f, Qx + b};
}

std::pair<scalar_t, vector_t> eval_logistic(const sparse_matrix_t& design,
                                            const vector_t& labels,
                                            scalar_t lambda, const vector_t& x) {
  const index_t n = design.rows();
  if (labels.size() != n)
    throw std::invalid_argument("eval_logistic: label count mismatch");
  vector_t margins = design * x;
  scalar_t loss = 0.0;
  vector_t residual(n);
  for (index_t i = 0; i < n; ++i) {
    loss += log1p_exp(margins[i]) - labels[i] * margins[i];
    residual[i] = sigmoid(margins[i]) - labels[i];
  }
  const scalar_t inv_n = 1.0 / static_cast<scalar_t>(n);
  vector_t grad = inv_n * (design.transpose() * residual) + lambda * x;
  return {inv_n * loss + 0.5 * lambda * x.squaredNorm(), std::move(grad)};
}

std::pair<scalar_t, vector_t> eval_huber_completion(
    const std::vector<ObservedEntry>& observed, index_t rows, index_t cols,
    scalar_t delta, const vector_t& x_flat) {
  if (delta <= 0.0)
    throw std::invalid_argument("eval_huber_completion: delta must be positive");
  if (x_flat.size() != rows * cols)
    throw std::invalid_argument("eval_huber_completion: shape mismatch");
  const scalar_t inv_m = 1.0 / static_cast<scalar_t>(observed.size());
  scalar_t loss = 0.0;
  vector_t grad = vector_t::Zero(rows * cols);
  for (const auto& e : observed) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
      throw std::invalid_argument("eval_huber_completion: entry out of range");
    const index_t k = e.row * cols + e.col;  // row-major flattening
    const scalar_t a = e.value - x_flat[k];
    scalar_t dphi;
    if (std::abs(a) <= delta) {
      // |a| = delta falls in the quadratic branch; both branches agree there.
      loss += 0.5 * a * a;
      dphi = a;
    } else {
      loss += delta * (std::abs(a) - 0.5 * delta);
      dphi = a > 0.0 ? delta : -delta;
    }
    grad[k] -= dphi * inv_m;  // accumulate: entries may repeat
  }
  return {loss * inv_m, std::move(grad)};
}

std::pair<scalar_t, vector_t> eval_dictionary_learning(const matrix_t& A_data,
                                                       index_t p,
                                                       const vector_t& z) {
  const index_t m = A_data.rows();
  const index_t n = A_data.cols();
  if (z.size() != m * p + p * n)
    throw std::invalid_argument("eval_dictionary_learning: flattened size mismatch");
  Eigen::Map<const matrix_t> D(z.data(), m, p);
  Eigen::Map<const matrix_t> X(z.data() + m * p, p, n);
  matrix_t R = A_data - D * X;
  const scalar_t inv_n = 1.0 / static_cast<scalar_t>(n);
  vector_t grad(z.size());
  Eigen::Map<matrix_t>(grad.data(), m, p) = -inv_n * (R * X.transpose());
  Eigen::Map<matrix_t>(grad.data() + m * p, p, n) = -inv_n * (D.transpose() * R);
  return {0.5 * inv_n * R.squaredNorm(), std::move(grad)};
}

// ---------------------------------------------------------------------------
// QuadraticObjective
// ---------------------------------------------------------------------------

QuadraticObjective::QuadraticObjective(matrix_t Q, vector_t b, scalar_t constant)
    : Objective(b.size()),
      Q_(std::move(Q)),
      b_(std::move(b)),
      constant_(constant),
      diagonal_(false) {
  if (Q_.rows() != Q_.cols() || Q_.rows() != dimension())
    throw std::invalid_argument("QuadraticObjective: dimension mismatch");
}

QuadraticObjective::QuadraticObjective(vector_t q_diag, vector_t b,
                                       scalar_t constant)
    : Objective(b.size()),
      q_diag_(std::move(q_diag)),
      b_(std::move(b)),
      constant_(constant),
      diagonal_(true) {
  if (q_diag_.size() != dimension())
    throw std::invalid_argument("QuadraticObjective: dimension mismatch");
}

QuadraticObjective QuadraticObjective::centered_diag(vector_t q_diag,
                                                     const vector_t& center) {
  QuadraticObjective obj(std::move(q_diag), vector_t::Zero(center.size()));
  obj.center_ = center;
  obj.centered_ = true;
  return obj;
}

std::optional<scalar_t> QuadraticObjective::lipschitz_constant() const {
  if (diagonal_) return q_diag_.cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<matrix_t> es(Q_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::optional<scalar_t> QuadraticObjective::strong_convexity() const {
  if (diagonal_) {
    const scalar_t lo = q_diag_.minCoeff();
    return lo > 0.0 ? std::optional<scalar_t>(lo) : std::nullopt;
  }
  Eigen::SelfAdjointEigenSolver<matrix_t> es(Q_, Eigen::EigenvaluesOnly);
  const scalar_t lo = es.eigenvalues().minCoeff();
  return lo > 0.0 ? std::optional<scalar_t>(lo) : std::nullopt;
}

bool QuadraticObjective::convex() const {
  if (diagonal_) return q_diag_.minCoeff() >= 0.0;
  Eigen::SelfAdjointEigenSolver<matrix_t> es(Q_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -1e-12;
}

scalar_t QuadraticObjective::do_value(const vector_t& x) const {
  if (centered_) {
    // Evaluated in centered form so the value stays accurate relative to
    // the distance from the minimizer.
    const vector_t d = x - center_;
    return 0.5 * d.dot(q_diag_.cwiseProduct(d)) + constant_;
  }
  if (diagonal_)
    return 0.5 * x.dot(q_diag_.cwiseProduct(x)) + b_.dot(x) + constant_;
  return 0.5 * x.dot(Q_ * x) + b_.dot(x) + constant_;
}

void QuadraticObjective::do_gradient(const vector_t& x, vector_t& out) const {
  if (centered_) {
    out = q_diag_.cwiseProduct(x - center_);
    return;
  }
  if (diagonal_)
    out = q_diag_.cwiseProduct(x) + b_;
  else
    out = Q_ * x + b_;
}

scalar_t QuadraticObjective::do_value_and_gradient(const vector_t& x,
                                                   vector_t& out) const {
  if (centered_) {
    const vector_t d = x - center_;
    out = q_diag_.cwiseProduct(d);
    return 0.5 * d.dot(out) + constant_;
  }
  if (diagonal_) {
    vector_t Qx = q_diag_.cwiseProduct(x);
    out = Qx + b_;
    return 0.5 * x.dot(Qx) + b_.dot(x) + constant_;
  }
  vector_t Qx = Q_ * x;
  out = Qx + b_;
  return 0.5 * x.dot(Qx) + b_.dot(x) + constant_;
}

// ---------------------------------------------------------------------------
// LogisticObjective
// ---------------------------------------------------------------------------

LogisticObjective::LogisticObjective(sparse_matrix_t design, vector_t labels,
                                     scalar_t lambda)
    : Objective(design.cols()),
      design_(std::move(design)),
      labels_(std::move(labels)),
      lambda_(lambda) {
  if (labels_.size() != design_.rows())
    throw std::invalid_argument("LogisticObjective: label count mismatch");
  if (lambda_ < 0.0)
    throw std::invalid_argument("LogisticObjective: lambda must be nonnegative");
}

std::optional<scalar_t> LogisticObjective::strong_convexity() const {
  return lambda_ > 0.0 ? std::optional<scalar_t>(lambda_) : std::nullopt;
}

scalar_t LogisticObjective::do_value(const vector_t& x) const {
  vector_t margins = design_ * x;
  scalar_t loss = 0.0;
  for (index_t i = 0; i < margins.size(); ++i)
    loss += log1p_exp(margins[i]) - labels_[i] * margins[i];
  return loss / static_cast<scalar_t>(margins.size()) +
         0.5 * lambda_ * x.squaredNorm();
}

void LogisticObjective::do_gradient(const vector_t& x, vector_t& out) const {
  vector_t margins = design_ * x;
  vector_t residual(margins.size());
  for (index_t i = 0; i < margins.size(); ++i)
    residual[i] = sigmoid(margins[i]) - labels_[i];
  out = (design_.transpose() * residual) / static_cast<scalar_t>(margins.size()) +
        lambda_ * x;
}

scalar_t LogisticObjective::do_value_and_gradient(const vector_t& x,
                                                  vector_t& out) const {
  auto [f, g] = eval_logistic(design_, labels_, lambda_, x);
  out = std::move(g);
  return f;
}

// ---------------------------------------------------------------------------
// HuberCompletionObjective
// ---------------------------------------------------------------------------

HuberCompletionObjective::HuberCompletionObjective(
    std::vector<ObservedEntry> observed, index_t rows, index_t cols,
    scalar_t delta)
    : Objective(rows * cols),
      observed_(std::move(observed)),
      rows_(rows),
      cols_(cols),
      delta_(delta) {
  if (observed_.empty())
    throw std::invalid_argument("HuberCompletionObjective: no observed entries");
  if (delta_ <= 0.0)
    throw std::invalid_argument("HuberCompletionObjective: delta must be positive");
}

scalar_t HuberCompletionObjective::do_value(const vector_t& x) const {
  return eval_huber_completion(observed_, rows_, cols_, delta_, x).first;
}

void HuberCompletionObjective::do_gradient(const vector_t& x, vector_t& out) const {
  out = eval_huber_completion(observed_, rows_, cols_, delta_, x).second;
}

// ---------------------------------------------------------------------------
// DictionaryLearningObjective
// ---------------------------------------------------------------------------

DictionaryLearningObjective::DictionaryLearningObjective(matrix_t A_data,
                                                         index_t p)
    : Objective(A_data.rows() * p + p * A_data.cols()),
      A_(std::move(A_data)),
      p_(p) {}

scalar_t DictionaryLearningObjective::do_value(const vector_t& x) const {
  const index_t m = A_.rows(), n = A_.cols();
  Eigen::Map<const matrix_t> D(x.data(), m, p_);
  Eigen::Map<const matrix_t> X(x.data() + m * p_, p_, n);
  return 0.5 * (A_ - D * X).squaredNorm() / static_cast<scalar_t>(n);
}

void DictionaryLearningObjective::do_gradient(const vector_t& x,
                                              vector_t& out) const {
  out = eval_dictionary_learning(A_, p_, x).second;
}

scalar_t DictionaryLearningObjective::do_value_and_gradient(const vector_t& x,
                                                            vector_t& out) const {
  auto [f, g] = eval_dictionary_learning(A_, p_, x);
  out = std::move(g);
  return f;
}

// ---------------------------------------------------------------------------
// Gradient verification
// ---------------------------------------------------------------------------

vector_t finite_diff_gradient(const Objective& objective, const vector_t& x,
                              scalar_t h) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_gradient: h must be positive");
  vector_t g(x.size());
  vector_t probe = x;
  for (index_t i = 0; i < x.size(); ++i) {
    const scalar_t xi = x[i];
    probe[i] = xi + h;
    const scalar_t fp = objective.value(probe);
    probe[i] = xi - h;
    const scalar_t fm = objective.value(probe);
    probe[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

scalar_t gradient_check_error(const Objective& objective, const vector_t& x,
                              const std::vector<scalar_t>& spacings) {
  const vector_t g = objective.gradient(x);
  const scalar_t scale = std::max(g.norm(), scalar_t(1.0));
  scalar_t best = std::numeric_limits<scalar_t>::infinity();
  for (const scalar_t h : spacings) {
    const vector_t fd = finite_diff_gradient(objective, x, h);
    best = std::min(best, (fd - g).norm() / scale);
  }
  return best;
}

}  // namespace acfw

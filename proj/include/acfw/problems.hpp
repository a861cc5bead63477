#pragma once

#include <acfw/types.hpp>

#include <Eigen/SparseCore>

#include <optional>
#include <utility>
#include <vector>

namespace acfw {

using sparse_matrix_t = Eigen::SparseMatrix<scalar_t, Eigen::RowMajor>;

struct EvalCounts {
  count_t n_value = 0;
  count_t n_gradient = 0;
};

/// A smooth objective with exact gradients and evaluation counting.
/// Evaluation is pure; the counters are owned by a single run (they are not
/// synchronized), which is why each concurrent run gets its own instance.
class Objective {
 public:
  virtual ~Objective() = default;

  index_t dimension() const { return dim_; }

  scalar_t value(const vector_t& x) const {
    ++counts_.n_value;
    return do_value(x);
  }

  vector_t gradient(const vector_t& x) const {
    ++counts_.n_gradient;
    vector_t g(dim_);
    do_gradient(x, g);
    return g;
  }

  std::pair<scalar_t, vector_t> value_and_gradient(const vector_t& x) const {
    ++counts_.n_value;
    ++counts_.n_gradient;
    vector_t g(dim_);
    const scalar_t f = do_value_and_gradient(x, g);
    return {f, std::move(g)};
  }

  const EvalCounts& counts() const { return counts_; }
  void reset_counts() const { counts_ = {}; }

  /// Exact global Lipschitz constant of the gradient, when analytic.
  virtual std::optional<scalar_t> lipschitz_constant() const { return std::nullopt; }
  /// Strong-convexity modulus, when analytic.
  virtual std::optional<scalar_t> strong_convexity() const { return std::nullopt; }
  virtual bool convex() const { return false; }

 protected:
  explicit Objective(index_t dim) : dim_(dim) {}

  virtual scalar_t do_value(const vector_t& x) const = 0;
  virtual void do_gradient(const vector_t& x, vector_t& out) const = 0;
  virtual scalar_t do_value_and_gradient(const vector_t& x, vector_t& out) const {
    do_gradient(x, out);
    return do_value(x);
  }

 private:
  index_t dim_;
  mutable EvalCounts counts_;
};

// ---------------------------------------------------------------------------
// Evaluation kernels
// ---------------------------------------------------------------------------

/// f = x'Qx/2 + b'x with gradient Qx + b.
std::pair<scalar_t, vector_t> eval_quadratic(const matrix_t& Q, const vector_t& b,
                                             const vector_t& x);
std::pair<scalar_t, vector_t> eval_quadratic_diag(const vector_t& q_diag,
                                                  const vector_t& b,
                                                  const vector_t& x);

/// Mean logistic loss over (design, labels in {0,1}) plus (lambda/2)|x|^2.
/// Uses log1p-based evaluation so large margins do not overflow.
std::pair<scalar_t, vector_t> eval_logistic(const sparse_matrix_t& design,
                                            const vector_t& labels,
                                            scalar_t lambda, const vector_t& x);

struct ObservedEntry {
  index_t row = 0, col = 0;
  scalar_t value = 0.0;
};

/// Mean Huber loss of the residuals over the observed entries of an
/// (rows x cols) matrix; X is flattened row-major.
std::pair<scalar_t, vector_t> eval_huber_completion(
    const std::vector<ObservedEntry>& observed, index_t rows, index_t cols,
    scalar_t delta, const vector_t& x_flat);

/// f = |A - D X|_F^2 / (2n) over the joint variable z = [vec(D); vec(X)]
/// with D (m x p) and X (p x n) stored column-by-column.
std::pair<scalar_t, vector_t> eval_dictionary_learning(const matrix_t& A_data,
                                                       index_t p,
                                                       const vector_t& z);

// ---------------------------------------------------------------------------
// Concrete objectives
// ---------------------------------------------------------------------------

class QuadraticObjective final : public Objective {
 public:
  /// Dense Q (must be symmetric PSD for the convex guarantees).
  QuadraticObjective(matrix_t Q, vector_t b, scalar_t constant = 0.0);
  /// Diagonal Q.
  QuadraticObjective(vector_t q_diag, vector_t b, scalar_t constant = 0.0);

  /// Centered convex quadratic f = (x-c)'Q(x-c)/2 with exact minimum value 0.
  static QuadraticObjective centered_diag(vector_t q_diag, const vector_t& center);

  std::optional<scalar_t> lipschitz_constant() const override;
  std::optional<scalar_t> strong_convexity() const override;
  bool convex() const override;

 protected:
  scalar_t do_value(const vector_t& x) const override;
  void do_gradient(const vector_t& x, vector_t& out) const override;
  scalar_t do_value_and_gradient(const vector_t& x, vector_t& out) const override;

 private:
  matrix_t Q_;
  vector_t q_diag_;
  vector_t b_;
  vector_t center_;  // set only by centered_diag
  scalar_t constant_;
  bool diagonal_;
  bool centered_ = false;
};

class LogisticObjective final : public Objective {
 public:
  LogisticObjective(sparse_matrix_t design, vector_t labels, scalar_t lambda);

  bool convex() const override { return true; }
  std::optional<scalar_t> strong_convexity() const override;

 protected:
  scalar_t do_value(const vector_t& x) const override;
  void do_gradient(const vector_t& x, vector_t& out) const override;
  scalar_t do_value_and_gradient(const vector_t& x, vector_t& out) const override;

 private:
  sparse_matrix_t design_;
  vector_t labels_;
  scalar_t lambda_;
};

class HuberCompletionObjective final : public Objective {
 public:
  HuberCompletionObjective(std::vector<ObservedEntry> observed, index_t rows,
                           index_t cols, scalar_t delta);

  bool convex() const override { return true; }
  index_t rows() const { return rows_; }
  index_t cols() const { return cols_; }

 protected:
  scalar_t do_value(const vector_t& x) const override;
  void do_gradient(const vector_t& x, vector_t& out) const override;

 private:
  std::vector<ObservedEntry> observed_;
  index_t rows_, cols_;
  scalar_t delta_;
};

class DictionaryLearningObjective final : public Objective {
 public:
  DictionaryLearningObjective(matrix_t A_data, index_t p);

  index_t data_dim() const { return A_.rows(); }
  index_t n_samples() const { return A_.cols(); }
  index_t n_atoms() const { return p_; }

 protected:
  scalar_t do_value(const vector_t& x) const override;
  void do_gradient(const vector_t& x, vector_t& out) const override;
  scalar_t do_value_and_gradient(const vector_t& x, vector_t& out) const override;

 private:
  matrix_t A_;
  index_t p_;
};

// ---------------------------------------------------------------------------
// Gradient verification
// ---------------------------------------------------------------------------

/// Central finite differences with spacing h.
vector_t finite_diff_gradient(const Objective& objective, const vector_t& x,
                              scalar_t h);

/// Relative gradient error at x, minimized over the given spacings
/// (the checker reports the best-h error, not a fixed-h error).
scalar_t gradient_check_error(const Objective& objective, const vector_t& x,
                              const std::vector<scalar_t>& spacings = {1e-4, 1e-5,
                                                                       1e-6});

}  // namespace acfw

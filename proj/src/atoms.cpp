#include <acfw/atoms.hpp>
#include <acfw/random.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace acfw {

std::pair<int, vector_t> lmo_finite(const vector_t& grad,
                                    const std::vector<vector_t>& atoms) {
  if (atoms.empty()) throw std::invalid_argument("lmo_finite: empty atom list");
  int best = 0;
  scalar_t best_val = grad.dot(atoms[0]);
  for (int i = 1; i < static_cast<int>(atoms.size()); ++i) {
    const scalar_t val = grad.dot(atoms[i]);
    if (val < best_val) {
      best = i;
      best_val = val;
    }
  }
  return {best, atoms[best]};
}

std::pair<int, vector_t> lmo_l1_ball(const vector_t& grad, scalar_t beta) {
  if (beta <= 0.0) throw std::invalid_argument("lmo_l1_ball: beta must be positive");
  index_t best = 0;
  scalar_t best_mag = std::abs(grad[0]);
  for (index_t i = 1; i < grad.size(); ++i) {
    const scalar_t mag = std::abs(grad[i]);
    if (mag > best_mag) {
      best = i;
      best_mag = mag;
    }
  }
  vector_t v = vector_t::Zero(grad.size());
  if (best_mag == 0.0) {
    v[0] = beta;
    return {0, v};
  }
  const bool positive = grad[best] > 0.0;
  v[best] = positive ? -beta : beta;
  const int id = 2 * static_cast<int>(best) + (positive ? 1 : 0);
  return {id, v};
}

vector_t lmo_l2_ball(const vector_t& grad, scalar_t beta) {
  if (beta <= 0.0) throw std::invalid_argument("lmo_l2_ball: beta must be positive");
  const scalar_t norm = grad.norm();
  if (norm == 0.0) {
    vector_t v = vector_t::Zero(grad.size());
    v[0] = beta;
    return v;
  }
  return (-beta / norm) * grad;
}

namespace {

// Power iteration for the leading eigenpair of a symmetric PSD matrix.
// The stopping rule targets the Rayleigh value (the quantity the oracle
// guarantee is stated in): stop once the value stagnates to relative
// tolerance tol on three consecutive sweeps, or the eigen-residual is small.
bool leading_eigenpair(const matrix_t& B, scalar_t tol, int max_iters,
                       std::uint64_t seed, vector_t& v, scalar_t& theta,
                       scalar_t& residual) {
  Rng rng(seed);
  v = rng.unit_vector(B.rows());
  theta = 0.0;
  residual = std::numeric_limits<scalar_t>::infinity();
  int stagnant = 0;
  for (int it = 0; it < max_iters; ++it) {
    vector_t w = B * v;
    const scalar_t norm = w.norm();
    if (norm == 0.0) {
      // Gradient in the null space of the start vector; caller restarts.
      return false;
    }
    const scalar_t theta_new = v.dot(w);  // Rayleigh quotient at v
    residual = (w - theta_new * v).norm();
    const scalar_t scale = std::max(theta_new, scalar_t(1e-300));
    if (residual <= tol * scale) {
      theta = theta_new;
      v = w / norm;
      return true;
    }
    stagnant = std::abs(theta_new - theta) <= tol * scale ? stagnant + 1 : 0;
    theta = theta_new;
    v = w / norm;
    if (stagnant >= 3) return true;
  }
  return false;
}

}  // namespace

matrix_t lmo_nuclear_ball(const matrix_t& grad, scalar_t beta, scalar_t pi_tol,
                          int pi_max_iters) {
  if (beta <= 0.0)
    throw std::invalid_argument("lmo_nuclear_ball: beta must be positive");
  if (grad.norm() == 0.0)
    throw std::invalid_argument("lmo_nuclear_ball: zero gradient matrix");

  // Iterate on the smaller Gram matrix.
  const bool tall = grad.rows() >= grad.cols();
  const matrix_t B = tall ? matrix_t(grad.transpose() * grad)
                          : matrix_t(grad * grad.transpose());

  vector_t w;
  scalar_t theta = 0.0, residual = 0.0;
  // Deterministic start; one restart with a fresh seed on stagnation.
  bool ok = leading_eigenpair(B, pi_tol, pi_max_iters, 0x9e3779b97f4a7c15ULL, w,
                              theta, residual);
  if (!ok)
    ok = leading_eigenpair(B, pi_tol, pi_max_iters, 0xda942042e4dd58b5ULL, w,
                           theta, residual);
  if (!ok) {
    std::ostringstream msg;
    msg << "lmo_nuclear_ball: power iteration did not converge after "
        << pi_max_iters << " iterations (residual " << residual << ")";
    throw std::runtime_error(msg.str());
  }

  vector_t u1, v1;
  if (tall) {
    v1 = w;
    u1 = grad * v1;
  } else {
    u1 = w;
    v1 = grad.transpose() * u1;
  }
  const scalar_t sigma = tall ? u1.norm() : v1.norm();
  if (sigma == 0.0)
    throw std::runtime_error("lmo_nuclear_ball: degenerate singular pair");
  if (tall)
    u1 /= sigma;
  else
    v1 /= sigma;

  return -beta * (u1 * v1.transpose());
}

std::vector<vector_t> symmetrize(const std::vector<vector_t>& atoms) {
  std::vector<vector_t> out;
  out.reserve(2 * atoms.size());
  auto contains = [&out](const vector_t& a) {
    for (const auto& b : out)
      if (a.size() == b.size() && a == b) return true;
    return false;
  };
  for (const auto& a : atoms)
    if (!contains(a)) out.push_back(a);
  for (const auto& a : atoms) {
    vector_t neg = -a;
    if (!contains(neg)) out.push_back(std::move(neg));
  }
  return out;
}

scalar_t finite_diameter(const std::vector<vector_t>& atoms) {
  scalar_t best = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (std::size_t j = i + 1; j < atoms.size(); ++j)
      best = std::max(best, (atoms[i] - atoms[j]).norm());
  return best;
}

namespace {

bool is_symmetric_set(const std::vector<vector_t>& atoms) {
  for (const auto& a : atoms) {
    bool found = false;
    for (const auto& b : atoms)
      if ((a + b).norm() == 0.0) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

}  // namespace

Atom Dictionary::initial_atom(std::uint64_t seed) const {
  if (enumerable()) return {0, atoms_[0]};
  Rng rng(seed ^ 0x5851f42d4c957f2dULL);
  return lmo_(rng.normal_vector(dim_));
}

Dictionary Dictionary::finite(std::vector<vector_t> atoms, DomainKind kind) {
  if (atoms.empty())
    throw std::invalid_argument("Dictionary::finite: empty atom list");
  Dictionary d;
  d.kind_ = kind;
  d.dim_ = atoms[0].size();
  d.diameter_ = finite_diameter(atoms);
  d.symmetric_ = is_symmetric_set(atoms);
  d.atoms_ = std::move(atoms);
  const auto* stored = &d.atoms_;
  d.lmo_ = [stored](const vector_t& grad) {
    auto [id, v] = lmo_finite(grad, *stored);
    return Atom{id, std::move(v)};
  };
  return d;
}

Dictionary Dictionary::simplex(index_t dim) {
  std::vector<vector_t> atoms;
  atoms.reserve(dim);
  for (index_t i = 0; i < dim; ++i) {
    vector_t e = vector_t::Zero(dim);
    e[i] = 1.0;
    atoms.push_back(std::move(e));
  }
  return finite(std::move(atoms), DomainKind::ConvexHull);
}

Dictionary Dictionary::l1_ball(index_t dim, scalar_t beta, DomainKind kind,
                               bool enumerate) {
  if (beta <= 0.0)
    throw std::invalid_argument("Dictionary::l1_ball: beta must be positive");
  Dictionary d;
  d.kind_ = kind;
  d.dim_ = dim;
  d.diameter_ = 2.0 * beta;
  d.symmetric_ = true;
  if (enumerate) {
    // Enumeration order matches the id convention of lmo_l1_ball.
    d.atoms_.reserve(2 * dim);
    for (index_t i = 0; i < dim; ++i) {
      vector_t plus = vector_t::Zero(dim);
      plus[i] = beta;
      d.atoms_.push_back(plus);
      d.atoms_.push_back(-plus);
    }
  }
  d.lmo_ = [beta](const vector_t& grad) {
    auto [id, v] = lmo_l1_ball(grad, beta);
    return Atom{id, std::move(v)};
  };
  return d;
}

Dictionary Dictionary::l2_ball(index_t dim, scalar_t beta) {
  if (beta <= 0.0)
    throw std::invalid_argument("Dictionary::l2_ball: beta must be positive");
  Dictionary d;
  d.kind_ = DomainKind::ConvexHull;
  d.dim_ = dim;
  d.diameter_ = 2.0 * beta;
  d.symmetric_ = true;
  d.lmo_ = [beta](const vector_t& grad) {
    return Atom{kAnonymousAtom, lmo_l2_ball(grad, beta)};
  };
  return d;
}

Dictionary Dictionary::nuclear_ball(index_t rows, index_t cols, scalar_t beta,
                                    scalar_t pi_tol, int pi_max_iters) {
  if (beta <= 0.0)
    throw std::invalid_argument("Dictionary::nuclear_ball: beta must be positive");
  Dictionary d;
  d.kind_ = DomainKind::ConvexHull;
  d.dim_ = rows * cols;
  d.diameter_ = 2.0 * beta;  // Frobenius metric
  d.symmetric_ = true;
  d.nuclear_rows_ = rows;
  d.nuclear_cols_ = cols;
  d.lmo_ = [rows, cols, beta, pi_tol, pi_max_iters](const vector_t& grad) {
    // Matrix iterates are flattened row-major; the oracle reshapes internally.
    Eigen::Map<const row_matrix_t> g(grad.data(), rows, cols);
    const matrix_t v = lmo_nuclear_ball(g, beta, pi_tol, pi_max_iters);
    vector_t flat(rows * cols);
    Eigen::Map<row_matrix_t>(flat.data(), rows, cols) = v;
    return Atom{kAnonymousAtom, std::move(flat)};
  };
  return d;
}

Dictionary Dictionary::product(std::vector<Dictionary> blocks) {
  if (blocks.empty())
    throw std::invalid_argument("Dictionary::product: no blocks");
  Dictionary d;
  d.kind_ = DomainKind::ConvexHull;
  scalar_t sq = 0.0;
  index_t dim = 0;
  bool symmetric = true;
  for (const auto& b : blocks) {
    if (b.kind() != DomainKind::ConvexHull)
      throw std::invalid_argument("Dictionary::product: blocks must be convex-hull domains");
    sq += b.diameter() * b.diameter();
    dim += b.dim();
    symmetric = symmetric && b.symmetric();
  }
  d.dim_ = dim;
  d.diameter_ = std::sqrt(sq);
  d.symmetric_ = symmetric;
  auto shared = std::make_shared<std::vector<Dictionary>>(std::move(blocks));
  d.lmo_ = [shared, dim](const vector_t& grad) {
    vector_t v(dim);
    index_t offset = 0;
    for (const auto& b : *shared) {
      v.segment(offset, b.dim()) = b.lmo(grad.segment(offset, b.dim())).v;
      offset += b.dim();
    }
    return Atom{kAnonymousAtom, std::move(v)};
  };
  return d;
}

scalar_t fw_gap(const vector_t& grad, const vector_t& x, const Dictionary& dict) {
  const Atom v = dict.lmo(grad);
  if (dict.kind() == DomainKind::ConvexHull) return grad.dot(x - v.v);
  // Span case: max_v grad'v equals -min_v grad'v for symmetric dictionaries.
  if (!dict.symmetric())
    throw std::invalid_argument("fw_gap: linear-span gap requires a symmetric dictionary");
  return -grad.dot(v.v);
}

}  // namespace acfw

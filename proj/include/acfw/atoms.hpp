#pragma once

#include <acfw/types.hpp>

#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace acfw {

/// Whether the feasible set is the convex hull or the linear span of the atoms.
enum class DomainKind { ConvexHull, LinearSpan };

/// An atom returned by a linear minimization oracle. `id` is a stable integer
/// identifier for enumerable dictionaries; kAnonymousAtom marks oracle outputs
/// from continuous dictionaries, for which the caller assigns run-local ids.
struct Atom {
  int id = -1;
  vector_t v;
};

inline constexpr int kAnonymousAtom = -1;

// ---------------------------------------------------------------------------
// Free-function oracles
// ---------------------------------------------------------------------------

/// Exact argmin of grad'v over a finite atom list; lowest index wins ties.
std::pair<int, vector_t> lmo_finite(const vector_t& grad,
                                    const std::vector<vector_t>& atoms);

/// LMO over the l1 ball of radius beta. Atoms are the signed scaled basis
/// vectors; id 2i encodes +beta*e_i and 2i+1 encodes -beta*e_i. A zero
/// gradient returns +beta*e_0.
std::pair<int, vector_t> lmo_l1_ball(const vector_t& grad, scalar_t beta);

/// LMO over the l2 ball of radius beta: -beta*grad/|grad|. A zero gradient
/// returns +beta*e_0.
vector_t lmo_l2_ball(const vector_t& grad, scalar_t beta);

/// LMO over the nuclear-norm ball of radius beta: -beta * u1 v1' where
/// (u1, v1) is the leading singular pair of grad, computed by power iteration
/// on the Gram matrix of the smaller side. Throws std::runtime_error carrying
/// the residual if the iteration has not converged after pi_max_iters sweeps.
matrix_t lmo_nuclear_ball(const matrix_t& grad, scalar_t beta, scalar_t pi_tol,
                          int pi_max_iters);

/// Deduplicated union of the atom list with its negation.
std::vector<vector_t> symmetrize(const std::vector<vector_t>& atoms);

/// Exact max pairwise distance over a finite atom list.
scalar_t finite_diameter(const std::vector<vector_t>& atoms);

// ---------------------------------------------------------------------------
// Dictionary
// ---------------------------------------------------------------------------

/// An atomic domain: the only access to the feasible region is the LMO,
/// plus a diameter bound and optional enumeration. Immutable after
/// construction and safe for concurrent read-only use.
class Dictionary {
 public:
  DomainKind kind() const { return kind_; }
  index_t dim() const { return dim_; }
  scalar_t diameter() const { return diameter_; }
  bool symmetric() const { return symmetric_; }
  bool enumerable() const { return !atoms_.empty(); }
  const std::vector<vector_t>& atoms() const { return atoms_; }

  Atom lmo(const vector_t& grad) const { return lmo_(grad); }

  /// Deterministic element of the atom set used as x_{-1}: the first
  /// enumerated atom, or the LMO applied to a seeded random direction for
  /// continuous dictionaries.
  Atom initial_atom(std::uint64_t seed) const;

  // Factories ---------------------------------------------------------------

  static Dictionary finite(std::vector<vector_t> atoms, DomainKind kind);
  static Dictionary simplex(index_t dim);
  /// `enumerate` controls whether the 2*dim signed atoms are materialized;
  /// product blocks skip it to keep large instances cheap.
  static Dictionary l1_ball(index_t dim, scalar_t beta,
                            DomainKind kind = DomainKind::ConvexHull,
                            bool enumerate = true);
  static Dictionary l2_ball(index_t dim, scalar_t beta);
  static Dictionary nuclear_ball(index_t rows, index_t cols, scalar_t beta,
                                 scalar_t pi_tol = 1e-9,
                                 int pi_max_iters = 100000);
  /// Product of block domains; the LMO separates blockwise and the diameter
  /// is the l2 combination of the block diameters.
  static Dictionary product(std::vector<Dictionary> blocks);

  index_t nuclear_rows() const { return nuclear_rows_; }
  index_t nuclear_cols() const { return nuclear_cols_; }

 private:
  Dictionary() = default;

  DomainKind kind_ = DomainKind::ConvexHull;
  index_t dim_ = 0;
  scalar_t diameter_ = 0.0;
  bool symmetric_ = false;
  std::vector<vector_t> atoms_;  // empty when not enumerable
  std::function<Atom(const vector_t&)> lmo_;
  index_t nuclear_rows_ = 0, nuclear_cols_ = 0;
};

/// First-order stationarity measure: max_v grad'(x - v) over the hull, or
/// max_v grad'v over the span of a symmetric dictionary. Exactly one LMO call.
scalar_t fw_gap(const vector_t& grad, const vector_t& x, const Dictionary& dict);

}  // namespace acfw

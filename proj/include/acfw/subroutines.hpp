#pragma once

#include <acfw/types.hpp>

#include <limits>
#include <map>
#include <string>

namespace acfw {

enum class SubroutineKind { CFW, MP, PFW, AFW };

enum class StepKind { FW, AW, MP, PW };

std::string to_string(SubroutineKind kind);

/// Convex-combination certificate of the current iterate: atom identifiers
/// mapped to strictly positive weights, plus the atom vectors themselves.
/// Identity is the integer id; vector equality is never used.
class ActiveSet {
 public:
  ActiveSet() = default;

  /// Singleton certificate {atom -> 1}.
  ActiveSet(int id, vector_t atom);

  bool empty() const { return weights_.empty(); }
  std::size_t size() const { return weights_.size(); }
  scalar_t weight(int id) const;
  bool contains(int id) const { return weights_.count(id) > 0; }
  const vector_t& atom(int id) const;
  const std::map<int, scalar_t>& weights() const { return weights_; }

  scalar_t weight_sum() const;

  /// Convex combination sum alpha_s * s.
  vector_t reconstruct() const;

  /// Active atom maximizing grad's; lowest id wins ties.
  int argmax_atom(const vector_t& grad) const;

  /// Transfer mass gamma from atom `from` to atom `to` (pairwise update).
  /// No-op when not accepted. Weights at or below the pruning threshold
  /// are removed.
  void pairwise_update(bool accepted, int from, int to, const vector_t& to_atom,
                       scalar_t gamma);

  /// Scale all weights by (1-gamma) and add gamma on `to` (FW update).
  void fw_update(bool accepted, int to, const vector_t& to_atom, scalar_t gamma);

  /// Scale all weights by (1+gamma) and subtract gamma on `from` (away update).
  void away_update(bool accepted, int from, scalar_t gamma);

  /// Rescale weights to sum exactly one (periodic drift control).
  void renormalize();

  static constexpr scalar_t kPruneThreshold = 1e-12;

 private:
  void insert(int id, const vector_t& atom, scalar_t weight);
  void prune();

  std::map<int, scalar_t> weights_;
  std::map<int, vector_t> atoms_;
};

/// Search direction with its maximal admissible step. The iterate moves as
/// x - gamma*d for gamma in [0, gamma_max].
struct DirectionProposal {
  vector_t d;
  scalar_t gamma_max = 1.0;
  StepKind step_kind = StepKind::FW;
  int away_atom = kNoAtom;
  int fw_atom = kNoAtom;

  static constexpr int kNoAtom = -2;
  static constexpr scalar_t kUnbounded = std::numeric_limits<scalar_t>::infinity();
};

/// d = x - v, gamma_max = 1.
DirectionProposal cfw_direction(const vector_t& v, const vector_t& x);

/// d = -v, gamma_max unbounded (symmetric dictionaries only).
DirectionProposal mp_direction(const vector_t& v);

/// Pairwise step: d = s - v where s is the worst active atom under grad;
/// gamma_max is the transferable mass alpha_s.
DirectionProposal pfw_step(int v_id, const vector_t& v, const vector_t& x,
                           const ActiveSet& active, const vector_t& grad);

/// Away-step rule: picks the FW direction when grad'(x-v) >= grad'(s-x)
/// (ties go to FW), otherwise the away direction with
/// gamma_max = alpha_s/(1-alpha_s).
DirectionProposal afw_step(int v_id, const vector_t& v, const vector_t& x,
                           const ActiveSet& active, const vector_t& grad);

}  // namespace acfw

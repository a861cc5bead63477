#pragma once

#include <acfw/atoms.hpp>
#include <acfw/problems.hpp>
#include <acfw/subroutines.hpp>
#include <acfw/types.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace acfw {

// ---------------------------------------------------------------------------
// Step-size machinery
// ---------------------------------------------------------------------------

/// Local curvature estimate along the segment joining x and y:
///   2 |f(y) - f(x) - grad_x'(y-x)| / |y-x|^2,
/// and 0 when y is within the degeneracy threshold of x. All evaluations are
/// supplied by the caller; this function performs none.
template <typename DerivedG, typename DerivedX, typename DerivedY>
scalar_t local_lipschitz_estimate(scalar_t f_x, scalar_t f_y,
                                  const Eigen::MatrixBase<DerivedG>& grad_x,
                                  const Eigen::MatrixBase<DerivedX>& x,
                                  const Eigen::MatrixBase<DerivedY>& y) {
  if (!std::isfinite(f_x) || !std::isfinite(f_y))
    throw std::runtime_error("local_lipschitz_estimate: non-finite objective value");
  const scalar_t dist_sq = (y - x).squaredNorm();
  const scalar_t threshold = 1e-12 * (1.0 + x.norm());
  if (dist_sq <= threshold * threshold) return 0.0;
  const scalar_t deviation = f_y - f_x - grad_x.dot(y - x);
  if (!std::isfinite(deviation))
    throw std::runtime_error("local_lipschitz_estimate: non-finite deviation");
  return 2.0 * std::abs(deviation) / dist_sq;
}

/// Damping factor r_t = 1 - 1/((t+1) log^{1+delta}(t+3)), natural logarithm.
/// Lies in (0,1) for every t >= 0 and increases to 1.
scalar_t damping_factor(count_t t, scalar_t delta);

/// Closed-loop step: min{ grad'd / (L |d|^2), gamma_max }. Requires
/// grad_dot_d >= 0, L_t > 0 and d_norm_sq > 0; a vanishing direction means
/// the caller should have terminated instead.
scalar_t step_size(scalar_t grad_dot_d, scalar_t L_t, scalar_t d_norm_sq,
                   scalar_t gamma_max);

/// Estimate update L_{t+1} = max{ell, r_t L_t}; strictly positive whenever
/// L_t is.
scalar_t update_estimate(scalar_t ell, scalar_t r_t, scalar_t L_t);

/// Iteration classification: in_I_eta iff L_next <= eta*L_t (significant
/// descent), in_G iff gamma_max >= 1 or gamma < gamma_max (good iteration).
std::pair<bool, bool> classify_iteration(scalar_t L_t, scalar_t L_next,
                                         scalar_t gamma, scalar_t gamma_max,
                                         scalar_t eta);

/// Running curvature estimate. Positive after initialization flooring, and
/// never exceeds the global Lipschitz constant of the gradient.
struct LipschitzEstimate {
  scalar_t value = 0.0;
};

/// The damping sequence r_t together with its running product, which stays
/// strictly positive (the product converges for any delta > 0).
class DampingSchedule {
 public:
  explicit DampingSchedule(scalar_t delta);

  scalar_t delta() const { return delta_; }
  scalar_t cumulative_product() const { return cumulative_product_; }

  /// r_t for the given iteration, folded into the running product.
  scalar_t next(count_t t);

 private:
  scalar_t delta_;
  scalar_t cumulative_product_ = 1.0;
};

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

struct IterRecord {
  count_t t = 0;
  scalar_t f_value = 0.0;   // f(x_t), the value the acceptance test compares against
  scalar_t fw_gap = 0.0;    // stationarity gap at x_t
  scalar_t gamma = 0.0;
  scalar_t gamma_max = 0.0;  // +inf for unbounded steps
  scalar_t L_t = 0.0;
  scalar_t L_next = 0.0;
  bool accepted = false;
  bool in_I_eta = false;
  bool in_G = false;
  count_t n_f_evals = 0;     // cumulative, after this iteration
  count_t n_grad_evals = 0;
  count_t n_lmo_calls = 0;
  scalar_t elapsed = 0.0;    // seconds since run start
  // Diagnostics kept in memory for audits; not part of the CSV schema.
  scalar_t grad_dot_d = 0.0;
  scalar_t d_norm_sq = 0.0;
};

enum class RunStatus { Converged, MaxIters, MaxSeconds, Stationary, StationaryPair };

std::string to_string(RunStatus status);

struct RunSummary {
  RunStatus status = RunStatus::MaxIters;
  count_t iterations = 0;
  scalar_t final_value = 0.0;
  scalar_t final_gap = 0.0;
  count_t n_f_evals = 0;
  count_t n_grad_evals = 0;
  count_t n_lmo_calls = 0;
  scalar_t wall_seconds = 0.0;
};

struct TraceMeta {
  std::string problem;
  std::string method;      // "AC", "B", "FIXED", "OPEN"
  std::string subroutine;  // "CFW", "MP", "PFW", "AFW"
  std::uint64_t seed = 0;
  scalar_t eta = 1.5;
  scalar_t delta = 1.0;
  count_t atom_count = 0;  // 0 for continuous dictionaries
};

struct Trace {
  TraceMeta meta;
  std::vector<IterRecord> records;
  RunSummary summary;
  vector_t final_x;        // iterate at termination
  ActiveSet final_active;  // hull-domain certificate at termination
};

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

struct SolverConfig {
  count_t max_iters = 10000;
  scalar_t max_seconds = std::numeric_limits<scalar_t>::infinity();
  scalar_t gap_tol = 1e-8;
  scalar_t eta = 1.5;     // diagnostics only; the algorithm never consumes it
  scalar_t delta = 1.0;   // damping exponent
  scalar_t L_floor = 1e-12;
  std::uint64_t seed = 0;

  void validate() const;
};

/// The auto-conditioned outer loop. Initializes from x_{-1} in the atom set,
/// computes closed-loop steps from the running local Lipschitz estimate, and
/// accepts a trial point only when it strictly decreases the objective. One
/// objective evaluation per iteration (the trial value); gradients are
/// evaluated at accepted iterates only and cached across rejections.
Trace run(const Objective& objective, const Dictionary& dictionary,
          SubroutineKind subroutine, const SolverConfig& config);

}  // namespace acfw

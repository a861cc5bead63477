#pragma once

#include <acfw/core.hpp>

#include <optional>

namespace acfw {

/// Comparison step rules: open-loop schedule, closed loop with a fixed
/// global constant, and adaptive backtracking line search.
enum class StepRule { OpenLoop, FixedL, Backtracking };

std::string to_string(StepRule rule);

/// Open-loop schedule: 2/(t+2) in the convex setting, 1/sqrt(t+1) otherwise.
scalar_t open_loop_gamma(count_t t, bool convex);

/// Closed-loop step with a constant L; the same arithmetic as step_size.
scalar_t fixed_L_gamma(scalar_t grad_dot_d, scalar_t L, scalar_t d_norm_sq,
                       scalar_t gamma_max);

/// Working curvature estimate of the backtracking search.
struct BacktrackState {
  scalar_t L_hat = 1.0;
  scalar_t tau_up = 2.0;
  scalar_t tau_down = 0.9;
  count_t evals_this_iter = 0;

  void validate() const;
};

struct BacktrackResult {
  scalar_t gamma = 0.0;
  scalar_t f_new = 0.0;
  count_t evals = 0;
};

/// Sufficient-decrease search: repeatedly tries
///   gamma = min{grad'd/(L_hat |d|^2), gamma_max}
/// against f(x - gamma d) <= f_x - gamma grad'd + (L_hat/2) gamma^2 |d|^2,
/// doubling L_hat by tau_up on failure. f_x is the caller's cached value of
/// f(x); only trial evaluations are counted. The tentative tau_down shrink
/// between outer iterations is the driver's job, not this routine's.
/// Throws after 100 doublings.
BacktrackResult backtracking_step(const Objective& objective, const vector_t& x,
                                  scalar_t f_x, const vector_t& grad,
                                  const vector_t& d, scalar_t gamma_max,
                                  BacktrackState& state);

struct BaselineConfig {
  SolverConfig base;
  StepRule rule = StepRule::OpenLoop;
  /// Global constant for FixedL. When absent, the objective's analytic
  /// Lipschitz constant is used; an error is raised if neither is available.
  std::optional<scalar_t> fixed_L;
  /// Selects the open-loop schedule.
  bool convex = true;
  scalar_t tau_up = 2.0;
  scalar_t tau_down = 0.9;
};

/// Baseline driver sharing the subroutines, oracles, counters and trace
/// format of the auto-conditioned loop, so comparisons differ only in the
/// step rule. Open-loop and fixed-L steps are applied unconditionally, as in
/// the classic methods; the backtracking rule is monotone by construction.
Trace run_baseline(const Objective& objective, const Dictionary& dictionary,
                   SubroutineKind subroutine, const BaselineConfig& config);

}  // namespace acfw

#include <acfw/baselines.hpp>

#include "driver_detail.hpp"

namespace acfw {

std::string to_string(StepRule rule) {
  switch (rule) {
    case StepRule::OpenLoop: return "OPEN";
    case StepRule::FixedL: return "FIXED";
    case StepRule::Backtracking: return "B";
  }
  return "?";
}

scalar_t open_loop_gamma(count_t t, bool convex) {
  if (t < 0) throw std::invalid_argument("open_loop_gamma: t must be nonnegative");
  const scalar_t tf = static_cast<scalar_t>(t);
  return convex ? 2.0 / (tf + 2.0) : 1.0 / std::sqrt(tf + 1.0);
}

scalar_t fixed_L_gamma(scalar_t grad_dot_d, scalar_t L, scalar_t d_norm_sq,
                       scalar_t gamma_max) {
  return step_size(grad_dot_d, L, d_norm_sq, gamma_max);
}

void BacktrackState::validate() const {
  if (!(L_hat > 0.0)) throw std::invalid_argument("BacktrackState: L_hat <= 0");
  if (!(tau_up > 1.0)) throw std::invalid_argument("BacktrackState: tau_up <= 1");
  if (!(tau_down > 0.0 && tau_down <= 1.0))
    throw std::invalid_argument("BacktrackState: tau_down outside (0,1]");
}

BacktrackResult backtracking_step(const Objective& objective, const vector_t& x,
                                  scalar_t f_x, const vector_t& grad,
                                  const vector_t& d, scalar_t gamma_max,
                                  BacktrackState& state) {
  state.validate();
  const scalar_t grad_dot_d = grad.dot(d);
  const scalar_t d_norm_sq = d.squaredNorm();
  if (grad_dot_d < 0.0)
    throw std::invalid_argument("backtracking_step: grad'd must be nonnegative");
  if (d_norm_sq <= 0.0)
    throw std::invalid_argument("backtracking_step: zero direction");

  state.evals_this_iter = 0;
  vector_t trial(x.size());
  for (int doubling = 0; doubling <= 100; ++doubling) {
    const scalar_t gamma =
        std::min(grad_dot_d / (state.L_hat * d_norm_sq), gamma_max);
    trial = x - gamma * d;
    const scalar_t f_new = objective.value(trial);
    ++state.evals_this_iter;
    if (!std::isfinite(f_new))
      throw std::runtime_error("backtracking_step: non-finite objective value");
    const scalar_t bound = f_x - gamma * grad_dot_d +
                           0.5 * state.L_hat * gamma * gamma * d_norm_sq;
    if (f_new <= bound)
      return {gamma, f_new, state.evals_this_iter};
    state.L_hat *= state.tau_up;
  }
  throw std::runtime_error(
      "backtracking_step: no acceptable step after 100 doublings; "
      "the objective is likely inconsistent with its gradient");
}

Trace run_baseline(const Objective& objective, const Dictionary& dictionary,
                   SubroutineKind subroutine, const BaselineConfig& config) {
  config.base.validate();
  detail::check_compatibility(objective, dictionary, subroutine);
  if (config.rule == StepRule::OpenLoop && subroutine != SubroutineKind::CFW)
    throw std::invalid_argument("run_baseline: the open-loop schedule pairs with CFW only");

  const auto start = detail::clock_t::now();
  const EvalCounts base_counts = objective.counts();

  detail::InitResult init =
      detail::initialize(objective, dictionary, config.base.seed);
  detail::RunState& st = init.state;

  scalar_t fixed_L = 0.0;
  if (config.rule == StepRule::FixedL) {
    if (config.fixed_L)
      fixed_L = *config.fixed_L;
    else if (auto analytic = objective.lipschitz_constant())
      fixed_L = *analytic;
    else
      throw std::invalid_argument(
          "run_baseline: FIXED rule needs fixed_L or an analytic constant");
    if (fixed_L <= 0.0)
      throw std::invalid_argument("run_baseline: fixed_L must be positive");
  }

  BacktrackState bt;
  bt.tau_up = config.tau_up;
  bt.tau_down = config.tau_down;
  bt.L_hat = std::max(init.ell0, config.base.L_floor);

  Trace trace;
  trace.meta.method = to_string(config.rule);
  trace.meta.subroutine = to_string(subroutine);
  trace.meta.seed = config.base.seed;
  trace.meta.eta = config.base.eta;
  trace.meta.delta = config.base.delta;
  trace.meta.atom_count = static_cast<count_t>(dictionary.atoms().size());

  RunStatus status = RunStatus::MaxIters;
  scalar_t last_gap = std::numeric_limits<scalar_t>::quiet_NaN();

  count_t t = 0;
  for (; t < config.base.max_iters; ++t) {
    if (detail::seconds_since(start) > config.base.max_seconds) {
      status = RunStatus::MaxSeconds;
      break;
    }
    if (!st.grad_fresh) {
      st.grad = objective.gradient(st.x);
      st.grad_fresh = true;
    }

    detail::Proposal p = detail::propose(dictionary, subroutine, st);
    last_gap = p.gap;
    if (p.gap <= config.base.gap_tol) {
      status = RunStatus::Converged;
      break;
    }
    if (subroutine == SubroutineKind::PFW && p.dir.away_atom == p.v_id) {
      status = RunStatus::StationaryPair;
      break;
    }

    const scalar_t grad_dot_d = st.grad.dot(p.dir.d);
    const scalar_t d_norm_sq = p.dir.d.squaredNorm();
    if (grad_dot_d <= config.base.gap_tol * 1e-3 || std::sqrt(d_norm_sq) <= 1e-14) {
      status = RunStatus::Stationary;
      break;
    }

    scalar_t gamma = 0.0;
    scalar_t f_trial = 0.0;
    scalar_t L_record = 0.0;
    switch (config.rule) {
      case StepRule::OpenLoop: {
        gamma = std::min(open_loop_gamma(t, config.convex), p.dir.gamma_max);
        f_trial = objective.value(st.x - gamma * p.dir.d);
        break;
      }
      case StepRule::FixedL: {
        gamma = fixed_L_gamma(grad_dot_d, fixed_L, d_norm_sq, p.dir.gamma_max);
        L_record = fixed_L;
        f_trial = objective.value(st.x - gamma * p.dir.d);
        break;
      }
      case StepRule::Backtracking: {
        // Tentative decrease, then the sufficient-decrease search.
        bt.L_hat = std::max(bt.tau_down * bt.L_hat, config.base.L_floor);
        const scalar_t L_before = bt.L_hat;
        const BacktrackResult res = backtracking_step(
            objective, st.x, st.f_x, st.grad, p.dir.d, p.dir.gamma_max, bt);
        gamma = res.gamma;
        f_trial = res.f_new;
        L_record = L_before;
        break;
      }
    }
    if (!std::isfinite(f_trial))
      throw std::runtime_error("run_baseline: non-finite objective value");

    // Classic updates apply the step unconditionally; backtracking's test
    // already guarantees decrease.
    const bool accepted = true;
    const scalar_t L_next =
        config.rule == StepRule::Backtracking ? bt.L_hat : L_record;

    bool in_I_eta = true;
    bool in_G = p.dir.gamma_max >= 1.0 || gamma < p.dir.gamma_max;
    if (L_record > 0.0)
      std::tie(in_I_eta, in_G) = classify_iteration(
          L_record, L_next, gamma, p.dir.gamma_max, config.base.eta);

    detail::apply_update(subroutine, p, accepted, gamma, st);

    const EvalCounts now = objective.counts();
    IterRecord rec;
    rec.t = t;
    rec.f_value = st.f_x;
    rec.fw_gap = p.gap;
    rec.gamma = gamma;
    rec.gamma_max = p.dir.gamma_max;
    rec.L_t = L_record;
    rec.L_next = L_next;
    rec.accepted = accepted;
    rec.in_I_eta = in_I_eta;
    rec.in_G = in_G;
    rec.n_f_evals = now.n_value - base_counts.n_value;
    rec.n_grad_evals = now.n_gradient - base_counts.n_gradient;
    rec.n_lmo_calls = st.n_lmo;
    rec.elapsed = detail::seconds_since(start);
    rec.grad_dot_d = grad_dot_d;
    rec.d_norm_sq = d_norm_sq;
    trace.records.push_back(rec);

    st.x -= gamma * p.dir.d;
    st.f_x = f_trial;
    st.grad_fresh = false;
    detail::maintain_certificate(st, t);
  }

  const EvalCounts now = objective.counts();
  trace.summary.status = status;
  trace.summary.iterations = static_cast<count_t>(trace.records.size());
  trace.summary.final_value = st.f_x;
  trace.summary.final_gap = last_gap;
  trace.summary.n_f_evals = now.n_value - base_counts.n_value;
  trace.summary.n_grad_evals = now.n_gradient - base_counts.n_gradient;
  trace.summary.n_lmo_calls = st.n_lmo;
  trace.summary.wall_seconds = detail::seconds_since(start);
  trace.final_x = std::move(st.x);
  trace.final_active = std::move(st.active);
  return trace;
}

}  // namespace acfw

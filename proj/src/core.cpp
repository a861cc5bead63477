#include <acfw/core.hpp>

#include "driver_detail.hpp"

namespace acfw {

scalar_t damping_factor(count_t t, scalar_t delta) {
  if (t < 0) throw std::invalid_argument("damping_factor: t must be nonnegative");
  if (delta <= 0.0) throw std::invalid_argument("damping_factor: delta must be positive");
  const scalar_t log_term = std::log(static_cast<scalar_t>(t) + 3.0);
  return 1.0 - 1.0 / ((static_cast<scalar_t>(t) + 1.0) *
                      std::pow(log_term, 1.0 + delta));
}

scalar_t step_size(scalar_t grad_dot_d, scalar_t L_t, scalar_t d_norm_sq,
                   scalar_t gamma_max) {
  if (grad_dot_d < 0.0)
    throw std::invalid_argument("step_size: grad'd must be nonnegative");
  if (L_t <= 0.0) throw std::invalid_argument("step_size: L_t must be positive");
  if (d_norm_sq <= 0.0)
    throw std::invalid_argument("step_size: stationary direction, caller must terminate");
  return std::min(grad_dot_d / (L_t * d_norm_sq), gamma_max);
}

scalar_t update_estimate(scalar_t ell, scalar_t r_t, scalar_t L_t) {
  if (!(ell >= 0.0) || !(r_t > 0.0) || !(L_t > 0.0) || !std::isfinite(ell))
    throw std::invalid_argument("update_estimate: invalid inputs");
  return std::max(ell, r_t * L_t);
}

std::pair<bool, bool> classify_iteration(scalar_t L_t, scalar_t L_next,
                                         scalar_t gamma, scalar_t gamma_max,
                                         scalar_t eta) {
  if (L_t <= 0.0)
    throw std::invalid_argument("classify_iteration: L_t must be positive");
  const bool in_I_eta = L_next <= eta * L_t;
  const bool in_G = gamma_max >= 1.0 || gamma < gamma_max;
  return {in_I_eta, in_G};
}

DampingSchedule::DampingSchedule(scalar_t delta) : delta_(delta) {
  if (delta <= 0.0)
    throw std::invalid_argument("DampingSchedule: delta must be positive");
}

scalar_t DampingSchedule::next(count_t t) {
  const scalar_t r = damping_factor(t, delta_);
  cumulative_product_ *= r;
  return r;
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Converged: return "converged";
    case RunStatus::MaxIters: return "max-iters";
    case RunStatus::MaxSeconds: return "max-seconds";
    case RunStatus::Stationary: return "stationary";
    case RunStatus::StationaryPair: return "stationary-pair";
  }
  return "?";
}

void SolverConfig::validate() const {
  if (max_iters < 0) throw std::invalid_argument("SolverConfig: max_iters < 0");
  if (!(eta > 1.0 && eta < 2.0))
    throw std::invalid_argument("SolverConfig: eta must lie in (1,2)");
  if (gap_tol < 0.0) throw std::invalid_argument("SolverConfig: gap_tol < 0");
  if (delta <= 0.0) throw std::invalid_argument("SolverConfig: delta <= 0");
  if (L_floor <= 0.0) throw std::invalid_argument("SolverConfig: L_floor <= 0");
  if (!(max_seconds > 0.0)) throw std::invalid_argument("SolverConfig: max_seconds <= 0");
}

Trace run(const Objective& objective, const Dictionary& dictionary,
          SubroutineKind subroutine, const SolverConfig& config) {
  config.validate();
  detail::check_compatibility(objective, dictionary, subroutine);

  const auto start = detail::clock_t::now();
  const EvalCounts base = objective.counts();

  detail::InitResult init = detail::initialize(objective, dictionary, config.seed);
  detail::RunState& st = init.state;
  // L_0 floored away from zero so the first step stays finite.
  LipschitzEstimate estimate{std::max(init.ell0, config.L_floor)};
  DampingSchedule damping(config.delta);

  Trace trace;
  trace.meta.method = "AC";
  trace.meta.subroutine = to_string(subroutine);
  trace.meta.seed = config.seed;
  trace.meta.eta = config.eta;
  trace.meta.delta = config.delta;
  trace.meta.atom_count = static_cast<count_t>(dictionary.atoms().size());

  RunStatus status = RunStatus::MaxIters;
  scalar_t last_gap = std::numeric_limits<scalar_t>::quiet_NaN();

  count_t t = 0;
  for (; t < config.max_iters; ++t) {
    if (detail::seconds_since(start) > config.max_seconds) {
      status = RunStatus::MaxSeconds;
      break;
    }
    if (!st.grad_fresh) {
      st.grad = objective.gradient(st.x);
      st.grad_fresh = true;
    }

    detail::Proposal p = detail::propose(dictionary, subroutine, st);
    last_gap = p.gap;
    if (p.gap <= config.gap_tol) {
      status = RunStatus::Converged;
      break;
    }
    if (subroutine == SubroutineKind::PFW && p.dir.away_atom == p.v_id) {
      // The pairwise update is undefined when both atoms coincide; stop here.
      status = RunStatus::StationaryPair;
      break;
    }

    const scalar_t grad_dot_d = st.grad.dot(p.dir.d);
    const scalar_t d_norm_sq = p.dir.d.squaredNorm();
    if (grad_dot_d <= config.gap_tol * 1e-3 || std::sqrt(d_norm_sq) <= 1e-14) {
      status = RunStatus::Stationary;
      break;
    }

    const scalar_t gamma =
        step_size(grad_dot_d, estimate.value, d_norm_sq, p.dir.gamma_max);
    const vector_t x_trial = st.x - gamma * p.dir.d;
    const scalar_t f_trial = objective.value(x_trial);
    if (!std::isfinite(f_trial))
      throw std::runtime_error("run: non-finite objective value at the trial point");

    const scalar_t ell =
        local_lipschitz_estimate(st.f_x, f_trial, st.grad, st.x, x_trial);
    const scalar_t r_t = damping.next(t);
    const scalar_t L_next = update_estimate(ell, r_t, estimate.value);

    // Strict decrease only; ties reject.
    const bool accepted = f_trial < st.f_x;
    const auto [in_I_eta, in_G] = classify_iteration(
        estimate.value, L_next, gamma, p.dir.gamma_max, config.eta);

    detail::apply_update(subroutine, p, accepted, gamma, st);

    const EvalCounts now = objective.counts();
    IterRecord rec;
    rec.t = t;
    rec.f_value = st.f_x;
    rec.fw_gap = p.gap;
    rec.gamma = gamma;
    rec.gamma_max = p.dir.gamma_max;
    rec.L_t = estimate.value;
    rec.L_next = L_next;
    rec.accepted = accepted;
    rec.in_I_eta = in_I_eta;
    rec.in_G = in_G;
    rec.n_f_evals = now.n_value - base.n_value;
    rec.n_grad_evals = now.n_gradient - base.n_gradient;
    rec.n_lmo_calls = st.n_lmo;
    rec.elapsed = detail::seconds_since(start);
    rec.grad_dot_d = grad_dot_d;
    rec.d_norm_sq = d_norm_sq;
    trace.records.push_back(rec);

    if (accepted) {
      st.x = x_trial;
      st.f_x = f_trial;
      st.grad_fresh = false;  // reuse f_trial; the gradient is re-evaluated next iteration
    }
    estimate.value = L_next;
    detail::maintain_certificate(st, t);
  }

  const EvalCounts now = objective.counts();
  trace.summary.status = status;
  trace.summary.iterations = static_cast<count_t>(trace.records.size());
  trace.summary.final_value = st.f_x;
  trace.summary.final_gap = last_gap;
  trace.summary.n_f_evals = now.n_value - base.n_value;
  trace.summary.n_grad_evals = now.n_gradient - base.n_gradient;
  trace.summary.n_lmo_calls = st.n_lmo;
  trace.summary.wall_seconds = detail::seconds_since(start);
  trace.final_x = std::move(st.x);
  trace.final_active = std::move(st.active);
  return trace;
}

}  // namespace acfw

#pragma once

// Internals shared by the auto-conditioned driver and the baseline drivers:
// initialization from x_{-1}, atom-id bookkeeping, subroutine dispatch, and
// active-set maintenance. Not part of the public surface.

#include <acfw/atoms.hpp>
#include <acfw/core.hpp>
#include <acfw/problems.hpp>
#include <acfw/subroutines.hpp>

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace acfw::detail {

using clock_t = std::chrono::steady_clock;

inline scalar_t seconds_since(clock_t::time_point start) {
  return std::chrono::duration<scalar_t>(clock_t::now() - start).count();
}

inline void check_compatibility(const Objective& objective,
                                const Dictionary& dictionary,
                                SubroutineKind subroutine) {
  if (objective.dimension() != dictionary.dim())
    throw std::invalid_argument("run: objective/dictionary dimension mismatch");
  switch (subroutine) {
    case SubroutineKind::CFW:
      if (dictionary.kind() != DomainKind::ConvexHull)
        throw std::invalid_argument("CFW requires a convex-hull domain");
      break;
    case SubroutineKind::MP:
      if (dictionary.kind() != DomainKind::LinearSpan)
        throw std::invalid_argument("MP requires a linear-span domain");
      if (!dictionary.symmetric())
        throw std::invalid_argument("MP requires a symmetric dictionary");
      break;
    case SubroutineKind::PFW:
    case SubroutineKind::AFW:
      if (dictionary.kind() != DomainKind::ConvexHull)
        throw std::invalid_argument("PFW/AFW require a convex-hull domain");
      if (!dictionary.enumerable())
        throw std::invalid_argument("PFW/AFW require a finite dictionary");
      break;
  }
}

struct RunState {
  vector_t x;
  scalar_t f_x = 0.0;
  vector_t grad;
  bool grad_fresh = false;
  ActiveSet active;
  bool hull = false;
  count_t n_lmo = 0;
  int next_anon_id = 0;

  int register_atom(const Atom& a) {
    return a.id != kAnonymousAtom ? a.id : next_anon_id++;
  }
};

struct InitResult {
  RunState state;
  scalar_t ell0 = 0.0;  // ell(x_{-1}, x_0), before flooring
};

// x_{-1} from the dictionary, x_0 from one LMO at grad f(x_{-1}), and the
// initial curvature probe. Costs two value evaluations, one gradient
// evaluation, and one LMO call.
inline InitResult initialize(const Objective& objective,
                             const Dictionary& dictionary,
                             std::uint64_t seed) {
  InitResult out;
  RunState& st = out.state;
  st.hull = dictionary.kind() == DomainKind::ConvexHull;

  const Atom x_init = dictionary.initial_atom(seed);
  auto [f_init, g_init] = objective.value_and_gradient(x_init.v);
  if (!std::isfinite(f_init))
    throw std::runtime_error("run: non-finite objective value at the initial atom");

  Atom x0 = dictionary.lmo(g_init);
  st.n_lmo = 1;
  const scalar_t f0 = objective.value(x0.v);
  if (!std::isfinite(f0))
    throw std::runtime_error("run: non-finite objective value at x_0");

  out.ell0 = local_lipschitz_estimate(f_init, f0, g_init, x_init.v, x0.v);

  const int x0_id = st.register_atom(x0);
  if (st.hull) st.active = ActiveSet(x0_id, x0.v);
  st.x = std::move(x0.v);
  st.f_x = f0;
  return out;
}

struct Proposal {
  DirectionProposal dir;
  int v_id = DirectionProposal::kNoAtom;
  vector_t v_vec;
  scalar_t gap = 0.0;
};

// One LMO call plus the subroutine dispatch; also reports the gap at x.
inline Proposal propose(const Dictionary& dictionary, SubroutineKind subroutine,
                        RunState& st) {
  Proposal out;
  Atom v = dictionary.lmo(st.grad);
  ++st.n_lmo;
  out.v_id = st.register_atom(v);
  out.gap = dictionary.kind() == DomainKind::ConvexHull
                ? st.grad.dot(st.x - v.v)
                : -st.grad.dot(v.v);
  switch (subroutine) {
    case SubroutineKind::CFW:
      out.dir = cfw_direction(v.v, st.x);
      break;
    case SubroutineKind::MP:
      out.dir = mp_direction(v.v);
      break;
    case SubroutineKind::PFW:
      out.dir = pfw_step(out.v_id, v.v, st.x, st.active, st.grad);
      break;
    case SubroutineKind::AFW:
      out.dir = afw_step(out.v_id, v.v, st.x, st.active, st.grad);
      break;
  }
  out.v_vec = std::move(v.v);
  return out;
}

// Weight maintenance after the accept/reject decision.
inline void apply_update(SubroutineKind subroutine, const Proposal& p,
                         bool accepted, scalar_t gamma, RunState& st) {
  switch (subroutine) {
    case SubroutineKind::CFW:
      st.active.fw_update(accepted, p.v_id, p.v_vec, gamma);
      break;
    case SubroutineKind::MP:
      break;
    case SubroutineKind::PFW:
      st.active.pairwise_update(accepted, p.dir.away_atom, p.v_id, p.v_vec, gamma);
      break;
    case SubroutineKind::AFW:
      if (p.dir.step_kind == StepKind::FW)
        st.active.fw_update(accepted, p.v_id, p.v_vec, gamma);
      else
        st.active.away_update(accepted, p.dir.away_atom, gamma);
      break;
  }
}

// Periodic certificate re-check and drift control. The certificate is never
// used to overwrite the iterate.
inline void maintain_certificate(RunState& st, count_t t) {
  if (!st.hull || (t + 1) % 512 != 0) return;
  const vector_t rebuilt = st.active.reconstruct();
  const scalar_t err = (rebuilt - st.x).norm();
  if (err > 1e-8 * (1.0 + st.x.norm()))
    throw std::runtime_error("run: active-set certificate drifted from the iterate");
  st.active.renormalize();
}

}  // namespace acfw::detail

#include <acfw/subroutines.hpp>

#include <stdexcept>

namespace acfw {

std::string to_string(SubroutineKind kind) {
  switch (kind) {
    case SubroutineKind::CFW: return "CFW";
    case SubroutineKind::MP: return "MP";
    case SubroutineKind::PFW: return "PFW";
    case SubroutineKind::AFW: return "AFW";
  }
  return "?";
}

ActiveSet::ActiveSet(int id, vector_t atom) {
  weights_[id] = 1.0;
  atoms_[id] = std::move(atom);
}

scalar_t ActiveSet::weight(int id) const {
  auto it = weights_.find(id);
  return it == weights_.end() ? 0.0 : it->second;
}

const vector_t& ActiveSet::atom(int id) const {
  auto it = atoms_.find(id);
  if (it == atoms_.end())
    throw std::invalid_argument("ActiveSet: unknown atom id " + std::to_string(id));
  return it->second;
}

scalar_t ActiveSet::weight_sum() const {
  scalar_t s = 0.0;
  for (const auto& [id, w] : weights_) s += w;
  return s;
}

vector_t ActiveSet::reconstruct() const {
  if (weights_.empty())
    throw std::invalid_argument("ActiveSet::reconstruct: empty active set");
  vector_t x = vector_t::Zero(atoms_.begin()->second.size());
  for (const auto& [id, w] : weights_) x += w * atoms_.at(id);
  return x;
}

int ActiveSet::argmax_atom(const vector_t& grad) const {
  if (weights_.empty())
    throw std::invalid_argument("ActiveSet::argmax_atom: empty active set");
  int best = -1;
  scalar_t best_val = -std::numeric_limits<scalar_t>::infinity();
  // std::map iterates ids in increasing order, so ties keep the lowest id.
  for (const auto& [id, w] : weights_) {
    const scalar_t val = grad.dot(atoms_.at(id));
    if (val > best_val) {
      best = id;
      best_val = val;
    }
  }
  return best;
}

void ActiveSet::insert(int id, const vector_t& atom, scalar_t weight) {
  auto [it, inserted] = weights_.try_emplace(id, 0.0);
  it->second += weight;
  if (inserted) atoms_[id] = atom;
}

void ActiveSet::prune() {
  for (auto it = weights_.begin(); it != weights_.end();) {
    if (it->second <= kPruneThreshold) {
      atoms_.erase(it->first);
      it = weights_.erase(it);
    } else {
      ++it;
    }
  }
}

void ActiveSet::pairwise_update(bool accepted, int from, int to,
                                const vector_t& to_atom, scalar_t gamma) {
  if (!accepted) return;
  auto it = weights_.find(from);
  if (it == weights_.end())
    throw std::invalid_argument("ActiveSet::pairwise_update: unknown source atom");
  if (gamma < 0.0 || gamma > it->second + kPruneThreshold)
    throw std::invalid_argument("ActiveSet::pairwise_update: gamma exceeds source mass");
  it->second -= gamma;
  insert(to, to_atom, gamma);
  prune();
}

void ActiveSet::fw_update(bool accepted, int to, const vector_t& to_atom,
                          scalar_t gamma) {
  if (!accepted) return;
  for (auto& [id, w] : weights_) w *= (1.0 - gamma);
  insert(to, to_atom, gamma);
  prune();
}

void ActiveSet::away_update(bool accepted, int from, scalar_t gamma) {
  if (!accepted) return;
  if (weights_.count(from) == 0)
    throw std::invalid_argument("ActiveSet::away_update: unknown away atom");
  for (auto& [id, w] : weights_) w *= (1.0 + gamma);
  weights_[from] -= gamma;
  if (weights_[from] < -kPruneThreshold)
    throw std::invalid_argument("ActiveSet::away_update: gamma exceeds the admissible ratio");
  if (weights_[from] < 0.0) weights_[from] = 0.0;
  prune();
}

void ActiveSet::renormalize() {
  const scalar_t s = weight_sum();
  if (s <= 0.0) return;
  for (auto& [id, w] : weights_) w /= s;
}

DirectionProposal cfw_direction(const vector_t& v, const vector_t& x) {
  DirectionProposal p;
  p.d = x - v;
  p.gamma_max = 1.0;
  p.step_kind = StepKind::FW;
  return p;
}

DirectionProposal mp_direction(const vector_t& v) {
  DirectionProposal p;
  p.d = -v;
  p.gamma_max = DirectionProposal::kUnbounded;
  p.step_kind = StepKind::MP;
  return p;
}

DirectionProposal pfw_step(int v_id, const vector_t& v, const vector_t& x,
                           const ActiveSet& active, const vector_t& grad) {
  if (active.empty())
    throw std::invalid_argument("pfw_step: empty active set");
  (void)x;
  const int s_id = active.argmax_atom(grad);
  DirectionProposal p;
  p.d = active.atom(s_id) - v;
  p.gamma_max = active.weight(s_id);
  p.step_kind = StepKind::PW;
  p.away_atom = s_id;
  p.fw_atom = v_id;
  return p;
}

DirectionProposal afw_step(int v_id, const vector_t& v, const vector_t& x,
                           const ActiveSet& active, const vector_t& grad) {
  if (active.empty())
    throw std::invalid_argument("afw_step: empty active set");
  const int s_id = active.argmax_atom(grad);
  const scalar_t fw_score = grad.dot(x - v);
  const scalar_t aw_score = grad.dot(active.atom(s_id) - x);
  DirectionProposal p;
  if (fw_score >= aw_score) {
    p.d = x - v;
    p.gamma_max = 1.0;
    p.step_kind = StepKind::FW;
    p.fw_atom = v_id;
  } else {
    const scalar_t alpha = active.weight(s_id);
    p.d = active.atom(s_id) - x;
    p.gamma_max = alpha >= 1.0 ? DirectionProposal::kUnbounded
                               : alpha / (1.0 - alpha);
    p.step_kind = StepKind::AW;
    p.away_atom = s_id;
  }
  return p;
}

}  // namespace acfw

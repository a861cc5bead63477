#include <acfw/verify.hpp>

#include <acfw/random.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace acfw {

// ---------------------------------------------------------------------------
// Brute-force hull minimum
// ---------------------------------------------------------------------------

namespace {

scalar_t hull_value(const Objective& objective,
                    const std::vector<vector_t>& atoms,
                    const std::vector<scalar_t>& weights) {
  vector_t x = vector_t::Zero(atoms[0].size());
  for (std::size_t i = 0; i < atoms.size(); ++i) x += weights[i] * atoms[i];
  return objective.value(x);
}

}  // namespace

scalar_t brute_force_reference(const Objective& objective,
                               const Dictionary& dictionary, int grid_k) {
  const auto& atoms = dictionary.atoms();
  if (atoms.empty() || atoms.size() > 4)
    throw std::invalid_argument("brute_force_reference: needs 1..4 atoms");
  if (grid_k < 1 || grid_k > 200)
    throw std::invalid_argument("brute_force_reference: grid_k must lie in [1,200]");

  const int n = static_cast<int>(atoms.size());
  std::vector<scalar_t> best_w(n, 0.0);
  scalar_t best = std::numeric_limits<scalar_t>::infinity();

  std::vector<int> counts(n, 0);
  // Enumerate integer compositions of grid_k into n parts.
  auto evaluate = [&](const std::vector<int>& c) {
    std::vector<scalar_t> w(n);
    for (int i = 0; i < n; ++i)
      w[i] = static_cast<scalar_t>(c[i]) / static_cast<scalar_t>(grid_k);
    const scalar_t f = hull_value(objective, atoms, w);
    if (f < best) {
      best = f;
      best_w = w;
    }
  };
  if (n == 1) {
    counts[0] = grid_k;
    evaluate(counts);
  } else if (n == 2) {
    for (int a = 0; a <= grid_k; ++a) {
      counts = {a, grid_k - a};
      evaluate(counts);
    }
  } else if (n == 3) {
    for (int a = 0; a <= grid_k; ++a)
      for (int b = 0; a + b <= grid_k; ++b) {
        counts = {a, b, grid_k - a - b};
        evaluate(counts);
      }
  } else {
    for (int a = 0; a <= grid_k; ++a)
      for (int b = 0; a + b <= grid_k; ++b)
        for (int c = 0; a + b + c <= grid_k; ++c) {
          counts = {a, b, c, grid_k - a - b - c};
          evaluate(counts);
        }
  }

  // Local pairwise refinement with halving step.
  scalar_t h = 1.0 / static_cast<scalar_t>(grid_k);
  std::vector<scalar_t> w = best_w;
  while (h > 1e-12) {
    bool improved = false;
    for (int i = 0; i < n; ++i) {
      if (w[i] < h) continue;
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        std::vector<scalar_t> trial = w;
        trial[i] -= h;
        trial[j] += h;
        const scalar_t f = hull_value(objective, atoms, trial);
        if (f < best) {
          best = f;
          w = trial;
          improved = true;
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  return best;
}

// ---------------------------------------------------------------------------
// l2-ball constrained quadratic (KKT secular equation)
// ---------------------------------------------------------------------------

std::pair<scalar_t, vector_t> constrained_quadratic_l2_reference(
    const vector_t& q_diag, const vector_t& center, scalar_t beta) {
  if (beta <= 0.0)
    throw std::invalid_argument("constrained_quadratic_l2_reference: beta <= 0");
  if (q_diag.minCoeff() <= 0.0)
    throw std::invalid_argument("constrained_quadratic_l2_reference: q must be positive");
  if (center.norm() <= beta) {
    return {0.0, center};
  }
  // x(nu)_i = q_i c_i / (q_i + nu); |x(nu)| decreases from |c| to 0 on nu >= 0.
  auto radius = [&](scalar_t nu) {
    scalar_t s = 0.0;
    for (index_t i = 0; i < center.size(); ++i) {
      const scalar_t xi = q_diag[i] * center[i] / (q_diag[i] + nu);
      s += xi * xi;
    }
    return std::sqrt(s);
  };
  scalar_t lo = 0.0, hi = 1.0;
  while (radius(hi) > beta) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const scalar_t mid = 0.5 * (lo + hi);
    if (radius(mid) > beta)
      lo = mid;
    else
      hi = mid;
  }
  const scalar_t nu = 0.5 * (lo + hi);
  vector_t x(center.size());
  for (index_t i = 0; i < center.size(); ++i)
    x[i] = q_diag[i] * center[i] / (q_diag[i] + nu);
  const vector_t d = x - center;
  return {0.5 * d.dot(q_diag.cwiseProduct(d)), x};
}

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

SlopeFit rate_slope(const Trace& trace, RateMetric metric, count_t t_lo,
                    count_t t_hi, RateModel model,
                    std::optional<scalar_t> f_star) {
  if (t_lo > t_hi) throw std::invalid_argument("rate_slope: empty window");
  if (metric == RateMetric::FGap && !f_star)
    throw std::invalid_argument("rate_slope: the f-gap metric needs f_star");

  std::vector<scalar_t> xs, ys;
  for (const auto& rec : trace.records) {
    if (rec.t < t_lo || rec.t > t_hi) continue;
    const scalar_t m =
        metric == RateMetric::Gap ? rec.fw_gap : rec.f_value - *f_star;
    if (!(m > 0.0)) continue;
    if (model == RateModel::LogLog && rec.t < 1) continue;
    xs.push_back(model == RateModel::LogLog
                     ? std::log(static_cast<scalar_t>(rec.t))
                     : static_cast<scalar_t>(rec.t));
    ys.push_back(std::log(m));
  }
  SlopeFit fit;
  fit.n_points = static_cast<count_t>(xs.size());
  if (xs.size() < 2) return fit;

  const scalar_t n = static_cast<scalar_t>(xs.size());
  scalar_t sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const scalar_t mx = sx / n, my = sy / n;
  scalar_t sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const scalar_t dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  scalar_t ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const scalar_t r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

// ---------------------------------------------------------------------------
// Trace audit
// ---------------------------------------------------------------------------

bool AuditReport::all_passed() const {
  for (const auto& c : checks)
    if (c.applicable && !c.passed) return false;
  return true;
}

std::string AuditReport::to_string() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.applicable ? (c.passed ? "[PASS] " : "[FAIL] ") : "[ -- ] ")
        << c.name;
    if (!c.detail.empty()) out << ": " << c.detail;
    out << "\n";
  }
  return out.str();
}

namespace {

std::string format_count(count_t got, scalar_t bound) {
  std::ostringstream out;
  out << "count " << got << " vs bound " << bound;
  return out.str();
}

}  // namespace

AuditReport audit_trace(const Trace& trace, const RateCertificate& certificate,
                        scalar_t eta) {
  if (!(eta > 1.0))
    throw std::invalid_argument("audit_trace: eta must exceed 1");
  AuditReport report;
  const auto& recs = trace.records;
  const std::size_t n = recs.size();
  const bool is_ac = trace.meta.method == "AC";
  const bool monotone_method = is_ac || trace.meta.method == "B";

  // Recomputed membership flags; the last record falls back to the stored
  // flag when L_next is unavailable (CSV-loaded traces).
  std::vector<char> in_I(n, 1), in_G(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    scalar_t L_next = recs[i].L_next;
    if (L_next <= 0.0 && i + 1 < n) L_next = recs[i + 1].L_t;
    in_I[i] = (L_next > 0.0 && recs[i].L_t > 0.0)
                  ? (L_next <= eta * recs[i].L_t)
                  : recs[i].in_I_eta;
    in_G[i] = recs[i].gamma_max >= 1.0 || recs[i].gamma < recs[i].gamma_max;
  }

  // Monotone objective values (strict-decrease acceptance implies f(x_t)
  // never increases, exactly).
  {
    AuditCheck c;
    c.name = "monotone-objective";
    c.applicable = monotone_method && n > 0;
    for (std::size_t i = 1; c.applicable && i < n; ++i) {
      if (recs[i].f_value > recs[i - 1].f_value) {
        c.passed = false;
        c.detail = "f increased at t=" + std::to_string(recs[i].t);
        break;
      }
    }
    if (c.applicable && c.passed && n > 0 &&
        trace.summary.final_value > recs[n - 1].f_value) {
      c.passed = false;
      c.detail = "final value exceeds last recorded value";
    }
    report.checks.push_back(std::move(c));
  }

  // Estimate ceiling L_t <= L.
  {
    AuditCheck c;
    c.name = "lipschitz-ceiling";
    c.applicable = is_ac && certificate.L.has_value() && n > 0;
    if (c.applicable) {
      const scalar_t L = certificate.L->value;
      for (std::size_t i = 0; i < n; ++i) {
        if (recs[i].L_t > L + 1e-9 || recs[i].L_next > L + 1e-9) {
          c.passed = false;
          std::ostringstream msg;
          msg << "L_t=" << std::max(recs[i].L_t, recs[i].L_next)
              << " exceeds L=" << L << " at t=" << recs[i].t;
          c.detail = msg.str();
          break;
        }
      }
    }
    report.checks.push_back(std::move(c));
  }

  // Cardinality of non-significant-descent iterations, every prefix.
  // Uses the tracked damping product over the horizon plus one slack index.
  {
    AuditCheck c;
    c.name = "bad-iteration-cardinality";
    c.applicable = is_ac && certificate.L.has_value() && n > 0;
    if (c.applicable) {
      const scalar_t L = certificate.L->value;
      const scalar_t L0 = recs[0].L_t;
      scalar_t r_product = 1.0;
      count_t bad = 0;
      for (std::size_t i = 0; i < n; ++i) {
        r_product *= damping_factor(recs[i].t, trace.meta.delta);
        if (!in_I[i]) ++bad;
        const scalar_t bound =
            std::floor(std::log(L / (r_product * L0)) / std::log(eta)) + 1.0;
        if (static_cast<scalar_t>(bad) > bound) {
          c.passed = false;
          c.detail = "at t=" + std::to_string(recs[i].t) + ", " +
                     format_count(bad, bound);
          break;
        }
      }
    }
    report.checks.push_back(std::move(c));
  }

  // Per-iteration descent on accepted significant-descent iterations.
  {
    AuditCheck c;
    c.name = "one-step-descent";
    c.applicable = is_ac && n > 0;
    if (c.applicable) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!in_I[i] || !recs[i].accepted) continue;
        // The last step's outcome is only known when the summary carries a
        // genuine post-step value (CSV-loaded traces do not).
        if (i + 1 == n && !(trace.summary.final_value < recs[i].f_value))
          continue;
        const scalar_t f_next =
            i + 1 < n ? recs[i + 1].f_value : trace.summary.final_value;
        // grad'd is carried by in-memory traces; CSV-loaded traces fall back
        // to the gap, a valid lower bound on grad'd for every subroutine.
        const scalar_t gd =
            recs[i].grad_dot_d > 0.0 ? recs[i].grad_dot_d : recs[i].fw_gap;
        const scalar_t bound =
            recs[i].f_value - (1.0 - eta / 2.0) * recs[i].gamma * gd + 1e-12;
        if (f_next > bound) {
          c.passed = false;
          std::ostringstream msg;
          msg << "violated at t=" << recs[i].t << " (f_next=" << f_next
              << ", bound=" << bound << ")";
          c.detail = msg.str();
          break;
        }
      }
    }
    report.checks.push_back(std::move(c));
  }

  // Subroutine-specific lower bound on good significant-descent iterations.
  {
    AuditCheck c;
    c.name = "good-iteration-lower-bound";
    c.applicable = is_ac && certificate.L.has_value() && n > 0;
    if (c.applicable) {
      const scalar_t L = certificate.L->value;
      const scalar_t L0 = recs[0].L_t;
      const std::string& sub = trace.meta.subroutine;
      scalar_t denominator = 1.0;  // CFW/MP
      if (sub == "AFW") denominator = 2.0;
      if (sub == "PFW") {
        const scalar_t fact =
            std::tgamma(static_cast<scalar_t>(trace.meta.atom_count) + 1.0);
        denominator = 3.0 * fact + 1.0;  // overflows to inf for large sets
      }
      scalar_t r_product = 1.0;
      count_t good = 0;
      for (std::size_t i = 0; i < n; ++i) {
        r_product *= damping_factor(recs[i].t, trace.meta.delta);
        if (in_I[i] && in_G[i]) ++good;
        const scalar_t slack =
            std::floor(std::log(L / (r_product * L0)) / std::log(eta)) + 1.0;
        const scalar_t lower =
            static_cast<scalar_t>(i + 1) / denominator - slack;
        if (static_cast<scalar_t>(good) < lower) {
          c.passed = false;
          c.detail = "at t=" + std::to_string(recs[i].t) + ", " +
                     format_count(good, lower);
          break;
        }
      }
    }
    report.checks.push_back(std::move(c));
  }

  // One objective evaluation per iteration (backtracking may use more).
  {
    AuditCheck c;
    c.name = "evaluation-discipline";
    c.applicable = n > 0;
    if (c.applicable) {
      const bool exact = trace.meta.method != "B";
      for (std::size_t i = 0; i < n; ++i) {
        const count_t prev = i == 0 ? 2 : recs[i - 1].n_f_evals;
        const count_t inc = recs[i].n_f_evals - prev;
        const bool ok = exact ? inc == 1 : inc >= 1;
        if (!ok) {
          c.passed = false;
          c.detail = "n_f increment " + std::to_string(inc) + " at t=" +
                     std::to_string(recs[i].t);
          break;
        }
      }
    }
    report.checks.push_back(std::move(c));
  }

  // Stored classification flags agree with the recomputation.
  {
    AuditCheck c;
    c.name = "classification-flags";
    c.applicable = is_ac && n > 0 && eta == trace.meta.eta;
    for (std::size_t i = 0; c.applicable && i < n; ++i) {
      if (static_cast<bool>(in_I[i]) != recs[i].in_I_eta ||
          static_cast<bool>(in_G[i]) != recs[i].in_G) {
        c.passed = false;
        c.detail = "flag mismatch at t=" + std::to_string(recs[i].t);
        break;
      }
      if (i + 1 < n && recs[i].L_next > 0.0 &&
          recs[i].L_next != recs[i + 1].L_t) {
        c.passed = false;
        c.detail = "L chain broken at t=" + std::to_string(recs[i].t);
        break;
      }
    }
    report.checks.push_back(std::move(c));
  }

  return report;
}

// ---------------------------------------------------------------------------
// Minimal directional width
// ---------------------------------------------------------------------------

namespace {

// Signed coordinate dictionaries {+-beta e_i} admit the closed form
// beta/sqrt(d): the worst direction weights all coordinates equally.
std::optional<scalar_t> cross_polytope_width(const std::vector<vector_t>& atoms) {
  if (atoms.empty()) return std::nullopt;
  const index_t d = atoms[0].size();
  if (static_cast<index_t>(atoms.size()) != 2 * d) return std::nullopt;
  scalar_t beta = 0.0;
  std::vector<int> seen(2 * d, 0);
  for (const auto& a : atoms) {
    index_t nz = -1;
    for (index_t i = 0; i < d; ++i) {
      if (a[i] != 0.0) {
        if (nz >= 0) return std::nullopt;
        nz = i;
      }
    }
    if (nz < 0) return std::nullopt;
    const scalar_t mag = std::abs(a[nz]);
    if (beta == 0.0)
      beta = mag;
    else if (mag != beta)
      return std::nullopt;
    ++seen[2 * nz + (a[nz] > 0.0 ? 0 : 1)];
  }
  for (int s : seen)
    if (s != 1) return std::nullopt;
  return beta / std::sqrt(static_cast<scalar_t>(d));
}

scalar_t support_value(const std::vector<vector_t>& atoms, const vector_t& dir) {
  scalar_t best = -std::numeric_limits<scalar_t>::infinity();
  for (const auto& a : atoms) best = std::max(best, a.dot(dir));
  return best;
}

}  // namespace

WidthEstimate min_directional_width(const std::vector<vector_t>& atoms,
                                    count_t n_samples, std::uint64_t seed) {
  if (atoms.empty())
    throw std::invalid_argument("min_directional_width: empty atom set");
  if (auto closed = cross_polytope_width(atoms)) return {*closed, 0.0, true};

  // Orthonormal basis of the span.
  const index_t d = atoms[0].size();
  matrix_t A(d, static_cast<index_t>(atoms.size()));
  for (index_t j = 0; j < A.cols(); ++j) A.col(j) = atoms[j];
  Eigen::JacobiSVD<matrix_t> svd(A, Eigen::ComputeThinU);
  const scalar_t sigma_max = svd.singularValues()[0];
  index_t rank = 0;
  for (index_t i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-12 * sigma_max) ++rank;
  if (rank > 6)
    throw std::invalid_argument(
        "min_directional_width: sampling oracle limited to span dimension 6");
  const matrix_t basis = svd.matrixU().leftCols(rank);

  Rng rng(seed ^ 0xa0761d6478bd642fULL);
  struct Candidate {
    scalar_t value;
    vector_t coeffs;
  };
  std::vector<Candidate> best;
  const std::size_t keep = 8;
  for (count_t s = 0; s < n_samples; ++s) {
    vector_t u = rng.unit_vector(rank);
    const scalar_t h = support_value(atoms, basis * u);
    if (best.size() < keep || h < best.back().value) {
      best.push_back({h, u});
      std::sort(best.begin(), best.end(),
                [](const Candidate& a, const Candidate& b) {
                  return a.value < b.value;
                });
      if (best.size() > keep) best.pop_back();
    }
  }
  const scalar_t sampled_min = best.front().value;

  // Local refinement with shrinking random perturbations.
  scalar_t refined_min = sampled_min;
  scalar_t refined_max = -std::numeric_limits<scalar_t>::infinity();
  for (auto& cand : best) {
    vector_t u = cand.coeffs;
    scalar_t val = cand.value;
    scalar_t radius = 0.3;
    for (int it = 0; it < 400; ++it) {
      vector_t probe = u + radius * rng.normal_vector(rank);
      const scalar_t norm = probe.norm();
      if (norm == 0.0) continue;
      probe /= norm;
      const scalar_t h = support_value(atoms, basis * probe);
      if (h < val) {
        val = h;
        u = probe;
      } else {
        radius *= 0.98;
      }
    }
    refined_min = std::min(refined_min, val);
    refined_max = std::max(refined_max, val);
  }
  const scalar_t band =
      std::max(refined_max - refined_min, sampled_min - refined_min);
  return {refined_min, band, false};
}

}  // namespace acfw

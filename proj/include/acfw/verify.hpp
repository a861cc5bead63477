#pragma once

#include <acfw/atoms.hpp>
#include <acfw/core.hpp>
#include <acfw/problems.hpp>

#include <optional>
#include <string>
#include <vector>

namespace acfw {

enum class Provenance { Analytic, BruteForce, UserSupplied };

struct TaggedValue {
  scalar_t value = 0.0;
  Provenance provenance = Provenance::UserSupplied;
};

/// Constants backing the rate and invariant audits. Absent fields disable
/// the checks that need them.
struct RateCertificate {
  std::optional<TaggedValue> L;          // global gradient Lipschitz constant
  std::optional<TaggedValue> mu;         // strong-convexity modulus
  std::optional<TaggedValue> alpha_set;  // set strong-convexity modulus
  std::optional<TaggedValue> g_floor;    // gradient-norm lower bound
  std::optional<TaggedValue> w_A;        // minimal directional width
  std::optional<TaggedValue> D_A;        // dictionary diameter
};

// ---------------------------------------------------------------------------
// Independent reference values
// ---------------------------------------------------------------------------

/// Minimum of the objective over the hull of a tiny finite dictionary
/// (at most 4 atoms), via a barycentric grid of resolution grid_k refined by
/// a local halving pass. Within L*D^2/(2 grid_k^2) of the true hull minimum
/// for smooth objectives.
scalar_t brute_force_reference(const Objective& objective,
                               const Dictionary& dictionary, int grid_k);

/// Exact KKT solution of min (x-c)' diag(q) (x-c) / 2 over |x|_2 <= beta.
/// Returns the optimal value and minimizer; handles both the interior case
/// and the boundary case (secular-equation root).
std::pair<scalar_t, vector_t> constrained_quadratic_l2_reference(
    const vector_t& q_diag, const vector_t& center, scalar_t beta);

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

enum class RateMetric { Gap, FGap };
enum class RateModel { LogLog, SemiLog };

struct SlopeFit {
  scalar_t slope = 0.0;
  scalar_t intercept = 0.0;
  scalar_t r_squared = 0.0;
  count_t n_points = 0;
};

/// Least-squares slope of log(metric) against log t (loglog) or t (semilog)
/// over the window [t_lo, t_hi]. Nonpositive metric values are skipped; the
/// FGap metric needs the reference value f_star.
SlopeFit rate_slope(const Trace& trace, RateMetric metric, count_t t_lo,
                    count_t t_hi, RateModel model,
                    std::optional<scalar_t> f_star = std::nullopt);

// ---------------------------------------------------------------------------
// Trace audits
// ---------------------------------------------------------------------------

struct AuditCheck {
  std::string name;
  bool applicable = true;
  bool passed = true;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditCheck> checks;
  bool all_passed() const;
  std::string to_string() const;
};

/// Runtime audit of a trace against the provable invariants: monotone
/// objective values, the estimate ceiling L_t <= L, the cardinality bound on
/// non-significant-descent iterations, the per-iteration descent inequality
/// on accepted significant-descent iterations, the subroutine-specific lower
/// bounds on good significant-descent iterations, and the one-evaluation-
/// per-iteration discipline. The cardinality bounds use the tracked damping
/// product over the observed horizon with one slack index; checks that do
/// not apply to the trace's method are reported as not applicable.
AuditReport audit_trace(const Trace& trace, const RateCertificate& certificate,
                        scalar_t eta);

// ---------------------------------------------------------------------------
// Geometric constants
// ---------------------------------------------------------------------------

struct WidthEstimate {
  scalar_t value = 0.0;
  scalar_t uncertainty = 0.0;
  bool exact = false;
};

/// Minimal directional width of a symmetric finite atom set:
///   min over unit d in the span of max_z z'd.
/// Uses the closed form for signed coordinate dictionaries; otherwise a
/// seeded sampling search (span dimension at most 6) with local refinement,
/// returning an uncertainty band alongside the value.
WidthEstimate min_directional_width(const std::vector<vector_t>& atoms,
                                    count_t n_samples = 100000,
                                    std::uint64_t seed = 0);

}  // namespace acfw

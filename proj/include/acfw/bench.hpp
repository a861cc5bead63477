#pragma once

#include <acfw/atoms.hpp>
#include <acfw/baselines.hpp>
#include <acfw/core.hpp>
#include <acfw/problems.hpp>
#include <acfw/verify.hpp>

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace acfw {

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

/// Row-compressed sparse design with binary labels.
struct SparseDesign {
  index_t n_rows = 0;
  index_t n_cols = 0;
  /// Per row: (column, value) with strictly increasing column indices.
  std::vector<std::vector<std::pair<index_t, scalar_t>>> rows;
  std::vector<int> labels;  // {0,1}

  sparse_matrix_t to_matrix() const;
  vector_t labels_vector() const;
};

/// Parses "label idx:val idx:val ..." lines with 1-based indices. Labels at
/// most two distinct raw values; anything nonpositive, or the smaller of two
/// observed values, maps to 0. Malformed lines are reported with their line
/// numbers.
SparseDesign parse_libsvm(const std::string& path);
SparseDesign parse_libsvm(std::istream& in, const std::string& origin);

void write_libsvm(const SparseDesign& design, const std::string& path);

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

enum class ProblemKind {
  QuadraticSimplex,
  QuadraticSpan,  // quadratic over the span of the signed coordinate atoms
  QuadraticL2Ball,
  LogisticL1,
  LogisticSpan,
  HuberNuclear,
  DictLearn,
};

std::string to_string(ProblemKind kind);
ProblemKind problem_from_string(const std::string& name);
SubroutineKind subroutine_from_string(const std::string& name);

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::QuadraticSimplex;
  std::string method = "AC";  // AC | B | FIXED | OPEN
  SubroutineKind subroutine = SubroutineKind::CFW;
  SolverConfig solver;

  // Shared problem parameters (defaults mirror the benchmark grid).
  scalar_t beta = 10.0;
  scalar_t lambda = 0.01;
  scalar_t huber_delta = 1.0;
  std::optional<scalar_t> fixed_L;
  scalar_t tau_up = 2.0;
  scalar_t tau_down = 0.9;

  // Instance sizes.
  index_t dim = 50;
  index_t n_samples = 200;
  index_t hm_rows = 30, hm_cols = 20, hm_rank = 3;
  count_t hm_observed = 240;
  index_t dl_m = 40, dl_n = 80, dl_p = 16, dl_l = 5;

  // Instance shaping.
  scalar_t q_min = 1.0, q_max = 4.0;  // quadratic spectrum
  scalar_t scale = 1.0;               // quadratic objective scaling
  std::string center = "interior";    // interior | face | outside
  scalar_t ball_margin = 1.5;         // |c| = margin * beta for quadratic-l2ball
  scalar_t feature_scale = 0.1;       // logistic feature magnitude
  scalar_t signal = 0.5;              // logistic ground-truth magnitude

  std::string data_path;  // optional LIBSVM file for the logistic problems

  void validate() const;
  std::string label() const;
};

/// Key=value config file with '#' comments; unknown keys are errors.
ExperimentConfig parse_config_file(const std::string& path);
/// Applies a single "key=value" override.
void apply_override(ExperimentConfig& config, const std::string& assignment);
/// Grid file: same syntax, but values may be comma-separated lists; the
/// cartesian product is expanded in deterministic order.
std::vector<ExperimentConfig> parse_grid_file(const std::string& path);

// ---------------------------------------------------------------------------
// Synthetic instances
// ---------------------------------------------------------------------------

struct ProblemInstance {
  std::shared_ptr<Objective> objective;
  Dictionary dictionary;
  bool convex = true;
  RateCertificate certificate;
  std::optional<scalar_t> f_star;  // analytic reference value when available
};

/// Deterministic instance for (config.problem, config.solver.seed); loads
/// the LIBSVM file instead when data_path is set on the logistic problems.
/// Relative data paths resolve against $ACFW_DATA_DIR when it is set.
ProblemInstance gen_synthetic(const ExperimentConfig& config);

struct DictLearnData {
  matrix_t A, B, C;
};

/// The benchmark generator for dictionary learning: A = B C with unit-norm
/// Gaussian columns in B and a normalized rank-l factor C.
DictLearnData gen_dictlearn_data(index_t m, index_t n, index_t p, index_t l,
                                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// Experiment execution and trace I/O
// ---------------------------------------------------------------------------

struct ExperimentResult {
  Trace trace;
  AuditReport audit;
  std::optional<scalar_t> f_star;
  RateCertificate certificate;
};

/// Builds the instance, dispatches on the step rule, and audits the trace;
/// throws if the audit fails, so a returned result is always a valid run.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Fixed schema: t,f,gap,gamma,gamma_max,L_t,accepted,in_I_eta,in_G,n_f,n_g,
/// n_lmo,elapsed_s. Doubles are emitted with 17 significant digits so that
/// re-parsing reproduces the records exactly; +inf appears as "inf".
void emit_csv(const Trace& trace, std::ostream& out);
std::string csv_string(const Trace& trace);
/// Atomic write: the file appears complete or not at all.
void emit_csv_file(const Trace& trace, const std::string& path);

Trace parse_csv(std::istream& in);
Trace parse_csv_file(const std::string& path);

/// JSON bundle of several traces keyed by "<method>-<subroutine>" for
/// external plotting.
void emit_plot_data(const std::vector<Trace>& traces, const std::string& path);

/// Drops the elapsed-time column; the rest of the CSV is deterministic for a
/// fixed (config, seed).
std::string strip_elapsed_column(const std::string& csv);

}  // namespace acfw

// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its instance, seed, tolerances, and runtime
// budget in code.

#include <acfw/bench.hpp>
#include <acfw/random.hpp>
#include <acfw/verify.hpp>

#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace acfw;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

scalar_t min_gap_up_to(const Trace& trace, count_t T) {
  scalar_t m = std::numeric_limits<scalar_t>::infinity();
  for (const auto& r : trace.records)
    if (r.t <= T) m = std::min(m, r.fw_gap);
  return m;
}

// --------------------------------------------------------------------------
// 1. Gradient correctness for all four objectives.
// --------------------------------------------------------------------------
Outcome criterion1() {
  Outcome out;
  const ProblemKind kinds[] = {ProblemKind::QuadraticSimplex,
                               ProblemKind::LogisticL1,
                               ProblemKind::HuberNuclear, ProblemKind::DictLearn};
  Rng rng(0xace0);
  for (const ProblemKind kind : kinds) {
    ExperimentConfig cfg;
    cfg.problem = kind;
    const ProblemInstance inst = gen_synthetic(cfg);
    scalar_t worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      // Random feasible point: a convex mixture of oracle outputs.
      vector_t x = inst.dictionary.lmo(rng.normal_vector(inst.dictionary.dim())).v;
      for (int mix = 0; mix < 3; ++mix) {
        const scalar_t w = rng.uniform();
        x = (1.0 - w) * x +
            w * inst.dictionary.lmo(rng.normal_vector(inst.dictionary.dim())).v;
      }
      worst = std::max(worst, gradient_check_error(*inst.objective, x));
    }
    out.require(worst <= 1e-5,
                to_string(kind) + " finite-difference error " + fmt(worst));
  }
  return out;
}

// --------------------------------------------------------------------------
// 2. Invariant audit on the seeded d=50 quadratic for all four subroutines.
// --------------------------------------------------------------------------
Outcome criterion2() {
  Outcome out;
  for (const auto sub : {SubroutineKind::CFW, SubroutineKind::PFW,
                         SubroutineKind::AFW, SubroutineKind::MP}) {
    ExperimentConfig cfg;
    cfg.problem = sub == SubroutineKind::MP ? ProblemKind::QuadraticSpan
                                            : ProblemKind::QuadraticSimplex;
    cfg.subroutine = sub;
    cfg.dim = 50;
    cfg.solver.max_iters = 2000;
    cfg.solver.gap_tol = 1e-12;
    cfg.solver.seed = 0;
    try {
      const ExperimentResult res = run_experiment(cfg);
      const AuditReport report =
          audit_trace(res.trace, res.certificate, cfg.solver.eta);
      for (const auto& check : report.checks)
        out.require(!check.applicable || check.passed,
                    to_string(sub) + " " + check.name + " " + check.detail);
      out.require(res.certificate.L.has_value(), "analytic L missing");
    } catch (const std::exception& err) {
      out.require(false, to_string(sub) + std::string(": ") + err.what());
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// 3. Convex sublinear rate: AC-CFW on the 50-atom simplex.
// --------------------------------------------------------------------------
Outcome criterion3() {
  Outcome out;
  ExperimentConfig cfg;
  cfg.problem = ProblemKind::QuadraticSimplex;
  cfg.center = "outside";
  cfg.scale = 0.005;
  cfg.dim = 50;
  cfg.solver.max_iters = 5000;
  cfg.solver.gap_tol = 0.0;
  cfg.solver.seed = 0;
  const ExperimentResult res = run_experiment(cfg);
  const scalar_t reached = min_gap_up_to(res.trace, 5000);
  const SlopeFit fit =
      rate_slope(res.trace, RateMetric::Gap, 100, 5000, RateModel::LogLog);
  out.require(reached <= 1e-6, "min gap " + fmt(reached));
  out.require(fit.slope <= -0.9, "loglog slope " + fmt(fit.slope));
  out.require(fit.r_squared >= 0.9, "R^2 " + fmt(fit.r_squared));
  out.note("slope=" + fmt(fit.slope) + " R2=" + fmt(fit.r_squared) +
           " min_gap=" + fmt(reached));
  return out;
}

// --------------------------------------------------------------------------
// 4. Acceleration on a strongly convex domain: linear decay on the l2 ball.
// --------------------------------------------------------------------------
Outcome criterion4() {
  Outcome out;
  ExperimentConfig cfg;
  cfg.problem = ProblemKind::QuadraticL2Ball;
  cfg.q_max = 25.0;
  cfg.ball_margin = 1.02;
  cfg.dim = 50;
  cfg.solver.max_iters = 5000;
  cfg.solver.gap_tol = 1e-10;
  cfg.solver.seed = 0;
  const ExperimentResult res = run_experiment(cfg);
  out.require(res.certificate.g_floor.has_value() &&
                  res.certificate.g_floor->value > 0.0,
              "analytic gradient floor missing");
  const scalar_t f_star = *res.f_star;
  const scalar_t final_fgap = res.trace.summary.final_value - f_star;
  out.require(final_fgap <= 1e-10 && res.trace.summary.iterations <= 5000,
              "f-gap " + fmt(final_fgap) + " after " +
                  std::to_string(res.trace.summary.iterations) + " iterations");
  const SlopeFit fit =
      rate_slope(res.trace, RateMetric::FGap, 10, 2000, RateModel::SemiLog, f_star);
  out.require(fit.slope < -1e-3, "semilog slope " + fmt(fit.slope));
  out.require(fit.r_squared >= 0.95, "R^2 " + fmt(fit.r_squared));
  out.note("slope=" + fmt(fit.slope) + " R2=" + fmt(fit.r_squared) +
           " f_gap=" + fmt(final_fgap));
  return out;
}

// --------------------------------------------------------------------------
// 5. Linear rates for PFW/AFW on a 20-atom simplex and MP on the signed
//    coordinate span.
// --------------------------------------------------------------------------
Outcome criterion5() {
  Outcome out;
  for (const auto sub :
       {SubroutineKind::PFW, SubroutineKind::AFW, SubroutineKind::MP}) {
    ExperimentConfig cfg;
    cfg.problem = sub == SubroutineKind::MP ? ProblemKind::QuadraticSpan
                                            : ProblemKind::QuadraticSimplex;
    cfg.subroutine = sub;
    cfg.dim = 20;
    cfg.solver.max_iters = 3000;
    cfg.solver.gap_tol = 1e-12;
    cfg.solver.seed = 0;
    const ExperimentResult res = run_experiment(cfg);
    const scalar_t f_star = *res.f_star;  // interior optimum: exactly 0
    count_t t_hit = -1;
    for (const auto& r : res.trace.records)
      if (r.f_value - f_star <= 1e-10) {
        t_hit = r.t;
        break;
      }
    if (t_hit < 0 && res.trace.summary.final_value - f_star <= 1e-10)
      t_hit = res.trace.summary.iterations;
    out.require(t_hit >= 0 && t_hit <= 3000,
                to_string(sub) + " did not reach f-gap 1e-10");
    const count_t t_end =
        res.trace.records.empty() ? 0 : res.trace.records.back().t;
    const SlopeFit fit = rate_slope(res.trace, RateMetric::FGap, 10, t_end,
                                    RateModel::SemiLog, f_star);
    out.require(fit.r_squared >= 0.95,
                to_string(sub) + " R^2 " + fmt(fit.r_squared));
    out.require(fit.slope < 0.0, to_string(sub) + " slope " + fmt(fit.slope));
    out.note(to_string(sub) + ": R2=" + fmt(fit.r_squared) +
             " t_hit=" + std::to_string(t_hit));
  }
  return out;
}

// --------------------------------------------------------------------------
// 6. Nonconvex guarantee on desk-scale dictionary learning.
// --------------------------------------------------------------------------
Outcome criterion6() {
  Outcome out;
  ExperimentConfig cfg;
  cfg.problem = ProblemKind::DictLearn;
  cfg.dl_m = 40;
  cfg.dl_n = 80;
  cfg.dl_p = 16;
  cfg.dl_l = 5;
  cfg.beta = 5.0;
  cfg.solver.max_iters = 4001;
  cfg.solver.gap_tol = 0.0;
  cfg.solver.seed = 0;
  const ExperimentResult res = run_experiment(cfg);
  const scalar_t at1000 = min_gap_up_to(res.trace, 1000);
  const scalar_t at4000 = min_gap_up_to(res.trace, 4000);
  out.require(at4000 <= 0.6 * at1000,
              "min-gap ratio " + fmt(at4000 / at1000));
  out.note("min_gap@1000=" + fmt(at1000) + " min_gap@4000=" + fmt(at4000));
  return out;
}

// --------------------------------------------------------------------------
// 7. Evaluation economy against backtracking on constrained logistic
//    regression.
// --------------------------------------------------------------------------
Outcome criterion7() {
  Outcome out;
  ExperimentConfig cfg;
  cfg.problem = ProblemKind::LogisticL1;
  cfg.n_samples = 200;
  cfg.dim = 50;
  cfg.lambda = 0.01;
  cfg.beta = 10.0;
  cfg.feature_scale = 0.1;
  cfg.signal = 0.5;
  cfg.solver.max_iters = 150000;
  cfg.solver.gap_tol = 1e-6;
  cfg.solver.seed = 0;

  const ExperimentResult ac = run_experiment(cfg);
  out.require(ac.trace.summary.status == RunStatus::Converged,
              "AC did not reach gap 1e-6");
  out.require(ac.trace.summary.n_f_evals == ac.trace.summary.iterations + 2,
              "AC evaluations " + std::to_string(ac.trace.summary.n_f_evals) +
                  " != iterations+2");

  cfg.method = "B";
  const ExperimentResult bt = run_experiment(cfg);
  out.require(bt.trace.summary.status == RunStatus::Converged,
              "backtracking did not reach gap 1e-6");
  const double ratio = static_cast<double>(bt.trace.summary.n_f_evals) /
                       static_cast<double>(ac.trace.summary.n_f_evals);
  out.require(ratio >= 1.2, "evaluation ratio " + fmt(ratio));
  out.note("AC n_f=" + std::to_string(ac.trace.summary.n_f_evals) +
           " B n_f=" + std::to_string(bt.trace.summary.n_f_evals) +
           " ratio=" + fmt(ratio));
  return out;
}

// --------------------------------------------------------------------------
// 8. Oracle equivalence: brute force vs solver, closed-form vs enumerated
//    and SVD-based oracles.
// --------------------------------------------------------------------------
Outcome criterion8() {
  Outcome out;
  // Three 3-atom quadratic instances against the barycentric grid.
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(100 + seed);
    std::vector<vector_t> atoms;
    for (int i = 0; i < 3; ++i) atoms.push_back(rng.normal_vector(3));
    vector_t q(3);
    for (int i = 0; i < 3; ++i) q[i] = rng.uniform(0.5, 3.0);
    const vector_t mix = rng.simplex_point(3);
    vector_t center = mix[0] * atoms[0] + mix[1] * atoms[1] + mix[2] * atoms[2];
    center += 0.1 * rng.normal_vector(3);
    QuadraticObjective obj = QuadraticObjective::centered_diag(q, center);
    const Dictionary dict = Dictionary::finite(atoms, DomainKind::ConvexHull);

    const scalar_t reference = brute_force_reference(obj, dict, 200);
    SolverConfig scfg;
    scfg.max_iters = 20000;
    scfg.gap_tol = 1e-12;
    const Trace trace = run(obj, dict, SubroutineKind::CFW, scfg);
    const scalar_t diff = std::abs(trace.summary.final_value - reference);
    out.require(diff <= 1e-4,
                "instance " + std::to_string(seed) + " off by " + fmt(diff));
  }

  // l1-ball closed form agrees exactly with the enumerated-atom oracle.
  const Dictionary enumerated = Dictionary::l1_ball(7, 2.0);
  Rng rng(0xbead);
  for (int rep = 0; rep < 100; ++rep) {
    const vector_t g = rng.normal_vector(7);
    auto [id_closed, v_closed] = lmo_l1_ball(g, 2.0);
    auto [id_enum, v_enum] = lmo_finite(g, enumerated.atoms());
    out.require(id_closed == id_enum && v_closed == v_enum,
                "l1 oracle mismatch at rep " + std::to_string(rep));
    if (!out.passed) break;
  }

  // Nuclear-ball power iteration against the dense SVD.
  const matrix_t g = rng.normal_matrix(10, 8);
  const matrix_t v = lmo_nuclear_ball(g, 1.0, 1e-10, 100000);
  const scalar_t got = (g.array() * v.array()).sum();
  Eigen::JacobiSVD<matrix_t> svd(g);
  const scalar_t best = -svd.singularValues()[0];
  const scalar_t rel = std::abs(got - best) / std::abs(best);
  out.require(rel <= 1e-6, "nuclear oracle relative gap " + fmt(rel));
  return out;
}

// --------------------------------------------------------------------------
// 9. Determinism: byte-identical CSV replays apart from elapsed time.
// --------------------------------------------------------------------------
Outcome criterion9() {
  Outcome out;
  std::vector<ExperimentConfig> configs;
  {
    ExperimentConfig cfg;
    cfg.problem = ProblemKind::QuadraticSimplex;
    cfg.subroutine = SubroutineKind::PFW;
    cfg.dim = 30;
    cfg.solver.max_iters = 400;
    cfg.solver.gap_tol = 0.0;
    cfg.solver.seed = 7;
    configs.push_back(cfg);
  }
  {
    ExperimentConfig cfg;
    cfg.problem = ProblemKind::LogisticL1;
    cfg.solver.max_iters = 500;
    cfg.solver.gap_tol = 0.0;
    cfg.solver.seed = 11;
    configs.push_back(cfg);
  }
  {
    ExperimentConfig cfg;
    cfg.problem = ProblemKind::QuadraticSpan;
    cfg.subroutine = SubroutineKind::MP;
    cfg.dim = 20;
    cfg.solver.max_iters = 300;
    cfg.solver.gap_tol = 0.0;
    cfg.solver.seed = 3;
    configs.push_back(cfg);
  }
  for (const auto& cfg : configs) {
    const std::string a = strip_elapsed_column(csv_string(run_experiment(cfg).trace));
    const std::string b = strip_elapsed_column(csv_string(run_experiment(cfg).trace));
    out.require(a == b, cfg.label() + " replay differs");
  }
  return out;
}

struct Criterion {
  int number;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> fn;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", 10.0, criterion1},
      {2, "invariant audit (AC-CFW/PFW/AFW/MP)", 30.0, criterion2},
      {3, "convex sublinear rate (CFW, simplex)", 10.0, criterion3},
      {4, "accelerated rate on a strongly convex domain", 10.0, criterion4},
      {5, "linear rates (PFW/AFW/MP)", 10.0, criterion5},
      {6, "nonconvex decay (dictionary learning)", 60.0, criterion6},
      {7, "evaluation economy vs backtracking", 30.0, criterion7},
      {8, "oracle equivalence", 30.0, criterion8},
      {9, "determinism", 10.0, criterion9},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.fn();
    } catch (const std::exception& err) {
      outcome.passed = false;
      outcome.detail = std::string("exception: ") + err.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (elapsed > c.budget_seconds) {
      outcome.passed = false;
      outcome.detail += (outcome.detail.empty() ? "" : "; ") + std::string("runtime ") +
                        fmt(elapsed) + "s exceeds " + fmt(c.budget_seconds) + "s";
    }
    if (!outcome.passed) ++failures;
    std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n",
                outcome.passed ? "PASS" : "FAIL", c.number, c.name, elapsed,
                outcome.detail.empty() ? "" : " -- ", outcome.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}

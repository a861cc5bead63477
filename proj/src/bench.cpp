#include <acfw/bench.hpp>

#include <acfw/random.hpp>

#include <Eigen/SVD>

#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace acfw {

// ---------------------------------------------------------------------------
// SparseDesign / LIBSVM
// ---------------------------------------------------------------------------

sparse_matrix_t SparseDesign::to_matrix() const {
  std::vector<Eigen::Triplet<scalar_t>> triplets;
  for (index_t i = 0; i < n_rows; ++i)
    for (const auto& [j, v] : rows[i])
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  sparse_matrix_t m(n_rows, n_cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

vector_t SparseDesign::labels_vector() const {
  vector_t y(n_rows);
  for (index_t i = 0; i < n_rows; ++i) y[i] = static_cast<scalar_t>(labels[i]);
  return y;
}

namespace {

[[noreturn]] void libsvm_error(const std::string& origin, std::size_t line,
                               const std::string& what) {
  std::ostringstream msg;
  msg << origin << ":" << line << ": " << what;
  throw std::runtime_error(msg.str());
}

scalar_t parse_number(const std::string& token, const std::string& origin,
                      std::size_t line) {
  char* end = nullptr;
  errno = 0;
  const scalar_t v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0' || errno == ERANGE)
    libsvm_error(origin, line, "non-numeric token '" + token + "'");
  return v;
}

}  // namespace

SparseDesign parse_libsvm(std::istream& in, const std::string& origin) {
  SparseDesign design;
  std::vector<scalar_t> raw_labels;
  std::string line;
  std::size_t line_no = 0;
  index_t max_col = -1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;  // blank line
    raw_labels.push_back(parse_number(token, origin, line_no));
    std::vector<std::pair<index_t, scalar_t>> row;
    index_t prev = -1;
    while (ls >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos)
        libsvm_error(origin, line_no, "expected idx:val, got '" + token + "'");
      const scalar_t idx_raw =
          parse_number(token.substr(0, colon), origin, line_no);
      const index_t idx = static_cast<index_t>(idx_raw);
      if (idx_raw != static_cast<scalar_t>(idx) || idx < 1)
        libsvm_error(origin, line_no, "bad index in '" + token + "'");
      if (idx - 1 <= prev)
        libsvm_error(origin, line_no, "non-increasing column indices");
      prev = idx - 1;
      row.emplace_back(idx - 1, parse_number(token.substr(colon + 1), origin,
                                             line_no));
      max_col = std::max(max_col, idx - 1);
    }
    design.rows.push_back(std::move(row));
  }
  if (design.rows.empty()) libsvm_error(origin, 0, "empty file");
  design.n_rows = static_cast<index_t>(design.rows.size());
  design.n_cols = max_col + 1;

  // Label mapping: nonpositive labels, or the smaller of two observed raw
  // values, map to 0; everything else to 1.
  std::set<scalar_t> distinct(raw_labels.begin(), raw_labels.end());
  if (distinct.size() > 2)
    throw std::runtime_error(origin + ": more than two distinct labels");
  const scalar_t smaller = *distinct.begin();
  design.labels.reserve(raw_labels.size());
  for (const scalar_t y : raw_labels) {
    const bool zero = y <= 0.0 || (distinct.size() == 2 && y == smaller);
    design.labels.push_back(zero ? 0 : 1);
  }
  return design;
}

SparseDesign parse_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_libsvm: cannot open " + path);
  return parse_libsvm(in, path);
}

namespace {

std::string format_double(scalar_t v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_libsvm(const SparseDesign& design, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_libsvm: cannot open " + path);
  for (index_t i = 0; i < design.n_rows; ++i) {
    out << design.labels[i];
    for (const auto& [j, v] : design.rows[i])
      out << " " << (j + 1) << ":" << format_double(v);
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::QuadraticSimplex: return "quadratic-simplex";
    case ProblemKind::QuadraticSpan: return "quadratic-span";
    case ProblemKind::QuadraticL2Ball: return "quadratic-l2ball";
    case ProblemKind::LogisticL1: return "logistic-l1";
    case ProblemKind::LogisticSpan: return "logistic-span";
    case ProblemKind::HuberNuclear: return "huber-nuclear";
    case ProblemKind::DictLearn: return "dictlearn";
  }
  return "?";
}

ProblemKind problem_from_string(const std::string& name) {
  if (name == "quadratic-simplex") return ProblemKind::QuadraticSimplex;
  if (name == "quadratic-span") return ProblemKind::QuadraticSpan;
  if (name == "quadratic-l2ball") return ProblemKind::QuadraticL2Ball;
  if (name == "logistic-l1") return ProblemKind::LogisticL1;
  if (name == "logistic-span") return ProblemKind::LogisticSpan;
  if (name == "huber-nuclear") return ProblemKind::HuberNuclear;
  if (name == "dictlearn") return ProblemKind::DictLearn;
  throw std::invalid_argument("unknown problem '" + name + "'");
}

SubroutineKind subroutine_from_string(const std::string& name) {
  if (name == "CFW") return SubroutineKind::CFW;
  if (name == "MP") return SubroutineKind::MP;
  if (name == "PFW") return SubroutineKind::PFW;
  if (name == "AFW") return SubroutineKind::AFW;
  throw std::invalid_argument("unknown subroutine '" + name + "'");
}

void ExperimentConfig::validate() const {
  solver.validate();
  if (method != "AC" && method != "B" && method != "FIXED" && method != "OPEN")
    throw std::invalid_argument("method must be one of AC, B, FIXED, OPEN");
  if (beta <= 0.0) throw std::invalid_argument("beta must be positive");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (huber_delta <= 0.0) throw std::invalid_argument("huber_delta must be positive");

  const bool span_problem = problem == ProblemKind::LogisticSpan ||
                            problem == ProblemKind::QuadraticSpan;
  if (subroutine == SubroutineKind::MP && !span_problem)
    throw std::invalid_argument("MP requires a linear-span problem");
  if (subroutine != SubroutineKind::MP && span_problem)
    throw std::invalid_argument("linear-span problems pair with MP");
  if ((subroutine == SubroutineKind::PFW || subroutine == SubroutineKind::AFW) &&
      problem != ProblemKind::QuadraticSimplex &&
      problem != ProblemKind::LogisticL1)
    throw std::invalid_argument("PFW/AFW need a finite-dictionary problem");
  if (method == "OPEN" && subroutine != SubroutineKind::CFW)
    throw std::invalid_argument("the open-loop schedule pairs with CFW only");
}

std::string ExperimentConfig::label() const {
  std::ostringstream out;
  out << to_string(problem) << "_" << method << "-" << to_string(subroutine)
      << "_s" << solver.seed;
  return out.str();
}

namespace {

scalar_t to_scalar(const std::string& v, const std::string& key) {
  char* end = nullptr;
  errno = 0;
  const scalar_t x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE)
    throw std::invalid_argument("config: bad numeric value for " + key);
  return x;
}

count_t to_count(const std::string& v, const std::string& key) {
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE)
    throw std::invalid_argument("config: bad integer value for " + key);
  return static_cast<count_t>(x);
}

void set_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "problem") c.problem = problem_from_string(value);
  else if (key == "method") c.method = value;
  else if (key == "subroutine") c.subroutine = subroutine_from_string(value);
  else if (key == "max_iters") c.solver.max_iters = to_count(value, key);
  else if (key == "max_seconds") c.solver.max_seconds = to_scalar(value, key);
  else if (key == "gap_tol") c.solver.gap_tol = to_scalar(value, key);
  else if (key == "eta") c.solver.eta = to_scalar(value, key);
  else if (key == "delta") c.solver.delta = to_scalar(value, key);
  else if (key == "L_floor") c.solver.L_floor = to_scalar(value, key);
  else if (key == "seed") c.solver.seed = static_cast<std::uint64_t>(to_count(value, key));
  else if (key == "beta") c.beta = to_scalar(value, key);
  else if (key == "lambda") c.lambda = to_scalar(value, key);
  else if (key == "huber_delta") c.huber_delta = to_scalar(value, key);
  else if (key == "fixed_L") c.fixed_L = to_scalar(value, key);
  else if (key == "tau_up") c.tau_up = to_scalar(value, key);
  else if (key == "tau_down") c.tau_down = to_scalar(value, key);
  else if (key == "dim") c.dim = to_count(value, key);
  else if (key == "n_samples") c.n_samples = to_count(value, key);
  else if (key == "hm_rows") c.hm_rows = to_count(value, key);
  else if (key == "hm_cols") c.hm_cols = to_count(value, key);
  else if (key == "hm_rank") c.hm_rank = to_count(value, key);
  else if (key == "hm_observed") c.hm_observed = to_count(value, key);
  else if (key == "dl_m") c.dl_m = to_count(value, key);
  else if (key == "dl_n") c.dl_n = to_count(value, key);
  else if (key == "dl_p") c.dl_p = to_count(value, key);
  else if (key == "dl_l") c.dl_l = to_count(value, key);
  else if (key == "q_min") c.q_min = to_scalar(value, key);
  else if (key == "q_max") c.q_max = to_scalar(value, key);
  else if (key == "scale") c.scale = to_scalar(value, key);
  else if (key == "center") c.center = value;
  else if (key == "ball_margin") c.ball_margin = to_scalar(value, key);
  else if (key == "feature_scale") c.feature_scale = to_scalar(value, key);
  else if (key == "signal") c.signal = to_scalar(value, key);
  else if (key == "data_path") c.data_path = value;
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// key -> raw value, preserving file order.
std::vector<std::pair<std::string, std::string>> read_kv_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected key = value");
    out.emplace_back(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_file(const std::string& path) {
  ExperimentConfig config;
  for (const auto& [key, value] : read_kv_file(path)) set_key(config, key, value);
  config.validate();
  return config;
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override must be key=value: " + assignment);
  set_key(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::vector<ExperimentConfig> parse_grid_file(const std::string& path) {
  const auto kv = read_kv_file(path);
  std::vector<ExperimentConfig> configs{ExperimentConfig{}};
  for (const auto& [key, value] : kv) {
    std::vector<std::string> choices;
    std::string token;
    std::istringstream vs(value);
    while (std::getline(vs, token, ',')) choices.push_back(trim(token));
    if (choices.empty()) choices.push_back("");
    std::vector<ExperimentConfig> expanded;
    expanded.reserve(configs.size() * choices.size());
    for (const auto& base : configs)
      for (const auto& choice : choices) {
        ExperimentConfig next = base;
        set_key(next, key, choice);
        expanded.push_back(std::move(next));
      }
    configs = std::move(expanded);
  }
  for (const auto& c : configs) c.validate();
  return configs;
}

// ---------------------------------------------------------------------------
// Synthetic instances
// ---------------------------------------------------------------------------

DictLearnData gen_dictlearn_data(index_t m, index_t n, index_t p, index_t l,
                                 std::uint64_t seed) {
  Rng rng(seed ^ 0x8e9d3a1b7c5f2e41ULL);
  DictLearnData out;
  out.B = rng.normal_matrix(m, p);
  for (index_t j = 0; j < p; ++j) out.B.col(j).normalize();
  matrix_t U = rng.normal_matrix(p, l);
  matrix_t V = rng.normal_matrix(n, l);
  Eigen::JacobiSVD<matrix_t> svdU(U);
  Eigen::JacobiSVD<matrix_t> svdV(V);
  const scalar_t spectral = svdU.singularValues()[0] * svdV.singularValues()[0];
  out.C = (U * V.transpose()) / spectral;
  out.A = out.B * out.C;
  return out;
}

namespace {

vector_t seeded_spectrum(Rng& rng, index_t dim, scalar_t q_min, scalar_t q_max,
                         scalar_t scale) {
  vector_t q(dim);
  for (index_t i = 0; i < dim; ++i) q[i] = rng.uniform(q_min, q_max);
  // Pin the extremes so the exported constants are exact.
  if (dim >= 1) q[0] = q_max;
  if (dim >= 2) q[1] = q_min;
  return scale * q;
}

ProblemInstance make_quadratic_simplex(const ExperimentConfig& c) {
  Rng rng(c.solver.seed ^ 0x1234abcd5678ef01ULL);
  vector_t q = seeded_spectrum(rng, c.dim, c.q_min, c.q_max, c.scale);
  vector_t center;
  bool interior = false;
  if (c.center == "interior") {
    center = 0.5 * rng.simplex_point(c.dim) +
             vector_t::Constant(c.dim, 0.5 / static_cast<scalar_t>(c.dim));
    interior = true;
  } else if (c.center == "face") {
    center = rng.simplex_point(c.dim);
    for (index_t i = 0; i < c.dim / 2; ++i) center[2 * i] = 0.0;
    center /= center.sum();
  } else if (c.center == "outside") {
    center = rng.simplex_point(c.dim) -
             vector_t::Constant(c.dim, 1.5 / static_cast<scalar_t>(c.dim));
  } else {
    throw std::invalid_argument("center must be interior, face or outside");
  }

  ProblemInstance inst{
      std::make_shared<QuadraticObjective>(
          QuadraticObjective::centered_diag(q, center)),
      Dictionary::simplex(c.dim), true, {}, std::nullopt};
  inst.certificate.L = TaggedValue{q.maxCoeff(), Provenance::Analytic};
  inst.certificate.mu = TaggedValue{q.minCoeff(), Provenance::Analytic};
  inst.certificate.D_A =
      TaggedValue{inst.dictionary.diameter(), Provenance::Analytic};
  if (interior) inst.f_star = 0.0;  // the unconstrained minimizer is feasible
  return inst;
}

ProblemInstance make_quadratic_span(const ExperimentConfig& c) {
  Rng rng(c.solver.seed ^ 0x2345bcde6789f012ULL);
  vector_t q = seeded_spectrum(rng, c.dim, c.q_min, c.q_max, c.scale);
  vector_t center = rng.normal_vector(c.dim);
  center *= 0.5 / std::max(center.norm(), scalar_t(1e-12));

  ProblemInstance inst{
      std::make_shared<QuadraticObjective>(
          QuadraticObjective::centered_diag(q, center)),
      Dictionary::l1_ball(c.dim, 1.0, DomainKind::LinearSpan), true, {},
      std::nullopt};
  inst.certificate.L = TaggedValue{q.maxCoeff(), Provenance::Analytic};
  inst.certificate.mu = TaggedValue{q.minCoeff(), Provenance::Analytic};
  inst.certificate.D_A = TaggedValue{2.0, Provenance::Analytic};
  inst.certificate.w_A = TaggedValue{
      1.0 / std::sqrt(static_cast<scalar_t>(c.dim)), Provenance::Analytic};
  inst.f_star = 0.0;  // the span is the whole space
  return inst;
}

ProblemInstance make_quadratic_l2ball(const ExperimentConfig& c) {
  Rng rng(c.solver.seed ^ 0x3456cdef789a0123ULL);
  vector_t q = seeded_spectrum(rng, c.dim, c.q_min, c.q_max, c.scale);
  vector_t center = c.ball_margin * c.beta * rng.unit_vector(c.dim);

  auto [f_star, x_star] = constrained_quadratic_l2_reference(q, center, c.beta);

  ProblemInstance inst{
      std::make_shared<QuadraticObjective>(
          QuadraticObjective::centered_diag(q, center)),
      Dictionary::l2_ball(c.dim, c.beta), true, {}, f_star};
  inst.certificate.L = TaggedValue{q.maxCoeff(), Provenance::Analytic};
  inst.certificate.mu = TaggedValue{q.minCoeff(), Provenance::Analytic};
  inst.certificate.D_A = TaggedValue{2.0 * c.beta, Provenance::Analytic};
  inst.certificate.alpha_set = TaggedValue{1.0 / c.beta, Provenance::Analytic};
  if (c.ball_margin > 1.0)
    inst.certificate.g_floor = TaggedValue{
        q.minCoeff() * (center.norm() - c.beta), Provenance::Analytic};
  return inst;
}

SparseDesign synth_logistic_design(const ExperimentConfig& c) {
  Rng rng(c.solver.seed ^ 0x4567def089ab1234ULL);
  SparseDesign design;
  design.n_rows = c.n_samples;
  design.n_cols = c.dim;
  design.rows.resize(c.n_samples);
  vector_t truth = vector_t::Zero(c.dim);
  for (index_t j = 0; j < c.dim; ++j)
    if (rng.uniform() < 0.2) truth[j] = c.signal * (rng.uniform() < 0.5 ? -1.0 : 1.0);
  for (index_t i = 0; i < c.n_samples; ++i) {
    scalar_t margin = 0.0;
    for (index_t j = 0; j < c.dim; ++j) {
      if (rng.uniform() < 0.5) continue;  // sparsity
      const scalar_t v = c.feature_scale * rng.normal();
      design.rows[i].emplace_back(j, v);
      margin += v * truth[j];
    }
    const scalar_t prob = 1.0 / (1.0 + std::exp(-margin));
    design.labels.push_back(rng.uniform() < prob ? 1 : 0);
  }
  return design;
}

ProblemInstance make_logistic(const ExperimentConfig& c, DomainKind kind) {
  SparseDesign design;
  if (!c.data_path.empty()) {
    std::string path = c.data_path;
    if (const char* dir = std::getenv("ACFW_DATA_DIR");
        dir != nullptr && !path.empty() && path[0] != '/')
      path = std::string(dir) + "/" + path;
    design = parse_libsvm(path);
  } else {
    design = synth_logistic_design(c);
  }
  const index_t d = std::max(design.n_cols, c.dim);
  design.n_cols = d;
  auto objective = std::make_shared<LogisticObjective>(
      design.to_matrix(), design.labels_vector(), c.lambda);
  ProblemInstance inst{std::move(objective),
                       Dictionary::l1_ball(d, c.beta, kind), true, {},
                       std::nullopt};
  inst.certificate.D_A = TaggedValue{2.0 * c.beta, Provenance::Analytic};
  if (c.lambda > 0.0)
    inst.certificate.mu = TaggedValue{c.lambda, Provenance::Analytic};
  return inst;
}

ProblemInstance make_huber_nuclear(const ExperimentConfig& c) {
  Rng rng(c.solver.seed ^ 0x5678ef019abc2345ULL);
  const index_t m = c.hm_rows, p = c.hm_cols, r = c.hm_rank;
  matrix_t M = rng.normal_matrix(m, r) * rng.normal_matrix(p, r).transpose() /
               std::sqrt(static_cast<scalar_t>(r));
  // Observed entries: seeded distinct cells, plus sparse large outliers so
  // the linear branch of the loss is exercised.
  const count_t total = m * p;
  const count_t want = std::min<count_t>(c.hm_observed, total);
  std::vector<count_t> cells(total);
  for (count_t i = 0; i < total; ++i) cells[i] = i;
  for (count_t i = 0; i < want; ++i) {
    const count_t j = i + static_cast<count_t>(rng.uniform_index(total - i));
    std::swap(cells[i], cells[j]);
  }
  cells.resize(want);
  std::sort(cells.begin(), cells.end());
  std::vector<ObservedEntry> observed;
  observed.reserve(want);
  for (const count_t cell : cells) {
    ObservedEntry e;
    e.row = cell / p;
    e.col = cell % p;
    e.value = M(e.row, e.col) + 0.1 * rng.normal();
    if (rng.uniform() < 0.05) e.value += (rng.uniform() < 0.5 ? -4.0 : 4.0);
    observed.push_back(e);
  }
  ProblemInstance inst{
      std::make_shared<HuberCompletionObjective>(std::move(observed), m, p,
                                                 c.huber_delta),
      Dictionary::nuclear_ball(m, p, c.beta), true, {}, std::nullopt};
  inst.certificate.D_A = TaggedValue{2.0 * c.beta, Provenance::Analytic};
  return inst;
}

ProblemInstance make_dictlearn(const ExperimentConfig& c) {
  DictLearnData data =
      gen_dictlearn_data(c.dl_m, c.dl_n, c.dl_p, c.dl_l, c.solver.seed);
  std::vector<Dictionary> blocks;
  blocks.reserve(c.dl_p + c.dl_n);
  for (index_t j = 0; j < c.dl_p; ++j)
    blocks.push_back(Dictionary::l2_ball(c.dl_m, 1.0));
  for (index_t i = 0; i < c.dl_n; ++i)
    blocks.push_back(Dictionary::l1_ball(c.dl_p, c.beta,
                                         DomainKind::ConvexHull,
                                         /*enumerate=*/false));
  ProblemInstance inst{
      std::make_shared<DictionaryLearningObjective>(std::move(data.A), c.dl_p),
      Dictionary::product(std::move(blocks)), false, {}, std::nullopt};
  inst.certificate.D_A =
      TaggedValue{inst.dictionary.diameter(), Provenance::Analytic};
  return inst;
}

}  // namespace

ProblemInstance gen_synthetic(const ExperimentConfig& config) {
  switch (config.problem) {
    case ProblemKind::QuadraticSimplex: return make_quadratic_simplex(config);
    case ProblemKind::QuadraticSpan: return make_quadratic_span(config);
    case ProblemKind::QuadraticL2Ball: return make_quadratic_l2ball(config);
    case ProblemKind::LogisticL1: return make_logistic(config, DomainKind::ConvexHull);
    case ProblemKind::LogisticSpan: return make_logistic(config, DomainKind::LinearSpan);
    case ProblemKind::HuberNuclear: return make_huber_nuclear(config);
    case ProblemKind::DictLearn: return make_dictlearn(config);
  }
  throw std::invalid_argument("gen_synthetic: unknown problem");
}

// ---------------------------------------------------------------------------
// Experiment execution
// ---------------------------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ProblemInstance inst = gen_synthetic(config);

  Trace trace;
  if (config.method == "AC") {
    trace = run(*inst.objective, inst.dictionary, config.subroutine, config.solver);
  } else {
    BaselineConfig bc;
    bc.base = config.solver;
    bc.convex = inst.convex;
    bc.tau_up = config.tau_up;
    bc.tau_down = config.tau_down;
    bc.fixed_L = config.fixed_L;
    if (config.method == "OPEN") bc.rule = StepRule::OpenLoop;
    else if (config.method == "FIXED") bc.rule = StepRule::FixedL;
    else bc.rule = StepRule::Backtracking;
    if (bc.rule == StepRule::FixedL && !bc.fixed_L)
      bc.fixed_L = inst.objective->lipschitz_constant();
    trace = run_baseline(*inst.objective, inst.dictionary, config.subroutine, bc);
  }
  trace.meta.problem = to_string(config.problem);

  AuditReport audit = audit_trace(trace, inst.certificate, config.solver.eta);
  if (!audit.all_passed())
    throw std::runtime_error("run_experiment: trace failed the invariant audit\n" +
                             audit.to_string());
  return {std::move(trace), std::move(audit), inst.f_star, inst.certificate};
}

// ---------------------------------------------------------------------------
// Trace I/O
// ---------------------------------------------------------------------------

static const char* kCsvHeader =
    "t,f,gap,gamma,gamma_max,L_t,accepted,in_I_eta,in_G,n_f,n_g,n_lmo,elapsed_s";

void emit_csv(const Trace& trace, std::ostream& out) {
  out << kCsvHeader << "\n";
  for (const auto& r : trace.records) {
    out << r.t << ',' << format_double(r.f_value) << ','
        << format_double(r.fw_gap) << ',' << format_double(r.gamma) << ','
        << format_double(r.gamma_max) << ',' << format_double(r.L_t) << ','
        << (r.accepted ? 1 : 0) << ',' << (r.in_I_eta ? 1 : 0) << ','
        << (r.in_G ? 1 : 0) << ',' << r.n_f_evals << ',' << r.n_grad_evals
        << ',' << r.n_lmo_calls << ',' << format_double(r.elapsed) << "\n";
  }
}

std::string csv_string(const Trace& trace) {
  std::ostringstream out;
  emit_csv(trace, out);
  return out.str();
}

void emit_csv_file(const Trace& trace, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("emit_csv_file: cannot open " + tmp);
    emit_csv(trace, out);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("emit_csv_file: cannot rename into " + path);
}

Trace parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("parse_csv: empty stream");
  if (trim(line) != kCsvHeader)
    throw std::runtime_error("parse_csv: unexpected header '" + line + "'");
  Trace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 13)
      throw std::runtime_error("parse_csv: line " + std::to_string(line_no) +
                               " has " + std::to_string(fields.size()) +
                               " fields");
    auto num = [&](int i) { return to_scalar(fields[i], "csv field"); };
    IterRecord r;
    r.t = to_count(fields[0], "t");
    r.f_value = num(1);
    r.fw_gap = num(2);
    r.gamma = num(3);
    r.gamma_max = num(4);
    r.L_t = num(5);
    r.accepted = fields[6] == "1";
    r.in_I_eta = fields[7] == "1";
    r.in_G = fields[8] == "1";
    r.n_f_evals = to_count(fields[9], "n_f");
    r.n_grad_evals = to_count(fields[10], "n_g");
    r.n_lmo_calls = to_count(fields[11], "n_lmo");
    r.elapsed = num(12);
    trace.records.push_back(r);
  }
  if (!trace.records.empty()) {
    trace.summary.iterations = static_cast<count_t>(trace.records.size());
    trace.summary.final_value = trace.records.back().f_value;
    trace.summary.final_gap = trace.records.back().fw_gap;
  }
  return trace;
}

Trace parse_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_csv_file: cannot open " + path);
  return parse_csv(in);
}

void emit_plot_data(const std::vector<Trace>& traces, const std::string& path) {
  if (traces.empty())
    throw std::invalid_argument("emit_plot_data: no traces");
  nlohmann::json root;
  for (const auto& trace : traces) {
    std::string key = trace.meta.method + "-" + trace.meta.subroutine;
    while (root.contains(key)) key += "'";
    nlohmann::json entry;
    entry["problem"] = trace.meta.problem;
    entry["seed"] = trace.meta.seed;
    entry["status"] = to_string(trace.summary.status);
    auto& t = entry["t"] = nlohmann::json::array();
    auto& gap = entry["gap"] = nlohmann::json::array();
    auto& f = entry["f"] = nlohmann::json::array();
    auto& el = entry["elapsed_s"] = nlohmann::json::array();
    for (const auto& r : trace.records) {
      t.push_back(r.t);
      gap.push_back(r.fw_gap);
      f.push_back(r.f_value);
      el.push_back(r.elapsed);
    }
    root[key] = std::move(entry);
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("emit_plot_data: cannot open " + tmp);
    out << root.dump(2) << "\n";
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("emit_plot_data: cannot rename into " + path);
}

std::string strip_elapsed_column(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    out << (comma == std::string::npos ? line : line.substr(0, comma)) << "\n";
  }
  return out.str();
}

}  // namespace acfw

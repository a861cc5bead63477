#include <acfw/bench.hpp>
#include <acfw/random.hpp>

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

namespace {

using namespace acfw;

void print_summary(const Trace& trace) {
  const auto& s = trace.summary;
  std::cout << trace.meta.problem << " " << trace.meta.method << "-"
            << trace.meta.subroutine << " seed=" << trace.meta.seed
            << " status=" << to_string(s.status) << " iters=" << s.iterations
            << " f=" << s.final_value << " gap=" << s.final_gap
            << " n_f=" << s.n_f_evals << " n_g=" << s.n_grad_evals
            << " n_lmo=" << s.n_lmo_calls << " wall=" << s.wall_seconds << "s"
            << std::endl;
}

ExperimentResult execute(const ExperimentConfig& config,
                         const std::string& out_dir) {
  ExperimentResult result = run_experiment(config);
  std::filesystem::create_directories(out_dir);
  const std::string path = out_dir + "/" + config.label() + ".csv";
  emit_csv_file(result.trace, path);
  return result;
}

int cmd_run(const std::string& config_path,
            const std::vector<std::string>& overrides,
            const std::string& out_dir, const std::string& plot_path) {
  ExperimentConfig config;
  if (!config_path.empty()) config = parse_config_file(config_path);
  for (const auto& kv : overrides) apply_override(config, kv);
  config.validate();
  ExperimentResult result = execute(config, out_dir);
  print_summary(result.trace);
  if (!plot_path.empty()) emit_plot_data({result.trace}, plot_path);
  return 0;
}

int cmd_sweep(const std::string& grid_path, const std::string& out_dir,
              unsigned jobs) {
  const std::vector<ExperimentConfig> configs = parse_grid_file(grid_path);
  if (jobs == 0) jobs = 1;
  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex io_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      try {
        ExperimentResult result = execute(configs[i], out_dir);
        std::lock_guard<std::mutex> lock(io_mutex);
        print_summary(result.trace);
      } catch (const std::exception& err) {
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cerr << configs[i].label() << ": " << err.what() << std::endl;
        ++failures;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  std::cout << configs.size() - failures << "/" << configs.size()
            << " runs succeeded" << std::endl;
  return failures == 0 ? 0 : 1;
}

int cmd_gradcheck(const std::string& problem_name, std::uint64_t seed,
                  int n_points) {
  std::vector<std::string> names;
  if (problem_name == "all")
    names = {"quadratic-simplex", "logistic-l1", "huber-nuclear", "dictlearn"};
  else
    names = {problem_name};

  bool all_ok = true;
  for (const auto& name : names) {
    ExperimentConfig config;
    config.problem = problem_from_string(name);
    config.solver.seed = seed;
    if (config.problem == ProblemKind::LogisticSpan ||
        config.problem == ProblemKind::QuadraticSpan)
      config.subroutine = SubroutineKind::MP;
    ProblemInstance inst = gen_synthetic(config);
    Rng rng(seed ^ 0xfeedbeefcafe1234ULL);
    scalar_t worst = 0.0;
    for (int k = 0; k < n_points; ++k) {
      // A random hull point: a convex mixture of a few oracle outputs.
      vector_t x = inst.dictionary.lmo(rng.normal_vector(inst.dictionary.dim())).v;
      for (int mix = 0; mix < 3; ++mix) {
        const scalar_t w = rng.uniform();
        x = (1.0 - w) * x +
            w * inst.dictionary.lmo(rng.normal_vector(inst.dictionary.dim())).v;
      }
      worst = std::max(worst, gradient_check_error(*inst.objective, x));
    }
    const bool ok = worst <= 1e-5;
    all_ok = all_ok && ok;
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name
              << " max finite-difference error " << worst << " over "
              << n_points << " points" << std::endl;
  }
  return all_ok ? 0 : 1;
}

int cmd_audit(const std::string& trace_path, scalar_t eta, scalar_t delta,
              const std::string& method, const std::string& subroutine,
              count_t atoms, scalar_t L) {
  Trace trace = parse_csv_file(trace_path);
  trace.meta.method = method;
  trace.meta.subroutine = subroutine;
  trace.meta.eta = eta;
  trace.meta.delta = delta;
  trace.meta.atom_count = atoms;
  RateCertificate cert;
  if (L > 0.0) cert.L = TaggedValue{L, Provenance::UserSupplied};
  const AuditReport report = audit_trace(trace, cert, eta);
  std::cout << report.to_string();
  return report.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Auto-conditioned Frank-Wolfe benchmark harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", plot_path;
  std::vector<std::string> overrides;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment");
  run_cmd->add_option("--config", config_path, "Key=value config file");
  run_cmd->add_option("--set", overrides, "Override key=value");
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--plot", plot_path, "Also write plot data (JSON)");

  std::string grid_path, sweep_out = ".";
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a config grid");
  sweep_cmd->add_option("--grid", grid_path, "Grid file")->required();
  sweep_cmd->add_option("--out", sweep_out, "Output directory");
  sweep_cmd->add_option("--jobs", jobs, "Concurrent runs");

  std::string gc_problem = "all";
  std::uint64_t gc_seed = 0;
  int gc_points = 10;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  gc_cmd->add_option("--problem", gc_problem, "Problem name or 'all'");
  gc_cmd->add_option("--seed", gc_seed, "Instance seed");
  gc_cmd->add_option("--points", gc_points, "Random points per problem");

  std::string trace_path, audit_method = "AC", audit_sub = "CFW";
  double audit_eta = 1.5, audit_delta = 1.0, audit_L = 0.0;
  count_t audit_atoms = 0;
  auto* audit_cmd = app.add_subcommand("audit", "Audit a trace CSV");
  audit_cmd->add_option("--trace", trace_path, "Trace CSV path")->required();
  audit_cmd->add_option("--eta", audit_eta, "Significant-descent threshold");
  audit_cmd->add_option("--delta", audit_delta, "Damping delta");
  audit_cmd->add_option("--method", audit_method, "Method label (AC/B/FIXED/OPEN)");
  audit_cmd->add_option("--subroutine", audit_sub, "Subroutine label");
  audit_cmd->add_option("--atoms", audit_atoms, "Dictionary size (0 = continuous)");
  audit_cmd->add_option("--L", audit_L, "Analytic Lipschitz constant");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed())
      return cmd_run(config_path, overrides, out_dir, plot_path);
    if (sweep_cmd->parsed()) return cmd_sweep(grid_path, sweep_out, jobs);
    if (gc_cmd->parsed()) return cmd_gradcheck(gc_problem, gc_seed, gc_points);
    if (audit_cmd->parsed())
      return cmd_audit(trace_path, audit_eta, audit_delta, audit_method,
                       audit_sub, audit_atoms, audit_L);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << std::endl;
    return 1;
  }
  return 0;
}

// randeriv command-line front end: simulate, figures, oracle, selftest.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "randeriv/randeriv.hpp"

namespace {

namespace ex = randeriv::experiments;

enum ExitCode : int { kOk = 0, kInvariant = 1, kBadManifest = 2, kSolverBudget = 3 };

int exit_code_for(const randeriv::Error& e) {
  switch (e.kind()) {
    case randeriv::ErrorKind::BadManifest:
    case randeriv::ErrorKind::BadSpec:
    case randeriv::ErrorKind::Io:
      return kBadManifest;
    case randeriv::ErrorKind::NoConvergence:
    case randeriv::ErrorKind::Degenerate:
      return kSolverBudget;
    default:
      return kInvariant;
  }
}

int cmd_simulate(const std::string& manifest_path, const std::string& output_override) {
  ex::ExperimentManifest manifest = ex::load_manifest(manifest_path);
  if (!output_override.empty()) manifest.output_dir = output_override;
  const std::size_t workers = ex::worker_count();
  std::cerr << "simulate: " << manifest.n_grid.size() << " sizes x " << manifest.trials << " trials on " << workers
            << " worker(s)\n";
  const ex::ConvergenceResult result = ex::run_convergence(manifest, workers);
  for (const auto& p : ex::write_convergence_outputs(result, manifest.output_dir).paths)
    std::cerr << "wrote " << p.string() << '\n';
  for (const auto& f : result.failures)
    std::cerr << "solver failure at n=" << f.n << " trial=" << f.trial << " stage=" << f.stage << ": " << f.message
              << '\n';
  if (result.budget_exceeded()) {
    std::cerr << result.failures.size() << " of " << result.tasks << " tasks failed, above the budget of "
              << manifest.failure_budget << '\n';
    return kSolverBudget;
  }
  for (const auto& v : result.violations)
    std::cerr << "invariant violated at n=" << v.n << " trial=" << v.trial << " stage=" << v.stage << ": " << v.what
              << '\n';
  return result.violations.empty() ? kOk : kInvariant;
}

int cmd_figures(const std::string& manifest_path, const std::string& output_override) {
  ex::ExperimentManifest manifest = ex::load_manifest(manifest_path);
  if (!output_override.empty()) manifest.output_dir = output_override;
  for (const auto& p : ex::run_figures(manifest).paths) std::cerr << "wrote " << p.string() << '\n';
  return kOk;
}

int cmd_oracle(std::size_t n, std::size_t draws, int beta, std::uint64_t seed, const std::string& output) {
  if (n < 2 || n > randeriv::kMaxCoupledDimension) {
    std::cerr << "oracle: n must lie in [2, " << randeriv::kMaxCoupledDimension << "]\n";
    return kBadManifest;
  }
  constexpr double kTolerance = 1e-8;
  std::vector<double> distances(draws);
  ex::parallel_for(draws, ex::worker_count(), [&](std::size_t d) {
    randeriv::RngStream rng(seed, randeriv::stream_id(d, 0, randeriv::StreamPurpose::Unitary));
    const randeriv::PointSet diag = randeriv::sample_points(randeriv::UniformDisk{}, n, rng);
    const randeriv::UnitaryMatrix u = beta == 1 ? randeriv::haar_orthogonal(n, rng) : randeriv::haar_unitary(n, rng);
    distances[d] = randeriv::coupled_check(diag, u);
  });
  double worst = 0.0;
  for (double d : distances) worst = std::max(worst, d);
  nlohmann::json report{{"n", n},
                        {"draws", draws},
                        {"beta", beta},
                        {"seed", seed},
                        {"tolerance", kTolerance},
                        {"max_distance", worst},
                        {"median_distance", ex::median_of(distances)},
                        {"distances", distances}};
  if (output.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    auto out = ex::open_output(output);
    out << report.dump(2) << '\n';
    ex::finish_output(out, output);
  }
  return worst <= kTolerance ? kOk : kInvariant;
}

int cmd_selftest(double residual_tol) {
  randeriv::ToleranceConfig tol;
  if (residual_tol > 0.0) tol.residual_tol = residual_tol;
  tol.validate();
  const auto results = ex::run_selftest(tol);
  const ex::CheckResult* first_failure = nullptr;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.passed) std::cout << ": " << r.detail;
    std::cout << '\n';
    if (!r.passed && !first_failure) first_failure = &r;
  }
  if (first_failure) {
    std::cerr << "selftest failed: " << first_failure->name << '\n';
    return kInvariant;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized derivatives of random polynomials: simulations and checks"};
  app.require_subcommand(1);

  std::string manifest_path, output_override;
  auto* simulate = app.add_subcommand("simulate", "run the convergence experiment described by a manifest");
  simulate->add_option("manifest", manifest_path, "JSON manifest")->required();
  simulate->add_option("-o,--output", output_override, "override the manifest's output_dir");

  auto* figures = app.add_subcommand("figures", "write scatter SVGs and point CSVs for a manifest");
  figures->add_option("manifest", manifest_path, "JSON manifest")->required();
  figures->add_option("-o,--output", output_override, "override the manifest's output_dir");

  std::size_t n = 32, draws = 100;
  int beta = 2;
  std::uint64_t seed = 1;
  std::string oracle_output;
  auto* oracle = app.add_subcommand("oracle", "compare zeros with Haar minor spectra");
  oracle->add_option("--n", n, "matrix size")->capture_default_str();
  oracle->add_option("--draws", draws, "number of Haar draws")->capture_default_str();
  oracle->add_option("--beta", beta, "1 (orthogonal) or 2 (unitary)")->check(CLI::IsMember({1, 2}))->capture_default_str();
  oracle->add_option("--seed", seed, "master seed")->capture_default_str();
  oracle->add_option("-o,--output", oracle_output, "write the JSON report here instead of stdout");

  double residual_tol = 0.0;
  auto* selftest = app.add_subcommand("selftest", "run the built-in invariant checks");
  selftest->add_option("--residual-tol", residual_tol, "override the solver residual tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*simulate) return cmd_simulate(manifest_path, output_override);
    if (*figures) return cmd_figures(manifest_path, output_override);
    if (*oracle) return cmd_oracle(n, draws, beta, seed, oracle_output);
    if (*selftest) return cmd_selftest(residual_tol);
  } catch (const randeriv::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvariant;
  }
  return kOk;
}

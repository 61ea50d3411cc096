#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "randeriv/experiments/runner.hpp"
#include "randeriv/matching.hpp"
#include "randeriv/metrics.hpp"
#include "randeriv/numerics.hpp"
#include "randeriv/operator.hpp"
#include "randeriv/rmt.hpp"
#include "randeriv/sampling.hpp"

namespace randeriv::experiments {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline constexpr std::uint64_t kSelftestSeed = 20240601;

using Check = std::function<std::string(const ToleranceConfig&)>;  // empty string = pass

inline std::string fail_if(bool bad, const std::string& what) { return bad ? what : std::string(); }

inline std::string num(double x) { return format_double(x); }

inline std::vector<std::pair<std::string, Check>> selftest_checks() {
  std::vector<std::pair<std::string, Check>> checks;

  checks.emplace_back("numerics.companion_roots", [](const ToleranceConfig&) {
    const std::vector<Complex> roots{{1, 0}, {-2, 1}, {0.5, -0.5}, {3, 0}};
    const auto found = polynomial_roots_companion(poly_from_roots(roots));
    const double d = max_matched_distance(roots, found);
    return fail_if(d > 1e-10, "companion roots off by " + num(d));
  });

  checks.emplace_back("numerics.eval_S_matches_derivative", [](const ToleranceConfig&) {
    const PointSet pts{{1, 0}, {0, 1}, {-1, -1}};
    const WeightVector w{1.0, 2.0, 0.5};
    const Complex z{0.3, 0.2}, h{1e-6, 0.0};
    const auto e = eval_S(pts, w, z);
    const Complex fd = (eval_S(pts, w, z + h).value - eval_S(pts, w, z - h).value) / (2.0 * h);
    return fail_if(std::abs(fd - e.derivative) > 1e-6 * std::abs(e.derivative), "S' disagrees with finite difference");
  });

  checks.emplace_back("operator.two_point_closed_form", [](const ToleranceConfig& tol) {
    const PointSet pts{{-1, 0}, {1, 0}};
    const WeightVector w{1.0, 3.0};
    const auto r = randomized_derivative(pts, w, tol);
    const double expected = (1.0 - 3.0) / (1.0 + 3.0);
    return fail_if(r.roots.size() != 1 || std::abs(r.roots[0] - Complex{expected, 0}) > 1e-12,
                   "root of the two-point case is wrong");
  });

  checks.emplace_back("operator.cardinality_and_contraction", [](const ToleranceConfig& tol) {
    for (int t = 0; t < 20; ++t) {
      RngStream rng(kSelftestSeed, stream_id(t, 0, StreamPurpose::Points));
      const std::size_t n = 3 + rng.below(30);
      const PointSet pts = sample_points(UniformDisk{1.5}, n, rng);
      const WeightVector w = sample_gamma_weights(2.0, n, rng);
      const auto r = randomized_derivative(pts, w, tol);
      if (r.status != SolveStatus::Converged) return std::string("solver residual ") + num(r.max_residual());
      if (r.roots.size() != n - 1) return std::string("flat root count wrong");
      if (PointSet(r.roots).max_modulus() > pts.max_modulus() * (1 + 1e-12)) return std::string("max modulus grew");
      const auto c = circular_randomized_derivative(pts, w, tol);
      if (c.status != SolveStatus::Converged) return std::string("circular residual ") + num(c.max_residual());
      if (c.roots.size() != n) return std::string("circular root count wrong");
      if (PointSet(c.roots).max_modulus() > pts.max_modulus() * (1 + 1e-9)) return std::string("circular max modulus grew");
    }
    return std::string();
  });

  checks.emplace_back("operator.real_line_interlacing", [](const ToleranceConfig& tol) {
    RngStream rng(kSelftestSeed, 11);
    std::vector<Complex> xs;
    for (int i = 0; i < 25; ++i) xs.emplace_back(rng.uniform(-3, 3), 0.0);
    const PointSet pts(xs);
    const auto r = randomized_derivative(pts, sample_gamma_weights(1.0, xs.size(), rng), tol);
    std::vector<double> a, b;
    for (const auto& z : xs) a.push_back(z.real());
    for (const auto& z : r.roots) {
      if (std::abs(z.imag()) > 1e-9) return std::string("non-real zero");
      b.push_back(z.real());
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; i < b.size(); ++i)
      if (b[i] < a[i] || b[i] > a[i + 1]) return std::string("zeros do not interlace");
    return std::string();
  });

  checks.emplace_back("operator.circle_interlacing", [](const ToleranceConfig& tol) {
    RngStream rng(kSelftestSeed, 12);
    const PointSet pts = sample_points(UniformCircle{}, 30, rng);
    const auto r = circular_randomized_derivative(pts, sample_gamma_weights(2.0, 30, rng), tol);
    std::vector<double> a, b;
    for (const auto& z : pts) a.push_back(std::arg(z));
    for (const auto& z : r.roots) {
      if (std::abs(std::abs(z) - 1.0) > 1e-9) return std::string("zero off the circle");
      b.push_back(std::arg(z));
    }
    std::sort(a.begin(), a.end());
    if (b.size() != a.size()) return std::string("wrong number of zeros");
    // Exactly one zero on each open arc between consecutive inputs, wrap-around arc included.
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double lo = a[i], hi = i + 1 < a.size() ? a[i + 1] : a[0] + 2.0 * std::numbers::pi;
      std::size_t count = 0;
      for (double t : b) {
        const double u = t < lo ? t + 2.0 * std::numbers::pi : t;
        if (u > lo && u < hi) ++count;
      }
      if (count != 1) return std::string("zeros do not interlace on the circle");
    }
    return std::string();
  });

  checks.emplace_back("sampling.gamma_mean", [](const ToleranceConfig&) {
    RngStream rng(kSelftestSeed, 21);
    for (double shape : {0.25, 0.5, 1.0, 3.0}) {
      double s = 0.0;
      const int draws = 20000;
      for (int i = 0; i < draws; ++i) s += sample_gamma(shape, rng);
      const double mean = s / draws, se = std::sqrt(shape / draws);
      if (std::abs(mean - shape) > 5.0 * se) return "Gamma(" + num(shape) + ") mean " + num(mean);
    }
    return std::string();
  });

  checks.emplace_back("metrics.sliced_w1_identity_symmetry", [](const ToleranceConfig&) {
    RngStream rng(kSelftestSeed, 31);
    const EmpiricalMeasure a(sample_points(UniformDisk{}, 40, rng)), b(sample_points(GaussianPlane{}, 37, rng));
    const double ab = sliced_w1(a, b, 32, RngStream(kSelftestSeed, 32)).value;
    const double ba = sliced_w1(b, a, 32, RngStream(kSelftestSeed, 32)).value;
    const double aa = sliced_w1(a, a, 32, RngStream(kSelftestSeed, 32)).value;
    return fail_if(ab != ba || aa != 0.0, "sliced W1 is not symmetric or d(a, a) != 0");
  });

  checks.emplace_back("metrics.log_potential_identity", [](const ToleranceConfig&) {
    const PointSet pts{{0.1, 0.2}, {-0.3, 0.05}, {0.4, -0.35}, {1.5, 1.5}};
    const TestFunction phi({0.0, 0.0}, 1.0);
    double direct = 0.0;
    for (const auto& z : pts) direct += phi(z);
    const double via_log = log_potential_integral(pts, phi, phi.radius() / 100.0);
    return fail_if(std::abs(via_log - direct) > 0.02 * std::max(1.0, direct),
                   "log-potential integral " + num(via_log) + " vs " + num(direct));
  });

  checks.emplace_back("rmt.coupling", [](const ToleranceConfig& tol) {
    for (int t = 0; t < 5; ++t) {
      RngStream rng(kSelftestSeed, stream_id(t, 0, StreamPurpose::Unitary));
      const PointSet diag = sample_points(UniformDisk{}, 16, rng);
      const UnitaryMatrix u = haar_unitary(16, rng);
      if (u.unitarity_defect() > 1e-10) return std::string("unitarity defect ") + num(u.unitarity_defect());
      const double d = coupled_check(diag, u, tol);
      if (d > 1e-8) return std::string("coupled distance ") + num(d);
    }
    return std::string();
  });

  checks.emplace_back("experiments.thread_count_independence", [](const ToleranceConfig& tol) {
    ExperimentManifest m;
    m.measure = UniformCircle{};
    m.n_grid = {12, 20};
    m.trials = 3;
    m.master_seed = kSelftestSeed;
    m.schedule = ConstantSchedule{3};
    m.sliced_directions = 8;
    auto render = [&](std::size_t workers) {
      std::ostringstream os;
      write_series_csv(os, run_convergence(m, workers, tol).series);
      return os.str();
    };
    return fail_if(render(1) != render(3), "series differs between 1 and 3 workers");
  });

  return checks;
}

}  // namespace detail

/// Runs every invariant check at fixed seeds. Exceptions count as failures.
inline std::vector<CheckResult> run_selftest(const ToleranceConfig& tol = {}) {
  std::vector<CheckResult> results;
  for (const auto& [name, check] : detail::selftest_checks()) {
    CheckResult r{name, false, {}};
    try {
      r.detail = check(tol);
      r.passed = r.detail.empty();
    } catch (const std::exception& e) {
      r.detail = e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace randeriv::experiments

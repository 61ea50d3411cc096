// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "randeriv/randeriv.hpp"

using namespace randeriv;
using namespace randeriv::experiments;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(4) << x;
  return os.str();
}

std::vector<Complex> transform(std::span<const Complex> z, Complex shift, Complex scale) {
  std::vector<Complex> out;
  out.reserve(z.size());
  for (const auto& v : z) out.push_back(scale * v + shift);
  return out;
}

// Zeros on (-pi, pi] sorted; each open arc between consecutive poles holds exactly one.
bool one_zero_per_arc(const PointSet& poles, std::span<const Complex> zeros) {
  std::vector<double> a;
  for (const auto& p : poles) a.push_back(std::arg(p));
  std::sort(a.begin(), a.end());
  std::vector<int> hits(a.size(), 0);
  for (const auto& z : zeros) {
    const double t = std::arg(z);
    for (double p : a)
      if (std::abs(std::remainder(t - p, 2 * std::numbers::pi)) < 1e-14) return false;
    const auto up = std::upper_bound(a.begin(), a.end(), t) - a.begin();
    const std::size_t arc = up == 0 ? a.size() - 1 : static_cast<std::size_t>(up - 1);
    ++hits[arc];
  }
  return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

Outcome closed_forms() {
  Outcome o;
  double worst = 0.0;
  RngStream rng(101, 1);
  for (int t = 0; t < 20; ++t) {
    const double g1 = 0.1 + rng.uniform() * 3, g2 = 0.1 + rng.uniform() * 3;
    const auto r = randomized_derivative(PointSet{{-1, 0}, {1, 0}}, WeightVector{g1, g2});
    // Q = g1 (z - 1) + g2 (z + 1).
    worst = std::max(worst, std::abs(r.roots.at(0) - Complex{(g1 - g2) / (g1 + g2), 0}));
  }
  if (worst > 1e-12) o = {false, "two-point error " + fmt(worst)};

  const double g1 = 0.7, g2 = 1.9, g3 = 0.4;
  const auto d = randomized_derivative(PointSet{{0, 0}, {0, 0}, {1, 0}}, WeightVector{g1, g2, g3});
  const std::vector<Complex> expected{{0, 0}, {(g1 + g2) / (g1 + g2 + g3), 0}};
  const double dd = max_matched_distance(d.roots, expected);
  if (dd > 1e-10) o = {false, "deflation error " + fmt(dd)};

  const auto c = circular_randomized_derivative(PointSet{{1, 0}, {-1, 0}}, WeightVector{1.0, 1.0});
  const double cd = max_matched_distance(c.roots, std::vector<Complex>{{0, 1}, {0, -1}});
  if (cd > 1e-10) o = {false, "circular error " + fmt(cd)};
  if (o.passed) o.detail = "two-point " + fmt(worst) + ", deflation " + fmt(dd) + ", circular " + fmt(cd);
  return o;
}

Outcome equal_weight_reduction() {
  RngStream rng(102, 1);
  double flat = 0.0, circ = 0.0;
  int configs = 0;
  for (std::size_t n : {5u, 10u, 20u}) {
    for (int t = 0; t < 50; ++t, ++configs) {
      const PointSet pts = t % 2 == 0 ? sample_points(UniformDisk{}, n, rng) : sample_points(GaussianPlane{1.0}, n, rng);
      const auto p = poly_from_roots(pts);
      const auto dp = poly_derivative(p);
      flat = std::max(flat, max_matched_distance(randomized_derivative(pts, WeightVector::equal(n)).roots,
                                                 polynomial_roots_companion(dp)));
      // z P' - (n/2) P
      std::vector<Complex> q(p.size(), Complex{0, 0});
      for (std::size_t i = 0; i < dp.size(); ++i) q[i + 1] += dp[i];
      for (std::size_t i = 0; i < p.size(); ++i) q[i] -= 0.5 * static_cast<double>(n) * p[i];
      circ = std::max(circ, max_matched_distance(circular_randomized_derivative(pts, WeightVector::equal(n)).roots,
                                                 polynomial_roots_companion(q)));
    }
  }
  Outcome o{flat <= 1e-6 && circ <= 1e-6, ""};
  o.detail = std::to_string(configs) + " configs per variant, flat " + fmt(flat) + ", circular " + fmt(circ);
  return o;
}

Outcome rmt_coupling() {
  double worst = 0.0;
  for (std::size_t n : {8u, 32u, 64u}) {
    RngStream rng(103, n);
    for (int t = 0; t < 100; ++t) {
      const PointSet d = sample_points(UniformDisk{}, n, rng);
      worst = std::max(worst, coupled_check(d, haar_unitary(n, rng)));
    }
  }
  return {worst <= 1e-8, "300 draws, max distance " + fmt(worst)};
}

Outcome structural_invariants() {
  int flat_fail = 0, circ_fail = 0, real_fail = 0, arc_fail = 0;
  const int instances = 200;

  RngStream rng(104, 1);
  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 2 + rng.below(50);
    const PointSet pts = sample_points(GaussianPlane{0.5 + 2.0 * rng.uniform()}, n, rng);
    const WeightVector w = sample_gamma_weights(t % 2 == 0 ? 1.0 : 2.0, n, rng);
    const auto r = randomized_derivative(pts, w);
    bool ok = r.status == SolveStatus::Converged && r.roots.size() == n - 1;
    const double scale = std::max(1.0, pts.max_modulus());
    if (ok) {
      for (const auto& z : r.roots) ok = ok && std::abs(z) <= pts.max_modulus() + 1e-9 * scale;
      const Complex c{rng.normal(), rng.normal()};
      const Complex s = std::polar(0.5 + rng.uniform(), rng.angle());
      const auto moved = randomized_derivative(PointSet(transform(pts.view(), c, s)), w);
      ok = ok && max_matched_distance(moved.roots, transform(r.roots, c, s)) <= 1e-9 * std::abs(s) * scale + 1e-9;
      const auto rescaled = randomized_derivative(pts, w.scaled(0.01 + 50 * rng.uniform()));
      ok = ok && max_matched_distance(rescaled.roots, r.roots) <= 1e-10 * scale;
    }
    if (!ok) ++flat_fail;
  }

  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 1 + rng.below(50);
    const PointSet pts = sample_points(UniformDisk{0.5 + rng.uniform()}, n, rng);
    const WeightVector w = sample_gamma_weights(t % 2 == 0 ? 1.0 : 2.0, n, rng);
    const auto r = circular_randomized_derivative(pts, w);
    bool ok = r.status == SolveStatus::Converged && r.roots.size() == n;
    if (ok) {
      for (const auto& z : r.roots) ok = ok && std::abs(z) <= pts.max_modulus() + 1e-9;
      const Complex omega = std::polar(1.0, rng.angle());
      const auto rotated = circular_randomized_derivative(PointSet(transform(pts.view(), 0.0, omega)), w);
      ok = ok && max_matched_distance(rotated.roots, transform(r.roots, 0.0, omega)) <= 1e-9;
      const auto rescaled = circular_randomized_derivative(pts, w.scaled(0.01 + 50 * rng.uniform()));
      ok = ok && max_matched_distance(rescaled.roots, r.roots) <= 1e-10;
    }
    if (!ok) ++circ_fail;
  }

  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 2 + rng.below(50);
    std::vector<Complex> xs;
    for (std::size_t i = 0; i < n; ++i) xs.emplace_back(rng.uniform(-5, 5), 0.0);
    const auto r = randomized_derivative(PointSet(xs), sample_gamma_weights(t % 2 == 0 ? 1.0 : 2.0, n, rng));
    std::vector<double> a, b;
    bool ok = r.status == SolveStatus::Converged && r.roots.size() == n - 1;
    for (const auto& z : xs) a.push_back(z.real());
    for (const auto& z : r.roots) {
      ok = ok && std::abs(z.imag()) <= 1e-9;
      b.push_back(z.real());
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; ok && i < b.size(); ++i) ok = b[i] > a[i] && b[i] < a[i + 1];
    if (!ok) ++real_fail;
  }

  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 2 + rng.below(60);
    const PointSet pts = sample_points(UniformCircle{}, n, rng);
    const auto r = circular_randomized_derivative(pts, sample_gamma_weights(t % 2 == 0 ? 1.0 : 2.0, n, rng));
    bool ok = r.status == SolveStatus::Converged && r.roots.size() == n;
    for (const auto& z : r.roots) ok = ok && std::abs(std::abs(z) - 1.0) <= 1e-8;
    ok = ok && one_zero_per_arc(pts, r.roots);
    if (!ok) ++arc_fail;
  }

  const int total = flat_fail + circ_fail + real_fail + arc_fail;
  return {total == 0, std::to_string(instances) + " instances per family; failures flat " + std::to_string(flat_fail) +
                          ", circular " + std::to_string(circ_fail) + ", real-line " + std::to_string(real_fail) +
                          ", unit-circle " + std::to_string(arc_fail)};
}

Outcome log_potential() {
  RngStream rng(105, 1);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + rng.below(50);
    const PointSet pts = t % 2 == 0 ? sample_points(UniformDisk{1.5}, n, rng) : sample_points(UniformCircle{}, n, rng);
    const TestFunction phi({rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)}, rng.uniform(0.5, 1.0));
    const double direct = static_cast<double>(n) * test_function_integral(EmpiricalMeasure(pts), phi);
    const double via_log = log_potential_integral(pts, phi, phi.radius() / 100.0);
    worst = std::max(worst, std::abs(via_log - direct) / std::max(1.0, std::abs(direct)));
  }
  return {worst <= 0.02, "20 pairs, worst relative error " + fmt(worst)};
}

Outcome convergence_trend() {
  const auto manifest = load_manifest(std::filesystem::path(RANDERIV_MANIFEST_DIR) / "convergence_circle.json");
  const auto result = run_convergence(manifest);
  const auto summary = summarize(result);
  std::vector<double> med;
  std::string detail = "median bump deviation:";
  for (std::size_t n : manifest.n_grid) {
    med.push_back(summary_median(summary, n, 1, "bump_initial"));
    detail += " n=" + std::to_string(n) + " " + fmt(med.back());
  }
  bool ok = result.failures.empty() && manifest.n_grid.front() == 50 && manifest.n_grid.back() == 400;
  for (std::size_t i = 1; i < med.size(); ++i) ok = ok && med[i] <= med[i - 1];
  const double ratio = med.back() / med.front();
  ok = ok && ratio <= 0.6;
  return {ok, detail + ", ratio " + fmt(ratio)};
}

Outcome iterated_trend() {
  const std::size_t n = 400;
  const int m_small = schedule_iterations(LogFractionSchedule{3.6}, n);
  const int m_large = static_cast<int>(n / 2);
  const int trials = 3;
  std::vector<double> small, large;
  for (int trial = 0; trial < trials; ++trial) {
    RngStream pts_rng = task_stream(106, n, trial, StreamPurpose::Points);
    const PointSet initial = sample_points(UniformCircle{}, n, pts_rng);
    const EmpiricalMeasure mu0(initial);
    for (int m : {m_small, m_large}) {
      const auto trace = iterate(initial, m, 2.0, Variant::Flat, task_stream(106, n, trial, StreamPurpose::Weights));
      const double d =
          sliced_w1(EmpiricalMeasure(trace.final()), mu0, 64, task_stream(106, n, trial, StreamPurpose::Directions, m))
              .value;
      (m == m_small ? small : large).push_back(d);
    }
  }
  std::sort(small.begin(), small.end());
  std::sort(large.begin(), large.end());
  const double s = small[trials / 2], l = large[trials / 2];
  return {s <= 0.1 && l > 2.0 * s, "median over " + std::to_string(trials) + " trials: m=" + std::to_string(m_small) +
                                       " " + fmt(s) + ", m=" + std::to_string(m_large) + " " + fmt(l)};
}

Outcome tail_exponent() {
  // Fixed real configuration; S(0) is a signed sum so small values are reachable.
  std::vector<Complex> pts{{10, 0}};
  for (int k = 0; k < 9; ++k) pts.emplace_back(-2000.0 - 25.0 * k, 0.0);
  std::vector<double> grid;
  for (double t = 2; t <= 8.0 + 1e-9; t += 0.5) grid.push_back(t);
  Outcome o;
  o.detail = "slopes";
  std::uint64_t purpose = 0;
  for (double beta : {1.0, 2.0, 4.0}) {
    const auto tail = small_value_tail(PointSet(pts), beta, {0, 0}, grid, 100000, RngStream(107, ++purpose));
    const double slope = fit_tail_slope(tail, 2, 8);
    const double target = std::min(1.0, beta / 2);
    if (!(std::abs(slope - target) <= 0.3 * target)) o.passed = false;
    o.detail += " beta=" + fmt(beta) + " " + fmt(slope) + " (target " + fmt(target) + ")";
  }
  return o;
}

Outcome reproducibility() {
  const auto base = std::filesystem::temp_directory_path() / "randeriv_acceptance_repro";
  std::filesystem::remove_all(base);
  const std::string manifest = std::string(RANDERIV_MANIFEST_DIR) + "/reproducibility.json";
  auto run = [&](int threads, const std::string& sub) {
    const std::string cmd = "RANDERIV_THREADS=" + std::to_string(threads) + " \"" RANDERIV_CLI_PATH "\" simulate \"" +
                            manifest + "\" -o \"" + (base / sub).string() + "\" > /dev/null";
    return std::system(cmd.c_str());
  };
  const int a = run(1, "t1"), b = run(8, "t8");
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  const std::string sa = slurp(base / "t1" / "series.csv"), sb = slurp(base / "t8" / "series.csv");
  const bool ok = a == 0 && b == 0 && !sa.empty() && sa == sb;
  std::filesystem::remove_all(base);
  return {ok, "exit codes " + std::to_string(a) + "/" + std::to_string(b) + ", " + std::to_string(sa.size()) +
                  " bytes, " + (sa == sb ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 closed forms", closed_forms},
      {"2 equal-weight reduction", equal_weight_reduction},
      {"3 random-matrix coupling", rmt_coupling},
      {"4 structural invariants", structural_invariants},
      {"5 log-potential identity", log_potential},
      {"6 convergence trend", convergence_trend},
      {"7 iterated convergence trend", iterated_trend},
      {"8 anti-concentration exponent", tail_exponent},
      {"9 thread-count reproducibility", reproducibility},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.passed) ++failed;
    std::cout << (o.passed ? "PASS" : "FAIL") << "  " << name << "  [" << fmt(secs) << " s]  " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}

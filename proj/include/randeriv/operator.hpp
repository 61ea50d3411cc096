#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "randeriv/aberth.hpp"
#include "randeriv/rng.hpp"
#include "randeriv/sampling.hpp"
#include "randeriv/types.hpp"

namespace randeriv {

enum class Variant { Flat, Circular };

inline const char* to_string(Variant v) noexcept { return v == Variant::Flat ? "flat" : "circular"; }

/// A group of input points merged into one pole.
struct PoleCluster {
  Complex center;
  double weight;              // summed weights of the members
  std::size_t multiplicity;
};

/**
 * @brief Merge points closer than cluster_tol * max(1, |z|) into single poles.
 *
 * Single linkage via a sweep over real parts. Clusters keep the order of
 * their first member; centres are member means.
 */
inline std::vector<PoleCluster> merge_repeated_points(const PointSet& points, const WeightVector& weights,
                                                      double cluster_tol) {
  detail::require_same_size(points.size(), weights.size());
  const std::size_t n = points.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  std::vector<std::size_t> by_re(n);
  std::iota(by_re.begin(), by_re.end(), std::size_t{0});
  std::sort(by_re.begin(), by_re.end(), [&](std::size_t a, std::size_t b) { return points[a].real() < points[b].real(); });
  const double window = cluster_tol * std::max(1.0, points.max_modulus());
  for (std::size_t a = 0; a < n; ++a) {
    const Complex za = points[by_re[a]];
    for (std::size_t b = a + 1; b < n; ++b) {
      const Complex zb = points[by_re[b]];
      if (zb.real() - za.real() > window) break;
      if (std::abs(za - zb) <= cluster_tol * std::max({1.0, std::abs(za), std::abs(zb)})) {
        const std::size_t ra = find(by_re[a]), rb = find(by_re[b]);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
  }

  std::vector<PoleCluster> clusters;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] == n) {
      slot[r] = clusters.size();
      clusters.push_back({Complex{0.0, 0.0}, 0.0, 0});
    }
    PoleCluster& c = clusters[slot[r]];
    c.center += points[i];
    c.weight += weights[i];
    ++c.multiplicity;
  }
  for (auto& c : clusters) c.center /= static_cast<double>(c.multiplicity);
  return clusters;
}

namespace detail {

struct Deflated {
  std::vector<Complex> poles;
  std::vector<double> weights;
  std::vector<Complex> known_roots;  // each cluster centre repeated multiplicity - 1 times
};

inline Deflated deflate(const PointSet& points, const WeightVector& weights, double cluster_tol) {
  Deflated d;
  for (const auto& c : merge_repeated_points(points, weights, cluster_tol)) {
    d.poles.push_back(c.center);
    d.weights.push_back(c.weight);
    for (std::size_t k = 1; k < c.multiplicity; ++k) d.known_roots.push_back(c.center);
  }
  return d;
}

inline void require_positive(const WeightVector& weights) {
  for (double w : weights.values())
    if (!(w > 0.0)) throw Error(ErrorKind::InvalidArgument, "weights must be strictly positive");
}

inline RootSolveReport assemble(const Deflated& d, RootSolveReport solved) {
  RootSolveReport out;
  out.roots = d.known_roots;
  out.residuals.assign(d.known_roots.size(), 0.0);
  out.roots.insert(out.roots.end(), solved.roots.begin(), solved.roots.end());
  out.residuals.insert(out.residuals.end(), solved.residuals.begin(), solved.residuals.end());
  out.iterations = solved.iterations;
  out.status = solved.status;
  return out;
}

// Rerun the iteration from its own output when the first pass missed residual_tol.
template <RootTarget Target>
RootSolveReport solve_with_restart(std::size_t count, const Target& target, std::vector<Complex> guesses,
                                   const ToleranceConfig& tol) {
  RootSolveReport r = aberth_solve(count, target, std::move(guesses), tol);
  if (r.status == SolveStatus::MaxItersReached) {
    RootSolveReport again = aberth_solve(count, target, r.roots, tol);
    again.iterations += r.iterations;
    if (again.max_residual() <= r.max_residual()) return again;
  }
  return r;
}

inline bool all_on_unit_circle(const std::vector<Complex>& poles) {
  for (const auto& c : poles)
    if (std::abs(std::abs(c) - 1.0) > 1e-8) return false;
  return true;
}

/**
 * Zeros of T on the unit circle. On z = e^{i theta},
 * T = i g(theta), g(theta) = sum_k w_k cot((theta - alpha_k) / 2), which
 * decreases from +inf to -inf across each arc between consecutive poles.
 * Each arc is solved by Newton steps safeguarded by the bisection bracket.
 */
inline RootSolveReport solve_on_circle(const std::vector<Complex>& poles, const std::vector<double>& weights,
                                       const ToleranceConfig& tol) {
  const std::size_t p = poles.size();
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> alpha(p);
  for (std::size_t k = 0; k < p; ++k) alpha[k] = std::arg(poles[k]);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return alpha[a] < alpha[b]; });
  std::vector<double> angles(p), w(p);
  for (std::size_t k = 0; k < p; ++k) {
    angles[k] = alpha[order[k]];
    w[k] = weights[order[k]];
  }

  // g, g' and sum |terms| (the round-off scale of g).
  auto eval = [&](double theta, double& g, double& dg, double& magnitude) {
    g = 0.0;
    dg = 0.0;
    magnitude = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
      const double h = 0.5 * (theta - angles[k]);
      const double s = std::sin(h), c = std::cos(h);
      const double term = w[k] * c / s;
      g += term;
      magnitude += std::abs(term);
      dg -= 0.5 * w[k] / (s * s);
    }
  };

  RootSolveReport report;
  report.roots.reserve(p);
  const CayleyTarget target(poles, weights);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t k = 0; k < p; ++k) {
    double a = angles[k];
    double b = k + 1 < p ? angles[k + 1] : angles[0] + two_pi;
    double x = 0.5 * (a + b);
    int it = 0;
    for (; it < 200; ++it) {
      double g, dg, magnitude;
      eval(x, g, dg, magnitude);
      if (std::abs(g) <= 8.0 * kEps * magnitude) break;
      if (g > 0.0) a = x;
      else b = x;
      const double newton = x - g / dg;
      const double next = (newton > a && newton < b) ? newton : 0.5 * (a + b);
      const double resolution = 4.0 * kEps * std::max(1.0, std::abs(next));
      if (std::abs(next - x) <= resolution || b - a <= resolution) {
        x = next;
        break;
      }
      x = next;
    }
    report.iterations = std::max(report.iterations, it + 1);
    Complex z = std::polar(1.0, x);
    double res = target.residual(z);
    // Points only approximately on the circle: polish on the exact T.
    for (int polish = 0; polish < 3 && res > 1e-3 * tol.residual_tol; ++polish) {
      const TargetSample s = target.sample(z);
      const Complex moved = z - s.value / s.derivative;
      const double moved_res = target.residual(moved);
      if (!(moved_res < res)) break;
      z = moved;
      res = moved_res;
    }
    report.roots.push_back(z);
    report.residuals.push_back(res);
  }
  report.status = report.max_residual() <= tol.residual_tol ? SolveStatus::Converged : SolveStatus::MaxItersReached;
  return report;
}

}  // namespace detail

/**
 * @brief Zeros of Q(z) = sum_k w_k prod_{j != k} (z - Z_j), with multiplicity.
 *
 * A point repeated m times is returned as a root m - 1 times; the remaining
 * roots are the zeros of S on the merged configuration. Returns n - 1 roots.
 */
inline RootSolveReport randomized_derivative(const PointSet& points, const WeightVector& weights,
                                             const ToleranceConfig& tol = {}) {
  tol.validate();
  detail::require_same_size(points.size(), weights.size());
  detail::require_positive(weights);
  if (points.size() == 1) return {};

  const detail::Deflated d = detail::deflate(points, weights, tol.cluster_tol);
  const std::size_t count = d.poles.size() - 1;
  if (count == 0) return detail::assemble(d, {});
  const PartialFractionTarget target(d.poles, d.weights);
  auto guesses = pole_seeded_guesses(d.poles, d.weights, count);
  return detail::assemble(d, detail::solve_with_restart(count, target, std::move(guesses), tol));
}

/**
 * @brief Zeros of V(z) = P(z) sum_k w_k (Z_k + z) / (Z_k - z), with multiplicity.
 *
 * Returns n roots. Distinct points on the unit circle are handled arc by arc;
 * anything else goes through the Aberth iteration on T.
 */
inline RootSolveReport circular_randomized_derivative(const PointSet& points, const WeightVector& weights,
                                                      const ToleranceConfig& tol = {}) {
  tol.validate();
  detail::require_same_size(points.size(), weights.size());
  detail::require_positive(weights);

  const detail::Deflated d = detail::deflate(points, weights, tol.cluster_tol);
  const std::size_t count = d.poles.size();
  if (detail::all_on_unit_circle(d.poles)) return detail::assemble(d, detail::solve_on_circle(d.poles, d.weights, tol));
  const CayleyTarget target(d.poles, d.weights);
  auto guesses = pole_seeded_guesses(d.poles, d.weights, count);
  return detail::assemble(d, detail::solve_with_restart(count, target, std::move(guesses), tol));
}

// ---------------------------------------------------------------------------
// Iteration.
// ---------------------------------------------------------------------------

struct ConstantSchedule {
  int k = 1;
};

/// m(n) = floor(a n / (log n)^2).
struct LogFractionSchedule {
  double a = 1.0;
};

using ScheduleSpec = std::variant<ConstantSchedule, LogFractionSchedule>;

inline int schedule_iterations(const ScheduleSpec& schedule, std::size_t n) {
  if (const auto* c = std::get_if<ConstantSchedule>(&schedule)) return c->k;
  const auto& lf = std::get<LogFractionSchedule>(schedule);
  const double ln = std::log(static_cast<double>(n));
  return static_cast<int>(std::floor(lf.a * static_cast<double>(n) / (ln * ln)));
}

/// Throws BadSpec unless 1 <= m(n) (and m(n) <= n - 1 for the flat variant).
inline void validate_schedule(const ScheduleSpec& schedule, std::size_t n, Variant variant) {
  const int m = schedule_iterations(schedule, n);
  if (m < 1 || (variant == Variant::Flat && static_cast<std::size_t>(m) > n - 1)) {
    throw Error(ErrorKind::BadSpec, "schedule gives m = " + std::to_string(m) + " for n = " + std::to_string(n));
  }
}

struct StageDiagnostics {
  double max_modulus = 0.0;
  double min_modulus = 0.0;
  RootSolveReport solver;
};

struct Stage {
  PointSet points;
  StageDiagnostics diagnostics;
};

struct IterationTrace {
  std::vector<Stage> stages;
  Variant variant = Variant::Flat;
  double beta = 2.0;
  int m = 0;

  const PointSet& initial() const { return stages.front().points; }
  const PointSet& final() const { return stages.back().points; }
};

/// Solver failure inside an iteration, tagged with the stage that failed.
class StageFailure : public Error {
public:
  StageFailure(std::size_t stage, RootSolveReport report)
      : Error(ErrorKind::NoConvergence, "root solve failed at stage " + std::to_string(stage) + " (max residual " +
                                            std::to_string(report.max_residual()) + ")"),
        stage_(stage),
        report_(std::move(report)) {}

  std::size_t stage() const noexcept { return stage_; }
  const RootSolveReport& report() const noexcept { return report_; }

private:
  std::size_t stage_;
  RootSolveReport report_;
};

/**
 * @brief Apply m randomized derivatives in sequence.
 *
 * Stage j uses fresh Gamma(beta/2) weights drawn from rng.child(j).
 */
inline IterationTrace iterate(const PointSet& initial, int m, double beta, Variant variant, const RngStream& rng,
                              const ToleranceConfig& tol = {}) {
  if (m < 0) throw Error(ErrorKind::InvalidArgument, "iteration count must be nonnegative");
  if (variant == Variant::Flat && static_cast<std::size_t>(m) > initial.size() - 1) {
    throw Error(ErrorKind::InvalidArgument, "flat iteration needs m <= n - 1");
  }
  IterationTrace trace;
  trace.variant = variant;
  trace.beta = beta;
  trace.m = m;
  trace.stages.push_back({initial, {initial.max_modulus(), initial.min_modulus(), {}}});
  for (int j = 1; j <= m; ++j) {
    const PointSet& prev = trace.stages.back().points;
    RngStream stage_rng = rng.child(static_cast<std::uint64_t>(j));
    const WeightVector w = sample_gamma_weights(beta, prev.size(), stage_rng);
    RootSolveReport r = variant == Variant::Flat ? randomized_derivative(prev, w, tol)
                                                 : circular_randomized_derivative(prev, w, tol);
    if (r.status != SolveStatus::Converged) throw StageFailure(static_cast<std::size_t>(j), std::move(r));
    PointSet next(r.roots);
    StageDiagnostics diag{next.max_modulus(), next.min_modulus(), std::move(r)};
    trace.stages.push_back({std::move(next), std::move(diag)});
  }
  return trace;
}

/// Zero-beta limit: drop one uniformly chosen point.
inline PointSet beta_zero_step(const PointSet& points, RngStream& rng) {
  if (points.size() < 2) throw Error(ErrorKind::Degenerate, "cannot remove a point from a one-point set");
  const auto drop = static_cast<std::size_t>(rng.below(points.size()));
  std::vector<Complex> kept;
  kept.reserve(points.size() - 1);
  for (std::size_t i = 0; i < points.size(); ++i)
    if (i != drop) kept.push_back(points[i]);
  return PointSet(std::move(kept));
}

}  // namespace randeriv

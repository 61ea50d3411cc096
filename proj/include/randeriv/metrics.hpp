#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "randeriv/numerics.hpp"
#include "randeriv/rng.hpp"
#include "randeriv/sampling.hpp"
#include "randeriv/types.hpp"

namespace randeriv {

/// Uniform atomic probability measure on a point multiset.
class EmpiricalMeasure {
public:
  explicit EmpiricalMeasure(PointSet support) : support_(std::move(support)) {}
  explicit EmpiricalMeasure(std::vector<Complex> support) : support_(std::move(support)) {}

  const PointSet& support() const noexcept { return support_; }
  std::size_t size() const noexcept { return support_.size(); }
  double mass_per_atom() const noexcept { return 1.0 / static_cast<double>(support_.size()); }

private:
  PointSet support_;
};

struct MetricReport {
  std::string name;
  double value = 0.0;
  double estimator_error = 0.0;
};

/**
 * @brief Standard bump exp(1 - 1/(1 - |z-a|^2/r^2)) on the disk |z - a| < r.
 *
 * Equals 1 at the centre and vanishes with all derivatives on the boundary.
 */
class TestFunction {
public:
  TestFunction(Complex center, double radius) : center_(center), radius_(radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw Error(ErrorKind::InvalidArgument, "bump radius must be positive");
  }

  Complex center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }

  double operator()(Complex z) const noexcept {
    const double s = std::norm(z - center_) / (radius_ * radius_);
    if (s >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s));
  }

  /// Laplacian in the plane: (4/r^2) (s f'' + f') with f(s) = exp(1 - 1/(1 - s)).
  double laplacian(Complex z) const noexcept {
    const double s = std::norm(z - center_) / (radius_ * radius_);
    if (s >= 1.0) return 0.0;
    const double u = 1.0 - s;
    const double f = std::exp(1.0 - 1.0 / u);
    const double u2 = u * u;
    const double d1 = -f / u2;
    const double d2 = f / (u2 * u2) - 2.0 * f / (u2 * u);
    return 4.0 / (radius_ * radius_) * (s * d2 + d1);
  }

private:
  Complex center_;
  double radius_;
};

/// Bumps centred on a square lattice, one per listed radius at each centre.
inline std::vector<TestFunction> bump_family(double lattice_step = 0.5, double half_width = 2.0,
                                             std::span<const double> radii = std::span<const double>()) {
  static constexpr double kDefaultRadii[] = {0.5, 1.0};
  if (radii.empty()) radii = kDefaultRadii;
  if (!(lattice_step > 0.0) || !(half_width >= 0.0)) throw Error(ErrorKind::InvalidArgument, "bad lattice");
  const int steps = static_cast<int>(std::floor(2.0 * half_width / lattice_step + 1e-9));
  std::vector<TestFunction> family;
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; j <= steps; ++j)
      for (double r : radii)
        family.emplace_back(Complex{-half_width + i * lattice_step, -half_width + j * lattice_step}, r);
  return family;
}

/// (1/n) sum_k phi(Z_k).
inline double test_function_integral(const EmpiricalMeasure& mu, const TestFunction& phi) {
  double acc = 0.0;
  for (const auto& z : mu.support()) acc += phi(z);
  return acc * mu.mass_per_atom();
}

/// max over the family of |int phi d(mu) - int phi d(nu)|.
inline double max_bump_deviation(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                                 std::span<const TestFunction> family) {
  double worst = 0.0;
  for (const auto& phi : family)
    worst = std::max(worst, std::abs(test_function_integral(mu, phi) - test_function_integral(nu, phi)));
  return worst;
}

namespace detail {

// Exact 1-D W1 between uniform atomic measures given sorted atoms:
// integral over u in (0,1) of |F^{-1}(u) - G^{-1}(u)|, breakpoints on the
// common grid of multiples of 1/(n m).
inline double sorted_w1(std::span<const double> x, std::span<const double> y) {
  const std::uint64_t n = x.size(), m = y.size();
  if (n == m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::abs(x[i] - y[i]);
    return acc / static_cast<double>(n);
  }
  const std::uint64_t total = n * m;
  std::uint64_t pos = 0, i = 0, j = 0;
  double acc = 0.0;
  while (pos < total) {
    const std::uint64_t next_x = (i + 1) * m, next_y = (j + 1) * n;
    const std::uint64_t next = std::min(next_x, next_y);
    acc += static_cast<double>(next - pos) * std::abs(x[i] - y[j]);
    pos = next;
    if (next_x == next) ++i;
    if (next_y == next) ++j;
  }
  return acc / static_cast<double>(total);
}

}  // namespace detail

/**
 * @brief Sliced W1: mean over random directions of the 1-D W1 of projections.
 *
 * estimator_error is the standard error over directions. The direction
 * draws depend only on rng, so d(mu, nu) == d(nu, mu) exactly.
 */
inline MetricReport sliced_w1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, std::size_t n_directions,
                              RngStream rng) {
  if (n_directions == 0) throw Error(ErrorKind::InvalidArgument, "need at least one direction");
  std::vector<double> px(mu.size()), py(nu.size()), samples(n_directions);
  for (std::size_t d = 0; d < n_directions; ++d) {
    const double theta = std::numbers::pi * rng.uniform();
    const double c = std::cos(theta), s = std::sin(theta);
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = c * mu.support()[i].real() + s * mu.support()[i].imag();
    for (std::size_t i = 0; i < py.size(); ++i) py[i] = c * nu.support()[i].real() + s * nu.support()[i].imag();
    std::sort(px.begin(), px.end());
    std::sort(py.begin(), py.end());
    samples[d] = detail::sorted_w1(px, py);
  }
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n_directions);
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  const double se = n_directions > 1
                        ? std::sqrt(var / static_cast<double>(n_directions - 1) / static_cast<double>(n_directions))
                        : 0.0;
  return {"sliced_w1", mean, se};
}

/**
 * @brief W1 on the unit circle (arc-length cost) between equal-size measures.
 *
 * Sorted angles are coupled cyclically; the best of the n offsets is taken.
 */
inline MetricReport circular_w1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.size() != nu.size()) throw Error(ErrorKind::InvalidArgument, "circular_w1 needs equal atom counts");
  auto angles = [](const EmpiricalMeasure& m) {
    std::vector<double> a;
    a.reserve(m.size());
    for (const auto& z : m.support()) {
      if (std::abs(std::abs(z) - 1.0) > 1e-6) throw Error(ErrorKind::OffCircle, "atom is not on the unit circle");
      double t = std::arg(z);
      if (t < 0.0) t += 2.0 * std::numbers::pi;
      a.push_back(t);
    }
    std::sort(a.begin(), a.end());
    return a;
  };
  const auto a = angles(mu), b = angles(nu);
  const std::size_t n = a.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t shift = 0; shift < n; ++shift) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = std::abs(a[i] - b[(i + shift) % n]);
      acc += std::min(d, 2.0 * std::numbers::pi - d);
    }
    best = std::min(best, acc);
  }
  return {"circular_w1", best / static_cast<double>(n), 0.0};
}

/**
 * @brief Midpoint-rule value of (1/2pi) int log|P| Laplacian(phi) dm over the bump's disk.
 *
 * Cells of side grid_step tile the bounding square; the grid is shifted by
 * grid_step/7 when a point of the configuration sits on a cell centre.
 */
inline double log_potential_integral(const PointSet& points, const TestFunction& phi, double grid_step) {
  const double r = phi.radius();
  if (!(grid_step > 0.0) || grid_step > r / 50.0 * (1.0 + 1e-12)) {
    throw Error(ErrorKind::InvalidArgument, "grid_step must be positive and at most r/50");
  }
  const auto cells = static_cast<std::size_t>(std::ceil(2.0 * r / grid_step));
  const Complex origin = phi.center() - Complex{r, r};

  double offset = 0.5 * grid_step;
  for (const auto& p : points) {
    const Complex rel = (p - origin) / grid_step - Complex{0.5, 0.5};
    const double fx = rel.real() - std::round(rel.real()), fy = rel.imag() - std::round(rel.imag());
    if (std::abs(fx) < 1e-9 && std::abs(fy) < 1e-9) {
      offset += grid_step / 7.0;
      break;
    }
  }

  double acc = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    for (std::size_t j = 0; j < cells; ++j) {
      const Complex z = origin + Complex{offset + static_cast<double>(i) * grid_step,
                                         offset + static_cast<double>(j) * grid_step};
      const double lap = phi.laplacian(z);
      if (lap == 0.0) continue;
      double log_abs = 0.0;
      for (const auto& p : points) log_abs += std::log(std::abs(z - p));
      acc += log_abs * lap;
    }
  }
  return acc * grid_step * grid_step / (2.0 * std::numbers::pi);
}

struct TailPoint {
  double t;
  double probability;
};

/// Monte Carlo frequency of |S(z)| <= e^{-t} over fresh Gamma(beta/2) weight draws.
inline std::vector<TailPoint> small_value_tail(const PointSet& points, double beta, Complex z,
                                               std::span<const double> t_grid, std::size_t trials, RngStream rng) {
  if (trials < 1000) throw Error(ErrorKind::InvalidArgument, "small_value_tail needs at least 1000 trials");
  std::vector<Complex> inv(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (detail::coincides(z, points[k])) throw Error(ErrorKind::PoleHit, "tail point coincides with a pole");
    inv[k] = 1.0 / (z - points[k]);
  }
  std::vector<double> log_abs(trials);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Complex s{0.0, 0.0};
    for (std::size_t k = 0; k < inv.size(); ++k) s += sample_gamma(0.5 * beta, rng) * inv[k];
    log_abs[trial] = std::log(std::abs(s));
  }
  std::sort(log_abs.begin(), log_abs.end());
  std::vector<TailPoint> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    const auto hits = std::upper_bound(log_abs.begin(), log_abs.end(), -t) - log_abs.begin();
    out.push_back({t, static_cast<double>(hits) / static_cast<double>(trials)});
  }
  return out;
}

/// Least-squares decay rate of log P against t over [t_min, t_max], positive frequencies only.
inline double fit_tail_slope(std::span<const TailPoint> tail, double t_min, double t_max) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (const auto& p : tail) {
    if (p.t < t_min || p.t > t_max || !(p.probability > 0.0)) continue;
    const double y = std::log(p.probability);
    sx += p.t;
    sy += y;
    sxx += p.t * p.t;
    sxy += p.t * y;
    ++count;
  }
  if (count < 2) return std::numeric_limits<double>::quiet_NaN();
  const double c = static_cast<double>(count);
  const double slope = (c * sxy - sx * sy) / (c * sxx - sx * sx);
  return -slope;
}

}  // namespace randeriv

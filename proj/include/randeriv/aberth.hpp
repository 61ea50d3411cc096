#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "randeriv/numerics.hpp"
#include "randeriv/rng.hpp"
#include "randeriv/types.hpp"

namespace randeriv {

/**
 * @brief Everything one Aberth update needs at a trial point z.
 *
 * For a target f = Q / P with known simple poles p_k, the logarithmic
 * derivative of the polynomial Q is f'/f + pole_sum, pole_sum = sum 1/(z - p_k).
 * Entire targets report pole_sum = 0.
 */
struct TargetSample {
  Complex value;
  Complex derivative;
  Complex pole_sum;
  double scale;  // length scale for the correction stopping rule
};

template <typename T>
concept RootTarget = requires(const T& target, Complex z) {
  { target.sample(z) } -> std::convertible_to<TargetSample>;
  { target.residual(z) } -> std::convertible_to<double>;
};

/// Wraps a callable z -> ValueAndDerivative of an entire function (e.g. a polynomial).
template <typename F>
class AnalyticTarget {
public:
  explicit AnalyticTarget(F f) : f_(std::move(f)) {}

  TargetSample sample(Complex z) const {
    const ValueAndDerivative e = f_(z);
    return {e.value, e.derivative, Complex{0.0, 0.0}, std::max(1.0, std::abs(z))};
  }

  double residual(Complex z) const { return std::abs(f_(z).value); }

private:
  F f_;
};

/// S(z) = sum_k w_k / (z - c_k) over simple poles; zeros of S are those of Q.
class PartialFractionTarget {
public:
  PartialFractionTarget(std::span<const Complex> poles, std::span<const double> weights)
      : poles_(poles), weights_(weights) {
    for (double w : weights_) weight_sum_ += w;
  }

  TargetSample sample(Complex z) const {
    TargetSample s{{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, std::numeric_limits<double>::infinity()};
    for (std::size_t k = 0; k < poles_.size(); ++k) {
      const Complex d = z - poles_[k];
      const Complex inv = 1.0 / d;
      s.value += weights_[k] * inv;
      s.derivative -= weights_[k] * inv * inv;
      s.pole_sum += inv;
      s.scale = std::min(s.scale, std::abs(d));
    }
    return s;
  }

  /// |S(z)| * dist(z, poles) / sum w; invariant under scaling of weights and of the plane.
  double residual(Complex z) const {
    Complex value{0.0, 0.0};
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < poles_.size(); ++k) {
      const Complex d = z - poles_[k];
      value += weights_[k] / d;
      nearest = std::min(nearest, std::abs(d));
    }
    return std::abs(value) * nearest / weight_sum_;
  }

private:
  std::span<const Complex> poles_;
  std::span<const double> weights_;
  double weight_sum_ = 0.0;
};

/// T(z) = sum_k w_k (c_k + z) / (c_k - z) over simple poles; zeros of T are those of V.
class CayleyTarget {
public:
  CayleyTarget(std::span<const Complex> poles, std::span<const double> weights) : poles_(poles), weights_(weights) {}

  TargetSample sample(Complex z) const {
    TargetSample s{{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, std::numeric_limits<double>::infinity()};
    for (std::size_t k = 0; k < poles_.size(); ++k) {
      const Complex c = poles_[k];
      const Complex inv = 1.0 / (c - z);
      s.value += weights_[k] * (c + z) * inv;
      s.derivative += weights_[k] * 2.0 * c * inv * inv;
      s.pole_sum -= inv;
      s.scale = std::min(s.scale, std::abs(c - z));
    }
    return s;
  }

  /// |T(z)| * dist(z, poles) / sum w_k (|c_k| + |z|); scale-free like the S residual.
  double residual(Complex z) const {
    Complex value{0.0, 0.0};
    double nearest = std::numeric_limits<double>::infinity();
    double norm = 0.0;
    for (std::size_t k = 0; k < poles_.size(); ++k) {
      const Complex c = poles_[k];
      value += weights_[k] * (c + z) / (c - z);
      nearest = std::min(nearest, std::abs(c - z));
      norm += weights_[k] * (std::abs(c) + std::abs(z));
    }
    if (norm == 0.0) return std::abs(value);
    return std::abs(value) * nearest / norm;
  }

private:
  std::span<const Complex> poles_;
  std::span<const double> weights_;
};

/**
 * @brief Starting points for the simultaneous iteration on a pole configuration.
 *
 * Each pole is displaced by 1e-3 times its nearest-neighbour distance in a
 * pseudo-random direction (fixed stream, so the caller stays a pure function).
 * When fewer roots than poles are wanted, the poles farthest from the weighted
 * barycentre are skipped; extra roots start at spread points around the
 * barycentre.
 */
inline std::vector<Complex> pole_seeded_guesses(std::span<const Complex> poles, std::span<const double> weights,
                                                std::size_t count) {
  const std::size_t p = poles.size();
  std::vector<Complex> guesses;
  guesses.reserve(count);
  if (count == 0) return guesses;

  Complex barycenter{0.0, 0.0};
  double wsum = 0.0, spread = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    barycenter += weights[k] * poles[k];
    wsum += weights[k];
  }
  barycenter = p > 0 ? barycenter / wsum : Complex{0.0, 0.0};
  for (std::size_t k = 0; k < p; ++k) spread = std::max(spread, std::abs(poles[k] - barycenter));
  if (spread == 0.0) spread = std::max(1.0, std::abs(barycenter));

  std::vector<std::size_t> order(p);
  for (std::size_t k = 0; k < p; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(poles[a] - barycenter) < std::abs(poles[b] - barycenter);
  });

  RngStream rng(0x5EEDF00DULL, p * 1000003ULL + count);
  const std::size_t from_poles = std::min(count, p);
  for (std::size_t i = 0; i < from_poles; ++i) {
    const std::size_t k = order[i];
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < p; ++j) {
      if (j != k) nearest = std::min(nearest, std::abs(poles[j] - poles[k]));
    }
    if (!std::isfinite(nearest) || nearest == 0.0) nearest = spread;
    guesses.push_back(poles[k] + 1e-3 * nearest * std::polar(1.0, rng.angle()));
  }
  for (std::size_t i = from_poles; i < count; ++i) {
    const double radius = i == from_poles ? 0.0 : 0.5 * spread;
    guesses.push_back(barycenter + std::polar(radius, rng.angle()));
  }
  return guesses;
}

/**
 * @brief Simultaneous Ehrlich-Aberth iteration with per-root locking.
 *
 * A root is frozen once its correction drops below root_tol times the
 * target's local scale (for pole targets, the distance to the nearest pole),
 * or below the round-off level of |z|.
 * Updates are applied in place as they are computed (Gauss-Seidel order).
 * The status is Converged iff every residual meets residual_tol.
 */
template <RootTarget Target>
RootSolveReport aberth_solve(std::size_t num_roots, const Target& target, std::vector<Complex> guesses,
                             const ToleranceConfig& tol) {
  tol.validate();
  if (guesses.size() != num_roots) {
    throw Error(ErrorKind::InvalidArgument, "aberth_solve needs exactly one initial guess per root");
  }
  RootSolveReport report;
  if (num_roots == 0) return report;

  {
    bool all_zero = true;
    for (const auto& g : guesses) {
      const TargetSample s = target.sample(g);
      if (s.value != Complex{0.0, 0.0} || s.derivative != Complex{0.0, 0.0}) {
        all_zero = false;
        break;
      }
    }
    if (all_zero) {
      report.roots = std::move(guesses);
      report.residuals.assign(num_roots, std::numeric_limits<double>::infinity());
      report.status = SolveStatus::Degenerate;
      return report;
    }
  }

  std::vector<Complex>& z = guesses;
  std::vector<bool> frozen(num_roots, false);
  std::size_t active = num_roots;
  int iter = 0;
  while (active > 0 && iter < tol.max_iters) {
    ++iter;
    for (std::size_t i = 0; i < num_roots; ++i) {
      if (frozen[i]) continue;
      const TargetSample s = target.sample(z[i]);
      if (s.value == Complex{0.0, 0.0}) {
        frozen[i] = true;
        --active;
        continue;
      }
      Complex repulsion{0.0, 0.0};
      for (std::size_t j = 0; j < num_roots; ++j) {
        if (j == i) continue;
        const Complex d = z[i] - z[j];
        if (d != Complex{0.0, 0.0}) repulsion += 1.0 / d;
      }
      const Complex denom = s.derivative / s.value + s.pole_sum - repulsion;
      Complex step = 1.0 / denom;
      if (!is_finite(step) || !is_finite(s.value) || !is_finite(s.derivative)) {
        // Landed on a pole or produced an overflow: nudge off and retry next sweep.
        const double kick = std::isfinite(s.scale) && s.scale > 0.0 ? s.scale : std::max(1.0, std::abs(z[i]));
        step = Complex{-1e-7 * kick, 1e-7 * kick};
        z[i] -= step;
        continue;
      }
      z[i] -= step;
      const double scale = std::isfinite(s.scale) ? s.scale : std::max(1.0, std::abs(z[i]));
      // Below a few ulps of |z| the correction is round-off and cannot shrink further.
      const double floor = 8.0 * detail::kEps * std::max(std::abs(z[i]), scale);
      if (std::abs(step) <= std::max(tol.root_tol * scale, floor)) {
        frozen[i] = true;
        --active;
      }
    }
  }

  report.iterations = iter;
  report.residuals.resize(num_roots);
  bool ok = true;
  for (std::size_t i = 0; i < num_roots; ++i) {
    const double r = target.residual(z[i]);
    report.residuals[i] = std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
    if (!(report.residuals[i] <= tol.residual_tol)) ok = false;
  }
  report.roots = std::move(z);
  report.status = ok ? SolveStatus::Converged : SolveStatus::MaxItersReached;
  return report;
}

/// Convenience overload for a plain callable evaluating f and f'.
template <typename F>
  requires std::invocable<const F&, Complex>
RootSolveReport aberth_solve(std::size_t num_roots, F f_and_df, std::vector<Complex> guesses,
                             const ToleranceConfig& tol) {
  return aberth_solve(num_roots, AnalyticTarget<F>(std::move(f_and_df)), std::move(guesses), tol);
}

}  // namespace randeriv

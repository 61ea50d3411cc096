#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "randeriv/rng.hpp"
#include "randeriv/types.hpp"

namespace randeriv {

// Initial point laws. Each kind is its own struct; MeasureSpec is the sum type.

struct UniformCircle {
  double radius = 1.0;
};

struct UniformDisk {
  double radius = 1.0;
};

/// Complex Gaussian with E|Z|^2 = sigma^2 (independent N(0, sigma^2/2) parts).
struct GaussianPlane {
  double sigma = 1.0;
};

struct UniformAnnulus {
  double r_in = 0.5;
  double r_out = 1.0;
};

struct AtomMixture {
  std::vector<Complex> atoms;
  std::vector<double> probs;
};

/// Uniform angle, Pareto radius: P(|Z| > R) = R^-c for R >= 1.
struct HeavyTailRadial {
  double c_exponent = 1.0;
};

using MeasureSpec = std::variant<UniformCircle, UniformDisk, GaussianPlane, UniformAnnulus, AtomMixture, HeavyTailRadial>;

inline std::string kind_name(const MeasureSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, UniformCircle>) return "uniform_circle";
        else if constexpr (std::is_same_v<S, UniformDisk>) return "uniform_disk";
        else if constexpr (std::is_same_v<S, GaussianPlane>) return "gaussian_plane";
        else if constexpr (std::is_same_v<S, UniformAnnulus>) return "uniform_annulus";
        else if constexpr (std::is_same_v<S, AtomMixture>) return "atom_mixture";
        else return "heavy_tail_radial";
      },
      spec);
}

inline void validate(const MeasureSpec& spec) {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::BadSpec, what); };
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, UniformCircle> || std::is_same_v<S, UniformDisk>) {
          if (!(s.radius > 0.0) || !std::isfinite(s.radius)) bad("radius must be positive");
        } else if constexpr (std::is_same_v<S, GaussianPlane>) {
          if (!(s.sigma > 0.0) || !std::isfinite(s.sigma)) bad("sigma must be positive");
        } else if constexpr (std::is_same_v<S, UniformAnnulus>) {
          if (!(s.r_in > 0.0) || !(s.r_out > s.r_in) || !std::isfinite(s.r_out)) bad("annulus needs 0 < r_in < r_out");
        } else if constexpr (std::is_same_v<S, AtomMixture>) {
          if (s.atoms.empty() || s.atoms.size() != s.probs.size()) bad("atom mixture needs one probability per atom");
          double total = 0.0;
          for (double p : s.probs) {
            if (!(p >= 0.0)) bad("atom probabilities must be nonnegative");
            total += p;
          }
          if (std::abs(total - 1.0) > 1e-12) bad("atom probabilities must sum to 1");
          for (const auto& a : s.atoms)
            if (!is_finite(a)) bad("atoms must be finite");
        } else {
          if (!(s.c_exponent > 0.0) || !std::isfinite(s.c_exponent)) bad("tail exponent must be positive");
        }
      },
      spec);
}

/// n i.i.d. draws from the given law.
inline PointSet sample_points(const MeasureSpec& spec, std::size_t n, RngStream& rng) {
  validate(spec);
  if (n < 1) throw Error(ErrorKind::BadSpec, "need at least one point");
  std::vector<Complex> pts;
  pts.reserve(n);
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        for (std::size_t i = 0; i < n; ++i) {
          if constexpr (std::is_same_v<S, UniformCircle>) {
            pts.push_back(std::polar(s.radius, rng.angle()));
          } else if constexpr (std::is_same_v<S, UniformDisk>) {
            const double r = s.radius * std::sqrt(rng.uniform());
            pts.push_back(std::polar(r, rng.angle()));
          } else if constexpr (std::is_same_v<S, GaussianPlane>) {
            const double scale = s.sigma / std::sqrt(2.0);
            const double re = scale * rng.normal();
            const double im = scale * rng.normal();
            pts.emplace_back(re, im);
          } else if constexpr (std::is_same_v<S, UniformAnnulus>) {
            const double a2 = s.r_in * s.r_in, b2 = s.r_out * s.r_out;
            const double r = std::sqrt(a2 + (b2 - a2) * rng.uniform());
            pts.push_back(std::polar(r, rng.angle()));
          } else if constexpr (std::is_same_v<S, AtomMixture>) {
            const double u = rng.uniform();
            double acc = 0.0;
            std::size_t pick = s.atoms.size() - 1;
            for (std::size_t k = 0; k < s.probs.size(); ++k) {
              acc += s.probs[k];
              if (u < acc) {
                pick = k;
                break;
              }
            }
            pts.push_back(s.atoms[pick]);
          } else {
            const double r = std::pow(rng.uniform_open(), -1.0 / s.c_exponent);
            pts.push_back(std::polar(r, rng.angle()));
          }
        }
      },
      spec);
  return PointSet(std::move(pts));
}

/**
 * @brief One Gamma(shape, 1) draw.
 *
 * Marsaglia-Tsang squeeze/rejection for shape >= 1. For shape < 1 the draw is
 * made at shape + 1 and multiplied by U^(1/shape), computed in log space; an
 * underflow to zero is redrawn so the result is always strictly positive.
 */
inline double sample_gamma(double shape, RngStream& rng) {
  if (!(shape > 0.0)) throw Error(ErrorKind::BadSpec, "gamma shape must be positive");
  if (shape < 1.0) {
    for (;;) {
      const double boosted = sample_gamma(shape + 1.0, rng);
      const double g = std::exp(std::log(boosted) + std::log(rng.uniform_open()) / shape);
      if (g > 0.0) return g;
    }
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

/// n i.i.d. Gamma(beta/2) weights.
inline WeightVector sample_gamma_weights(double beta, std::size_t n, RngStream& rng) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorKind::BadSpec, "beta must be positive and finite");
  if (n < 1) throw Error(ErrorKind::BadSpec, "need at least one weight");
  std::vector<double> w(n);
  for (auto& x : w) x = sample_gamma(0.5 * beta, rng);
  return WeightVector(std::move(w), beta);
}

/// Weights divided by their sum.
inline std::vector<double> dirichlet_normalize(const WeightVector& weights) {
  const double total = weights.sum();
  std::vector<double> rho(weights.size());
  for (std::size_t k = 0; k < rho.size(); ++k) rho[k] = weights[k] / total;
  return rho;
}

}  // namespace randeriv

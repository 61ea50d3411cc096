#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace randeriv {

using Complex = std::complex<double>;

inline bool is_finite(Complex z) noexcept {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

enum class ErrorKind {
  InvalidArgument,
  PoleHit,
  Degenerate,
  NoConvergence,
  SizeExceeded,
  BadSpec,
  OffCircle,
  BadManifest,
  Io,
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::PoleHit: return "PoleHit";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SizeExceeded: return "SizeExceeded";
    case ErrorKind::BadSpec: return "BadSpec";
    case ErrorKind::OffCircle: return "OffCircle";
    case ErrorKind::BadManifest: return "BadManifest";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Library-wide exception; `kind()` identifies the failure class.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

private:
  ErrorKind kind_;
  std::string message_;
};

/**
 * @brief Ordered multiset of finite points in the plane.
 *
 * Holds a stage of an iterated configuration. Never empty.
 */
class PointSet {
public:
  PointSet() = delete;

  explicit PointSet(std::vector<Complex> points) : points_(std::move(points)) {
    if (points_.empty()) throw Error(ErrorKind::InvalidArgument, "PointSet must hold at least one point");
    for (const auto& z : points_) {
      if (!is_finite(z)) throw Error(ErrorKind::InvalidArgument, "PointSet holds a non-finite point");
    }
  }

  PointSet(std::initializer_list<Complex> points) : PointSet(std::vector<Complex>(points)) {}

  std::size_t size() const noexcept { return points_.size(); }
  const Complex& operator[](std::size_t i) const { return points_[i]; }
  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }
  std::span<const Complex> view() const noexcept { return points_; }
  const std::vector<Complex>& values() const noexcept { return points_; }

  double max_modulus() const noexcept {
    double m = 0.0;
    for (const auto& z : points_) m = std::max(m, std::abs(z));
    return m;
  }

  double min_modulus() const noexcept {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& z : points_) m = std::min(m, std::abs(z));
    return m;
  }

private:
  std::vector<Complex> points_;
};

/**
 * @brief Strictly positive weights together with the beta that generated them.
 *
 * beta is +infinity for deterministic equal weights.
 */
class WeightVector {
public:
  explicit WeightVector(std::vector<double> values,
                        double beta = std::numeric_limits<double>::infinity())
      : values_(std::move(values)), beta_(beta) {
    if (values_.empty()) throw Error(ErrorKind::InvalidArgument, "WeightVector must be nonempty");
    for (double w : values_) {
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw Error(ErrorKind::InvalidArgument, "weights must be finite and strictly positive");
      }
    }
    if (!(beta_ > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
  }

  WeightVector(std::initializer_list<double> values) : WeightVector(std::vector<double>(values)) {}

  static WeightVector equal(std::size_t n, double value = 1.0) {
    return WeightVector(std::vector<double>(n, value));
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double beta() const noexcept { return beta_; }
  std::span<const double> view() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  double sum() const noexcept {
    double s = 0.0;
    for (double w : values_) s += w;
    return s;
  }

  WeightVector scaled(double factor) const {
    std::vector<double> out(values_);
    for (double& w : out) w *= factor;
    return WeightVector(std::move(out), beta_);
  }

private:
  std::vector<double> values_;
  double beta_;
};

struct ToleranceConfig {
  double root_tol = 1e-12;      // Aberth correction, relative to local pole spacing
  double residual_tol = 1e-9;   // scale-free residual acceptance
  int max_iters = 200;
  double cluster_tol = 1e-10;   // relative merge distance for repeated points

  void validate() const {
    if (!(root_tol > 0.0) || !(residual_tol > 0.0) || !(cluster_tol > 0.0) || max_iters < 1) {
      throw Error(ErrorKind::InvalidArgument, "tolerances must be strictly positive and max_iters >= 1");
    }
  }
};

enum class SolveStatus { Converged, MaxItersReached, Degenerate };

inline const char* to_string(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxItersReached: return "MaxItersReached";
    case SolveStatus::Degenerate: return "Degenerate";
  }
  return "Unknown";
}

struct RootSolveReport {
  std::vector<Complex> roots;
  std::vector<double> residuals;
  int iterations = 0;
  SolveStatus status = SolveStatus::Converged;

  double max_residual() const noexcept {
    double m = 0.0;
    for (double r : residuals) m = std::max(m, r);
    return m;
  }
};

}  // namespace randeriv

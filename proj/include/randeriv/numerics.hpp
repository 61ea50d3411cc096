#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "randeriv/types.hpp"

namespace randeriv {

namespace detail {

constexpr double kEps = std::numeric_limits<double>::epsilon();

inline bool coincides(Complex z, Complex pole) noexcept {
  const double d = std::abs(z - pole);
  return d == 0.0 || d <= kEps * std::max(std::abs(z), std::abs(pole));
}

inline void require_same_size(std::size_t points, std::size_t weights) {
  if (points != weights) {
    throw Error(ErrorKind::InvalidArgument, "points and weights differ in length (" + std::to_string(points) +
                                                " vs " + std::to_string(weights) + ")");
  }
}

}  // namespace detail

/// Value and first derivative of an analytic function at one point.
struct ValueAndDerivative {
  Complex value;
  Complex derivative;
};

/// log|P(z)| for P(z) = prod (z - Z_k), as a Neumaier-compensated sum of logs.
inline double eval_log_abs_P(const PointSet& points, Complex z) {
  double acc = 0.0, carry = 0.0;
  for (const auto& p : points) {
    if (detail::coincides(z, p)) throw Error(ErrorKind::PoleHit, "evaluation point coincides with a zero of P");
    const double term = std::log(std::abs(z - p));
    const double t = acc + term;
    carry += std::abs(acc) >= std::abs(term) ? (acc - t) + term : (term - t) + acc;
    acc = t;
  }
  return acc + carry;
}

/// S(z) = sum_k w_k / (z - Z_k) and S'(z).
inline ValueAndDerivative eval_S(const PointSet& points, const WeightVector& weights, Complex z) {
  detail::require_same_size(points.size(), weights.size());
  Complex value{0.0, 0.0}, derivative{0.0, 0.0};
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (detail::coincides(z, points[k])) throw Error(ErrorKind::PoleHit, "evaluation point coincides with a pole of S");
    const Complex inv = 1.0 / (z - points[k]);
    value += weights[k] * inv;
    derivative -= weights[k] * inv * inv;
  }
  return {value, derivative};
}

/// T(z) = sum_k w_k (Z_k + z) / (Z_k - z) and T'(z).
inline ValueAndDerivative eval_T(const PointSet& points, const WeightVector& weights, Complex z) {
  detail::require_same_size(points.size(), weights.size());
  Complex value{0.0, 0.0}, derivative{0.0, 0.0};
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Complex c = points[k];
    if (detail::coincides(z, c)) throw Error(ErrorKind::PoleHit, "evaluation point coincides with a pole of T");
    const Complex inv = 1.0 / (c - z);
    value += weights[k] * (c + z) * inv;
    derivative += weights[k] * 2.0 * c * inv * inv;
  }
  return {value, derivative};
}

// ---------------------------------------------------------------------------
// Polynomials in coefficient form (constant term first). Cross-check path only.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMaxExpansionDegree = 64;

/// Monic coefficients of prod (z - Z_k), constant term first.
inline std::vector<Complex> poly_from_roots(std::span<const Complex> roots) {
  if (roots.size() > kMaxExpansionDegree) {
    throw Error(ErrorKind::SizeExceeded, "coefficient expansion is limited to degree " +
                                             std::to_string(kMaxExpansionDegree));
  }
  std::vector<Complex> c{Complex{1.0, 0.0}};
  for (const auto& r : roots) {
    std::vector<Complex> next(c.size() + 1, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= r * c[i];
    }
    c = std::move(next);
  }
  return c;
}

inline std::vector<Complex> poly_from_roots(const PointSet& points) { return poly_from_roots(points.view()); }

inline std::vector<Complex> poly_derivative(std::span<const Complex> coeffs) {
  if (coeffs.size() <= 1) return {Complex{0.0, 0.0}};
  std::vector<Complex> d(coeffs.size() - 1);
  for (std::size_t i = 1; i < coeffs.size(); ++i) d[i - 1] = static_cast<double>(i) * coeffs[i];
  return d;
}

inline Complex poly_eval(std::span<const Complex> coeffs, Complex z) {
  Complex acc{0.0, 0.0};
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * z + coeffs[i];
  return acc;
}

// ---------------------------------------------------------------------------
// Dense complex matrices and the eigensolver.
// ---------------------------------------------------------------------------

/// Row-major dense complex matrix.
class CMatrix {
public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, Complex{0.0, 0.0}) {}

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static CMatrix diagonal(std::span<const Complex> d) {
    CMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  CMatrix adjoint() const {
    CMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
  }

  CMatrix block(std::size_t rows, std::size_t cols) const {
    CMatrix out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) out(i, j) = (*this)(i, j);
    return out;
  }

  Complex trace() const {
    Complex t{0.0, 0.0};
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
  }

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Complex aik = a(i, k);
        if (aik == Complex{0.0, 0.0}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend CMatrix operator-(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a);
    for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= b.data_[i];
    return out;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// Companion matrix whose characteristic polynomial is the given one (constant term first).
inline CMatrix companion_matrix(std::span<const Complex> coeffs) {
  std::size_t deg = coeffs.size();
  while (deg > 0 && coeffs[deg - 1] == Complex{0.0, 0.0}) --deg;
  if (deg < 2) throw Error(ErrorKind::InvalidArgument, "companion matrix needs degree >= 1");
  const std::size_t n = deg - 1;
  const Complex lead = coeffs[n];
  CMatrix c(n, n);
  for (std::size_t i = 1; i < n; ++i) c(i, i - 1) = 1.0;
  for (std::size_t i = 0; i < n; ++i) c(i, n - 1) = -coeffs[i] / lead;
  return c;
}

inline constexpr std::size_t kMaxEigenDimension = 512;

struct EigenReport {
  std::vector<Complex> values;
  bool converged = true;
  int iterations = 0;
};

namespace detail {

// Parlett-Reinsch diagonal scaling by powers of two; similarity, spectrum unchanged.
inline void balance(CMatrix& a) {
  const std::size_t n = a.rows();
  constexpr double radix = 2.0;
  bool done = false;
  while (!done) {
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      double g = r / radix;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        for (std::size_t j = 0; j < n; ++j) a(i, j) /= f;
        for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
      }
    }
  }
}

// Householder reduction to upper Hessenberg form, in place.
inline void hessenberg_reduce(CMatrix& a) {
  const std::size_t n = a.rows();
  if (n < 3) return;
  std::vector<Complex> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double norm_x = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) norm_x += std::norm(a(i, k));
    norm_x = std::sqrt(norm_x);
    if (norm_x == 0.0) continue;
    const Complex x0 = a(k + 1, k);
    const Complex phase = std::abs(x0) == 0.0 ? Complex{1.0, 0.0} : x0 / std::abs(x0);
    const Complex alpha = -phase * norm_x;

    double vnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = a(i, k);
      if (i == k + 1) v[i] -= alpha;
      vnorm += std::norm(v[i]);
    }
    vnorm = std::sqrt(vnorm);
    if (vnorm == 0.0) continue;
    for (std::size_t i = k + 1; i < n; ++i) v[i] /= vnorm;

    // A <- (I - 2 v v^H) A
    for (std::size_t j = k; j < n; ++j) {
      Complex dot{0.0, 0.0};
      for (std::size_t i = k + 1; i < n; ++i) dot += std::conj(v[i]) * a(i, j);
      dot *= 2.0;
      for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= v[i] * dot;
    }
    // A <- A (I - 2 v v^H)
    for (std::size_t i = 0; i < n; ++i) {
      Complex dot{0.0, 0.0};
      for (std::size_t j = k + 1; j < n; ++j) dot += a(i, j) * v[j];
      dot *= 2.0;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= dot * std::conj(v[j]);
    }
    a(k + 1, k) = alpha;
    for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
  }
}

struct Givens {
  double c;
  Complex s;
};

// Rotation G = [c s; -conj(s) c] with G [x; y] = [r; 0].
inline Givens make_givens(Complex x, Complex y) {
  const double ax = std::abs(x), ay = std::abs(y);
  if (ay == 0.0) return {1.0, Complex{0.0, 0.0}};
  if (ax == 0.0) return {0.0, std::conj(y) / ay};
  const double rho = std::hypot(ax, ay);
  return {ax / rho, (x / ax) * std::conj(y) / rho};
}

// Wilkinson shift: eigenvalue of the trailing 2x2 block closest to its last entry.
inline Complex wilkinson_shift(Complex a, Complex b, Complex c, Complex d) {
  const Complex half_diff = 0.5 * (a - d);
  const Complex disc = std::sqrt(half_diff * half_diff + b * c);
  const Complex mean = 0.5 * (a + d);
  const Complex l1 = mean + disc, l2 = mean - disc;
  return std::abs(l1 - d) < std::abs(l2 - d) ? l1 : l2;
}

// Single-shift complex QR on an upper Hessenberg matrix; eigenvalues only.
inline EigenReport hessenberg_qr(CMatrix& h) {
  const std::size_t n = h.rows();
  EigenReport report;
  report.values.assign(n, Complex{0.0, 0.0});
  if (n == 0) return report;

  double hnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) hnorm = std::max(hnorm, std::abs(h(i, j)));
  const double tiny = std::numeric_limits<double>::min() / kEps;

  const int budget = 30 * static_cast<int>(std::max<std::size_t>(n, 10));
  std::vector<Givens> rot(n);
  std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(n) - 1;
  int since_deflation = 0;

  while (hi >= 0) {
    // Locate the start of the active unreduced block.
    std::ptrdiff_t lo = hi;
    while (lo > 0) {
      const double sub = std::abs(h(lo, lo - 1));
      double scale = std::abs(h(lo, lo)) + std::abs(h(lo - 1, lo - 1));
      if (scale == 0.0) scale = hnorm;
      if (sub <= kEps * scale || sub <= tiny) {
        h(lo, lo - 1) = 0.0;
        break;
      }
      --lo;
    }
    if (lo == hi) {
      report.values[static_cast<std::size_t>(hi)] = h(hi, hi);
      --hi;
      since_deflation = 0;
      continue;
    }
    if (report.iterations >= budget) {
      report.converged = false;
      for (std::ptrdiff_t i = 0; i <= hi; ++i) report.values[static_cast<std::size_t>(i)] = h(i, i);
      return report;
    }
    ++report.iterations;
    ++since_deflation;

    Complex mu;
    if (since_deflation % 11 == 10) {
      // Exceptional shift breaks rare cycling.
      mu = h(hi, hi) + Complex{0.75 * std::abs(h(hi, hi - 1)), 0.3 * std::abs(h(hi, hi - 1))};
    } else {
      mu = wilkinson_shift(h(hi - 1, hi - 1), h(hi - 1, hi), h(hi, hi - 1), h(hi, hi));
    }

    for (std::ptrdiff_t i = lo; i <= hi; ++i) h(i, i) -= mu;
    for (std::ptrdiff_t k = lo; k < hi; ++k) {
      const Givens g = make_givens(h(k, k), h(k + 1, k));
      rot[static_cast<std::size_t>(k)] = g;
      for (std::ptrdiff_t j = k; j <= hi; ++j) {
        const Complex x = h(k, j), y = h(k + 1, j);
        h(k, j) = g.c * x + g.s * y;
        h(k + 1, j) = -std::conj(g.s) * x + g.c * y;
      }
    }
    for (std::ptrdiff_t k = lo; k < hi; ++k) {
      const Givens g = rot[static_cast<std::size_t>(k)];
      const std::ptrdiff_t last = std::min(k + 1, hi);
      for (std::ptrdiff_t i = lo; i <= last; ++i) {
        const Complex x = h(i, k), y = h(i, k + 1);
        h(i, k) = x * g.c + y * std::conj(g.s);
        h(i, k + 1) = -x * g.s + y * g.c;
      }
    }
    for (std::ptrdiff_t i = lo; i <= hi; ++i) h(i, i) += mu;
  }
  return report;
}

}  // namespace detail

/**
 * @brief Eigenvalues of a dense complex matrix with their iteration report.
 *
 * Balancing, Householder reduction to Hessenberg form, then Wilkinson-shifted
 * single-shift QR with deflation. `converged == false` flags partial results.
 */
inline EigenReport eigen_dense_report(CMatrix matrix, bool balance = true) {
  if (!matrix.square()) throw Error(ErrorKind::InvalidArgument, "eigenvalues need a square matrix");
  if (matrix.rows() > kMaxEigenDimension) {
    throw Error(ErrorKind::SizeExceeded, "dense eigensolver is limited to dimension " +
                                             std::to_string(kMaxEigenDimension));
  }
  if (balance) detail::balance(matrix);
  detail::hessenberg_reduce(matrix);
  return detail::hessenberg_qr(matrix);
}

/// All eigenvalues with multiplicity; throws NoConvergence if QR stalls.
inline std::vector<Complex> eigenvalues_dense(const CMatrix& matrix, bool balance = true) {
  EigenReport r = eigen_dense_report(matrix, balance);
  if (!r.converged) throw Error(ErrorKind::NoConvergence, "shifted QR exhausted its iteration budget");
  return std::move(r.values);
}

/// Roots of a polynomial through its companion matrix (constant term first).
inline std::vector<Complex> polynomial_roots_companion(std::span<const Complex> coeffs) {
  return eigenvalues_dense(companion_matrix(coeffs));
}

}  // namespace randeriv

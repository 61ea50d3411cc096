#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "randeriv/matching.hpp"
#include "randeriv/numerics.hpp"
#include "randeriv/operator.hpp"
#include "randeriv/rng.hpp"
#include "randeriv/types.hpp"

namespace randeriv {

inline constexpr std::size_t kMaxHaarDimension = 256;
inline constexpr std::size_t kMaxCoupledDimension = 128;

/// Square matrix with U^* U = I.
class UnitaryMatrix {
public:
  explicit UnitaryMatrix(CMatrix entries) : entries_(std::move(entries)) {
    if (!entries_.square()) throw Error(ErrorKind::InvalidArgument, "unitary matrix must be square");
  }

  std::size_t size() const noexcept { return entries_.rows(); }
  const CMatrix& entries() const noexcept { return entries_; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }

  /// || U^* U - I ||_F
  double unitarity_defect() const {
    return (entries_.adjoint() * entries_ - CMatrix::identity(size())).frobenius_norm();
  }

  /// |U_{j,n}|^2 down the last column: the Dirichlet weights of the coupling.
  std::vector<double> last_column_weights() const {
    const std::size_t n = size();
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = std::norm(entries_(j, n - 1));
    return w;
  }

private:
  CMatrix entries_;
};

namespace detail {

// Householder QR of g; returns Q with columns rescaled by r_jj / |r_jj|.
inline CMatrix phase_corrected_q(CMatrix g) {
  const std::size_t n = g.rows();
  CMatrix q = CMatrix::identity(n);
  std::vector<Complex> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    double norm_x = 0.0;
    for (std::size_t i = k; i < n; ++i) norm_x += std::norm(g(i, k));
    norm_x = std::sqrt(norm_x);
    if (norm_x == 0.0) continue;
    const Complex x0 = g(k, k);
    const Complex phase = std::abs(x0) == 0.0 ? Complex{1.0, 0.0} : x0 / std::abs(x0);
    const Complex alpha = -phase * norm_x;
    double vnorm = 0.0;
    for (std::size_t i = k; i < n; ++i) {
      v[i] = g(i, k) - (i == k ? alpha : Complex{0.0, 0.0});
      vnorm += std::norm(v[i]);
    }
    vnorm = std::sqrt(vnorm);
    if (vnorm == 0.0) continue;
    for (std::size_t i = k; i < n; ++i) v[i] /= vnorm;
    for (std::size_t j = k; j < n; ++j) {
      Complex dot{0.0, 0.0};
      for (std::size_t i = k; i < n; ++i) dot += std::conj(v[i]) * g(i, j);
      dot *= 2.0;
      for (std::size_t i = k; i < n; ++i) g(i, j) -= v[i] * dot;
    }
    // Q <- Q (I - 2 v v^H)
    for (std::size_t i = 0; i < n; ++i) {
      Complex dot{0.0, 0.0};
      for (std::size_t j = k; j < n; ++j) dot += q(i, j) * v[j];
      dot *= 2.0;
      for (std::size_t j = k; j < n; ++j) q(i, j) -= dot * std::conj(v[j]);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const Complex r = g(j, j);
    const Complex ph = std::abs(r) == 0.0 ? Complex{1.0, 0.0} : r / std::abs(r);
    for (std::size_t i = 0; i < n; ++i) q(i, j) *= ph;
  }
  return q;
}

inline void check_haar_size(std::size_t n) {
  if (n < 2 || n > kMaxHaarDimension) {
    throw Error(ErrorKind::SizeExceeded, "Haar sampling supports 2 <= n <= " + std::to_string(kMaxHaarDimension));
  }
}

}  // namespace detail

/// Haar unitary: QR of a complex Ginibre matrix with the R-diagonal phase correction.
inline UnitaryMatrix haar_unitary(std::size_t n, RngStream& rng) {
  detail::check_haar_size(n);
  CMatrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = Complex{rng.normal(), rng.normal()};
  return UnitaryMatrix(detail::phase_corrected_q(std::move(g)));
}

/// Haar orthogonal (real entries): same construction on a real Ginibre matrix.
inline UnitaryMatrix haar_orthogonal(std::size_t n, RngStream& rng) {
  detail::check_haar_size(n);
  CMatrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = Complex{rng.normal(), 0.0};
  return UnitaryMatrix(detail::phase_corrected_q(std::move(g)));
}

struct MinorProblem {
  PointSet diag;
  UnitaryMatrix unitary;

  MinorProblem(PointSet d, UnitaryMatrix u) : diag(std::move(d)), unitary(std::move(u)) {
    if (diag.size() != unitary.size()) throw Error(ErrorKind::InvalidArgument, "diagonal and unitary sizes differ");
  }

  /// Top-left (n-1) x (n-1) block of U^* diag(lambda) U.
  CMatrix minor() const {
    const std::size_t n = diag.size();
    CMatrix m(n - 1, n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t j = 0; j + 1 < n; ++j) {
        Complex acc{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) acc += std::conj(unitary(k, i)) * diag[k] * unitary(k, j);
        m(i, j) = acc;
      }
    return m;
  }
};

/// Eigenvalues of the top-left (n-1) x (n-1) minor of U^* D U.
inline std::vector<Complex> minor_spectrum(const MinorProblem& problem) {
  if (problem.diag.size() < 2) throw Error(ErrorKind::InvalidArgument, "minor needs n >= 2");
  return eigenvalues_dense(problem.minor());
}

/**
 * @brief Largest matched distance between the randomized-derivative zeros with
 * weights |U_{jn}|^2 and the minor spectrum.
 *
 * The two sets coincide exactly in exact arithmetic, so this measures the
 * joint error of the root solver and the eigensolver.
 */
inline double coupled_check(const PointSet& diag, const UnitaryMatrix& unitary, const ToleranceConfig& tol = {}) {
  if (diag.size() > kMaxCoupledDimension) {
    throw Error(ErrorKind::SizeExceeded, "coupled_check supports n <= " + std::to_string(kMaxCoupledDimension));
  }
  const MinorProblem problem(diag, unitary);
  const WeightVector w(unitary.last_column_weights());
  const RootSolveReport roots = randomized_derivative(diag, w, tol);
  if (roots.status != SolveStatus::Converged) {
    throw Error(ErrorKind::NoConvergence, "randomized derivative did not converge in the coupled check");
  }
  const std::vector<Complex> eig = minor_spectrum(problem);
  return max_matched_distance(roots.roots, eig);
}

}  // namespace randeriv

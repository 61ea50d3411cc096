#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "randeriv/matching.hpp"
#include "randeriv/metrics.hpp"
#include "randeriv/operator.hpp"
#include "randeriv/rmt.hpp"
#include "randeriv/sampling.hpp"

using namespace randeriv;

TEST_CASE("Haar matrices are unitary", "[rmt]") {
  RngStream rng(1, 1);
  for (std::size_t n : {2u, 3u, 16u, 100u, 256u}) {
    CHECK(haar_unitary(n, rng).unitarity_defect() <= 1e-10);
    const auto o = haar_orthogonal(n, rng);
    CHECK(o.unitarity_defect() <= 1e-10);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) REQUIRE(o(i, j).imag() == 0.0);
  }
  CHECK_THROWS_AS(haar_unitary(1, rng), Error);
  CHECK_THROWS_AS(haar_unitary(257, rng), Error);
}

TEST_CASE("last-column weights follow the Dirichlet marginals", "[rmt]") {
  RngStream rng(1, 2);
  double mean = 0.0;
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    const auto w = haar_unitary(16, rng).last_column_weights();
    double total = 0;
    for (double x : w) total += x;
    REQUIRE(std::abs(total - 1.0) < 1e-12);
    mean += w[0];
  }
  CHECK(std::abs(mean / draws - 1.0 / 16.0) <= 0.003);

  std::vector<double> u;
  for (int t = 0; t < draws; ++t) u.push_back(haar_unitary(2, rng).last_column_weights()[0]);
  std::sort(u.begin(), u.end());
  double ks = 0;
  for (int i = 0; i < draws; ++i)
    ks = std::max({ks, std::abs((i + 1.0) / draws - u[i]), std::abs(u[i] - static_cast<double>(i) / draws)});
  CHECK(ks <= 0.02);
}

TEST_CASE("orthogonal last-column weights have Dirichlet(1/2) means", "[rmt]") {
  RngStream rng(1, 3);
  // Beta(1/2, (n-1)/2) marginal: mean 1/n, variance 2(n-1)/(n^2 (n+2)).
  const int n = 8, draws = 20000;
  double s = 0, s2 = 0;
  for (int t = 0; t < draws; ++t) {
    const double x = haar_orthogonal(n, rng).last_column_weights()[0];
    s += x;
    s2 += x * x;
  }
  const double mean = s / draws, var = s2 / draws - mean * mean;
  CHECK(std::abs(mean - 1.0 / n) < 0.003);
  CHECK(std::abs(var - 2.0 * (n - 1) / (n * n * (n + 2.0))) < 0.1 * var);
}

TEST_CASE("minor spectrum examples", "[rmt]") {
  const PointSet diag{{1, 0}, {2, 0}, {3, 1}, {-1, 0}};
  const MinorProblem identity(diag, UnitaryMatrix(CMatrix::identity(4)));
  CHECK(max_matched_distance(minor_spectrum(identity), std::vector<Complex>{{1, 0}, {2, 0}, {3, 1}}) < 1e-12);

  RngStream rng(2, 2);
  const UnitaryMatrix u2 = haar_unitary(2, rng);
  const PointSet d2{{0.5, 0.25}, {-1, 2}};
  const auto e = minor_spectrum(MinorProblem(d2, u2));
  REQUIRE(e.size() == 1);
  const Complex expected = std::norm(u2(0, 0)) * d2[0] + std::norm(u2(1, 0)) * d2[1];
  CHECK(std::abs(e[0] - expected) < 1e-12);
  // Same value through the last-column moduli.
  const Complex via_last = std::norm(u2(0, 1)) * d2[1] + std::norm(u2(1, 1)) * d2[0];
  CHECK(std::abs(e[0] - via_last) < 1e-12);

  const Complex lambda{0.3, -0.7};
  const auto flat = minor_spectrum(MinorProblem(PointSet(std::vector<Complex>(6, lambda)), haar_unitary(6, rng)));
  for (const auto& v : flat) CHECK(std::abs(v - lambda) < 1e-12);

  CHECK_THROWS_AS(MinorProblem(PointSet{{1, 0}}, haar_unitary(2, rng)), Error);
}

TEST_CASE("coupled check agrees at small and moderate n", "[rmt]") {
  RngStream rng(3, 3);
  for (int t = 0; t < 10; ++t) {
    const PointSet d = sample_points(UniformDisk{}, 2, rng);
    CHECK(coupled_check(d, haar_unitary(2, rng)) <= 1e-10);
  }
  for (int t = 0; t < 10; ++t) {
    const PointSet d = sample_points(UniformDisk{}, 32, rng);
    CHECK(coupled_check(d, haar_unitary(32, rng)) <= 1e-8);
    CHECK(coupled_check(d, haar_orthogonal(32, rng)) <= 1e-8);
  }
  for (int t = 0; t < 5; ++t) {
    const PointSet d = sample_points(UniformCircle{}, 16, rng);
    const UnitaryMatrix u = haar_unitary(16, rng);
    CHECK(coupled_check(d, u) <= 1e-8);
    const auto roots = randomized_derivative(d, WeightVector(u.last_column_weights()));
    for (const auto& z : roots.roots) CHECK(std::abs(z) <= 1.0 + 1e-12);
  }
  CHECK_THROWS_AS(coupled_check(sample_points(UniformDisk{}, 129, rng), haar_unitary(129, rng)), Error);
}

TEST_CASE("pooled minor spectra and pooled zeros share a law", "[rmt][property]") {
  RngStream rng(4, 4);
  const PointSet diag = sample_points(UniformDisk{}, 6, rng);
  std::vector<Complex> minors, zeros;
  for (int t = 0; t < 1000; ++t) {
    const auto eig = minor_spectrum(MinorProblem(diag, haar_unitary(6, rng)));
    minors.insert(minors.end(), eig.begin(), eig.end());
    const auto r = randomized_derivative(diag, sample_gamma_weights(2.0, 6, rng));
    zeros.insert(zeros.end(), r.roots.begin(), r.roots.end());
  }
  CHECK(sliced_w1(EmpiricalMeasure(minors), EmpiricalMeasure(zeros), 64, RngStream(4, 5)).value <= 0.03);
}

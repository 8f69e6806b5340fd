#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "pdm/eigensolve.hpp"
#include "pdm/limits.hpp"

using namespace pdm;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("bloch_energy") {
  CHECK(std::abs(bloch_energy(2, 3)) <= 1e-15);
  CHECK(bloch_energy(1, 2) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(bloch_energy(2, 2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(bloch_energy(0, 3), InvalidArgument);
  CHECK_THROWS_AS(bloch_energy(4, 3), InvalidArgument);

  const Index n = 1000;
  const Vectord v = eigenvalues(build_h0(ChainSpec::fixed(n, 0.0)));
  double worst = 0;
  for (Index j = 1; j <= n; ++j) worst = std::max(worst, std::abs(v[j - 1] - bloch_energy(j, n)));
  CHECK(worst <= 1e-9);
}

TEST_CASE("bloch_state") {
  CHECK(bloch_state(1, 1)[0] == doctest::Approx(1.0).epsilon(1e-15));
  const auto b = bloch_state(2, 3);
  CHECK(b[0] == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(std::abs(b[1]) <= 1e-15);
  CHECK(b[2] == doctest::Approx(-1 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(bloch_state(0, 3), InvalidArgument);

  // exact eigenpairs of H0 for every j and every N up to 200
  double worst = 0;
  for (Index n = 1; n <= 200; ++n) {
    const auto h0 = build_h0(ChainSpec::fixed(n, 0.0));
    for (Index j = 1; j <= n; ++j) {
      const auto s = bloch_state(j, n);
      CHECK(std::abs(s.norm() - 1) <= 1e-12);
      worst = std::max(worst, recurrence_residual(h0, bloch_energy(j, n), s));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("rho0") {
  CHECK(rho0(0.0) == doctest::Approx(1 / (2 * pi)).epsilon(1e-15));
  CHECK(rho0(1.0) == doctest::Approx(1 / (pi * std::sqrt(3.0))).epsilon(1e-15));
  CHECK(rho0(-1.0) == rho0(1.0));
  CHECK_THROWS_AS(rho0(2.0), DomainError);
  CHECK_THROWS_AS(rho0(-2.5), DomainError);

  CHECK(testing::integrate([](double e) { return rho0(e); }, -2.0, 2.0) == doctest::Approx(1.0).epsilon(1e-6));
  for (double e : {-1.9, -0.5, 0.0, 1.3}) {
    const double q = testing::integrate([](double x) { return rho0(x); }, -2.0, e);
    CHECK(std::abs(rho0_cdf(e) - q) <= 1e-8);
  }
}

TEST_CASE("rho1") {
  CHECK(rho1(2.0, 1.0 / 1000, 1000) == doctest::Approx(1 / (2 * pi)).epsilon(1e-14));
  CHECK(rho1(2.0 * 0.004 * 500, 0.004, 500) == doctest::Approx(1 / (2 * pi * 2.0)).epsilon(1e-14));
  CHECK(rho1(4.0, 0.001, 1000) == 0.0);
  CHECK_THROWS_AS(rho1(0.0, 0.001, 1000), DomainError);
  CHECK_THROWS_AS(rho1(4.5, 0.001, 1000), DomainError);
  CHECK_THROWS_AS(rho1(1.0, 0.0, 1000), DomainError);

  for (double gn : {0.25, 1.0, 4.0}) {
    const Index n = 800;
    const double g = gn / n;
    const double total = testing::integrate([&](double e) { return rho1(e, g, n); }, 0.0, 4 * gn);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    for (double frac : {0.01, 0.3, 0.8}) {
      const double e = frac * 4 * gn;
      const double q = testing::integrate([&](double x) { return rho1(x, g, n); }, 0.0, e);
      CHECK(std::abs(rho1_cdf(e, g, n) - q) <= 1e-8);
    }
  }

  // density scales as 1/s under (E, gamma) -> (sE, s gamma)
  for (double s : {0.5, 3.0, 17.0})
    for (double e : {0.1, 1.0, 3.5})
      CHECK(rho1(e, 0.001, 1000) == doctest::Approx(s * rho1(s * e, s * 0.001, 1000)).epsilon(1e-13));
}

TEST_CASE("solve_theta") {
  const Index n = 200;
  double prev = 0;
  for (Index j = 1; j <= n; ++j) {
    const auto r = solve_theta(j, n);
    CHECK(r.level_index == j);
    CHECK(r.theta > 0.0);
    CHECK(r.theta < pi / 2);
    CHECK(r.residual <= 1e-12);
    CHECK(r.theta > prev);
    prev = r.theta;
  }
  CHECK_THROWS_AS(solve_theta(0, n), InvalidArgument);
  CHECK_THROWS_AS(solve_theta(n + 1, n), InvalidArgument);

  // large N stays within tolerance
  for (Index j : {1, 5000, 10000}) CHECK(solve_theta(j, 10000).residual <= 1e-12);
}

TEST_CASE("laguerre_energy") {
  for (Index j : {1, 7, 50}) CHECK(laguerre_energy(j, 50, 0.0) == 0.0);

  const Index n = 300;
  const double g = 0.02;
  double prev = 1e300;
  for (Index j = 1; j <= n; ++j) {
    const double e = laguerre_energy(j, n, g);
    CHECK(e >= 0.0);
    CHECK(e <= 4 * g * (n + 1));
    CHECK(e < prev);  // j = 1 is the top level
    prev = e;
  }

  SUBCASE("orientation reproduces the H1 spectrum") {
    const Index big = 2000;
    const double gb = 1.0 / big;
    const Vectord v = eigenvalues(build_h1(ChainSpec::fixed(big, gb)));
    double worst = 0;
    for (Index j = big / 10 + 1; j <= big - big / 10; ++j) {
      const double numeric = v[big - j];  // rank j from the top
      worst = std::max(worst, std::abs(laguerre_energy(j, big, gb) - numeric) / numeric);
    }
    CHECK(worst <= 0.01);
  }
}

TEST_CASE("tail_exponent on synthetic data") {
  const Index n = 1000;
  std::vector<double> power(n), expo(n), wavy(n);
  for (Index j = 1; j <= n; ++j) {
    power[j - 1] = std::pow(double(j), -0.75);
    expo[j - 1] = std::exp(-double(j));
    wavy[j - 1] = std::pow(double(j), -0.75) * std::cos(0.3 * j);
  }

  const auto p = tail_exponent(power);
  CHECK(std::abs(p.slope + 0.75) <= 1e-10);
  CHECK(p.stderr_slope <= 1e-10);
  CHECK(p.polynomial);

  const auto e1 = tail_exponent(expo);
  const auto e2 = tail_exponent(expo, 50, 250);
  CHECK(e1.slope < -10.0);
  CHECK(std::abs(e1.slope - e2.slope) > 1.0);
  CHECK_FALSE(e1.polynomial);

  const auto w = tail_exponent(wavy);
  CHECK(std::abs(w.slope + 0.75) <= 0.02);

  CHECK_THROWS_AS(tail_exponent(power, 10, 15), InvalidArgument);
  CHECK_THROWS_AS(tail_exponent(power, 0, 15), InvalidArgument);
}

TEST_CASE("H1 eigenvector tails") {
  // The unit-norm eigenvector of the symmetric H1 recurrence behaves like
  // sqrt(j) L_j^(-1)(eps), so its envelope decays as j^(-1/4) while the
  // Laguerre-normalized sequence b_j / sqrt(j) decays as j^(-3/4).
  const Index n = 4000;
  const auto op = build_h1(ChainSpec::fixed(n, 1.0 / n));
  const Vectord vals = eigenvalues(op);
  const Matrixd vecs = eigenvectors(op, vals, 40, 201);
  for (Index k : {0, 60, 160}) {
    const Vectord b = vecs.col(k);
    const auto raw = tail_exponent(std::span<const double>(b.data(), n));
    CHECK(std::abs(raw.slope + 0.25) <= 0.02);
    Vectord lag(n);
    for (Index j = 0; j < n; ++j) lag[j] = b[j] / std::sqrt(double(j + 1));
    const auto poly = tail_exponent(std::span<const double>(lag.data(), n));
    CHECK(std::abs(poly.slope + 0.75) <= 0.02);
  }
}

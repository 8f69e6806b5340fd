#pragma once

// Test-only oracles. Nothing here calls into the solver code it checks.

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <cstdint>
#include <random>

#include "pdm/hamiltonian.hpp"

namespace pdm::testing {

/// Random chain instance, N in [1, max_n], gamma in [0, 2], either variant.
struct RandomInstance {
  ChainSpec spec;
  TridiagonalOperatord op;
};

inline RandomInstance random_instance(std::mt19937_64& rng, Index max_n = 12) {
  std::uniform_int_distribution<Index> n_dist(1, max_n);
  std::uniform_real_distribution<double> g_dist(0.0, 2.0);
  std::bernoulli_distribution literal(0.5);
  const auto spec = ChainSpec::fixed(n_dist(rng), g_dist(rng),
                                     literal(rng) ? Variant::LiteralSum : Variant::Canonical);
  return {spec, build_full<double>(spec)};
}

/// Integral of f on (a, b); tanh-sinh copes with integrable endpoint
/// singularities.
template <class F>
double integrate(F f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(f, a, b);
}

/// sum_i b_i^4 for b_i = sqrt(2/(N+1)) sin(i j pi/(N+1)), by direct summation.
inline double bloch_fourth_moment_direct(Index j, Index n) {
  long double s = 0;
  const long double pi = 3.141592653589793238462643383279502884L;
  const long double norm2 = 2.0L / static_cast<long double>(n + 1);
  for (Index i = 1; i <= n; ++i) {
    const long double b = std::sin(static_cast<long double>(i * j) * pi / static_cast<long double>(n + 1));
    s += norm2 * norm2 * b * b * b * b;
  }
  return static_cast<double>(s);
}

}  // namespace pdm::testing

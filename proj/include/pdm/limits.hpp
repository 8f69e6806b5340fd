#pragma once

// Closed-form and asymptotic results for the two limiting operators.
//
// H0 (gamma = 0) is the uniform chain: Chebyshev-U eigenpairs and the
// arcsine density of states on (-2, 2).
//
// H1 (mass-gradient part) has Laguerre-type eigenstates. Its levels are
//   E_j = 4 g (N+1) cos^2(theta_j),
//   (N+1) [2 theta_j - sin(2 theta_j)] = (j - 3/4) pi,   j = 1..N,
// where j counts levels from the top of the spectrum, and its large-N
// density is sqrt(E (4gN - E)) / (2 pi g N E) on (0, 4gN]. The level
// formula carries N+1 and the density N, so their band edges differ at
// O(1/N).

#include <span>

#include "pdm/types.hpp"

namespace pdm {

/// -2 cos(j pi / (N+1)), j = 1..N ascending.
double bloch_energy(Index j, Index n);

/// Unit-norm H0 eigenvector sqrt(2/(N+1)) sin(i j pi / (N+1)), i = 1..N.
/// (The bare prefactor 1/sqrt(N+1) gives squared norm 1/2.)
Vectord bloch_state(Index j, Index n);

/// Large-N density of states of H0. Domain error unless |E| < 2.
double rho0(double energy);

/// Integrated rho0 on (-2, E], clamped to [0, 1] outside the band.
double rho0_cdf(double energy);

/// Large-N density of states of H1. Domain error unless 0 < E <= 4 gamma N.
double rho1(double energy, double gamma, Index n);

/// Integrated rho1 on (0, E], clamped to [0, 1] outside the band.
double rho1_cdf(double energy, double gamma, Index n);

struct ThetaRoot {
  Index level_index;
  double theta;
  double residual;
};

/// Root theta_j in (0, pi/2) of (N+1)[2 theta - sin 2 theta] = (j - 3/4) pi.
/// The residual is that of the condition divided by N+1.
ThetaRoot solve_theta(Index j, Index n, double tol = 1e-12);

/// 4 gamma (N+1) cos^2(theta_j); j = 1 is the highest level.
double laguerre_energy(Index j, Index n, double gamma);

struct TailFit {
  double slope;
  double stderr_slope;
  /// slopes fitted separately on the lower and upper half of the envelope
  double slope_lower_half;
  double slope_upper_half;
  Index points;
  /// True if the two half-window slopes agree to within 0.1.
  bool polynomial;
};

/// Log-log least-squares slope of |b_j| against j over sites
/// [first, last] (1-based, inclusive). For oscillating data only the local
/// maxima of |b| are fitted (upper envelope); for monotone data every point
/// is. Needs at least 10 envelope points.
TailFit tail_exponent(std::span<const double> coeffs, Index first, Index last);

/// Default window [N/10, N/2].
TailFit tail_exponent(std::span<const double> coeffs);

}  // namespace pdm

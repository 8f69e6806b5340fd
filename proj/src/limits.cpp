#include "pdm/limits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "pdm/error.hpp"

namespace pdm {

namespace {

constexpr double pi = std::numbers::pi;

void check_level(Index j, Index n, const char* who) {
  if (n < 1 || j < 1 || j > n)
    throw InvalidArgument(std::string(who) + ": level index out of range");
}

// x - sin(x), accurate for small x where the subtraction cancels.
double x_minus_sin(double x) {
  if (std::abs(x) < 0.5) {
    const double x2 = x * x;
    double term = x * x2 / 6.0;
    double sum = 0.0;
    for (int k = 1; k < 12; ++k) {
      sum += term;
      term *= -x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    }
    return sum;
  }
  return x - std::sin(x);
}

struct LineFit {
  double slope;
  double stderr_slope;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto m = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - my - slope * (x[i] - mx);
    ssr += r * r;
  }
  const double se = x.size() > 2 ? std::sqrt(ssr / (m - 2.0) / sxx) : 0.0;
  return {slope, se};
}

}  // namespace

double bloch_energy(Index j, Index n) {
  check_level(j, n, "bloch_energy");
  return -2.0 * std::cos(static_cast<double>(j) * pi / static_cast<double>(n + 1));
}

Vectord bloch_state(Index j, Index n) {
  check_level(j, n, "bloch_state");
  const double k = static_cast<double>(j) * pi / static_cast<double>(n + 1);
  Vectord b(n);
  for (Index i = 0; i < n; ++i) b[i] = std::sin(static_cast<double>(i + 1) * k);
  b *= std::sqrt(2.0 / static_cast<double>(n + 1));
  return b;
}

double rho0(double energy) {
  if (!(std::abs(energy) < 2.0)) throw DomainError("rho0: energy must satisfy |E| < 2");
  return 1.0 / (pi * std::sqrt(4.0 - energy * energy));
}

double rho0_cdf(double energy) {
  if (energy <= -2.0) return 0.0;
  if (energy >= 2.0) return 1.0;
  return 0.5 + std::asin(energy / 2.0) / pi;
}

double rho1(double energy, double gamma, Index n) {
  const double width = 4.0 * gamma * static_cast<double>(n);
  if (!(width > 0.0)) throw DomainError("rho1: gamma * N must be > 0");
  if (!(energy > 0.0 && energy <= width)) throw DomainError("rho1: energy outside (0, 4 gamma N]");
  const double gn = gamma * static_cast<double>(n);
  return std::sqrt(energy * (width - energy)) / (2.0 * gn * pi * energy);
}

double rho1_cdf(double energy, double gamma, Index n) {
  const double width = 4.0 * gamma * static_cast<double>(n);
  if (!(width > 0.0)) throw DomainError("rho1_cdf: gamma * N must be > 0");
  if (energy <= 0.0) return 0.0;
  if (energy >= width) return 1.0;
  // with s = E / (4 g N) the density is (2/pi) sqrt((1-s)/s) ds
  const double s = energy / width;
  return (2.0 / pi) * (std::sqrt(s * (1.0 - s)) + std::asin(std::sqrt(s)));
}

ThetaRoot solve_theta(Index j, Index n, double tol) {
  check_level(j, n, "solve_theta");
  const double np1 = static_cast<double>(n + 1);
  // f(theta) = 2 theta - sin(2 theta) increases from 0 to pi on (0, pi/2)
  const double target = (static_cast<double>(j) - 0.75) * pi / np1;
  if (!(target > 0.0 && target < pi))
    throw DomainError("solve_theta: quantization target outside (0, pi)");

  double lo = 0.0;
  double hi = pi / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (x_minus_sin(2.0 * mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  const double theta = 0.5 * (lo + hi);
  const double residual = std::abs(x_minus_sin(2.0 * theta) - target);
  if (residual > tol)
    throw ConvergenceError("solve_theta: residual above tolerance", residual, tol);
  return {j, theta, residual};
}

double laguerre_energy(Index j, Index n, double gamma) {
  if (!(gamma >= 0.0)) throw InvalidArgument("laguerre_energy: gamma must be >= 0");
  const double c = std::cos(solve_theta(j, n).theta);
  return 4.0 * gamma * static_cast<double>(n + 1) * c * c;
}

TailFit tail_exponent(std::span<const double> coeffs, Index first, Index last) {
  const auto n = static_cast<Index>(coeffs.size());
  if (first < 1 || last > n || first > last)
    throw InvalidArgument("tail_exponent: window outside 1..N");

  auto a = [&](Index j) { return std::abs(coeffs[static_cast<std::size_t>(j - 1)]); };

  bool oscillating = false;
  for (Index j = std::max<Index>(first, 2); j <= std::min(last, n - 1); ++j)
    if (a(j) < a(j - 1) && a(j) <= a(j + 1)) {
      oscillating = true;
      break;
    }

  std::vector<double> x, y;
  for (Index j = first; j <= last; ++j) {
    if (oscillating) {
      if (j == 1 || j == n) continue;
      if (!(a(j) >= a(j - 1) && a(j) > a(j + 1))) continue;
    }
    if (!(a(j) > 0.0)) continue;
    x.push_back(std::log(static_cast<double>(j)));
    y.push_back(std::log(a(j)));
  }
  if (x.size() < 10) throw InvalidArgument("tail_exponent: fewer than 10 usable envelope points");

  const auto fit = least_squares(x, y);
  const std::size_t half = x.size() / 2;
  const std::vector<double> xl(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(half));
  const std::vector<double> yl(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(half));
  const std::vector<double> xu(x.begin() + static_cast<std::ptrdiff_t>(half), x.end());
  const std::vector<double> yu(y.begin() + static_cast<std::ptrdiff_t>(half), y.end());
  const double sl = least_squares(xl, yl).slope;
  const double su = least_squares(xu, yu).slope;
  return {fit.slope, fit.stderr_slope, sl, su, static_cast<Index>(x.size()), std::abs(sl - su) <= 0.1};
}

TailFit tail_exponent(std::span<const double> coeffs) {
  const auto n = static_cast<Index>(coeffs.size());
  return tail_exponent(coeffs, std::max<Index>(1, n / 10), std::max<Index>(1, n / 2));
}

}  // namespace pdm

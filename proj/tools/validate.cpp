#include "validate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pdm/eigensolve.hpp"
#include "pdm/limits.hpp"

namespace pdm::cli {

namespace {

constexpr double kOracleTol = 1e-10;

// Off-diagonal of the variant with its sign flipped, straight from the
// recurrence.
double hopping(const ChainSpec& spec, Index j) {
  const double g = spec.gamma();
  const double t = g * (static_cast<double>(j) + 0.5);
  return spec.variant() == Variant::Canonical ? 1.0 + t : 1.0 - t;
}

// diag 2 g j, off hopping: the gauge partner of the expected operator,
// written out independently of build_full.
TridiagonalOperatord recurrence_partner(const ChainSpec& spec) {
  const Index n = spec.n_sites();
  Vectord d(n), e(n - 1);
  for (Index j = 1; j <= n; ++j) d[j - 1] = 2.0 * spec.gamma() * static_cast<double>(j);
  for (Index j = 1; j < n; ++j) e[j - 1] = hopping(spec, j);
  return {d, e};
}

double min_gap(const Vectord& v) {
  double g = INFINITY;
  for (Index i = 1; i < v.size(); ++i) g = std::min(g, v[i] - v[i - 1]);
  return g;
}

void record(CheckResult& r, double err) {
  ++r.cases;
  // NaN must fail
  if (!(err <= r.worst)) r.worst = std::isnan(err) ? NAN : std::max(r.worst, err);
}

void finish(CheckResult& r) { r.pass = r.cases > 0 && r.worst <= r.tolerance; }

}  // namespace

OperatorBuilder default_builder() {
  return [](const ChainSpec& spec) { return build_full<double>(spec); };
}

std::vector<ChainSpec> validation_instances(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> n_dist(1, 12);
  std::uniform_real_distribution<double> g_dist(0.0, 2.0);
  std::vector<ChainSpec> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const Index n = n_dist(rng);
    const double g = g_dist(rng);
    out.push_back(ChainSpec::fixed(n, g, k % 2 ? Variant::LiteralSum : Variant::Canonical));
  }
  return out;
}

std::vector<CheckResult> run_validation(std::uint64_t seed, const OperatorBuilder& builder) {
  SolverOptions opts;
  opts.seed = seed;
  opts.compute_vectors = true;
  const auto instances = validation_instances(seed);

  CheckResult values{"oracle eigenvalues", 0, 0, kOracleTol};
  CheckResult residuals{"eigenvector residuals", 0, 0, kOracleTol};
  CheckResult trace{"trace identities", 0, 0, 1e-10};
  CheckResult gauge{"gauge invariance", 0, 0, 1e-9};
  for (const auto& spec : instances) {
    const auto op = builder(spec);
    const auto s = full_diagonalize(op, opts);
    const auto ref = dense_oracle(op);
    record(values, (s.eigenvalues - ref.eigenvalues).cwiseAbs().maxCoeff());
    const double scale = std::max(1.0, op.max_abs_entry());
    for (Index k = 0; k < op.size(); ++k) {
      const Vectord r = op.apply(s.eigenvectors->col(k)) - s.eigenvalues[k] * s.eigenvectors->col(k);
      record(residuals, r.cwiseAbs().maxCoeff() / scale);
    }

    const Index n = spec.n_sites();
    double diag_sum = 0, square_sum = 0;
    for (Index j = 1; j <= n; ++j) {
      const double dj = 2.0 * spec.gamma() * static_cast<double>(j);
      diag_sum += dj;
      square_sum += dj * dj;
      if (j < n) square_sum += 2.0 * hopping(spec, j) * hopping(spec, j);
    }
    record(trace, std::abs(s.eigenvalues.sum() - diag_sum) / std::max(1.0, std::abs(diag_sum)));
    record(trace, std::abs(s.eigenvalues.squaredNorm() - square_sum) / std::max(1.0, square_sum));

    const auto partner = dense_oracle(recurrence_partner(spec));
    record(gauge, (s.eigenvalues - partner.eigenvalues).cwiseAbs().maxCoeff() / scale);
    if (min_gap(partner.eigenvalues) > 1e-6) {
      const Matrixd diff = s.eigenvectors->cwiseAbs() - partner.eigenvectors->cwiseAbs();
      record(gauge, diff.cwiseAbs().maxCoeff());
    }
  }

  CheckResult chebyshev{"closed-form H0", 0, 0, kOracleTol};
  for (Index n : {1, 2, 3, 7, 12, 50}) {
    const auto s = full_diagonalize(builder(ChainSpec::fixed(n, 0.0)), opts);
    for (Index j = 1; j <= n; ++j) {
      record(chebyshev, std::abs(s.eigenvalues[j - 1] - bloch_energy(j, n)));
      const Vectord b = bloch_state(j, n);
      const auto v = s.eigenvectors->col(j - 1);
      record(chebyshev, std::min((v - b).cwiseAbs().maxCoeff(), (v + b).cwiseAbs().maxCoeff()));
    }
  }

  // Level j of the asymptotic formula is the j-th from the top; the same
  // formula read from the bottom must be far off.
  CheckResult laguerre{"Laguerre orientation", 0, 0, 0.05};
  {
    const Index n = 400;
    const double g = 1.0 / static_cast<double>(n);
    const Vectord v = eigenvalues(build_h1<double>(ChainSpec::fixed(n, g)), opts);
    double reversed = 0;
    for (Index j = n / 10; j <= n - n / 10; ++j) {
      const double e = laguerre_energy(j, n, g);
      record(laguerre, std::abs(v[n - j] - e) / std::abs(e));
      reversed = std::max(reversed, std::abs(v[j - 1] - e) / std::abs(e));
    }
    finish(laguerre);
    laguerre.pass = laguerre.pass && reversed > 10 * laguerre.tolerance;
  }

  for (auto* r : {&values, &residuals, &trace, &gauge, &chebyshev}) finish(*r);
  return {values, residuals, trace, gauge, chebyshev, laguerre};
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.pass; });
}

void print_validation(std::ostream& os, const std::vector<CheckResult>& results) {
  os << fmt::format("{:<24} {:>6} {:>12} {:>10}  {}\n", "check", "cases", "worst", "tol", "result");
  for (const auto& r : results)
    os << fmt::format("{:<24} {:>6} {:>12.3e} {:>10.1e}  {}\n", r.name, r.cases, r.worst, r.tolerance,
                      r.pass ? "PASS" : "FAIL");
}

}  // namespace pdm::cli

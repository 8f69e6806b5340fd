#pragma once

// Tight-binding chain with a position-dependent effective mass.
//
// Sites are labelled j = 1..N (x_j = j, lattice spacing a = 1, hopping unit
// t = 1). Three symmetric tridiagonal operators are built from a ChainSpec:
//
//   H0 : diag 0,        off -1                       (uniform chain)
//   H1 : diag 2*g*j,    off g*(j + 1/2)              (mass-gradient part)
//   H  : diag 2*g*j,    off -(1 + g*(j + 1/2))       (canonical full model)
//
// The canonical H is the symmetric operator whose eigenproblem is the
// three-term recurrence
//
//   (g(j+1/2) + 1) b_{j+1} + (g(j-1/2) + 1) b_{j-1} = (2 g j - E) b_j,
//   b_0 = b_{N+1} = 0.
//
// Variant::LiteralSum instead returns H0 + H1 entrywise (off g(j+1/2) - 1),
// kept for comparison only.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>

#include "pdm/error.hpp"
#include "pdm/types.hpp"

namespace pdm {

enum class Variant { Canonical, LiteralSum };

/// Physical instance: N sites and mass-gradient parameter gamma >= 0.
class ChainSpec {
 public:
  struct Scaling {
    double c;
    double alpha;
  };

  static ChainSpec fixed(Index n_sites, double gamma, Variant variant = Variant::Canonical) {
    if (n_sites < 1) throw InvalidArgument("ChainSpec: n_sites must be >= 1");
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
      throw InvalidArgument("ChainSpec: gamma must be finite and >= 0");
    return ChainSpec(n_sites, gamma, std::nullopt, variant);
  }

  /// gamma = c * N^(-alpha), evaluated once here.
  static ChainSpec scaled(Index n_sites, double c, double alpha,
                          Variant variant = Variant::Canonical) {
    if (n_sites < 1) throw InvalidArgument("ChainSpec: n_sites must be >= 1");
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("ChainSpec: scaling c must be > 0");
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
      throw InvalidArgument("ChainSpec: scaling alpha must be >= 0");
    const double gamma = c * std::pow(static_cast<double>(n_sites), -alpha);
    return ChainSpec(n_sites, gamma, Scaling{c, alpha}, variant);
  }

  /// gamma = gamma_n / N, i.e. fixed product gamma*N.
  static ChainSpec with_gamma_n(Index n_sites, double gamma_n,
                                Variant variant = Variant::Canonical) {
    if (n_sites < 1) throw InvalidArgument("ChainSpec: n_sites must be >= 1");
    if (gamma_n == 0.0) return fixed(n_sites, 0.0, variant);
    return scaled(n_sites, gamma_n, 1.0, variant);
  }

  Index n_sites() const noexcept { return n_; }
  double gamma() const noexcept { return gamma_; }
  double gamma_n() const noexcept { return gamma_ * static_cast<double>(n_); }
  const std::optional<Scaling>& scaling() const noexcept { return scaling_; }
  Variant variant() const noexcept { return variant_; }

 private:
  ChainSpec(Index n, double gamma, std::optional<Scaling> scaling, Variant variant)
      : n_(n), gamma_(gamma), scaling_(scaling), variant_(variant) {}

  Index n_;
  double gamma_;
  std::optional<Scaling> scaling_;
  Variant variant_;
};

/// Symmetric tridiagonal matrix stored as its diagonal (length N) and
/// first off-diagonal (length N-1).
template <class Scalar>
class TridiagonalOperator {
 public:
  using scalar_type = Scalar;

  TridiagonalOperator(Vector<Scalar> diag, Vector<Scalar> off)
      : diag_(std::move(diag)), off_(std::move(off)) {
    if (diag_.size() < 1) throw InvalidArgument("TridiagonalOperator: empty diagonal");
    if (off_.size() != diag_.size() - 1)
      throw InvalidArgument("TridiagonalOperator: off-diagonal must have length N-1");
    if (!diag_.allFinite() || !off_.allFinite())
      throw InvalidArgument("TridiagonalOperator: non-finite entry");
  }

  Index size() const noexcept { return diag_.size(); }
  const Vector<Scalar>& diag() const noexcept { return diag_; }
  const Vector<Scalar>& off() const noexcept { return off_; }

  /// Largest absolute entry.
  Scalar max_abs_entry() const {
    Scalar m = diag_.cwiseAbs().maxCoeff();
    if (off_.size() > 0) m = std::max(m, off_.cwiseAbs().maxCoeff());
    return m;
  }

  template <class Derived>
  Vector<Scalar> apply(const Eigen::MatrixBase<Derived>& v) const {
    const Index n = size();
    if (v.size() != n) throw InvalidArgument("TridiagonalOperator::apply: size mismatch");
    Vector<Scalar> out = diag_.cwiseProduct(v);
    for (Index j = 0; j + 1 < n; ++j) {
      out[j] += off_[j] * v[j + 1];
      out[j + 1] += off_[j] * v[j];
    }
    return out;
  }

  Matrix<Scalar> to_dense() const {
    const Index n = size();
    Matrix<Scalar> m = Matrix<Scalar>::Zero(n, n);
    m.diagonal() = diag_;
    for (Index j = 0; j + 1 < n; ++j) m(j, j + 1) = m(j + 1, j) = off_[j];
    return m;
  }

  /// Leading k x k principal block.
  TridiagonalOperator leading_block(Index k) const {
    if (k < 1 || k > size()) throw InvalidArgument("leading_block: k out of range");
    return TridiagonalOperator(diag_.head(k), off_.head(k - 1));
  }

 private:
  Vector<Scalar> diag_;
  Vector<Scalar> off_;
};

using TridiagonalOperatord = TridiagonalOperator<double>;

template <class Scalar = double>
TridiagonalOperator<Scalar> build_h0(const ChainSpec& spec) {
  const Index n = spec.n_sites();
  return {Vector<Scalar>::Zero(n), Vector<Scalar>::Constant(n - 1, Scalar(-1))};
}

template <class Scalar = double>
TridiagonalOperator<Scalar> build_h1(const ChainSpec& spec) {
  const Index n = spec.n_sites();
  const Scalar g = spec.gamma();
  Vector<Scalar> diag(n);
  Vector<Scalar> off(n - 1);
  for (Index i = 0; i < n; ++i) diag[i] = Scalar(2) * g * Scalar(i + 1);
  // bond between sites j and j+1 (j = i+1)
  for (Index i = 0; i + 1 < n; ++i) off[i] = g * (Scalar(i + 1) + Scalar(0.5));
  return {std::move(diag), std::move(off)};
}

template <class Scalar = double>
TridiagonalOperator<Scalar> build_full(const ChainSpec& spec) {
  auto h1 = build_h1<Scalar>(spec);
  Vector<Scalar> off = h1.off();
  if (spec.variant() == Variant::Canonical) {
    off = -(off.array() + Scalar(1));
  } else {
    off.array() -= Scalar(1);
  }
  return {h1.diag(), std::move(off)};
}

/// Diagonal +-1 similarity: negates the off-diagonal. Spectrum and |b_j|
/// are unchanged.
template <class Scalar>
TridiagonalOperator<Scalar> gauge_flip(const TridiagonalOperator<Scalar>& op) {
  return {op.diag(), -op.off()};
}

template <class Scalar>
struct SpectralBounds {
  Scalar lower;
  Scalar upper;

  Scalar width() const { return upper - lower; }
};

/// Gershgorin enclosure: row centers minus/plus absolute off-diagonal row sums.
template <class Scalar>
SpectralBounds<Scalar> gershgorin_bounds(const TridiagonalOperator<Scalar>& op) {
  using std::abs;
  const Index n = op.size();
  const auto& d = op.diag();
  const auto& e = op.off();
  Scalar lo = d[0];
  Scalar hi = d[0];
  for (Index i = 0; i < n; ++i) {
    Scalar r = 0;
    if (i > 0) r += abs(e[i - 1]);
    if (i + 1 < n) r += abs(e[i]);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  return {lo, hi};
}

/// Normalized max-norm residual of the three-term recurrence
///   off[j-1] b_{j-1} + diag[j] b_j + off[j] b_{j+1} - E b_j
/// with b_0 = b_{N+1} = 0, divided by (|E| + max|entry|) * max|b|.
template <class Scalar, class Derived>
Scalar recurrence_residual(const TridiagonalOperator<Scalar>& op, Scalar energy,
                           const Eigen::MatrixBase<Derived>& coeffs) {
  using std::abs;
  const Index n = op.size();
  if (coeffs.size() != n) throw InvalidArgument("recurrence_residual: length mismatch");
  const Scalar bmax = coeffs.cwiseAbs().maxCoeff();
  if (bmax == Scalar(0)) throw InvalidArgument("recurrence_residual: zero coefficient vector");

  const auto& d = op.diag();
  const auto& e = op.off();
  Scalar worst = 0;
  for (Index j = 0; j < n; ++j) {
    Scalar r = (d[j] - energy) * coeffs[j];
    if (j > 0) r += e[j - 1] * coeffs[j - 1];
    if (j + 1 < n) r += e[j] * coeffs[j + 1];
    worst = std::max(worst, abs(r));
  }
  const Scalar entries = op.max_abs_entry();
  // the zero operator has no scale of its own
  const Scalar scale = (entries > Scalar(0) ? abs(energy) + entries : std::max(abs(energy), Scalar(1))) * bmax;
  return worst / scale;
}

/// Debug dump: one line per site, `j,diag,off` (off empty on the last line).
void write_operator(std::ostream& os, const TridiagonalOperatord& op);

}  // namespace pdm

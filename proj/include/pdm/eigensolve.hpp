#pragma once

// Eigensolvers for symmetric tridiagonal operators.
//
// Eigenvalues come from Sturm-count bisection (default) or implicit-shift QL.
// Eigenvectors are extracted on demand by inverse iteration, one cluster of
// close eigenvalues at a time, so memory stays O(N) per state. A dense
// cyclic-Jacobi solver is provided as an independent oracle for small N.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "pdm/error.hpp"
#include "pdm/hamiltonian.hpp"
#include "pdm/parallel.hpp"
#include "pdm/types.hpp"

namespace pdm {

enum class SolverMethod { Bisection, ImplicitShift, Auto };

struct SolverOptions {
  SolverMethod method = SolverMethod::Auto;
  /// Tolerance relative to the spectral width (Gershgorin upper - lower).
  double abs_tol = 1e-12;
  int max_iter = 200;
  bool compute_vectors = false;
  /// Worker count; 0 means hardware concurrency. Results do not depend on it.
  std::size_t threads = 1;
  /// Seed of the inverse-iteration start vectors.
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;

  void validate() const {
    if (!(abs_tol > 0.0)) throw InvalidArgument("SolverOptions: abs_tol must be > 0");
    if (max_iter < 1) throw InvalidArgument("SolverOptions: max_iter must be >= 1");
  }
};

template <class Scalar>
struct Spectrum {
  Vector<Scalar> eigenvalues;
  /// N x k, column i pairs with eigenvalue i.
  std::optional<Matrix<Scalar>> eigenvectors;
};

using Spectrumd = Spectrum<double>;

namespace detail {

template <class Scalar>
Scalar spectral_scale(const TridiagonalOperator<Scalar>& op) {
  const auto b = gershgorin_bounds(op);
  Scalar w = b.width();
  if (w <= Scalar(0)) w = op.max_abs_entry();
  if (w <= Scalar(0)) w = Scalar(1);
  return w;
}

template <class Scalar>
struct SturmData {
  const Vector<Scalar>* diag;
  Vector<Scalar> off2;
  Scalar pivmin;

  explicit SturmData(const TridiagonalOperator<Scalar>& op)
      : diag(&op.diag()), off2(op.off().array().square()) {
    Scalar m = Scalar(1);
    if (off2.size() > 0) m = std::max(m, off2.maxCoeff());
    pivmin = std::numeric_limits<Scalar>::min() * m;
  }

  Index count(Scalar x) const {
    const auto& d = *diag;
    const Index n = d.size();
    Index negatives = 0;
    Scalar q = d[0] - x;
    if (std::abs(q) < pivmin) q = -pivmin;
    negatives += q < Scalar(0);
    for (Index i = 1; i < n; ++i) {
      q = (d[i] - x) - off2[i - 1] / q;
      if (std::abs(q) < pivmin) q = -pivmin;
      negatives += q < Scalar(0);
    }
    return negatives;
  }

  /// count() at L shifts at once. Lane arithmetic is identical to count();
  /// interleaving only lets the divisions overlap.
  template <int L>
  void count(const Scalar (&x)[L], Index (&out)[L]) const {
    const auto& d = *diag;
    const Index n = d.size();
    Scalar q[L];
    for (int l = 0; l < L; ++l) {
      q[l] = d[0] - x[l];
      if (std::abs(q[l]) < pivmin) q[l] = -pivmin;
      out[l] = q[l] < Scalar(0);
    }
    for (Index i = 1; i < n; ++i) {
      const Scalar di = d[i];
      const Scalar ei = off2[i - 1];
      for (int l = 0; l < L; ++l) {
        Scalar t = (di - x[l]) - ei / q[l];
        t = std::abs(t) < pivmin ? -pivmin : t;
        q[l] = t;
        out[l] += t < Scalar(0);
      }
    }
  }
};

// Eigenvalues bisected together in bisection_values.
inline constexpr int kBisectionLanes = 8;

template <class Scalar>
Vector<Scalar> bisection_values(const TridiagonalOperator<Scalar>& op, const SolverOptions& opts) {
  const Index n = op.size();
  if (n == 1) return op.diag();
  const SturmData<Scalar> sturm(op);
  const auto bounds = gershgorin_bounds(op);
  const Scalar scale = spectral_scale(op);
  // never looser than abs_tol * width; absolute abs_tol once the width exceeds 1
  const Scalar tol = Scalar(opts.abs_tol) * std::min(scale, Scalar(1));
  const Scalar pad = Scalar(4) * std::numeric_limits<Scalar>::epsilon() * scale + tol;
  const Scalar glo = bounds.lower - pad;
  const Scalar ghi = bounds.upper + pad;

  // Fixed groups of consecutive indices, so each value follows the same
  // bisection path whatever the thread count.
  constexpr int L = kBisectionLanes;
  Vector<Scalar> values(n);
  const Index groups = (n + L - 1) / L;
  parallel_for(groups, opts.threads, [&](std::ptrdiff_t g) {
    Scalar lo[L], hi[L], mid[L];
    Index counts[L];
    bool active[L];
    int it = 0;
    for (int l = 0; l < L; ++l) {
      lo[l] = glo;
      hi[l] = ghi;
      active[l] = g * L + l < n;
    }
    for (;;) {
      bool any = false;
      for (int l = 0; l < L; ++l) {
        mid[l] = lo[l] + (hi[l] - lo[l]) / Scalar(2);
        if (active[l] && (!(hi[l] - lo[l] > tol) || mid[l] <= lo[l] || mid[l] >= hi[l])) active[l] = false;
        any |= active[l];
      }
      if (!any) break;
      if (++it > opts.max_iter) {
        for (int l = 0; l < L; ++l)
          if (active[l]) throw ConvergenceError("bisection did not converge", double(lo[l]), double(hi[l]));
      }
      sturm.count(mid, counts);
      for (int l = 0; l < L; ++l) {
        if (!active[l]) continue;
        if (counts[l] > g * L + l)
          hi[l] = mid[l];
        else
          lo[l] = mid[l];
      }
    }
    for (int l = 0; l < L && g * L + l < n; ++l) values[g * L + l] = lo[l] + (hi[l] - lo[l]) / Scalar(2);
  });
  return values;
}

template <class Scalar>
Vector<Scalar> implicit_ql_values(const TridiagonalOperator<Scalar>& op, const SolverOptions& opts) {
  using std::abs;
  const Index n = op.size();
  Vector<Scalar> d = op.diag();
  Vector<Scalar> e = Vector<Scalar>::Zero(n);
  e.head(n - 1) = op.off();
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();

  for (Index l = 0; l < n; ++l) {
    int iter = 0;
    Index m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const Scalar dd = abs(d[m]) + abs(d[m + 1]);
        if (abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == opts.max_iter)
          throw ConvergenceError("implicit QL did not converge", double(d[l]), double(d[l]));
        // Wilkinson-type shift from the leading 2x2 block
        Scalar g = (d[l + 1] - d[l]) / (Scalar(2) * e[l]);
        Scalar r = std::hypot(g, Scalar(1));
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        Scalar s = 1, c = 1, p = 0;
        Index i = m - 1;
        bool deflated = false;
        for (; i >= l; --i) {
          const Scalar f = s * e[i];
          const Scalar b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == Scalar(0)) {
            d[i + 1] -= p;
            e[m] = 0;
            deflated = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + Scalar(2) * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (deflated) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

/// LU factorization with partial pivoting of (T - sigma I). U has two
/// superdiagonals; L is unit lower bidiagonal up to row swaps.
template <class Scalar>
class ShiftedTridiagonalLU {
 public:
  ShiftedTridiagonalLU(const TridiagonalOperator<Scalar>& op, Scalar sigma, Scalar tiny)
      : n_(op.size()), u0_(n_), u1_(n_), u2_(n_), mult_(n_), swap_(n_, false) {
    using std::abs;
    const auto& d = op.diag();
    const auto& e = op.off();
    u1_.setZero();
    u2_.setZero();
    mult_.setZero();
    Scalar p0 = d[0] - sigma;
    Scalar p1 = n_ > 1 ? e[0] : Scalar(0);
    for (Index k = 0; k + 1 < n_; ++k) {
      const Scalar c = e[k];
      const Scalar a_next = d[k + 1] - sigma;
      const Scalar b_next = k + 2 < n_ ? e[k + 1] : Scalar(0);
      if (abs(p0) >= abs(c)) {
        if (p0 == Scalar(0)) p0 = tiny;
        u0_[k] = p0;
        u1_[k] = p1;
        u2_[k] = 0;
        const Scalar l = c / p0;
        mult_[k] = l;
        p0 = a_next - l * p1;
        p1 = b_next;
      } else {
        swap_[k] = true;
        u0_[k] = c;
        u1_[k] = a_next;
        u2_[k] = b_next;
        const Scalar l = p0 / c;
        mult_[k] = l;
        p0 = p1 - l * a_next;
        p1 = -l * b_next;
      }
      if (abs(u0_[k]) < tiny) u0_[k] = std::copysign(tiny, u0_[k]);
    }
    if (abs(p0) < tiny) p0 = std::copysign(tiny, p0);
    u0_[n_ - 1] = p0;
  }

  /// Overwrites y with (T - sigma I)^{-1} y.
  void solve(Vector<Scalar>& y) const {
    for (Index k = 0; k + 1 < n_; ++k) {
      if (swap_[k]) std::swap(y[k], y[k + 1]);
      y[k + 1] -= mult_[k] * y[k];
    }
    for (Index k = n_ - 1; k >= 0; --k) {
      Scalar s = y[k];
      if (k + 1 < n_) s -= u1_[k] * y[k + 1];
      if (k + 2 < n_) s -= u2_[k] * y[k + 2];
      y[k] = s / u0_[k];
    }
  }

 private:
  Index n_;
  Vector<Scalar> u0_, u1_, u2_, mult_;
  std::vector<bool> swap_;
};

template <class Scalar>
Scalar residual_inf(const TridiagonalOperator<Scalar>& op, const Vector<Scalar>& v, Scalar rho) {
  return (op.apply(v) - rho * v).cwiseAbs().maxCoeff();
}

/// Inverse iteration for one shift, orthogonalizing against `previous`
/// (members of the same cluster). Returns the unit vector.
template <class Scalar>
Vector<Scalar> inverse_iteration(const TridiagonalOperator<Scalar>& op, Scalar sigma,
                                 const std::vector<Vector<Scalar>>& previous,
                                 std::mt19937_64& rng, const SolverOptions& opts) {
  const Index n = op.size();
  const Scalar scale = spectral_scale(op);
  const Scalar tol = Scalar(opts.abs_tol) * scale;
  const Scalar tiny = std::numeric_limits<Scalar>::epsilon() * scale;
  const ShiftedTridiagonalLU<Scalar> lu(op, sigma, tiny);

  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vector<Scalar> v(n);
  for (Index i = 0; i < n; ++i) v[i] = Scalar(uni(rng));
  v.normalize();

  Scalar res = std::numeric_limits<Scalar>::infinity();
  int converged_steps = 0;
  for (int it = 0; it < opts.max_iter; ++it) {
    lu.solve(v);
    for (const auto& q : previous) v -= q.dot(v) * q;
    const Scalar nrm = v.norm();
    if (!(nrm > Scalar(0)) || !std::isfinite(double(nrm))) {
      // Start over from a fresh direction; the previous one was annihilated.
      for (Index i = 0; i < n; ++i) v[i] = Scalar(uni(rng));
      for (const auto& q : previous) v -= q.dot(v) * q;
      v.normalize();
      continue;
    }
    v /= nrm;
    const Scalar rho = v.dot(op.apply(v));
    res = residual_inf(op, v, rho);
    // one extra sweep after the residual test passes
    if (res <= tol && ++converged_steps >= 2) {
      // fix the sign: largest-magnitude component positive
      Index imax = 0;
      v.cwiseAbs().maxCoeff(&imax);
      if (v[imax] < Scalar(0)) v = -v;
      return v;
    }
  }
  throw ConvergenceError("inverse iteration did not converge", double(sigma), double(sigma));
}

/// Groups of consecutive eigenvalue indices closer than the cluster gap.
template <class Scalar>
std::vector<std::pair<Index, Index>> clusters(const Vector<Scalar>& values, Scalar gap) {
  std::vector<std::pair<Index, Index>> out;
  const Index n = values.size();
  Index start = 0;
  for (Index i = 1; i <= n; ++i) {
    if (i == n || values[i] - values[i - 1] >= gap) {
      out.emplace_back(start, i);
      start = i;
    }
  }
  return out;
}

template <class Scalar>
std::vector<Vector<Scalar>> cluster_vectors(const TridiagonalOperator<Scalar>& op,
                                            const Vector<Scalar>& values, Index first, Index last,
                                            const SolverOptions& opts) {
  std::mt19937_64 rng(opts.seed + static_cast<std::uint64_t>(first));
  const Scalar scale = spectral_scale(op);
  const Scalar nudge = Scalar(10) * std::numeric_limits<Scalar>::epsilon() * scale;
  std::vector<Vector<Scalar>> vecs;
  vecs.reserve(static_cast<std::size_t>(last - first));
  Scalar prev_shift = -std::numeric_limits<Scalar>::infinity();
  for (Index i = first; i < last; ++i) {
    // distinct shifts inside a cluster keep the factorizations apart
    Scalar shift = values[i];
    if (i > first && shift <= prev_shift + nudge) shift = prev_shift + nudge;
    prev_shift = shift;
    vecs.push_back(inverse_iteration(op, shift, vecs, rng, opts));
  }
  return vecs;
}

}  // namespace detail

/// Number of eigenvalues strictly below x (sign count of the Sturm sequence
/// of leading principal minors of T - xI).
template <class Scalar>
Index sturm_count(const TridiagonalOperator<Scalar>& op, Scalar x) {
  return detail::SturmData<Scalar>(op).count(x);
}

/// All eigenvalues in ascending order.
template <class Scalar>
Vector<Scalar> eigenvalues(const TridiagonalOperator<Scalar>& op, const SolverOptions& opts = {}) {
  opts.validate();
  if (opts.method == SolverMethod::ImplicitShift) return detail::implicit_ql_values(op, opts);
  return detail::bisection_values(op, opts);
}

/// Unit eigenvector for the eigenvalue nearest `lambda`, by inverse
/// iteration from a seeded start vector. Sign convention: the
/// largest-magnitude component is positive.
template <class Scalar>
Vector<Scalar> eigenvector(const TridiagonalOperator<Scalar>& op, Scalar lambda,
                           const SolverOptions& opts = {}) {
  opts.validate();
  const auto b = gershgorin_bounds(op);
  const Scalar slack = Scalar(opts.abs_tol) * detail::spectral_scale(op);
  if (!(lambda >= b.lower - slack && lambda <= b.upper + slack))
    throw InvalidArgument("eigenvector: lambda outside Gershgorin bounds");
  std::mt19937_64 rng(opts.seed);
  return detail::inverse_iteration(op, lambda, {}, rng, opts);
}

/// Eigenvectors for eigenvalue indices [first, last) of the ascending
/// `values`. Clusters (gap < 10 * abs_tol * width) are solved jointly with
/// re-orthogonalization; a cluster straddling the range is solved whole, so
/// each column is the same no matter how the caller batches.
template <class Scalar>
Matrix<Scalar> eigenvectors(const TridiagonalOperator<Scalar>& op, const Vector<Scalar>& values,
                            Index first, Index last, const SolverOptions& opts = {}) {
  opts.validate();
  const Index n = op.size();
  if (values.size() != n) throw InvalidArgument("eigenvectors: need all N eigenvalues");
  if (first < 0 || last > n || first > last) throw InvalidArgument("eigenvectors: bad range");

  const Scalar gap = Scalar(10) * Scalar(opts.abs_tol) * detail::spectral_scale(op);
  std::vector<std::pair<Index, Index>> groups;
  for (const auto& g : detail::clusters(values, gap))
    if (g.second > first && g.first < last) groups.push_back(g);

  Matrix<Scalar> out(n, last - first);
  parallel_for(static_cast<std::ptrdiff_t>(groups.size()), opts.threads, [&](std::ptrdiff_t gi) {
    const auto [g0, g1] = groups[static_cast<std::size_t>(gi)];
    const auto vecs = detail::cluster_vectors(op, values, g0, g1, opts);
    for (Index i = std::max(g0, first); i < std::min(g1, last); ++i)
      out.col(i - first) = vecs[static_cast<std::size_t>(i - g0)];
  });
  return out;
}

template <class Scalar>
Spectrum<Scalar> full_diagonalize(const TridiagonalOperator<Scalar>& op,
                                  const SolverOptions& opts = {}) {
  Spectrum<Scalar> s;
  s.eigenvalues = eigenvalues(op, opts);
  if (opts.compute_vectors) s.eigenvectors = eigenvectors(op, s.eigenvalues, 0, op.size(), opts);
  return s;
}

inline Spectrumd full_diagonalize(const ChainSpec& spec, const SolverOptions& opts = {}) {
  return full_diagonalize(build_full<double>(spec), opts);
}

/// Dense cyclic Jacobi eigensolver used as an independent oracle. Shares no
/// code with the bisection or inverse-iteration paths. N <= 64.
template <class Scalar>
Spectrum<Scalar> dense_oracle(const TridiagonalOperator<Scalar>& op) {
  using std::abs;
  using std::sqrt;
  const Index n = op.size();
  if (n > 64) throw InvalidArgument("dense_oracle: N > 64");

  Matrix<Scalar> a = op.to_dense();
  Matrix<Scalar> v = Matrix<Scalar>::Identity(n, n);
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();

  auto off_norm = [&] {
    Scalar s = 0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return sqrt(s);
  };
  const Scalar total = std::max(a.norm(), std::numeric_limits<Scalar>::min());

  int sweep = 0;
  while (off_norm() > eps * eps * total) {
    if (++sweep > 100) throw ConvergenceError("Jacobi sweeps exhausted", double(off_norm()), 0.0);
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = std::copysign(Scalar(1), theta) / (abs(theta) + sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        for (Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k);
          const Scalar aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p);
          const Scalar vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return a(x, x) < a(y, y); });

  Spectrum<Scalar> s;
  s.eigenvalues.resize(n);
  Matrix<Scalar> vecs(n, n);
  for (Index i = 0; i < n; ++i) {
    const Index src = order[static_cast<std::size_t>(i)];
    s.eigenvalues[i] = a(src, src);
    vecs.col(i) = v.col(src).normalized();
  }
  s.eigenvectors = std::move(vecs);
  return s;
}

}  // namespace pdm

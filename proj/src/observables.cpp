#include "pdm/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdm {

namespace {

// Eigenvectors are produced this many at a time in pr_profile.
constexpr Index kVectorBatch = 256;

double slope_of(const std::vector<double>& x, const std::vector<double>& y) {
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
  return sxy / sxx;
}

void check_sizes(std::span<const Index> n_list) {
  if (n_list.empty()) throw InvalidArgument("size list is empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1) throw InvalidArgument("size list entries must be >= 1");
    if (i > 0 && n_list[i] <= n_list[i - 1])
      throw InvalidArgument("size list must be strictly increasing");
  }
}

Index nearest_index(const Vectord& values, double target) {
  const double* begin = values.data();
  const double* end = begin + values.size();
  const double* it = std::lower_bound(begin, end, target);
  if (it == end) return values.size() - 1;
  if (it == begin) return 0;
  // ties go to the lower state
  return (target - *(it - 1) <= *it - target) ? (it - begin) - 1 : it - begin;
}

}  // namespace

double DosHistogram::integral() const {
  double s = 0;
  for (std::size_t b = 0; b < density.size(); ++b) s += density[b] * (edges[b + 1] - edges[b]);
  return s;
}

DosHistogram dos_histogram(std::span<const double> eigenvalues, int bins,
                           std::optional<std::pair<double, double>> range) {
  if (eigenvalues.empty()) throw InvalidArgument("dos_histogram: empty spectrum");
  if (bins < 1) throw InvalidArgument("dos_histogram: bins must be >= 1");

  double lo, hi;
  if (range) {
    std::tie(lo, hi) = *range;
    if (!(lo < hi)) throw InvalidArgument("dos_histogram: range must satisfy lo < hi");
  } else {
    const auto [mn, mx] = std::minmax_element(eigenvalues.begin(), eigenvalues.end());
    lo = std::nextafter(*mn, -std::numeric_limits<double>::infinity());
    hi = std::nextafter(*mx, std::numeric_limits<double>::infinity());
  }

  DosHistogram h;
  const auto nb = static_cast<std::size_t>(bins);
  h.edges.resize(nb + 1);
  for (std::size_t b = 0; b <= nb; ++b)
    h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(nb);
  h.edges[nb] = hi;

  std::vector<double> counts(nb, 0.0);
  for (double x : eigenvalues) {
    if (x < lo || x > hi) continue;
    auto it = std::upper_bound(h.edges.begin(), h.edges.end(), x);
    auto b = static_cast<std::size_t>(it - h.edges.begin());
    b = b == 0 ? 0 : b - 1;
    if (b >= nb) b = nb - 1;  // x == hi
    counts[b] += 1.0;
  }
  const auto total = static_cast<double>(eigenvalues.size());
  h.density.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) h.density[b] = counts[b] / (total * (h.edges[b + 1] - h.edges[b]));
  return h;
}

double dos_l1_distance(const DosHistogram& hist, const std::function<double(double)>& cdf,
                       std::size_t skip_edge_bins) {
  double l1 = 0;
  const std::size_t nb = hist.bins();
  for (std::size_t b = skip_edge_bins; b + skip_edge_bins < nb; ++b) {
    const double w = hist.edges[b + 1] - hist.edges[b];
    const double mass = cdf(hist.edges[b + 1]) - cdf(hist.edges[b]);
    l1 += std::abs(hist.density[b] * w - mass);
  }
  return l1;
}

std::vector<StateRecord> state_records(const TridiagonalOperatord& op, const Vectord& eigenvalues,
                                       Index first, Index last, const SolverOptions& opts) {
  const Index n = op.size();
  std::vector<StateRecord> out;
  out.reserve(static_cast<std::size_t>(last - first));
  for (Index b0 = first; b0 < last; b0 += kVectorBatch) {
    const Index b1 = std::min(last, b0 + kVectorBatch);
    const Matrixd vecs = eigenvectors(op, eigenvalues, b0, b1, opts);
    for (Index i = b0; i < b1; ++i) {
      const double pr = participation_ratio(vecs.col(i - b0));
      out.push_back({i + 1, eigenvalues[i], pr, pr / static_cast<double>(n)});
    }
  }
  return out;
}

std::vector<StateRecord> pr_profile(const ChainSpec& spec, const SolverOptions& opts) {
  const auto op = build_full<double>(spec);
  const Vectord values = eigenvalues(op, opts);
  return state_records(op, values, 0, op.size(), opts);
}

std::string_view to_string(Localization c) {
  switch (c) {
    case Localization::Extended:
      return "Extended";
    case Localization::Localized:
      return "Localized";
    case Localization::Undetermined:
      return "Undetermined";
  }
  return "Undetermined";
}

ScalingVerdict classify_from_samples(double energy_target, std::vector<ScalingSample> samples,
                                     const ClassifyThresholds& thresholds) {
  ScalingVerdict v{energy_target, std::move(samples), Localization::Undetermined,
                   std::numeric_limits<double>::quiet_NaN()};
  if (v.samples.size() >= 2) {
    std::vector<double> x, y;
    for (const auto& s : v.samples) {
      x.push_back(std::log(static_cast<double>(s.n)));
      y.push_back(std::log(s.pr_norm));
    }
    v.trend = slope_of(x, y);
  }
  if (v.samples.size() >= 3) {
    if (v.trend <= thresholds.localized_slope)
      v.classification = Localization::Localized;
    else if (v.trend >= thresholds.extended_slope)
      v.classification = Localization::Extended;
  }
  return v;
}

ScalingFamily::ScalingFamily(double gamma_n, std::vector<Index> n_list, const SolverOptions& opts,
                             Variant variant)
    : gamma_n_(gamma_n), sizes_(std::move(n_list)) {
  check_sizes(sizes_);
  if (!(gamma_n >= 0.0)) throw InvalidArgument("ScalingFamily: gamma*N must be >= 0");
  profiles_.reserve(sizes_.size());
  for (Index n : sizes_) profiles_.push_back(pr_profile(ChainSpec::with_gamma_n(n, gamma_n, variant), opts));
}

ScalingVerdict ScalingFamily::classify(double energy_target,
                                       const ClassifyThresholds& thresholds) const {
  std::vector<ScalingSample> samples;
  bool inside_any = false;
  for (std::size_t k = 0; k < sizes_.size(); ++k) {
    const auto& p = profiles_[k];
    inside_any |= energy_target >= p.front().energy && energy_target <= p.back().energy;
    auto it = std::lower_bound(p.begin(), p.end(), energy_target,
                               [](const StateRecord& r, double e) { return r.energy < e; });
    if (it == p.end()) {
      --it;
    } else if (it != p.begin() && energy_target - (it - 1)->energy <= it->energy - energy_target) {
      --it;
    }
    samples.push_back({sizes_[k], it->index, it->energy, it->pr_norm});
  }
  if (!inside_any) throw InvalidArgument("classify_state: energy target outside every spectrum");
  return classify_from_samples(energy_target, std::move(samples), thresholds);
}

ScalingVerdict classify_state(double energy_target, double gamma_n, std::span<const Index> n_list,
                              const SolverOptions& opts, const ClassifyThresholds& thresholds,
                              Variant variant) {
  check_sizes(n_list);
  std::vector<ScalingSample> samples;
  bool inside_any = false;
  for (Index n : n_list) {
    const auto op = build_full<double>(ChainSpec::with_gamma_n(n, gamma_n, variant));
    const Vectord values = eigenvalues(op, opts);
    inside_any |= energy_target >= values[0] && energy_target <= values[n - 1];
    const Index i = nearest_index(values, energy_target);
    const auto rec = state_records(op, values, i, i + 1, opts).front();
    samples.push_back({n, rec.index, rec.energy, rec.pr_norm});
  }
  if (!inside_any) throw InvalidArgument("classify_state: energy target outside every spectrum");
  return classify_from_samples(energy_target, std::move(samples), thresholds);
}

std::vector<double> default_energy_grid(double gamma_n) {
  std::vector<double> grid;
  const double top = 2.0 + 4.0 * gamma_n;
  for (int k = -9;; ++k) {
    const double e = static_cast<double>(k) / 5.0;
    if (e >= top - 1e-12) break;
    grid.push_back(e);
  }
  return grid;
}

MobilityEdge mobility_edge(const ScalingFamily& family, std::span<const double> grid,
                           const ClassifyThresholds& thresholds) {
  if (grid.empty()) throw InvalidArgument("mobility_edge: empty energy grid");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw InvalidArgument("mobility_edge: grid must be ascending");

  MobilityEdge out{};
  out.profile.reserve(grid.size());
  for (double e : grid) out.profile.push_back(family.classify(e, thresholds));

  const auto loc = std::find_if(out.profile.begin(), out.profile.end(), [](const ScalingVerdict& v) {
    return v.classification == Localization::Localized;
  });
  if (loc == out.profile.end()) throw Error("mobility_edge: no Localized grid energy found");
  out.localized_from = loc->energy_target;

  const auto ext = std::find_if(std::make_reverse_iterator(loc), out.profile.rend(),
                                [](const ScalingVerdict& v) {
                                  return v.classification == Localization::Extended;
                                });
  if (ext == out.profile.rend())
    throw Error("mobility_edge: no Extended grid energy below the first Localized one");
  out.extended_below = ext->energy_target;
  out.edge = 0.5 * (out.extended_below + out.localized_from);

  out.violations = std::count_if(loc, out.profile.end(), [](const ScalingVerdict& v) {
    return v.classification == Localization::Extended;
  });
  return out;
}

MobilityEdge mobility_edge(double gamma_n, std::span<const Index> n_list,
                           std::span<const double> grid, const SolverOptions& opts,
                           const ClassifyThresholds& thresholds) {
  const ScalingFamily family(gamma_n, {n_list.begin(), n_list.end()}, opts);
  return mobility_edge(family, grid, thresholds);
}

double localized_fraction(std::span<const double> eigenvalues, double edge) {
  if (eigenvalues.empty()) throw InvalidArgument("localized_fraction: empty spectrum");
  const auto above = std::count_if(eigenvalues.begin(), eigenvalues.end(), [&](double e) { return e > edge; });
  return static_cast<double>(above) / static_cast<double>(eigenvalues.size());
}

double localized_fraction(const ChainSpec& spec, const SolverOptions& opts, double edge) {
  const Vectord values = eigenvalues(build_full<double>(spec), opts);
  return localized_fraction(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())), edge);
}

FractionExtrapolation extrapolate_fraction(std::vector<std::pair<Index, double>> per_n) {
  if (per_n.size() < 2) throw InvalidArgument("extrapolate_fraction: need at least two sizes");
  std::vector<double> x, y;
  for (const auto& [n, f] : per_n) {
    x.push_back(1.0 / static_cast<double>(n));
    y.push_back(f);
  }
  const double slope = slope_of(x, y);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  const double limit = my - slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (limit + slope * x[i]);
    ss += r * r;
  }
  return {limit, slope, std::sqrt(ss / static_cast<double>(x.size())), std::move(per_n)};
}

FractionExtrapolation fraction_extrapolate(double gamma_n, std::span<const Index> n_list,
                                           const SolverOptions& opts, double edge) {
  check_sizes(n_list);
  if (n_list.size() < 3) throw InvalidArgument("fraction_extrapolate: need at least three sizes");
  std::vector<std::pair<Index, double>> per_n;
  for (Index n : n_list) per_n.emplace_back(n, localized_fraction(ChainSpec::with_gamma_n(n, gamma_n), opts, edge));
  return extrapolate_fraction(std::move(per_n));
}

BandReport band_bounds_check(std::span<const double> eigenvalues, const ChainSpec& spec) {
  if (eigenvalues.empty()) throw InvalidArgument("band_bounds_check: empty spectrum");
  const auto [mn, mx] = std::minmax_element(eigenvalues.begin(), eigenvalues.end());
  BandReport r{};
  r.min_energy = *mn;
  r.max_energy = *mx;
  r.lower_bound = -2.0;
  r.upper_bound = 2.0 + 4.0 * spec.gamma_n();
  r.allowance = 5.0 * spec.gamma() + 1e-9;
  r.lower_margin = r.min_energy - (r.lower_bound - r.allowance);
  r.upper_margin = (r.upper_bound + r.allowance) - r.max_energy;
  r.pass = r.lower_margin >= 0.0 && r.upper_margin >= 0.0;
  return r;
}

std::string_view to_string(RegimeLabel r) {
  switch (r) {
    case RegimeLabel::Bloch:
      return "Bloch";
    case RegimeLabel::Intermediate:
      return "Intermediate";
    case RegimeLabel::Localized:
      return "Localized";
  }
  return "Bloch";
}

RegimeLabel classify_regime(double gamma, Index n, const RegimeThresholds& thresholds) {
  if (!(gamma >= 0.0)) throw InvalidArgument("classify_regime: gamma must be >= 0");
  if (n < 1) throw InvalidArgument("classify_regime: N must be >= 1");
  const double gn = gamma * static_cast<double>(n);
  if (gn <= thresholds.bloch_max) return RegimeLabel::Bloch;
  if (gn <= thresholds.intermediate_max) return RegimeLabel::Intermediate;
  return RegimeLabel::Localized;
}

}  // namespace pdm

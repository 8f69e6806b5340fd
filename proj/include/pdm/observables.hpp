#pragma once

// Spectral observables of the chain: density-of-states histograms,
// participation ratios, finite-size scaling of the normalized participation
// ratio, the mobility edge, the fraction of levels above it, band-edge checks
// and gamma-regime labels.

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "pdm/eigensolve.hpp"
#include "pdm/error.hpp"
#include "pdm/hamiltonian.hpp"
#include "pdm/types.hpp"

namespace pdm {

struct DosHistogram {
  std::vector<double> edges;    // B + 1, ascending
  std::vector<double> density;  // B

  std::size_t bins() const { return density.size(); }
  /// Sum of density * bin width.
  double integral() const;
};

/// Histogram normalized by (total count * bin width). The default range is
/// [min, max] widened by one representable step on each side. Values on an
/// inner edge go to the right bin; values outside an explicit range are
/// dropped (but still count toward the normalization).
DosHistogram dos_histogram(std::span<const double> eigenvalues, int bins,
                           std::optional<std::pair<double, double>> range = std::nullopt);

/// Integrated absolute difference between the histogram and the bin
/// averages of a reference density given by its CDF, skipping
/// `skip_edge_bins` bins at each end.
double dos_l1_distance(const DosHistogram& hist, const std::function<double(double)>& cdf,
                       std::size_t skip_edge_bins = 0);

/// 1 / sum_j b_j^4 for a unit-norm vector (1 <= result <= N).
template <class Derived>
double participation_ratio(const Eigen::MatrixBase<Derived>& coeffs) {
  const double norm = static_cast<double>(coeffs.norm());
  if (!(std::abs(norm - 1.0) <= 1e-10))
    throw InvalidArgument("participation_ratio: coefficients must have unit norm");
  return 1.0 / static_cast<double>(coeffs.array().square().square().sum());
}

struct StateRecord {
  Index index;  // 1-based rank in the ascending spectrum
  double energy;
  double pr;
  double pr_norm;  // pr / N
};

/// Participation ratios of the eigenstates [first, last) of `op`, with
/// vectors produced batch by batch.
std::vector<StateRecord> state_records(const TridiagonalOperatord& op, const Vectord& eigenvalues,
                                       Index first, Index last, const SolverOptions& opts);

/// One record per eigenstate of the full operator, ascending in energy.
std::vector<StateRecord> pr_profile(const ChainSpec& spec, const SolverOptions& opts = {});

enum class Localization { Extended, Localized, Undetermined };

std::string_view to_string(Localization c);

/// Decision rule on the log-log slope of pr_norm against N.
struct ClassifyThresholds {
  double localized_slope = -0.06;  // slope <= this: Localized
  double extended_slope = -0.04;   // slope >= this: Extended
};

struct ScalingSample {
  Index n;
  Index index;
  double energy;
  double pr_norm;
};

struct ScalingVerdict {
  double energy_target;
  std::vector<ScalingSample> samples;
  Localization classification;
  double trend;  // NaN with fewer than two sizes
};

/// Spectra and participation ratios of the chain at fixed gamma*N over a
/// list of sizes, reused across energy targets.
class ScalingFamily {
 public:
  ScalingFamily(double gamma_n, std::vector<Index> n_list, const SolverOptions& opts = {},
                Variant variant = Variant::Canonical);

  double gamma_n() const { return gamma_n_; }
  const std::vector<Index>& sizes() const { return sizes_; }
  const std::vector<StateRecord>& profile(std::size_t k) const { return profiles_[k]; }

  ScalingVerdict classify(double energy_target, const ClassifyThresholds& thresholds = {}) const;

 private:
  double gamma_n_;
  std::vector<Index> sizes_;
  std::vector<std::vector<StateRecord>> profiles_;
};

/// Tracks the eigenstate nearest `energy_target` across sizes at fixed
/// gamma*N and classifies it by the trend of pr_norm. Fewer than three
/// sizes always yields Undetermined.
ScalingVerdict classify_state(double energy_target, double gamma_n, std::span<const Index> n_list,
                              const SolverOptions& opts = {},
                              const ClassifyThresholds& thresholds = {},
                              Variant variant = Variant::Canonical);

ScalingVerdict classify_from_samples(double energy_target, std::vector<ScalingSample> samples,
                                     const ClassifyThresholds& thresholds = {});

struct MobilityEdge {
  double edge;
  double extended_below;   // highest Extended grid energy below localized_from
  double localized_from;   // lowest Localized grid energy
  Index violations;        // Extended grid energies above localized_from
  std::vector<ScalingVerdict> profile;
};

/// Grid k/5 (step 0.2) from -1.8 up to, but excluding, 2 + 4 gamma N.
std::vector<double> default_energy_grid(double gamma_n);

MobilityEdge mobility_edge(const ScalingFamily& family, std::span<const double> grid,
                           const ClassifyThresholds& thresholds = {});

MobilityEdge mobility_edge(double gamma_n, std::span<const Index> n_list,
                           std::span<const double> grid, const SolverOptions& opts = {},
                           const ClassifyThresholds& thresholds = {});

/// Fraction of eigenvalues strictly above `edge`.
double localized_fraction(std::span<const double> eigenvalues, double edge = 2.0);
double localized_fraction(const ChainSpec& spec, const SolverOptions& opts = {}, double edge = 2.0);

struct FractionExtrapolation {
  double limit;  // intercept of the fit linear in 1/N
  double slope;  // coefficient of 1/N
  double rms_residual;
  std::vector<std::pair<Index, double>> per_n;
};

FractionExtrapolation extrapolate_fraction(std::vector<std::pair<Index, double>> per_n);

FractionExtrapolation fraction_extrapolate(double gamma_n, std::span<const Index> n_list,
                                           const SolverOptions& opts = {}, double edge = 2.0);

struct BandReport {
  double min_energy;
  double max_energy;
  double lower_bound;  // -2
  double upper_bound;  // 2 + 4 gamma N
  double allowance;    // 5 gamma + 1e-9
  double lower_margin; // min - (lower - allowance), >= 0 on pass
  double upper_margin; // (upper + allowance) - max, >= 0 on pass
  bool pass;
};

BandReport band_bounds_check(std::span<const double> eigenvalues, const ChainSpec& spec);

enum class RegimeLabel { Bloch, Intermediate, Localized };

std::string_view to_string(RegimeLabel r);

struct RegimeThresholds {
  double bloch_max = 0.01;        // gamma N <= this: Bloch
  double intermediate_max = 100;  // gamma N <= this: Intermediate
};

RegimeLabel classify_regime(double gamma, Index n, const RegimeThresholds& thresholds = {});

}  // namespace pdm

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "pdm/limits.hpp"
#include "pdm/observables.hpp"

using namespace pdm;

namespace {

const std::vector<Index> kFig2Sizes{500, 1000, 2000};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("dos_histogram") {
  const std::vector<double> two{-1.0, 1.0};
  const auto h = dos_histogram(two, 2, std::pair{-1.0, 1.0});
  CHECK(h.density == std::vector<double>{0.5, 0.5});

  // inner edge goes right
  const std::vector<double> mid{0.0};
  const auto hm = dos_histogram(mid, 2, std::pair{-1.0, 1.0});
  CHECK(hm.density[0] == 0.0);
  CHECK(hm.density[1] == 1.0);

  CHECK_THROWS_AS(dos_histogram(std::vector<double>{}, 3), InvalidArgument);
  CHECK_THROWS_AS(dos_histogram(two, 0), InvalidArgument);
  CHECK_THROWS_AS(dos_histogram(two, 2, std::pair{1.0, 1.0}), InvalidArgument);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 3.0);
  for (int bins : {1, 7, 100, 1000}) {
    std::vector<double> xs(5000);
    for (auto& x : xs) x = nd(rng);
    const auto hh = dos_histogram(xs, bins);
    CHECK(std::abs(hh.integral() - 1.0) <= 1e-12);
    CHECK(hh.edges.front() < *std::min_element(xs.begin(), xs.end()));
    CHECK(hh.edges.back() > *std::max_element(xs.begin(), xs.end()));
  }
}

TEST_CASE("dos_l1_distance against an exact reference") {
  // samples placed at the quantiles of the uniform density on [0, 1]
  std::vector<double> xs(1000);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = (i + 0.5) / xs.size();
  const auto h = dos_histogram(xs, 10, std::pair{0.0, 1.0});
  CHECK(dos_l1_distance(h, [](double e) { return std::clamp(e, 0.0, 1.0); }) <= 1e-12);
  CHECK(dos_l1_distance(h, [](double e) { return std::clamp(e * e, 0.0, 1.0); }) > 0.1);
}

TEST_CASE("participation_ratio") {
  Vectord delta = Vectord::Zero(10);
  delta[3] = 1;
  CHECK(participation_ratio(delta) == 1.0);

  const Index n = 64;
  const Vectord uniform = Vectord::Constant(n, 1 / std::sqrt(double(n)));
  CHECK(participation_ratio(uniform) == doctest::Approx(double(n)).epsilon(1e-12));

  CHECK_THROWS_AS(participation_ratio(Vectord::Constant(4, 1.0)), InvalidArgument);

  SUBCASE("Bloch states: direct summation before the closed form") {
    const Index big = 1000;
    for (Index j : {1, 3, 400, 999}) {
      const double direct = 1.0 / testing::bloch_fourth_moment_direct(j, big);
      CHECK(direct == doctest::Approx(2.0 * (big + 1) / 3.0).epsilon(1e-12));
      CHECK(participation_ratio(bloch_state(j, big)) == doctest::Approx(direct).epsilon(1e-10));
    }
  }

  SUBCASE("bounds and gauge invariance on random unit vectors") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 50; ++k) {
      Vectord v(37);
      for (auto& x : v) x = nd(rng);
      v.normalize();
      const double pr = participation_ratio(v);
      CHECK(pr >= 1.0);
      CHECK(pr <= 37.0);
      Vectord flipped = v;
      for (Index i = 1; i < v.size(); i += 2) flipped[i] = -flipped[i];
      CHECK(participation_ratio(flipped) == doctest::Approx(pr).epsilon(1e-14));
    }
  }
}

TEST_CASE("pr_profile") {
  SUBCASE("gamma = 0 gives the Bloch value for every state") {
    const Index n = 500;
    const auto recs = pr_profile(ChainSpec::fixed(n, 0.0));
    REQUIRE(recs.size() == std::size_t(n));
    const double expect = 2.0 * (n + 1) / (3.0 * n);
    for (const auto& r : recs) {
      CHECK(std::abs(r.pr_norm - expect) <= 1e-8);
      CHECK(r.pr_norm == doctest::Approx(r.pr / n));
    }
    for (std::size_t i = 1; i < recs.size(); ++i) CHECK(recs[i].energy > recs[i - 1].energy);
  }

  SUBCASE("gamma N = 4: states above the edge are less extended") {
    const Index n = 500;
    const auto recs = pr_profile(ChainSpec::with_gamma_n(n, 4.0));
    std::vector<double> below, above;
    for (const auto& r : recs) {
      CHECK(r.pr >= 1.0);
      CHECK(r.pr <= double(n));
      if (r.energy < 1.8) below.push_back(r.pr_norm);
      if (r.energy > 2.2) above.push_back(r.pr_norm);
    }
    CHECK(median(above) < median(below));
  }

  SUBCASE("single site") {
    const auto recs = pr_profile(ChainSpec::fixed(1, 0.4));
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].pr == 1.0);
    CHECK(recs[0].energy == doctest::Approx(0.8));
  }
}

TEST_CASE("classify_state") {
  const auto ext = classify_state(0.0, 1.0, kFig2Sizes);
  CHECK(ext.classification == Localization::Extended);
  REQUIRE(ext.samples.size() == 3);
  CHECK(ext.samples[0].n == 500);

  const auto loc = classify_state(3.0, 1.0, kFig2Sizes);
  CHECK(loc.classification == Localization::Localized);
  CHECK(loc.trend < 0.0);

  const auto bloch = classify_state(0.7, 0.0, kFig2Sizes);
  CHECK(bloch.classification == Localization::Extended);
  CHECK(std::abs(bloch.trend) <= 0.01);

  const std::vector<Index> one{500};
  const auto single = classify_state(0.0, 1.0, one);
  CHECK(single.classification == Localization::Undetermined);
  CHECK(std::isnan(single.trend));

  const std::vector<Index> unsorted{1000, 500, 2000};
  CHECK_THROWS_AS(classify_state(0.0, 1.0, unsorted), InvalidArgument);
  const std::vector<Index> small{20, 40, 80};
  CHECK_THROWS_AS(classify_state(100.0, 1.0, small), InvalidArgument);
}

TEST_CASE("ScalingFamily matches classify_state") {
  const ScalingFamily fam(1.0, kFig2Sizes);
  for (double e : {-1.0, 0.5, 2.6}) {
    const auto a = fam.classify(e);
    const auto b = classify_state(e, 1.0, kFig2Sizes);
    CHECK(a.classification == b.classification);
    CHECK(a.trend == b.trend);
  }
}

TEST_CASE("classification is stable under a tighter solver tolerance") {
  SolverOptions loose;
  loose.abs_tol = 1e-10;
  SolverOptions tight;
  tight.abs_tol = 1e-12;
  const ScalingFamily a(1.0, kFig2Sizes, loose);
  const ScalingFamily b(1.0, kFig2Sizes, tight);
  for (double e : default_energy_grid(1.0)) CHECK(a.classify(e).classification == b.classify(e).classification);
}

TEST_CASE("mobility_edge") {
  const auto grid = default_energy_grid(0.5);
  CHECK(grid.front() == -1.8);
  CHECK(std::find(grid.begin(), grid.end(), 1.8) != grid.end());
  CHECK(grid.back() < 4.0);

  const auto me = mobility_edge(0.5, kFig2Sizes, grid);
  CHECK(std::abs(me.edge - 2.0) <= 0.2);
  CHECK(me.violations == 0);
  CHECK(me.profile.size() == grid.size());

  const std::vector<Index> sizes{100, 200, 400};
  const auto g0 = default_energy_grid(0.0);
  CHECK_THROWS_AS(mobility_edge(0.0, sizes, g0), Error);
}

TEST_CASE("localized_fraction") {
  const Index n = 400;
  CHECK(localized_fraction(ChainSpec::fixed(n, 0.0)) == 0.0);
  const double f1 = localized_fraction(ChainSpec::with_gamma_n(n, 1.0));
  const double f4 = localized_fraction(ChainSpec::with_gamma_n(n, 4.0));
  CHECK(f4 > 0.0);
  CHECK(f4 < 1.0);
  CHECK(f4 > f1);

  const std::vector<double> vals{1.0, 2.0, 2.5, 3.0};
  CHECK(localized_fraction(vals) == 0.5);
}

TEST_CASE("fraction_extrapolate") {
  const std::vector<Index> sizes{200, 400, 800, 1600};
  const auto zero = fraction_extrapolate(0.0, sizes);
  CHECK(std::abs(zero.limit) <= 1e-15);

  const auto c = extrapolate_fraction({{100, 0.3}, {200, 0.3}, {400, 0.3}});
  CHECK(c.limit == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(std::abs(c.slope) <= 1e-12);

  const auto one = fraction_extrapolate(1.0, sizes);
  CHECK(one.limit > 0.0);
  CHECK(one.limit < 1.0);
  CHECK(one.per_n.size() == 4);

  const std::vector<Index> two{200, 400};
  CHECK_THROWS_AS(fraction_extrapolate(1.0, two), InvalidArgument);
}

TEST_CASE("band_bounds_check") {
  const Index n = 2000;
  {
    const auto spec = ChainSpec::with_gamma_n(n, 1.0);
    const Vectord v = eigenvalues(build_full(spec));
    const auto r = band_bounds_check({v.data(), std::size_t(n)}, spec);
    CHECK(r.pass);
    CHECK(r.lower_margin >= 0.0);
    CHECK(r.upper_margin >= 0.0);
  }
  {
    // gamma = 1/N^2: the band collapses onto the Bloch band as 2 + 4/N
    const auto spec = ChainSpec::scaled(n, 1.0, 2.0);
    const Vectord v = eigenvalues(build_full(spec));
    CHECK(v[0] >= -2.0 - 1e-3);
    CHECK(v[n - 1] <= 2.0 + 4.0 / n);
    CHECK(v[n - 1] == doctest::Approx(2.0017672).epsilon(1e-7));
    CHECK(band_bounds_check({v.data(), std::size_t(n)}, spec).pass);
    double worst = 0;
    for (Index j = 1; j <= n; ++j) worst = std::max(worst, std::abs(v[j - 1] - bloch_energy(j, n)));
    CHECK(worst <= 1e-2);
  }
  {
    const Index m = 300;
    const auto spec = ChainSpec::fixed(m, 0.0);
    const Vectord v = eigenvalues(build_full(spec));
    const double edge = 2 * std::cos(std::numbers::pi / (m + 1));
    CHECK(v[0] == doctest::Approx(-edge).epsilon(1e-12));
    CHECK(v[m - 1] == doctest::Approx(edge).epsilon(1e-12));
    CHECK(band_bounds_check({v.data(), std::size_t(m)}, spec).pass);
  }
}

TEST_CASE("classify_regime") {
  const Index n = 1000;
  CHECK(classify_regime(1.0 / (double(n) * n), n) == RegimeLabel::Bloch);
  CHECK(classify_regime(1.0 / n, n) == RegimeLabel::Intermediate);
  CHECK(classify_regime(1.0, n) == RegimeLabel::Localized);
  CHECK(classify_regime(0.0, n) == RegimeLabel::Bloch);
  CHECK(classify_regime(0.5, n, {.bloch_max = 0.01, .intermediate_max = 1000}) == RegimeLabel::Intermediate);
  CHECK_THROWS_AS(classify_regime(-1.0, n), InvalidArgument);
  CHECK(to_string(RegimeLabel::Intermediate) == "Intermediate");
}

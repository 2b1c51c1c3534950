#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sigid/error.hpp"
#include "sigid/nfspem.hpp"

using namespace sigid;
using namespace sigid::nfspem;

TEST_SUITE("nfspem") {

TEST_CASE("segment_levels hand example") {
  const std::vector<double> y{0, 0, 0, 0, 10};
  const auto h = segment_levels(y, 1.0);
  CHECK(h.sigma == doctest::Approx(4.0));
  CHECK(h.level_count == 3);
  CHECK(h.level_width == doctest::Approx(10.0 / 3.0));
  CHECK(h.counts == std::vector<std::size_t>{4, 0, 1});
}

TEST_CASE("segment_levels errors") {
  CHECK_THROWS_AS(segment_levels(std::vector<double>{3, 3, 3, 3}, 1.0), DegenerateSpectrumError);
  CHECK_THROWS_AS(segment_levels(std::vector<double>{3}, 1.0), InsufficientDataError);
  CHECK_THROWS_AS(segment_levels(std::vector<double>{1, 2}, 0.0), ParameterError);
  CHECK_THROWS_AS(segment_levels(std::vector<double>{1, 2}, 1.5), ParameterError);
}

TEST_CASE("boundary samples go to the lower level, maximum to level L") {
  // k sigma slightly above 1 gives L = ceil(4 / 1.001) = 4, width 1.
  const std::vector<double> y{0, 1, 2, 3, 4};
  const double k = 1.001 / oracle::population_sigma(y);
  const auto h = segment_levels(y, k);
  REQUIRE(h.level_count == 4);
  CHECK(level_of(h, 0.0) == 1);
  CHECK(level_of(h, 1.0) == 1);
  CHECK(level_of(h, 2.0) == 2);
  CHECK(level_of(h, 3.0) == 3);
  CHECK(level_of(h, 4.0) == 4);
  CHECK(h.counts == std::vector<std::size_t>{2, 1, 1, 1});
}

TEST_CASE("cusum worked examples") {
  LevelHistogram h;
  h.level_count = 5;
  h.counts = {50, 40, 5, 3, 2};
  h.y_min = 0.0;
  h.y_max = 5.0;
  h.level_width = 1.0;
  auto e = cusum_change_point(h);
  CHECK(e.mean_count == doctest::Approx(20.0));
  CHECK(e.cusum == std::vector<double>{30, 50, 35, 18, 0});
  CHECK(e.change_level == 2);
  CHECK(e.threshold_db == doctest::Approx(2.0));
  CHECK_FALSE(e.low_confidence);

  const auto h2 = segment_levels(std::vector<double>{0, 0, 0, 0, 10}, 1.0);
  e = cusum_change_point(h2);
  REQUIRE(e.cusum.size() == 3);
  CHECK(e.cusum[0] == doctest::Approx(7.0 / 3.0));
  CHECK(e.cusum[1] == doctest::Approx(2.0 / 3.0));
  CHECK(e.cusum[2] == 0.0);
  CHECK(e.change_level == 1);
  const auto comps = extract_components(std::vector<double>{0, 0, 0, 0, 10}, {0, 1}, e, 1, 0);
  REQUIRE(comps.size() == 1);
  CHECK(comps[0].start_index == 4);
}

TEST_CASE("equal counts tie to level 1 and flag low confidence") {
  LevelHistogram h;
  h.level_count = 4;
  h.counts = {5, 5, 5, 5};
  h.y_min = 0.0;
  h.y_max = 4.0;
  h.level_width = 1.0;
  const auto e = cusum_change_point(h);
  CHECK(e.change_level == 1);
  CHECK(e.low_confidence);
  for (double s : e.cusum) CHECK(s == 0.0);
}

TEST_CASE("randomized oracle agreement") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(2, 64);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> kd(0.05, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> y(static_cast<std::size_t>(len(rng)));
    for (auto& v : y) v = g(rng) * 5.0 + (g(rng) > 1.0 ? 15.0 : 0.0);
    const double k = kd(rng);
    LevelHistogram h;
    try {
      h = segment_levels(y, k);
    } catch (const DegenerateSpectrumError&) {
      continue;
    }
    const double sigma = oracle::population_sigma(y);
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    CHECK(h.level_count ==
          std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((*hi - *lo) / (k * sigma)))));
    CHECK(h.level_width <= k * sigma * (1 + 1e-12));
    CHECK(h.total() == y.size());
    std::vector<std::size_t> counts(h.level_count, 0);
    for (double v : y) ++counts[oracle::level_by_scan(v, *lo, *hi, h.level_count) - 1];
    CHECK(counts == h.counts);
    const auto e = cusum_change_point(h);
    const auto o = oracle::cusum(h.counts);
    CHECK(e.change_level == o.change_level);
    CHECK(std::abs(e.cusum.back()) < 1e-9);
  }
}

TEST_CASE("halving k roughly doubles the level count") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> y(200);
    for (auto& v : y) v = g(rng);
    for (double k : {1.0, 0.5, 0.3}) {
      const auto a = segment_levels(y, k).level_count;
      const auto b = segment_levels(y, k / 2).level_count;
      CHECK(b >= 2 * a - 1);
    }
  }
}

TEST_CASE("affine map keeps labels") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> y(128);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = g(rng) + (i > 40 && i < 70 ? 12.0 : 0.0);
    const double a = 0.37 + trial * 0.2;
    const double b = -20.0 + trial;
    std::vector<double> z(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) z[i] = a * y[i] + b;
    const auto dy = nfspem_detect(y, {0, 1}, {1.0, 1, 0});
    const auto dz = nfspem_detect(z, {0, 1}, {1.0, 1, 0});
    CHECK(dy.histogram.level_count == dz.histogram.level_count);
    CHECK(dy.histogram.counts == dz.histogram.counts);
    CHECK(dy.estimate.change_level == dz.estimate.change_level);
    CHECK(dz.estimate.threshold_db == doctest::Approx(a * dy.estimate.threshold_db + b));
    for (std::size_t i = 0; i < y.size(); ++i)
      CHECK((y[i] > dy.estimate.threshold_db) == (z[i] > dz.estimate.threshold_db));
  }
}

TEST_CASE("components: flat rectangle, merging and width filter") {
  std::vector<double> y(1024, 0.0);
  for (std::size_t i = 100; i < 200; ++i) y[i] = 20.0;
  const Axis axis{-5.12e6, 10e3};
  const auto d = nfspem_detect(y, axis, {});
  REQUIRE(d.components.size() == 1);
  const auto& c = d.components[0];
  CHECK(c.start_index == 100);
  CHECK(c.end_index == 199);
  CHECK(c.width == doctest::Approx(1e6));
  CHECK(c.center == doctest::Approx(axis.at(149.5)));
  CHECK(c.peak_value_db == 20.0);

  NoiseFloorEstimate e;
  e.threshold_db = 0.5;
  std::vector<double> z(30, 0.0);
  for (std::size_t i : {5, 6, 7, 10, 11, 12, 20}) z[i] = 1.0;
  auto comps = extract_components(z, {0, 1}, e, 1, 3);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].start_index == 5);
  CHECK(comps[0].end_index == 12);
  comps = extract_components(z, {0, 1}, e, 2, 0);
  REQUIRE(comps.size() == 2);  // the single bin at 20 is dropped
  CHECK(comps[1].end_index == 12);
  CHECK(extract_components(std::vector<double>(10, 0.0), {0, 1}, e, 1, 0).empty());
}

TEST_CASE("power centroid weights linear power") {
  NoiseFloorEstimate e;
  e.threshold_db = 0.0;
  const std::vector<double> y{-10, 10, 20, -10};
  const auto comps = extract_components(y, {0, 1}, e, 1, 0);
  REQUIRE(comps.size() == 1);
  CHECK(comps[0].center == doctest::Approx((10.0 * 1 + 100.0 * 2) / 110.0));
  CHECK(comps[0].mean_excess_db == doctest::Approx(15.0));
}

TEST_CASE("threshold within range on noise") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 0.5);
  std::vector<double> y(1024);
  for (auto& v : y) v = g(rng);
  const auto d = nfspem_detect(y, {0, 1}, {});
  CHECK(d.estimate.threshold_db >= d.histogram.y_min);
  CHECK(d.estimate.threshold_db <= d.histogram.y_max);
  for (std::size_t i = 1; i < d.components.size(); ++i)
    CHECK(d.components[i].start_index > d.components[i - 1].end_index);
}

}  // TEST_SUITE

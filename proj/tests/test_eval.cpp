#include <doctest.h>

#include <sstream>

#include "sigid/error.hpp"
#include "sigid/eval.hpp"

using namespace sigid;
using namespace sigid::eval;

namespace {

GridOptions small_grid(std::size_t workers = 1) {
  GridOptions g;
  g.fft_size = 256;
  g.trial.segments = 32;
  g.workers = workers;
  return g;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("trial scenarios hit the requested occupancy") {
  for (double occ : {0.0, 0.1, 0.25, 0.6, 0.75, 0.9, 1.0}) {
    const auto spec = trial_scenario(10.0, occ, 1024, 1);
    const auto sc = wavegen::compose_scenario(spec);
    CAPTURE(occ);
    CHECK(sc.truth.occupancy_mask.size() == 1024);
    CHECK(sc.truth.occupancy_fraction() == doctest::Approx(std::round(occ * 1024) / 1024.0));
    CHECK(sc.recording.size() == 512 * 1024);
    if (occ > 0.0 && occ < 1.0) CHECK(spec.channels.size() == 4);
  }
  CHECK(trial_scenario(10.0, 0.0, 1024, 1).channels.empty());
  CHECK(trial_scenario(10.0, 1.0, 1024, 1).channels.size() == 1);
  CHECK_THROWS_AS(trial_scenario(10.0, 1.5, 1024, 1), ParameterError);
}

TEST_CASE("high SNR trials are nearly perfect") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto r = run_trial(20.0, 0.25, 1024, seed);
    CHECK(r.accuracy >= 0.99);
    CHECK_FALSE(r.degenerate);
  }
  CHECK(run_trial(10.0, 1.0, 1024, 1).degenerate);
  const auto a = run_trial(0.0, 0.6, 256, 9, small_grid().trial);
  const auto b = run_trial(0.0, 0.6, 256, 9, small_grid().trial);
  CHECK(a.accuracy == b.accuracy);
}

TEST_CASE("bootstrap interval") {
  const auto flat = bootstrap_ci(std::vector<double>(50, 0.7), 1000, 1);
  CHECK(flat.first == doctest::Approx(0.7));
  CHECK(flat.second == doctest::Approx(0.7));

  std::vector<double> v;
  for (int i = 0; i < 400; ++i) v.push_back(i % 2);
  const auto [lo, hi] = bootstrap_ci(v, 4000, 3);
  CHECK(lo < 0.5);
  CHECK(hi > 0.5);
  // normal-theory width 2 * 1.96 * 0.5 / sqrt(400)
  CHECK(hi - lo == doctest::Approx(0.098).epsilon(0.15));
  CHECK(bootstrap_ci(v, 4000, 3) == std::make_pair(lo, hi));
  const auto [lo90, hi90] = bootstrap_ci(v, 4000, 3, 0.90);
  CHECK(hi90 - lo90 < hi - lo);

  CHECK_THROWS_AS(bootstrap_ci({}, 1000, 1), EmptyInputError);
  CHECK_THROWS_AS(bootstrap_ci(v, 0, 1), ParameterError);
  CHECK_THROWS_AS(bootstrap_ci(v, 100, 1, 1.0), ParameterError);
}

TEST_CASE("grid is identical for any worker count") {
  const auto one = confidence_grid({0.0, 10.0}, {0.25, 0.75}, 100, 1000, 5, small_grid(1));
  const auto three = confidence_grid({0.0, 10.0}, {0.25, 0.75}, 100, 1000, 5, small_grid(3));
  REQUIRE(one.size() == 4);
  REQUIRE(three.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(one[i].snr_db == three[i].snr_db);
    CHECK(one[i].occupancy == three[i].occupancy);
    CHECK(one[i].confidence_mean == three[i].confidence_mean);
    CHECK(one[i].ci_low == three[i].ci_low);
    CHECK(one[i].ci_high == three[i].ci_high);
    CHECK(one[i].ci_low <= one[i].confidence_mean);
    CHECK(one[i].confidence_mean <= one[i].ci_high);
    CHECK(one[i].trials == 100);
  }
}

TEST_CASE("different seeds agree within their intervals") {
  const auto a = confidence_grid({2.0}, {0.6}, 100, 1000, 11, small_grid());
  const auto b = confidence_grid({2.0}, {0.6}, 100, 1000, 12, small_grid());
  const double lo = std::min(a[0].ci_low, b[0].ci_low);
  const double hi = std::max(a[0].ci_high, b[0].ci_high);
  CHECK(a[0].confidence_mean >= lo);
  CHECK(a[0].confidence_mean <= hi);
  CHECK(b[0].confidence_mean >= lo);
  CHECK(b[0].confidence_mean <= hi);
  CHECK(a[0].confidence_mean != b[0].confidence_mean);
}

TEST_CASE("grid preconditions") {
  CHECK_THROWS_AS(confidence_grid({0.0}, {0.25}, 99, 1000, 1, small_grid()), ParameterError);
  CHECK_THROWS_AS(confidence_grid({0.0}, {0.25}, 100, 999, 1, small_grid()), ParameterError);
  CHECK_THROWS_AS(confidence_grid({}, {0.25}, 100, 1000, 1, small_grid()), ParameterError);
  CHECK_THROWS_AS(confidence_grid({0.0}, {1.25}, 100, 1000, 1, small_grid()), ParameterError);
}

TEST_CASE("csv layout") {
  ConfidenceCell c;
  c.snr_db = -4;
  c.occupancy = 0.25;
  c.trials = 300;
  c.confidence_mean = 0.5;
  c.ci_low = 0.123456789;
  c.ci_high = 1.0;
  std::ostringstream out;
  write_csv(out, {c, c});
  CHECK(out.str() ==
        "snr_db,occupancy,trials,confidence_mean,ci_low,ci_high\n"
        "-4.000000,0.250000,300,0.500000,0.123457,1.000000\n"
        "-4.000000,0.250000,300,0.500000,0.123457,1.000000\n");
}

}  // TEST_SUITE

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "swarmguide/metrics.hpp"

namespace sg = swarmguide;

namespace {

constexpr double kT = 1.0 / 60;

std::vector<sg::Vec3> straight_line() {
  std::vector<sg::Vec3> c;
  for (int k = 0; k <= 1200; ++k) c.push_back({0.1 * k * kT, 0.5, 1.0});
  return c;
}

std::vector<sg::Vec3> circle(double radius, double omega) {
  const int n = static_cast<int>(std::lround(2 * M_PI / omega / kT));
  std::vector<sg::Vec3> c;
  for (int k = 0; k <= n; ++k) {
    const double a = omega * k * kT;
    c.push_back({radius * std::cos(a), radius * std::sin(a), 1.0});
  }
  return c;
}

// Each event starts from the full error; it then decays to zero until the next event, or stays put.
std::vector<sg::ReactionSample> reaction_fixture(std::span<const long> starts, const std::vector<bool>& corrects,
                                                 long length) {
  std::vector<sg::ReactionSample> s;
  for (long tick = 0; tick < length; ++tick) s.push_back({tick, 0.05, 0.2});
  for (std::size_t e = 0; e < starts.size(); ++e) {
    const long end = e + 1 < starts.size() ? starts[e + 1] : length;
    for (long tick = starts[e]; tick < end; ++tick) {
      const double decay = corrects[e] ? std::exp(-static_cast<double>(tick - starts[e]) * kT / 0.3) : 1.0;
      s[static_cast<std::size_t>(tick)].area_error = 0.05 * decay;
      s[static_cast<std::size_t>(tick)].displacement = 0.2 * decay;
    }
  }
  return s;
}

}  // namespace

TEST(RunMetrics, StraightLine) {
  const auto c = straight_line();
  const std::vector<double> area(c.size(), 0.1);
  const auto m = sg::compute_run_metrics(c, area, 0.1, kT);
  EXPECT_NEAR(m.path_length, 2.0, 1e-9);
  EXPECT_NEAR(m.mean_velocity, 0.1, 1e-9);
  EXPECT_LE(m.mean_acceleration, 1e-9);
  EXPECT_LE(m.mean_jerk, 1e-9);
  EXPECT_EQ(m.area_error_mean, 0.0);
  EXPECT_EQ(m.area_error_std, 0.0);
  EXPECT_EQ(m.area_error_max, 0.0);
  EXPECT_EQ(m.smoothing_window, 5u);
  EXPECT_EQ(m.samples, c.size());
}

TEST(RunMetrics, CircleWithinOnePercent) {
  const double omega = 0.2;
  const auto c = circle(1.0, omega);
  const std::vector<double> area(c.size(), 0.0);
  const auto m = sg::compute_run_metrics(c, area, 0.0, kT);
  EXPECT_NEAR(m.path_length, 2 * M_PI, 0.01 * 2 * M_PI);
  EXPECT_NEAR(m.mean_velocity, omega, 0.01 * omega);
  EXPECT_NEAR(m.mean_acceleration, omega * omega, 0.01 * omega * omega);
  EXPECT_NEAR(m.mean_jerk, omega * omega * omega, 0.01 * omega * omega * omega);
}

TEST(RunMetrics, AreaErrorStatistics) {
  const auto c = straight_line();
  std::vector<double> area(c.size(), 0.1);
  area[0] = 0.13;
  area[1] = 0.07;
  const auto m = sg::compute_run_metrics(c, area, 0.1, kT);
  const double n = static_cast<double>(c.size());
  const double mean = 0.06 / n;
  EXPECT_NEAR(m.area_error_mean, mean, 1e-15);
  EXPECT_NEAR(m.area_error_max, 0.03, 1e-15);
  const double var = (2 * 0.03 * 0.03) / n - mean * mean;
  EXPECT_NEAR(m.area_error_std, std::sqrt(var), 1e-12);
}

TEST(RunMetrics, RejectsShortTraces) {
  const std::vector<sg::Vec3> c{{0, 0, 0}, {1, 0, 0}};
  const std::vector<double> a{0, 0};
  EXPECT_THROW((void)sg::compute_run_metrics(c, a, 0.0, kT), std::invalid_argument);
}

TEST(RunMetrics, ShortTraceFallsBackToRawDifferences) {
  const std::vector<sg::Vec3> c{{0, 0, 0}, {0.1, 0, 0}, {0.2, 0, 0}, {0.3, 0, 0}};
  const std::vector<double> a(4, 0.0);
  const auto m = sg::compute_run_metrics(c, a, 0.0, 0.5);
  EXPECT_EQ(m.smoothing_window, 1u);
  EXPECT_NEAR(m.mean_velocity, 0.2, 1e-12);
}

TEST(RunMetrics, TimeReversalKeepsPathAndSpeed) {
  const auto failure = oracle::for_all<std::vector<sg::Vec3>>(
      17, 50,
      [](oracle::Gen& g) {
        std::vector<sg::Vec3> c{{0, 0, 1}};
        const int n = g.integer(8, 400);
        for (int k = 1; k < n; ++k) {
          c.push_back(c.back() + sg::Vec3{g.uniform(-0.02, 0.02), g.uniform(-0.02, 0.02), 0.0});
        }
        return c;
      },
      [](const std::vector<sg::Vec3>& c) -> std::string {
        std::vector<sg::Vec3> r(c.rbegin(), c.rend());
        const std::vector<double> a(c.size(), 0.0);
        const auto f = sg::compute_run_metrics(c, a, 0.0, kT);
        const auto b = sg::compute_run_metrics(r, a, 0.0, kT);
        if (std::abs(f.path_length - b.path_length) > 1e-12) return "path length changed";
        if (std::abs(f.mean_velocity - b.mean_velocity) > 1e-12) return "mean speed changed";
        return {};
      });
  EXPECT_EQ(failure, "");
}

TEST(RunMetrics, PureFunction) {
  const auto c = circle(0.7, 0.5);
  const std::vector<double> a(c.size(), 0.2);
  const auto x = sg::to_json(sg::compute_run_metrics(c, a, 0.1, kT));
  const auto y = sg::to_json(sg::compute_run_metrics(c, a, 0.1, kT));
  EXPECT_EQ(x, y);
  for (const char* key : {"centroid_path_length_m", "mean_centroid_velocity_mps", "mean_centroid_acceleration_mps2",
                          "mean_centroid_jerk_mps3", "area_error_mean_m2", "area_error_std_m2", "area_error_max_m2"}) {
    EXPECT_TRUE(x.contains(key)) << key;
  }
}

TEST(MovingAverage, ValidMode) {
  const std::vector<sg::Vec3> v{{1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {4, 0, 0}, {5, 0, 0}, {6, 0, 0}};
  const auto m = sg::moving_average(v, 5);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_DOUBLE_EQ(m[0].x, 3.0);
  EXPECT_DOUBLE_EQ(m[1].x, 4.0);
}

TEST(ReactionCorrectness, AllCorrected) {
  const std::vector<long> starts{60, 400, 800};
  const std::vector<bool> ok{true, true, true};
  const auto samples = reaction_fixture(starts, ok, 1200);
  const auto curve = sg::reaction_correctness(samples, starts, kT);
  ASSERT_EQ(curve.size(), 33u);
  for (const auto& p : curve) {
    EXPECT_EQ(p.fraction, 1.0) << p.time_ms;
    EXPECT_EQ(p.events, 3u);
  }
  EXPECT_EQ(curve.front().time_ms, 100.0);
  EXPECT_EQ(curve.back().time_ms, 3300.0);
}

TEST(ReactionCorrectness, NothingChanges) {
  const std::vector<long> starts{60, 400, 800};
  const std::vector<bool> ok{false, false, false};
  const auto curve = sg::reaction_correctness(reaction_fixture(starts, ok, 1200), starts, kT);
  for (const auto& p : curve) EXPECT_EQ(p.fraction, 0.0) << p.time_ms;
}

TEST(ReactionCorrectness, HalfCorrected) {
  const std::vector<long> starts{60, 300, 540, 780};
  const std::vector<bool> ok{true, false, true, false};
  const auto curve = sg::reaction_correctness(reaction_fixture(starts, ok, 1200), starts, kT);
  for (const auto& p : curve) EXPECT_EQ(p.fraction, 0.5) << p.time_ms;
}

TEST(ReactionCorrectness, StepsAfterDelayedCorrection) {
  // Half the events are corrected only from one second after the start.
  const std::vector<long> starts{60, 300, 540, 780};
  std::vector<sg::ReactionSample> s;
  for (long tick = 0; tick < 1200; ++tick) s.push_back({tick, 0.05, 0.2});
  for (std::size_t e = 0; e < starts.size(); ++e) {
    const long from = starts[e] + (e % 2 == 0 ? 1 : 60);
    for (long tick = from; tick < starts[e] + 240 && tick < 1200; ++tick) {
      s[static_cast<std::size_t>(tick)].area_error = 0.01;
      s[static_cast<std::size_t>(tick)].displacement = 0.05;
    }
  }
  const auto curve = sg::reaction_correctness(s, starts, kT, 3300, 100);
  for (const auto& p : curve) EXPECT_EQ(p.fraction, p.time_ms < 1000 ? 0.5 : 1.0) << p.time_ms;
}

TEST(ReactionCorrectness, ZeroEventsIsEmpty) {
  const std::vector<sg::ReactionSample> s{{0, 0.1, 0.1}};
  EXPECT_TRUE(sg::reaction_correctness(s, {}, kT).empty());
}

TEST(ReactionCorrectness, EventsNearTheEndAreCountedPerBin) {
  const std::vector<long> starts{60, 1150};
  const std::vector<bool> ok{true, true};
  const auto curve = sg::reaction_correctness(reaction_fixture(starts, ok, 1200), starts, kT);
  EXPECT_EQ(curve[0].events, 2u);
  EXPECT_EQ(curve.back().events, 1u);
  for (const auto& p : curve) EXPECT_EQ(p.fraction, 1.0);
}

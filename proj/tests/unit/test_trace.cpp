#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "swarmguide/errors.hpp"
#include "swarmguide/trace.hpp"

namespace sg = swarmguide;

namespace {

sg::TraceLog tiny_log() {
  sg::TraceLog log;
  log.header = {{"format", sg::kTraceFormat}, {"sample_time", 0.25}, {"default_area", 0.5}};
  log.drone_ids = {3, 7};
  log.link_count = 1;
  for (long k = 1; k <= 3; ++k) {
    sg::TickRecord r;
    r.tick = k;
    r.t = 0.25 * static_cast<double>(k);
    r.hand = {0.1 * k, -0.2, 1.0};
    r.hand_velocity = {0.4, 0.0, 0.0};
    r.goals = {{1.0 / 3, 0.0, 1.0}, {-0.5, 1e-17, 1.0}};
    r.positions = {{0.3, 0.1, 1.0}, {-0.5, 0.0, 1.0 + 1e-12}};
    r.corrections = {{-0.125, 0.0, 0.0}};
    r.area = 0.0625;
    if (k > 1) r.com_displacement = -0.01 * k;
    r.label = k == 3 ? sg::FormationLabel::Extended : sg::FormationLabel::Regular;
    if (k == 3) r.pattern = sg::PatternId::EL;
    log.rows.push_back(r);
  }
  log.events.push_back({3, 0.75, sg::EventKind::PatternStart, {{"id", "EL"}}});
  log.events.push_back({3, 0.75, sg::EventKind::FormationChange, {{"from", "regular"}, {"to", "extended"}}});
  return log;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("swarmguide-trace-" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(TraceColumns, FrozenOrder) {
  const std::vector<int> ids{1, 2};
  const std::vector<std::string> expected{
      "tick",    "t",     "hand_x", "hand_y", "hand_z", "hand_vx", "hand_vy", "hand_vz", "d1_gx", "d1_gy",
      "d1_gz",   "d1_x",  "d1_y",   "d1_z",   "d2_gx",  "d2_gy",   "d2_gz",   "d2_x",    "d2_y",  "d2_z",
      "l0_cx",   "l0_cy", "l0_cz",  "area",   "com_disp", "label", "pattern"};
  EXPECT_EQ(sg::trace_columns(ids, 1), expected);
}

TEST(TraceCsv, RoundTripIsExact) {
  const auto log = tiny_log();
  std::stringstream csv;
  sg::write_trace_csv(log, csv);
  const auto back = sg::read_trace_csv(csv);
  EXPECT_EQ(back.rows, log.rows);
  EXPECT_EQ(back.drone_ids, log.drone_ids);
  EXPECT_EQ(back.link_count, 1u);
  EXPECT_EQ(back.header, log.header);
  EXPECT_EQ(back.sample_time(), 0.25);

  std::stringstream again;
  sg::write_trace_csv(back, again);
  EXPECT_EQ(again.str(), csv.str());
}

TEST(TraceCsv, RowText) {
  std::stringstream csv;
  sg::write_trace_csv(tiny_log(), csv);
  std::string header, columns, first;
  std::getline(csv, header);
  std::getline(csv, columns);
  std::getline(csv, first);
  EXPECT_EQ(header.rfind("# {", 0), 0u);
  EXPECT_EQ(columns.rfind("tick,t,hand_x", 0), 0u);
  EXPECT_EQ(first,
            "1,0.25,0.1,-0.2,1,0.4,0,0,0.3333333333333333,0,1,0.3,0.1,1,-0.5,1e-17,1,-0.5,0,1.000000000001,"
            "-0.125,0,0,0.0625,,regular,-");
}

TEST(TraceDir, WriteReadWithEvents) {
  const auto dir = temp_dir("dir");
  const auto log = tiny_log();
  sg::write_trace(log, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "trace.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "events.jsonl"));
  const auto back = sg::read_trace(dir);
  EXPECT_EQ(back.rows, log.rows);
  EXPECT_EQ(back.events, log.events);
  EXPECT_EQ(sg::read_trace(dir / "trace.csv").events, log.events);
}

TEST(TraceCsv, RejectsGarbage) {
  std::stringstream bad("not a trace\n");
  EXPECT_THROW((void)sg::read_trace_csv(bad), sg::TraceFormatError);
  std::stringstream truncated;
  sg::write_trace_csv(tiny_log(), truncated);
  std::string text = truncated.str();
  text += "4,1.0,0.1\n";
  std::stringstream short_row(text);
  EXPECT_THROW((void)sg::read_trace_csv(short_row), sg::TraceFormatError);
}

TEST(FormatNumber, ShortestRoundTrip) {
  oracle::Gen g(42);
  for (int i = 0; i < 5000; ++i) {
    const double v = g.uniform(-1e3, 1e3) * std::pow(10.0, g.integer(-20, 20));
    EXPECT_EQ(std::stod(sg::format_number(v)), v);
  }
  EXPECT_EQ(sg::format_number(0.1), "0.1");
  EXPECT_EQ(sg::format_number(NAN), "nan");
}

TEST(HandTrace, EmptyTrace) {
  std::stringstream in("t,x,y,z\n");
  const auto h = sg::read_hand_trace(in);
  EXPECT_TRUE(h.empty());
  EXPECT_FALSE(h.at(1.0).has_value());
}

TEST(HandTrace, RejectsNonMonotonicTimestamps) {
  std::stringstream dup("0,0,0,1\n0.1,0,0,1\n0.1,1,0,1\n");
  EXPECT_THROW((void)sg::read_hand_trace(dup), sg::TraceFormatError);
  std::stringstream back("0,0,0,1\n0.2,0,0,1\n0.1,1,0,1\n");
  EXPECT_THROW((void)sg::read_hand_trace(back), sg::TraceFormatError);
  std::stringstream nan("0,0,0,1\n0.1,nan,0,1\n");
  EXPECT_THROW((void)sg::read_hand_trace(nan), sg::TraceFormatError);
}

TEST(HandTrace, InterpolatesLinearMotionExactly) {
  // 30 Hz samples of x = 0.6 t replayed on a 60 Hz grid.
  std::vector<sg::HandSample> samples;
  for (int k = 0; k <= 90; ++k) samples.push_back({k / 30.0, {0.6 * (k / 30.0), 0.0, 1.0}});
  const sg::HandTrace h(samples);
  for (int k = 0; k <= 180; ++k) {
    const double t = k / 60.0;
    ASSERT_NEAR(h.at(t)->x, 0.6 * t, 1e-15) << k;
  }
  EXPECT_EQ(*h.at(-1.0), samples.front().position);
  EXPECT_EQ(*h.at(99.0), samples.back().position);
  EXPECT_EQ(*h.at(samples[10].t), samples[10].position);
}

TEST(HandTrace, ShippedFixtureUpsamples) {
  const auto h = sg::read_hand_trace(fixtures::fixture("straight-hand.csv"));
  ASSERT_GT(h.size(), 10u);
  const auto& s = h.samples();
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const double mid = 0.5 * (s[k].t + s[k + 1].t);
    const sg::Vec3 expected = (s[k].position + s[k + 1].position) * 0.5;
    ASSERT_NEAR(h.at(mid)->x, expected.x, 1e-12);
    ASSERT_NEAR(h.at(mid)->y, expected.y, 1e-12);
  }
}

TEST(HandTrace, WriteReadIsIdentityOnGridAlignedFixture) {
  const auto path = fixtures::fixture("straight-hand.csv");
  std::ifstream in(path);
  const std::string original((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto h = sg::read_hand_trace(path);
  std::stringstream out;
  sg::write_hand_trace(h, out);
  EXPECT_EQ(out.str(), original);
}

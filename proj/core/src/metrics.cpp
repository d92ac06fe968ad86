#include "swarmguide/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace swarmguide {

std::vector<Vec3> moving_average(std::span<const Vec3> values, std::size_t window) {
  std::vector<Vec3> out;
  if (window == 0 || values.size() < window) return out;
  out.reserve(values.size() - window + 1);
  for (std::size_t i = 0; i + window <= values.size(); ++i) {
    Vec3 sum;
    for (std::size_t k = 0; k < window; ++k) sum += values[i + k];
    out.push_back(sum * (1.0 / static_cast<double>(window)));
  }
  return out;
}

namespace {

std::vector<Vec3> differences(std::span<const Vec3> values, double sample_time) {
  std::vector<Vec3> out;
  for (std::size_t i = 1; i < values.size(); ++i) out.push_back((values[i] - values[i - 1]) * (1.0 / sample_time));
  return out;
}

double mean_norm(std::span<const Vec3> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& v : values) sum += v.norm();
  return sum / static_cast<double>(values.size());
}

}  // namespace

RunMetrics compute_run_metrics(std::span<const Vec3> centroids, std::span<const double> areas, double default_area,
                               double sample_time) {
  if (centroids.size() < 3) throw std::invalid_argument("metrics need at least 3 trace rows");
  if (!(sample_time > 0.0)) throw std::invalid_argument("sample time must be > 0");

  RunMetrics m;
  m.samples = centroids.size();
  for (std::size_t i = 1; i < centroids.size(); ++i) m.path_length += (centroids[i] - centroids[i - 1]).norm();

  // Velocity, acceleration and jerk need window + 3 samples.
  m.smoothing_window = centroids.size() >= kMetricsSmoothingWindow + 3 ? kMetricsSmoothingWindow : 1;
  const auto smooth = moving_average(centroids, m.smoothing_window);
  const auto vel = differences(smooth, sample_time);
  const auto acc = differences(vel, sample_time);
  const auto jerk = differences(acc, sample_time);
  m.mean_velocity = mean_norm(vel);
  m.mean_acceleration = mean_norm(acc);
  m.mean_jerk = mean_norm(jerk);

  if (!areas.empty()) {
    double sum = 0.0;
    for (double a : areas) {
      const double e = std::abs(a - default_area);
      sum += e;
      m.area_error_max = std::max(m.area_error_max, e);
    }
    m.area_error_mean = sum / static_cast<double>(areas.size());
    double var = 0.0;
    for (double a : areas) {
      const double d = std::abs(a - default_area) - m.area_error_mean;
      var += d * d;
    }
    m.area_error_std = std::sqrt(var / static_cast<double>(areas.size()));
  }
  return m;
}

RunMetrics compute_run_metrics(const TraceLog& trace) {
  std::vector<Vec3> centroids;
  std::vector<double> areas;
  for (const auto& r : trace.rows) {
    Vec3 c;
    for (const auto& p : r.positions) c += p;
    if (!r.positions.empty()) c *= 1.0 / static_cast<double>(r.positions.size());
    centroids.push_back(c);
    areas.push_back(r.area);
  }
  return compute_run_metrics(centroids, areas, trace.default_area(), trace.sample_time());
}

nlohmann::json to_json(const RunMetrics& m) {
  return {{"centroid_path_length_m", m.path_length},
          {"mean_centroid_velocity_mps", m.mean_velocity},
          {"mean_centroid_acceleration_mps2", m.mean_acceleration},
          {"mean_centroid_jerk_mps3", m.mean_jerk},
          {"area_error_mean_m2", m.area_error_mean},
          {"area_error_std_m2", m.area_error_std},
          {"area_error_max_m2", m.area_error_max},
          {"smoothing_window", m.smoothing_window},
          {"samples", m.samples}};
}

std::vector<CorrectnessPoint> reaction_correctness(std::span<const ReactionSample> samples,
                                                   std::span<const long> pattern_start_ticks, double sample_time,
                                                   double horizon_ms, double bin_ms) {
  std::vector<CorrectnessPoint> curve;
  if (pattern_start_ticks.empty()) return curve;
  if (!(sample_time > 0.0) || !(bin_ms > 0.0) || horizon_ms < 0.0) {
    throw std::invalid_argument("sample time and bin width must be > 0, horizon >= 0");
  }
  std::unordered_map<long, std::size_t> row_of;
  for (std::size_t i = 0; i < samples.size(); ++i) row_of.emplace(samples[i].tick, i);

  const auto bins = static_cast<std::size_t>(std::floor(horizon_ms / bin_ms + 1e-9));
  for (std::size_t b = 1; b <= bins; ++b) {
    CorrectnessPoint p;
    p.time_ms = static_cast<double>(b) * bin_ms;
    const long offset = std::lround(p.time_ms / 1000.0 / sample_time);
    std::size_t correct = 0;
    for (long start : pattern_start_ticks) {
      const auto s0 = row_of.find(start);
      const auto s1 = row_of.find(start + offset);
      if (s0 == row_of.end() || s1 == row_of.end()) continue;
      ++p.events;
      const auto& a = samples[s0->second];
      const auto& z = samples[s1->second];
      const bool area_better = z.area_error < a.area_error;
      const bool shift_better = a.displacement && z.displacement && std::abs(*z.displacement) < std::abs(*a.displacement);
      if (area_better && shift_better) ++correct;
    }
    p.fraction = p.events ? static_cast<double>(correct) / static_cast<double>(p.events) : 0.0;
    curve.push_back(p);
  }
  return curve;
}

std::vector<CorrectnessPoint> reaction_correctness(const TraceLog& trace, double horizon_ms, double bin_ms) {
  std::vector<ReactionSample> samples;
  samples.reserve(trace.rows.size());
  const double area0 = trace.default_area();
  for (const auto& r : trace.rows) samples.push_back({r.tick, std::abs(r.area - area0), r.com_displacement});
  std::vector<long> starts;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::PatternStart) starts.push_back(e.tick);
  }
  return reaction_correctness(samples, starts, trace.sample_time(), horizon_ms, bin_ms);
}

}  // namespace swarmguide

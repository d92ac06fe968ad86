#pragma once

// Post-hoc run analysis. All functions are pure.

#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "swarmguide/trace.hpp"
#include "swarmguide/vec.hpp"

namespace swarmguide {

/// Moving-average window applied to the centroid before differentiation.
inline constexpr std::size_t kMetricsSmoothingWindow = 5;

struct RunMetrics {
  double path_length = 0.0;          // m, raw centroid
  double mean_velocity = 0.0;        // m/s
  double mean_acceleration = 0.0;    // m/s^2
  double mean_jerk = 0.0;            // m/s^3
  double area_error_mean = 0.0;      // m^2
  double area_error_std = 0.0;       // m^2, population
  double area_error_max = 0.0;       // m^2
  std::size_t smoothing_window = kMetricsSmoothingWindow;
  std::size_t samples = 0;
};

/// Centroid series and per-row areas at a fixed sample time. Throws std::invalid_argument
/// with fewer than 3 samples or a non-positive sample time. Traces too short for the
/// full window fall back to unsmoothed differences (reported in smoothing_window).
[[nodiscard]] RunMetrics compute_run_metrics(std::span<const Vec3> centroids, std::span<const double> areas,
                                             double default_area, double sample_time);
[[nodiscard]] RunMetrics compute_run_metrics(const TraceLog& trace);

/// Valid-mode moving average (output length n - window + 1).
[[nodiscard]] std::vector<Vec3> moving_average(std::span<const Vec3> values, std::size_t window);

[[nodiscard]] nlohmann::json to_json(const RunMetrics& metrics);

struct CorrectnessPoint {
  double time_ms = 0.0;   // end of the bin, measured from pattern start
  double fraction = 0.0;  // correct / events evaluated
  std::size_t events = 0; // events whose bin falls inside the trace
};

/// Per-row quantities reaction_correctness looks at.
struct ReactionSample {
  long tick = 0;
  double area_error = 0.0;            // |area - default|
  std::optional<double> displacement; // lateral CoM offset
};

/// For each pattern start and each bin up to the horizon, the response counts as
/// correct when both the area error and |displacement| are strictly smaller than at
/// the pattern start. Zero events yields an empty curve.
[[nodiscard]] std::vector<CorrectnessPoint> reaction_correctness(std::span<const ReactionSample> samples,
                                                                 std::span<const long> pattern_start_ticks,
                                                                 double sample_time, double horizon_ms = 3300.0,
                                                                 double bin_ms = 100.0);
[[nodiscard]] std::vector<CorrectnessPoint> reaction_correctness(const TraceLog& trace, double horizon_ms = 3300.0,
                                                                 double bin_ms = 100.0);

}  // namespace swarmguide

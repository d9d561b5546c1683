#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "innout/error.hpp"
#include "innout/types.hpp"

namespace innout {

// Metadata thresholds for the basic filter stage.
struct BasicFilterConfig {
  double min_duration_s = 4.0;
  double max_duration_s = 20.0;
  double fps_min = 20.0;
  double fps_max = 31.0;
  double min_aspect_w_over_h = 1.35;
  int min_width_px = 400;

  void validate() const {
    if (min_duration_s >= max_duration_s || fps_min >= fps_max)
      throw ValidationError("BasicFilterConfig: min >= max");
  }
};

// nullopt == keep; otherwise the first violated rule in fixed order.
inline std::optional<std::string> basic_filter(const VideoRecord& r,
                                               const BasicFilterConfig& cfg) {
  cfg.validate();
  r.validate();
  if (r.duration_s < cfg.min_duration_s || r.duration_s > cfg.max_duration_s)
    return "duration";
  if (r.fps < cfg.fps_min || r.fps > cfg.fps_max) return "fps";
  if (r.aspect_ratio() < cfg.min_aspect_w_over_h) return "aspect";
  if (r.width_px < cfg.min_width_px) return "width";
  return std::nullopt;
}

enum class Tail { Low, High, Both };

struct PercentileRule {
  std::string metric_name;
  Tail tail = Tail::Low;
  double low_fraction = 0.0;
  double high_fraction = 0.0;

  void validate() const {
    if (low_fraction < 0 || low_fraction > 1 || high_fraction < 0 ||
        high_fraction > 1)
      throw ValidationError("PercentileRule: fraction outside [0,1]");
    if (low_fraction + high_fraction >= 1.0)
      throw ValidationError("PercentileRule: fractions cover everything");
  }
};

// Sort ascending (ties by id), drop floor(n*low) from the bottom and/or
// floor(n*high) from the top.
inline std::set<std::string> percentile_filter(
    std::vector<std::pair<std::string, double>> values,
    const PercentileRule& rule) {
  rule.validate();
  if (values.empty()) throw ValidationError("percentile_filter: empty input");
  std::sort(values.begin(), values.end(),
            [](const auto& a, const auto& b) {
              return a.second != b.second ? a.second < b.second : a.first < b.first;
            });
  const std::size_t n = values.size();
  std::set<std::string> dropped;
  if (rule.tail == Tail::Low || rule.tail == Tail::Both) {
    const std::size_t k = static_cast<std::size_t>(n * rule.low_fraction);
    for (std::size_t i = 0; i < k; ++i) dropped.insert(values[i].first);
  }
  if (rule.tail == Tail::High || rule.tail == Tail::Both) {
    const std::size_t k = static_cast<std::size_t>(n * rule.high_fraction);
    for (std::size_t i = 0; i < k; ++i) dropped.insert(values[n - 1 - i].first);
  }
  return dropped;
}

// Drop multi-scene videos; scene_count 0 (no detection evidence) keeps.
inline bool scene_filter_keep(const VideoRecord& r) { return r.scene_count <= 1; }

// ||t1 - t2|| + arccos((Tr(R1^T R2) - 1) / 2), trace argument clamped.
inline double camera_motion_score(const PoseSample& a, const PoseSample& b) {
  a.validate();
  b.validate();
  double trans = 0;
  for (int i = 0; i < 3; ++i) {
    const double d = a.translation[i] - b.translation[i];
    trans += d * d;
  }
  double trace = 0;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      trace += a.rotation[k * 3 + i] * b.rotation[k * 3 + i];
  const double c = std::clamp((trace - 1.0) / 2.0, -1.0, 1.0);
  return std::sqrt(trans) + std::acos(c);
}

inline double rotation_geodesic(const PoseSample& a, const PoseSample& b) {
  double trace = 0;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      trace += a.rotation[k * 3 + i] * b.rotation[k * 3 + i];
  return std::acos(std::clamp((trace - 1.0) / 2.0, -1.0, 1.0));
}

struct CameraSeriesStats {
  double rotation_err = 0.0;
  double translation_err = 0.0;
  double focal_change = 0.0;
};

// Consecutive-pair rotation/translation terms summed; focal_change is the
// largest relative step.
inline CameraSeriesStats camera_series_stats(std::span<const PoseSample> poses) {
  if (poses.size() < 2)
    throw ValidationError("camera_series_stats: need at least 2 samples");
  CameraSeriesStats stats;
  for (std::size_t i = 0; i + 1 < poses.size(); ++i) {
    const auto& a = poses[i];
    const auto& b = poses[i + 1];
    a.validate();
    b.validate();
    stats.rotation_err += rotation_geodesic(a, b);
    double trans = 0;
    for (int k = 0; k < 3; ++k) {
      const double d = a.translation[k] - b.translation[k];
      trans += d * d;
    }
    stats.translation_err += std::sqrt(trans);
    stats.focal_change =
        std::max(stats.focal_change, std::abs(b.focal - a.focal) / a.focal);
  }
  return stats;
}

}  // namespace innout

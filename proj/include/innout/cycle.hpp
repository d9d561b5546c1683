#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "innout/error.hpp"
#include "innout/rle.hpp"
#include "innout/types.hpp"

namespace innout {

struct CycleConfig {
  double threshold_frac = 0.04;  // of frame height, round-trip error cutoff
  double viability_frac = 1.0 / 3.0;
  double motion_low = 0.05;
  double motion_high = 0.05;
  int mask_tol_px = 2;
};

// Keep a point iff its forward-start to back-tracked-start distance stays
// within threshold_frac * height.
inline std::vector<TrackPoint> roundtrip_filter(const ObjectTrack& track,
                                                int height_px,
                                                double threshold_frac = 0.04) {
  track.validate();
  const double limit = threshold_frac * height_px;
  std::vector<TrackPoint> kept;
  for (const auto& p : track.points) {
    if (!p.backtracked_start)
      throw ValidationError("roundtrip_filter: point missing backtracked_start");
    const double dx = p.positions.front().x - (*p.backtracked_start)[0];
    const double dy = p.positions.front().y - (*p.backtracked_start)[1];
    if (std::hypot(dx, dy) <= limit) kept.push_back(p);
  }
  return kept;
}

// Drop the object if strictly more than viability_frac of its points were
// filtered.
inline bool object_viable(std::int64_t original_count, std::int64_t retained_count,
                          double viability_frac = 1.0 / 3.0) {
  if (original_count <= 0)
    throw ValidationError("object_viable: no original points");
  if (retained_count < 0 || retained_count > original_count)
    throw ValidationError("object_viable: retained exceeds original");
  const double dropped_frac =
      double(original_count - retained_count) / double(original_count);
  return dropped_frac <= viability_frac;
}

struct MotionStats {
  double mean_step = 0.0;
  double max_step = 0.0;
};

// Per-frame centroid of visible points; consecutive displacements normalized
// by frame height. Frames with no visible point are skipped.
inline MotionStats motion_stats(const ObjectTrack& track, int height_px) {
  track.validate();
  if (height_px <= 0) throw ValidationError("motion_stats: bad height");
  std::vector<std::array<double, 2>> centroids;
  for (std::size_t f = 0; f < track.frame_count(); ++f) {
    double sx = 0, sy = 0;
    int n = 0;
    for (const auto& p : track.points) {
      if (p.positions[f].visible) {
        sx += p.positions[f].x;
        sy += p.positions[f].y;
        ++n;
      }
    }
    if (n > 0) centroids.push_back({sx / n, sy / n});
  }
  if (centroids.size() < 2)
    throw ValidationError("motion_stats: fewer than 2 usable frames");
  MotionStats stats;
  double total = 0;
  for (std::size_t i = 0; i + 1 < centroids.size(); ++i) {
    const double step = std::hypot(centroids[i + 1][0] - centroids[i][0],
                                   centroids[i + 1][1] - centroids[i][1]) /
                        height_px;
    total += step;
    stats.max_step = std::max(stats.max_step, step);
  }
  stats.mean_step = total / double(centroids.size() - 1);
  return stats;
}

// Drop a point if, on any masked frame where it is visible, it is farther
// than tol_px (Chebyshev) from every set mask pixel. Frames without masks
// never cause drops.
inline std::vector<TrackPoint> mask_refine(
    const ObjectTrack& track, const std::map<std::int64_t, MaskRLE>& masks,
    int frame_w, int frame_h, int tol_px = 2) {
  track.validate();
  std::map<std::int64_t, std::vector<std::uint8_t>> bitmaps;
  for (const auto& [frame, m] : masks) {
    if (m.width != frame_w || m.height != frame_h)
      throw ValidationError("mask_refine: mask dims do not match frame");
    bitmaps.emplace(frame, rle_decode(m));
  }
  std::vector<TrackPoint> kept;
  for (const auto& p : track.points) {
    bool ok = true;
    for (const auto& [frame, bitmap] : bitmaps) {
      if (frame < 0 || static_cast<std::size_t>(frame) >= p.positions.size())
        continue;
      const auto& pos = p.positions[frame];
      if (!pos.visible) continue;
      bool near_mask = false;
      const int cx = static_cast<int>(std::floor(pos.x));
      const int cy = static_cast<int>(std::floor(pos.y));
      for (int y = std::max(0, cy - tol_px - 1);
           y <= std::min(frame_h - 1, cy + tol_px + 1) && !near_mask; ++y) {
        for (int x = std::max(0, cx - tol_px - 1);
             x <= std::min(frame_w - 1, cx + tol_px + 1); ++x) {
          if (!bitmap[std::size_t(y) * frame_w + x]) continue;
          const double cheb = std::max(std::abs(pos.x - x), std::abs(pos.y - y));
          if (cheb <= tol_px) {
            near_mask = true;
            break;
          }
        }
      }
      if (!near_mask) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(p);
  }
  return kept;
}

// Convert tracking-resolution coordinates (e.g. 384x512) to native frame
// coordinates before pattern mining.
inline ObjectTrack rescale_track(const ObjectTrack& track, int from_w, int from_h,
                                 int to_w, int to_h) {
  if (from_w <= 0 || from_h <= 0 || to_w <= 0 || to_h <= 0)
    throw ValidationError("rescale_track: non-positive dims");
  const double sx = double(to_w) / from_w;
  const double sy = double(to_h) / from_h;
  ObjectTrack out = track;
  for (auto& p : out.points) {
    for (auto& pos : p.positions) {
      pos.x *= sx;
      pos.y *= sy;
    }
    if (p.backtracked_start) {
      (*p.backtracked_start)[0] *= sx;
      (*p.backtracked_start)[1] *= sy;
    }
  }
  return out;
}

}  // namespace innout

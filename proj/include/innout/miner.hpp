#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "innout/error.hpp"
#include "innout/rle.hpp"
#include "innout/rng.hpp"
#include "innout/types.hpp"

namespace innout {

struct RatioCategory {
  double ratio;  // w / h
  double probability;
  double min_height_frac;
};

struct BoxSamplerConfig {
  std::vector<RatioCategory> ratio_table = {
      {16.0 / 9.0, 0.35, 0.60}, {3.0 / 2.0, 0.30, 0.60}, {4.0 / 3.0, 0.20, 0.65},
      {5.0 / 4.0, 0.13, 0.65},  {1.0, 0.01, 0.75},       {4.0 / 5.0, 0.01, 0.85}};
  int attempts = 2000;
  double enter_fraction = 0.5;
  int max_patterns_per_starter = 4;
  double dedup_iou = 0.9;
  double id_min_frac = 0.10;

  void validate() const {
    double sum = 0;
    for (const auto& c : ratio_table) {
      sum += c.probability;
      if (c.min_height_frac <= 0 || c.min_height_frac > 1)
        throw ValidationError("BoxSamplerConfig: min_height_frac outside (0,1]");
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ValidationError("BoxSamplerConfig: probabilities do not sum to 1");
  }
};

// Sample a ratio category by probability, a height uniform in
// [min_height_frac*H, H], and a feasible top-left position. Infeasible draws
// return nullopt (a normal outcome, counted against the attempt budget).
inline std::optional<CanvasBox> sample_box(int frame_w, int frame_h,
                                           const BoxSamplerConfig& cfg, Rng& rng,
                                           int* category_out = nullptr) {
  if (frame_w <= 0 || frame_h <= 0)
    throw ValidationError("sample_box: non-positive dims");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0;
  std::size_t cat = cfg.ratio_table.size() - 1;
  for (std::size_t i = 0; i < cfg.ratio_table.size(); ++i) {
    acc += cfg.ratio_table[i].probability;
    if (u < acc) {
      cat = i;
      break;
    }
  }
  const auto& c = cfg.ratio_table[cat];
  if (category_out) *category_out = static_cast<int>(cat);
  const int min_h =
      static_cast<int>(std::ceil(c.min_height_frac * double(frame_h)));
  if (min_h > frame_h) return std::nullopt;
  std::uniform_int_distribution<int> pick_h(min_h, frame_h);
  const int h = pick_h(rng);
  const int w = static_cast<int>(std::llround(h * c.ratio));
  if (w <= 0 || w > frame_w) return std::nullopt;
  std::uniform_int_distribution<int> pick_x(0, frame_w - w);
  std::uniform_int_distribution<int> pick_y(0, frame_h - h);
  const int x0 = pick_x(rng);
  const int y0 = pick_y(rng);
  return CanvasBox{x0, y0, x0 + w, y0 + h};
}

// Frame Out: at least one visible point inside the box at frame 0, and some
// later frame where every visible point (of at least one) is outside.
// Re-entry after the full exit does not negate the result.
inline bool frame_out_pattern(const ObjectTrack& track, const CanvasBox& box) {
  const std::size_t frames = track.frame_count();
  if (frames == 0) throw ValidationError("frame_out_pattern: empty track");
  bool any_visible0 = false;
  bool any_inside0 = false;
  for (const auto& p : track.points) {
    const auto& pos = p.positions[0];
    if (!pos.visible) continue;
    any_visible0 = true;
    if (box.contains(pos.x, pos.y)) any_inside0 = true;
  }
  if (!any_visible0)
    throw ValidationError("frame_out_pattern: no visible points at frame 0");
  if (!any_inside0) return false;
  for (std::size_t f = 1; f < frames; ++f) {
    bool any_visible = false;
    bool all_outside = true;
    for (const auto& p : track.points) {
      const auto& pos = p.positions[f];
      if (!pos.visible) continue;
      any_visible = true;
      if (box.contains(pos.x, pos.y)) {
        all_outside = false;
        break;
      }
    }
    if (any_visible && all_outside) return true;
  }
  return false;
}

// Frame In: zero mask/box pixel overlap at frame 0, and some frame where at
// least enter_fraction of the visible points are inside the box.
inline bool frame_in_pattern(const ObjectTrack& track, const CanvasBox& box,
                             const MaskRLE& first_frame_mask,
                             double enter_fraction) {
  const std::size_t frames = track.frame_count();
  if (frames == 0) throw ValidationError("frame_in_pattern: empty track");
  if (mask_box_overlap(first_frame_mask, box) != 0) return false;
  for (std::size_t f = 0; f < frames; ++f) {
    int visible = 0, inside = 0;
    for (const auto& p : track.points) {
      const auto& pos = p.positions[f];
      if (!pos.visible) continue;
      ++visible;
      if (box.contains(pos.x, pos.y)) ++inside;
    }
    if (visible > 0 && double(inside) >= enter_fraction * double(visible))
      return true;
  }
  return false;
}

// Tight crop of the object mask for use as an identity reference; rejects
// masks below the minimum area fraction of the frame.
inline std::optional<IdCrop> extract_id_crop(const MaskRLE& mask, int frame_w,
                                             int frame_h, double min_frac = 0.10) {
  const std::int64_t area = mask_area(mask);
  if (area == 0) throw ValidationError("extract_id_crop: empty mask");
  if (double(area) < min_frac * double(frame_w) * double(frame_h))
    return std::nullopt;
  IdCrop crop;
  crop.rect = mask_bounding_box(mask);
  crop.mask = mask_crop(mask, crop.rect);
  return crop;
}

// Randomized box search over one (video, starter) pair. Deterministic given
// the rng seed and invariant to the object list ordering.
inline std::vector<PatternRecord> mine_patterns(const VideoRecord& video,
                                                std::int64_t starter,
                                                std::span<const ObjectTrack> tracks,
                                                const BoxSamplerConfig& cfg,
                                                Rng& rng) {
  cfg.validate();
  const int fw = video.width_px;
  const int fh = video.height_px;

  // object_id order fixes the within-box record order
  std::vector<std::size_t> order(tracks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tracks[a].object_id < tracks[b].object_id;
  });

  std::vector<PatternRecord> records;
  std::vector<CanvasBox> kept_boxes;
  for (int attempt = 0; attempt < cfg.attempts; ++attempt) {
    if (static_cast<int>(records.size()) >= cfg.max_patterns_per_starter) break;
    const auto box = sample_box(fw, fh, cfg, rng);
    if (!box) continue;
    bool dup = false;
    for (const auto& kb : kept_boxes) {
      if (box_iou(kb, *box) > cfg.dedup_iou) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    bool box_used = false;
    for (std::size_t oi : order) {
      if (static_cast<int>(records.size()) >= cfg.max_patterns_per_starter) break;
      const auto& track = tracks[oi];
      if (track.points.empty()) continue;
      bool has_visible0 = false;
      for (const auto& p : track.points)
        if (p.positions[0].visible) {
          has_visible0 = true;
          break;
        }
      if (has_visible0 && frame_out_pattern(track, *box)) {
        PatternRecord r;
        r.video_id = video.video_id;
        r.starter_frame = starter;
        r.box = *box;
        r.object_id = track.object_id;
        r.kind = PatternKind::FrameOut;
        r.enter_fraction = cfg.enter_fraction;
        records.push_back(std::move(r));
        box_used = true;
      }
      if (track.first_frame_mask &&
          static_cast<int>(records.size()) < cfg.max_patterns_per_starter &&
          frame_in_pattern(track, *box, *track.first_frame_mask,
                           cfg.enter_fraction)) {
        auto crop = extract_id_crop(*track.first_frame_mask, fw, fh,
                                    cfg.id_min_frac);
        if (crop) {
          PatternRecord r;
          r.video_id = video.video_id;
          r.starter_frame = starter;
          r.box = *box;
          r.object_id = track.object_id;
          r.kind = PatternKind::FrameIn;
          r.id_crop = std::move(crop);
          r.enter_fraction = cfg.enter_fraction;
          records.push_back(std::move(r));
          box_used = true;
        }
      }
    }
    if (box_used) kept_boxes.push_back(*box);
  }
  return records;
}

}  // namespace innout

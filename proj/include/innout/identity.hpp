#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "innout/error.hpp"
#include "innout/rle.hpp"
#include "innout/rng.hpp"
#include "innout/types.hpp"

namespace innout {

// COCO panoptic classes considered motionable objects of interest.
inline const std::set<std::string>& default_motionable_classes() {
  static const std::set<std::string> classes = {
      "person",   "bicycle", "car",   "motorcycle", "airplane", "bus",
      "train",    "truck",   "boat",  "bird",       "cat",      "dog",
      "horse",    "sheep",   "cow",   "elephant",   "bear",     "zebra",
      "giraffe",  "sports ball", "kite", "flower"};
  return classes;
}

// Load a class whitelist from a one-class-per-line text file ('#' comments).
inline std::set<std::string> load_motionable_classes(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open class list: " + path.string());
  std::set<std::string> classes;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    const auto b = line.find_last_not_of(" \t\r");
    classes.insert(line.substr(a, b - a + 1));
  }
  if (classes.empty())
    throw ValidationError("class list is empty: " + path.string());
  return classes;
}

struct IdentityConfig {
  std::set<std::string> motionable_classes = default_motionable_classes();
  double min_area_frac = 0.04;
  double max_area_frac = 0.40;
  int max_same_label = 3;
  std::vector<double> starter_fracs = {0.0, 0.35, 0.70};
  double iframe_snap_frac = 0.05;
  int kmeans_min = 12;
  int kmeans_max = 36;
  std::int64_t min_clip_frames = 49;

  void validate() const {
    if (!(0 < min_area_frac && min_area_frac < max_area_frac && max_area_frac < 1))
      throw ValidationError("IdentityConfig: bad area range");
    if (kmeans_min > kmeans_max)
      throw ValidationError("IdentityConfig: kmeans_min > kmeans_max");
  }
};

// Clip anchors at the configured fractions of the video, snapped to a
// nearby I-frame when one is close enough. Starters without min_clip_frames
// frames of room before the video end are discarded.
inline std::vector<std::int64_t> starter_frames(std::int64_t frame_count,
                                                std::span<const std::int64_t> iframes,
                                                const IdentityConfig& cfg) {
  cfg.validate();
  if (frame_count <= 0) throw ValidationError("starter_frames: empty video");
  const double snap_limit = cfg.iframe_snap_frac * double(frame_count);
  std::vector<std::int64_t> out;
  for (double frac : cfg.starter_fracs) {
    std::int64_t idx = static_cast<std::int64_t>(frac * double(frame_count));
    if (idx >= frame_count) idx = frame_count - 1;
    // snap to the nearest I-frame if within the limit
    std::int64_t best = -1;
    std::int64_t best_dist = frame_count + 1;
    for (std::int64_t f : iframes) {
      const std::int64_t d = std::llabs(f - idx);
      if (d < best_dist) {
        best_dist = d;
        best = f;
      }
    }
    if (best >= 0 && double(best_dist) <= snap_limit) idx = best;
    if (idx + cfg.min_clip_frames > frame_count) continue;
    if (std::find(out.begin(), out.end(), idx) == out.end()) out.push_back(idx);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline bool motionable_filter(const std::string& class_label,
                              const IdentityConfig& cfg) {
  return cfg.motionable_classes.count(class_label) > 0;
}

// Keep objects whose mask covers a moderate fraction of the frame.
inline bool area_filter(double area_frac, const IdentityConfig& cfg) {
  if (area_frac < 0 || area_frac > 1)
    throw ValidationError("area_filter: fraction outside [0,1]");
  return area_frac >= cfg.min_area_frac && area_frac <= cfg.max_area_frac;
}

// Videos with too many same-label objects are dropped wholesale.
inline bool label_cap_keep(std::span<const ObjectTrack> objects,
                           const IdentityConfig& cfg) {
  std::map<std::string, int> counts;
  for (const auto& o : objects)
    if (++counts[o.class_label] > cfg.max_same_label) return false;
  return true;
}

// Linear map from area fraction to point count, clamped to [kmeans_min, kmeans_max].
inline int kmeans_point_count(double area_frac, const IdentityConfig& cfg) {
  cfg.validate();
  if (area_frac < cfg.min_area_frac || area_frac > cfg.max_area_frac)
    throw ValidationError("kmeans_point_count: area outside configured range");
  const double t = (area_frac - cfg.min_area_frac) /
                   (cfg.max_area_frac - cfg.min_area_frac);
  const int k = cfg.kmeans_min +
                static_cast<int>(std::lround(t * (cfg.kmeans_max - cfg.kmeans_min)));
  return std::clamp(k, cfg.kmeans_min, cfg.kmeans_max);
}

// Lloyd's algorithm over the mask's pixel coordinates, seeded farthest-point
// init, centroids snapped to the nearest mask pixel. Deterministic in
// (mask, k, seed); the pixel list comes from the canonical RLE decode order.
inline std::vector<std::array<int, 2>> kmeans_sample(const MaskRLE& mask, int k,
                                                     std::uint64_t seed) {
  if (k <= 0) throw ValidationError("kmeans_sample: k must be positive");
  const auto bitmap = rle_decode(mask);
  std::vector<std::array<int, 2>> pixels;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (bitmap[std::size_t(y) * mask.width + x]) pixels.push_back({x, y});
  if (pixels.size() < static_cast<std::size_t>(k))
    throw ValidationError("kmeans_sample: mask smaller than k");

  auto rng = make_rng(seed);
  const std::size_t n = pixels.size();

  // farthest-point init
  std::vector<std::array<double, 2>> centroids;
  centroids.reserve(k);
  {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const auto& p0 = pixels[pick(rng)];
    centroids.push_back({double(p0[0]), double(p0[1])});
    std::vector<double> dist2(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = pixels[i][0] - centroids[0][0];
      const double dy = pixels[i][1] - centroids[0][1];
      dist2[i] = dx * dx + dy * dy;
    }
    while (static_cast<int>(centroids.size()) < k) {
      std::size_t far_i = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (dist2[i] > dist2[far_i]) far_i = i;
      centroids.push_back({double(pixels[far_i][0]), double(pixels[far_i][1])});
      for (std::size_t i = 0; i < n; ++i) {
        const double dx = pixels[i][0] - centroids.back()[0];
        const double dy = pixels[i][1] - centroids.back()[1];
        dist2[i] = std::min(dist2[i], dx * dx + dy * dy);
      }
    }
  }

  std::vector<int> assign(n, 0);
  for (int iter = 0; iter < 50; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = 1e300;
      int bj = 0;
      for (int j = 0; j < k; ++j) {
        const double dx = pixels[i][0] - centroids[j][0];
        const double dy = pixels[i][1] - centroids[j][1];
        const double d = dx * dx + dy * dy;
        if (d < best) {
          best = d;
          bj = j;
        }
      }
      assign[i] = bj;
    }
    std::vector<std::array<double, 2>> sums(k, {0, 0});
    std::vector<std::int64_t> cnt(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[assign[i]][0] += pixels[i][0];
      sums[assign[i]][1] += pixels[i][1];
      ++cnt[assign[i]];
    }
    double max_shift = 0;
    for (int j = 0; j < k; ++j) {
      if (cnt[j] == 0) continue;  // keep the old centroid for empty clusters
      const std::array<double, 2> next = {sums[j][0] / cnt[j], sums[j][1] / cnt[j]};
      max_shift = std::max(max_shift, std::hypot(next[0] - centroids[j][0],
                                                 next[1] - centroids[j][1]));
      centroids[j] = next;
    }
    if (max_shift < 0.5) break;
  }

  // snap each centroid to the nearest mask pixel; keep points distinct
  std::vector<std::array<int, 2>> out;
  out.reserve(k);
  std::set<std::array<int, 2>> used;
  for (int j = 0; j < k; ++j) {
    std::size_t best_i = 0;
    double best = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
      if (used.count(pixels[i])) continue;
      const double dx = pixels[i][0] - centroids[j][0];
      const double dy = pixels[i][1] - centroids[j][1];
      const double d = dx * dx + dy * dy;
      if (d < best) {
        best = d;
        best_i = i;
      }
    }
    used.insert(pixels[best_i]);
    out.push_back(pixels[best_i]);
  }
  return out;
}

}  // namespace innout

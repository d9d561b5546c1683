#pragma once

// Shared synthetic dataset used by the pipeline tests and the acceptance
// suite: 20 videos with known defects so every stage has work to do.

#include <cstdint>
#include <string>
#include <vector>

#include "innout/pipeline.hpp"

namespace fixture {

inline innout::MaskRLE rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
  std::vector<std::uint8_t> bits(std::size_t(w) * h, 0);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) bits[std::size_t(y) * w + x] = 1;
  return innout::rle_encode(bits, w, h);
}

// Tracking-resolution object: 12 points starting inside a rect mask and
// drifting right fast enough to leave a native 1280x720 frame.
inline innout::ObjectTrack make_track(int object_id, const std::string& label,
                                      double dx) {
  innout::ObjectTrack t;
  t.object_id = object_id;
  t.class_label = label;
  t.first_frame_mask = rect_mask(512, 384, 40, 140, 140, 300);
  for (int p = 0; p < 12; ++p) {
    innout::TrackPoint pt;
    pt.point_id = p;
    const double x0 = 60 + 6 * (p % 4);
    const double y0 = 160 + 12 * (p / 4);
    for (int f = 0; f < 49; ++f)
      pt.positions.push_back({x0 + dx * f, y0 + 0.2 * f, true});
    // two points per object get a large backtracking error and are culled
    pt.backtracked_start = {p < 10 ? x0 : x0 + 30.0, y0};
    t.points.push_back(std::move(pt));
  }
  return t;
}

inline innout::PipelineDataset make_dataset() {
  innout::PipelineDataset d;
  for (int i = 0; i < 20; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "vid_%03d", i);
    innout::VideoRecord v;
    v.video_id = id;
    v.dataset_tag = "openvid";
    v.width_px = 1280;
    v.height_px = 720;
    v.fps = 24;
    v.duration_s = 10;
    v.frame_count = 240;
    v.scene_count = 1;
    v.iframe_indices = {0, 84, 168};
    v.scores = {{"clipiqa", 0.50 + 0.01 * i},
                {"ocr_area", 0.01 * i},
                {"nima", 5.0 + 0.05 * i},
                {"ic9600", 0.30 + 0.01 * i}};
    switch (i) {
      case 3:  // too short
        v.duration_s = 3;
        v.frame_count = 72;
        v.iframe_indices = {0};
        break;
      case 7:  // fps out of range
        v.fps = 15;
        v.frame_count = 150;
        v.iframe_indices = {0, 84};
        break;
      case 11:  // too narrow
        v.width_px = 300;
        v.height_px = 200;
        break;
      case 15:  // square aspect
        v.width_px = 720;
        break;
      case 5:  // multi-scene
        v.scene_count = 3;
        break;
      default:
        break;
    }
    d.videos.push_back(v);

    innout::PoseEntry pose;
    pose.video_id = id;
    for (int s = 0; s < 5; ++s) {
      innout::PoseSample sample;
      sample.frame_index = s * 59;
      sample.translation = {0.01 * i * s, 0, 0};
      sample.focal = 500;
      pose.samples.push_back(sample);
    }
    d.poses.push_back(pose);

    const double dx = 8.0 + (i % 5);
    if (i == 13) {
      // only a non-motionable object: dropped at identity selection
      innout::TrackEntry e{id, 0, make_track(0, "table", dx)};
      d.tracks.push_back(std::move(e));
    } else if (i == 9) {
      // four same-label objects: over the per-label cap
      for (int o = 0; o < 4; ++o) {
        innout::TrackEntry e{id, 0, make_track(o, "dog", dx)};
        d.tracks.push_back(std::move(e));
      }
    } else {
      innout::TrackEntry e{id, 0, make_track(0, "person", dx)};
      d.tracks.push_back(std::move(e));
    }
  }
  // one per-frame mask so refinement has something to check
  d.masks.push_back(
      {"vid_000", 0, 0, 0, rect_mask(512, 384, 0, 0, 512, 384)});
  return d;
}

inline innout::Config make_config() {
  innout::Config cfg;
  cfg.set("curation.camera.rot_high", "0");
  cfg.set("curation.camera.trans_high", "0.1");
  cfg.set("curation.camera.focal_high", "0");
  return cfg;
}

}  // namespace fixture

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "innout/config.hpp"
#include "innout/curation.hpp"
#include "innout/cycle.hpp"
#include "innout/error.hpp"
#include "innout/identity.hpp"
#include "innout/manifest.hpp"
#include "innout/miner.hpp"
#include "innout/rng.hpp"
#include "innout/types.hpp"

namespace innout {

struct StageReport {
  std::string stage_name;
  std::int64_t input_count = 0;
  std::int64_t output_count = 0;
  double left_ratio = 0.0;  // percent of the initial pool
};

inline void to_json(json& j, const StageReport& r) {
  j = json{{"stage_name", r.stage_name},
           {"input_count", r.input_count},
           {"output_count", r.output_count},
           {"left_ratio", r.left_ratio}};
}
inline void from_json(const json& j, StageReport& r) {
  j.at("stage_name").get_to(r.stage_name);
  j.at("input_count").get_to(r.input_count);
  j.at("output_count").get_to(r.output_count);
  j.at("left_ratio").get_to(r.left_ratio);
}

// 537000 -> "537K", 29700 -> "29.7K", 1000000 -> "1.00M"
inline std::string format_count(std::int64_t n) {
  std::ostringstream out;
  if (n < 1000) {
    out << n;
  } else if (n < 1000000) {
    const double k = double(n) / 1000.0;
    std::ostringstream tmp;
    tmp.setf(std::ios::fixed);
    tmp.precision(1);
    tmp << k;
    std::string s = tmp.str();
    if (s.size() >= 2 && s.substr(s.size() - 2) == ".0") s.resize(s.size() - 2);
    out << s << "K";
  } else {
    out.setf(std::ios::fixed);
    out.precision(2);
    out << double(n) / 1e6 << "M";
  }
  return out.str();
}

inline std::string format_ratio(double percent) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(1);
  out << percent << "%";
  return out.str();
}

inline StageReport make_stage_report(const std::string& name, std::int64_t input,
                                     std::int64_t output, std::int64_t initial) {
  StageReport r;
  r.stage_name = name;
  r.input_count = input;
  r.output_count = output;
  r.left_ratio = initial > 0 ? 100.0 * double(output) / double(initial) : 0.0;
  return r;
}

// Table-style summary: stage, retained count, left ratio to one decimal.
inline std::string stats_report(std::span<const StageReport> reports) {
  std::ostringstream out;
  std::size_t name_w = 5;
  for (const auto& r : reports) name_w = std::max(name_w, r.stage_name.size());
  for (const auto& r : reports) {
    out << r.stage_name << std::string(name_w - r.stage_name.size() + 2, ' ')
        << format_count(r.output_count) << "  " << format_ratio(r.left_ratio)
        << '\n';
  }
  return out.str();
}

// f(i) writes only to slot i, so the merge is independent of scheduling.
template <typename F>
void parallel_for(std::size_t n, int workers, F&& f) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mu;
  const int count = std::min<int>(workers, static_cast<int>(n));
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) break;
        try {
          f(i);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(error_mu);
          error = e.what();
          failed.store(true);
          break;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failed.load()) throw ValidationError(error);
}

// ---- pipeline dataset ----

struct TrackEntry {
  std::string video_id;
  std::int64_t starter_frame = 0;
  ObjectTrack track;
};

inline void to_json(json& j, const TrackEntry& e) {
  to_json(j, e.track);
  j["video_id"] = e.video_id;
  j["starter_frame"] = e.starter_frame;
}
inline void from_json(const json& j, TrackEntry& e) {
  j.at("video_id").get_to(e.video_id);
  j.at("starter_frame").get_to(e.starter_frame);
  from_json(j, e.track);
}

struct MaskEntry {
  std::string video_id;
  std::int64_t starter_frame = 0;
  int object_id = 0;
  std::int64_t frame = 0;
  MaskRLE mask;
};

inline void to_json(json& j, const MaskEntry& e) {
  j = json{{"video_id", e.video_id},
           {"starter_frame", e.starter_frame},
           {"object_id", e.object_id},
           {"frame", e.frame},
           {"mask", e.mask}};
}
inline void from_json(const json& j, MaskEntry& e) {
  j.at("video_id").get_to(e.video_id);
  j.at("starter_frame").get_to(e.starter_frame);
  j.at("object_id").get_to(e.object_id);
  j.at("frame").get_to(e.frame);
  j.at("mask").get_to(e.mask);
}

struct PoseEntry {
  std::string video_id;
  std::vector<PoseSample> samples;
};

inline void to_json(json& j, const PoseEntry& e) {
  j = json{{"video_id", e.video_id}, {"samples", e.samples}};
}
inline void from_json(const json& j, PoseEntry& e) {
  j.at("video_id").get_to(e.video_id);
  j.at("samples").get_to(e.samples);
}

struct PipelineDataset {
  std::vector<VideoRecord> videos;
  std::vector<TrackEntry> tracks;
  std::vector<MaskEntry> masks;
  std::vector<PoseEntry> poses;
};

// Nearest-neighbor mask resize, used when converting tracking-resolution
// masks to native frame dimensions.
inline MaskRLE mask_resize_nearest(const MaskRLE& mask, int to_w, int to_h) {
  if (to_w <= 0 || to_h <= 0)
    throw ValidationError("mask_resize_nearest: non-positive dims");
  const auto src = rle_decode(mask);
  std::vector<std::uint8_t> out(std::size_t(to_w) * to_h, 0);
  for (int y = 0; y < to_h; ++y) {
    const int sy = std::min(mask.height - 1,
                            static_cast<int>((y + 0.5) * mask.height / to_h));
    for (int x = 0; x < to_w; ++x) {
      const int sx = std::min(mask.width - 1,
                              static_cast<int>((x + 0.5) * mask.width / to_w));
      out[std::size_t(y) * to_w + x] = src[std::size_t(sy) * mask.width + sx];
    }
  }
  return rle_encode(out, to_w, to_h);
}

// ---- stage configuration from dotted-key config ----

struct ScoreRuleSet {
  std::vector<PercentileRule> rules;
};

inline Tail tail_from_string(const std::string& s) {
  if (s == "low") return Tail::Low;
  if (s == "high") return Tail::High;
  if (s == "both") return Tail::Both;
  throw ValidationError("unknown percentile tail: " + s);
}

// Per-dataset image-score filtering strengths; defaults follow the OpenVid
// column, other known tags get their own defaults, all overridable via
// curation.scores.<tag>.<metric>.{tail,low,high}.
inline ScoreRuleSet score_rules_for(const Config& cfg, const std::string& tag) {
  struct Default {
    const char* metric;
    Tail tail;
    double low, high;
  };
  static const std::map<std::string, std::vector<Default>> defaults = {
      {"openvid",
       {{"clipiqa", Tail::Low, 0.03, 0}, {"ocr_area", Tail::High, 0, 0.15},
        {"nima", Tail::Low, 0.05, 0},    {"ic9600", Tail::Both, 0.10, 0.05}}},
      {"vidgen",
       {{"clipiqa", Tail::Low, 0.05, 0}, {"ocr_area", Tail::High, 0, 0.10},
        {"nima", Tail::Low, 0.05, 0},    {"ic9600", Tail::Both, 0.05, 0.10}}},
      {"webvid",
       {{"clipiqa", Tail::Low, 0.15, 0}, {"ocr_area", Tail::High, 0, 0.05},
        {"nima", Tail::Low, 0.10, 0},    {"ic9600", Tail::Both, 0.05, 0.10}}},
  };
  const auto it = defaults.find(tag);
  const auto& base = it != defaults.end() ? it->second : defaults.at("openvid");
  ScoreRuleSet out;
  for (const auto& d : base) {
    PercentileRule r;
    r.metric_name = d.metric;
    const std::string key = "curation.scores." + tag + "." + d.metric;
    r.tail = cfg.has(key + ".tail")
                 ? tail_from_string(cfg.get_string(key + ".tail", ""))
                 : d.tail;
    r.low_fraction = cfg.get_double(key + ".low", d.low);
    r.high_fraction = cfg.get_double(key + ".high", d.high);
    out.rules.push_back(std::move(r));
  }
  return out;
}

inline BasicFilterConfig basic_config(const Config& cfg) {
  BasicFilterConfig c;
  c.min_duration_s = cfg.get_double("curation.basic.min_duration_s", c.min_duration_s);
  c.max_duration_s = cfg.get_double("curation.basic.max_duration_s", c.max_duration_s);
  c.fps_min = cfg.get_double("curation.basic.fps_min", c.fps_min);
  c.fps_max = cfg.get_double("curation.basic.fps_max", c.fps_max);
  c.min_aspect_w_over_h =
      cfg.get_double("curation.basic.min_aspect_w_over_h", c.min_aspect_w_over_h);
  c.min_width_px =
      static_cast<int>(cfg.get_int("curation.basic.min_width_px", c.min_width_px));
  return c;
}

inline IdentityConfig identity_config(const Config& cfg) {
  IdentityConfig c;
  if (cfg.has("curation.identity.classes_file"))
    c.motionable_classes = load_motionable_classes(
        cfg.get_string("curation.identity.classes_file", ""));
  c.min_area_frac = cfg.get_double("curation.identity.min_area_frac", c.min_area_frac);
  c.max_area_frac = cfg.get_double("curation.identity.max_area_frac", c.max_area_frac);
  c.max_same_label =
      static_cast<int>(cfg.get_int("curation.identity.max_same_label", c.max_same_label));
  c.iframe_snap_frac =
      cfg.get_double("curation.identity.iframe_snap_frac", c.iframe_snap_frac);
  c.kmeans_min = static_cast<int>(cfg.get_int("curation.identity.kmeans_min", c.kmeans_min));
  c.kmeans_max = static_cast<int>(cfg.get_int("curation.identity.kmeans_max", c.kmeans_max));
  c.min_clip_frames = cfg.get_int("curation.identity.min_clip_frames", c.min_clip_frames);
  return c;
}

inline CycleConfig cycle_config(const Config& cfg) {
  CycleConfig c;
  c.threshold_frac = cfg.get_double("curation.cycle.threshold_frac", c.threshold_frac);
  c.viability_frac = cfg.get_double("curation.cycle.viability_frac", c.viability_frac);
  c.motion_low = cfg.get_double("curation.cycle.motion_low", c.motion_low);
  c.motion_high = cfg.get_double("curation.cycle.motion_high", c.motion_high);
  c.mask_tol_px = static_cast<int>(cfg.get_int("curation.cycle.mask_tol_px", c.mask_tol_px));
  return c;
}

inline BoxSamplerConfig miner_config(const Config& cfg) {
  BoxSamplerConfig c;
  c.attempts = static_cast<int>(cfg.get_int("miner.attempts", c.attempts));
  c.enter_fraction = cfg.get_double("miner.enter_fraction", c.enter_fraction);
  c.max_patterns_per_starter = static_cast<int>(
      cfg.get_int("miner.max_patterns_per_starter", c.max_patterns_per_starter));
  c.dedup_iou = cfg.get_double("miner.dedup_iou", c.dedup_iou);
  c.id_min_frac = cfg.get_double("miner.id_min_frac", c.id_min_frac);
  return c;
}

// ---- the pipeline ----

class Pipeline {
 public:
  Pipeline(PipelineDataset dataset, Config config, std::uint64_t seed,
           int workers)
      : data_(std::move(dataset)),
        cfg_(std::move(config)),
        seed_(seed),
        workers_(std::max(1, workers)),
        initial_count_(static_cast<std::int64_t>(data_.videos.size())) {
    sort_videos();
  }

  const PipelineDataset& dataset() const { return data_; }
  const std::vector<StageReport>& reports() const { return reports_; }
  const std::vector<VideoRecord>& rejects() const { return rejects_; }
  const std::vector<PatternRecord>& patterns() const { return patterns_; }
  std::int64_t initial_count() const { return initial_count_; }

  // Stage order per the curation pipeline; the camera/panoptic swap is a
  // config switch (pipeline.camera_before_identity).
  std::vector<std::string> stage_order() const {
    std::vector<std::string> order = {"basic", "image-scores", "scene",
                                      "identity", "camera", "cycle", "innout"};
    if (cfg_.get_bool("pipeline.camera_before_identity", false))
      std::swap(order[3], order[4]);
    return order;
  }

  StageReport run_stage(const std::string& name) {
    const std::int64_t input = static_cast<std::int64_t>(data_.videos.size());
    if (name == "basic") stage_basic();
    else if (name == "image-scores") stage_scores();
    else if (name == "scene") stage_scene();
    else if (name == "identity") stage_identity();
    else if (name == "camera") stage_camera();
    else if (name == "cycle") stage_cycle();
    else if (name == "innout") stage_innout();
    else throw ValidationError("unknown stage: " + name);
    sort_videos();
    const auto report = make_stage_report(
        name, input, static_cast<std::int64_t>(data_.videos.size()),
        initial_count_);
    reports_.push_back(report);
    return report;
  }

  void run_all() {
    for (const auto& name : stage_order()) {
      try {
        run_stage(name);
      } catch (const IoError& e) {
        throw IoError("stage '" + name + "' failed: " + e.what());
      } catch (const std::exception& e) {
        throw ValidationError("stage '" + name + "' failed: " + e.what());
      }
    }
  }

 private:
  void sort_videos() {
    std::sort(data_.videos.begin(), data_.videos.end(),
              [](const auto& a, const auto& b) { return a.video_id < b.video_id; });
  }

  void drop_video(VideoRecord record, const std::string& reason) {
    record.drop_reason = reason;
    rejects_.push_back(std::move(record));
  }

  // keep[i] false -> video i moves to rejects with its reason
  void apply_drops(const std::vector<std::optional<std::string>>& reasons) {
    std::vector<VideoRecord> kept;
    kept.reserve(data_.videos.size());
    std::set<std::string> dropped_ids;
    for (std::size_t i = 0; i < data_.videos.size(); ++i) {
      if (reasons[i]) {
        dropped_ids.insert(data_.videos[i].video_id);
        drop_video(std::move(data_.videos[i]), *reasons[i]);
      } else {
        kept.push_back(std::move(data_.videos[i]));
      }
    }
    data_.videos = std::move(kept);
    if (!dropped_ids.empty()) {
      std::erase_if(data_.tracks, [&](const TrackEntry& t) {
        return dropped_ids.count(t.video_id) > 0;
      });
      std::erase_if(data_.masks, [&](const MaskEntry& m) {
        return dropped_ids.count(m.video_id) > 0;
      });
      std::erase_if(data_.poses, [&](const PoseEntry& p) {
        return dropped_ids.count(p.video_id) > 0;
      });
    }
  }

  void stage_basic() {
    const auto cfg = basic_config(cfg_);
    std::vector<std::optional<std::string>> reasons(data_.videos.size());
    parallel_for(data_.videos.size(), workers_, [&](std::size_t i) {
      reasons[i] = basic_filter(data_.videos[i], cfg);
      if (reasons[i]) reasons[i] = "basic:" + *reasons[i];
    });
    apply_drops(reasons);
  }

  void stage_scores() {
    // group by dataset_tag; each metric is a dataset-wide percentile barrier
    std::map<std::string, std::vector<std::size_t>> by_tag;
    for (std::size_t i = 0; i < data_.videos.size(); ++i)
      by_tag[data_.videos[i].dataset_tag].push_back(i);
    std::vector<std::optional<std::string>> reasons(data_.videos.size());
    for (const auto& [tag, indices] : by_tag) {
      const auto rules = score_rules_for(cfg_, tag);
      for (const auto& rule : rules.rules) {
        std::vector<std::pair<std::string, double>> values;
        std::map<std::string, std::size_t> index_of;
        for (std::size_t i : indices) {
          if (reasons[i]) continue;  // sequential: survivors only
          const auto& v = data_.videos[i];
          auto it = v.scores.find(rule.metric_name);
          if (it == v.scores.end()) continue;
          values.emplace_back(v.video_id, it->second);
          index_of[v.video_id] = i;
        }
        if (values.empty()) continue;
        for (const auto& id : percentile_filter(values, rule))
          reasons[index_of[id]] = "image-scores:" + rule.metric_name;
      }
    }
    apply_drops(reasons);
  }

  void stage_scene() {
    std::vector<std::optional<std::string>> reasons(data_.videos.size());
    for (std::size_t i = 0; i < data_.videos.size(); ++i)
      if (!scene_filter_keep(data_.videos[i])) reasons[i] = "scene:multi_scene";
    apply_drops(reasons);
  }

  void stage_identity() {
    const auto idcfg = identity_config(cfg_);
    std::map<std::string, std::vector<std::size_t>> tracks_by_video;
    for (std::size_t t = 0; t < data_.tracks.size(); ++t)
      tracks_by_video[data_.tracks[t].video_id].push_back(t);

    std::vector<std::optional<std::string>> reasons(data_.videos.size());
    std::vector<std::set<std::size_t>> drop_track_sets(data_.videos.size());
    parallel_for(data_.videos.size(), workers_, [&](std::size_t i) {
      const auto& v = data_.videos[i];
      const auto starters = starter_frames(v.frame_count, v.iframe_indices, idcfg);
      if (starters.empty()) {
        reasons[i] = "identity:no_starter";
        return;
      }
      const std::set<std::int64_t> starter_set(starters.begin(), starters.end());
      auto it = tracks_by_video.find(v.video_id);
      std::vector<std::size_t> entries =
          it != tracks_by_video.end() ? it->second : std::vector<std::size_t>{};

      bool any_object = false;
      for (std::int64_t starter : starters) {
        std::map<std::string, int> label_counts;
        std::vector<std::size_t> surviving;
        for (std::size_t t : entries) {
          const auto& e = data_.tracks[t];
          if (e.starter_frame != starter) continue;
          bool keep = motionable_filter(e.track.class_label, idcfg);
          if (keep) {
            if (!e.track.first_frame_mask) {
              keep = false;
            } else {
              const auto& m = *e.track.first_frame_mask;
              const double frac =
                  double(mask_area(m)) / (double(m.width) * m.height);
              keep = area_filter(frac, idcfg);
            }
          }
          if (keep) {
            ++label_counts[e.track.class_label];
            surviving.push_back(t);
          } else {
            drop_track_sets[i].insert(t);
          }
        }
        for (const auto& [label, count] : label_counts) {
          if (count > idcfg.max_same_label) {
            reasons[i] = "identity:label_cap";
            return;
          }
        }
        if (!surviving.empty()) any_object = true;
      }
      // tracks at non-selected starters are dead weight
      for (std::size_t t : entries)
        if (!starter_set.count(data_.tracks[t].starter_frame))
          drop_track_sets[i].insert(t);
      if (!any_object) reasons[i] = "identity:no_object";
    });

    std::set<std::size_t> drop_tracks;
    for (const auto& s : drop_track_sets) drop_tracks.insert(s.begin(), s.end());
    remove_tracks(drop_tracks);
    apply_drops(reasons);
  }

  void stage_camera() {
    const double rot_high = cfg_.get_double("curation.camera.rot_high", 0.40);
    const double trans_high = cfg_.get_double("curation.camera.trans_high", 0.40);
    const double focal_high = cfg_.get_double("curation.camera.focal_high", 0.10);
    std::map<std::string, const PoseEntry*> poses_by_video;
    for (const auto& p : data_.poses) poses_by_video[p.video_id] = &p;

    std::vector<std::optional<std::string>> reasons(data_.videos.size());
    std::vector<CameraSeriesStats> stats(data_.videos.size());
    parallel_for(data_.videos.size(), workers_, [&](std::size_t i) {
      auto it = poses_by_video.find(data_.videos[i].video_id);
      if (it == poses_by_video.end() || it->second->samples.size() < 2) {
        reasons[i] = "camera:missing_poses";
        return;
      }
      stats[i] = camera_series_stats(it->second->samples);
    });

    auto cut = [&](const char* metric, double fraction, auto getter) {
      std::vector<std::pair<std::string, double>> values;
      std::map<std::string, std::size_t> index_of;
      for (std::size_t i = 0; i < data_.videos.size(); ++i) {
        if (reasons[i]) continue;
        values.emplace_back(data_.videos[i].video_id, getter(stats[i]));
        index_of[data_.videos[i].video_id] = i;
      }
      if (values.empty() || fraction <= 0) return;
      PercentileRule rule{metric, Tail::High, 0, fraction};
      for (const auto& id : percentile_filter(values, rule))
        reasons[index_of[id]] = std::string("camera:") + metric;
    };
    cut("rotation", rot_high, [](const CameraSeriesStats& s) { return s.rotation_err; });
    cut("translation", trans_high,
        [](const CameraSeriesStats& s) { return s.translation_err; });
    cut("focal", focal_high, [](const CameraSeriesStats& s) { return s.focal_change; });
    apply_drops(reasons);
  }

  void stage_cycle() {
    if (data_.tracks.empty() && !data_.videos.empty())
      throw IoError("cycle stage: no tracks available");
    const auto cyc = cycle_config(cfg_);
    const int track_h = static_cast<int>(cfg_.get_int("curation.cycle.track_h", 384));
    const int track_w = static_cast<int>(cfg_.get_int("curation.cycle.track_w", 512));
    (void)track_w;

    std::map<std::tuple<std::string, std::int64_t, int>, std::map<std::int64_t, MaskRLE>>
        masks_by_key;
    for (const auto& m : data_.masks)
      masks_by_key[{m.video_id, m.starter_frame, m.object_id}][m.frame] = m.mask;

    std::vector<char> track_dead(data_.tracks.size(), 0);
    std::vector<std::optional<MotionStats>> motion(data_.tracks.size());
    parallel_for(data_.tracks.size(), workers_, [&](std::size_t t) {
      auto& e = data_.tracks[t];
      const auto original = static_cast<std::int64_t>(e.track.points.size());
      auto retained = roundtrip_filter(e.track, track_h, cyc.threshold_frac);
      if (!object_viable(original, static_cast<std::int64_t>(retained.size()),
                         cyc.viability_frac)) {
        track_dead[t] = 1;
        return;
      }
      e.track.points = std::move(retained);
      auto mit = masks_by_key.find({e.video_id, e.starter_frame, e.track.object_id});
      if (mit != masks_by_key.end() && !mit->second.empty()) {
        const auto& dims = mit->second.begin()->second;
        e.track.points = mask_refine(e.track, mit->second, dims.width,
                                     dims.height, cyc.mask_tol_px);
      }
      if (e.track.points.empty()) {
        track_dead[t] = 1;
        return;
      }
      try {
        motion[t] = motion_stats(e.track, track_h);
      } catch (const ValidationError&) {
        track_dead[t] = 1;
      }
    });

    // dataset-wide motion percentile cut over surviving objects
    if (cyc.motion_low > 0 || cyc.motion_high > 0) {
      std::vector<std::pair<std::string, double>> values;
      std::map<std::string, std::size_t> index_of;
      for (std::size_t t = 0; t < data_.tracks.size(); ++t) {
        if (track_dead[t] || !motion[t]) continue;
        const auto& e = data_.tracks[t];
        const std::string id = e.video_id + "/" + std::to_string(e.starter_frame) +
                               "/" + std::to_string(e.track.object_id);
        values.emplace_back(id, motion[t]->mean_step);
        index_of[id] = t;
      }
      if (!values.empty()) {
        PercentileRule rule{"motion", Tail::Both, cyc.motion_low, cyc.motion_high};
        for (const auto& id : percentile_filter(values, rule))
          track_dead[index_of[id]] = 1;
      }
    }

    std::set<std::size_t> drop;
    for (std::size_t t = 0; t < data_.tracks.size(); ++t)
      if (track_dead[t]) drop.insert(t);
    std::set<std::string> alive;
    for (std::size_t t = 0; t < data_.tracks.size(); ++t)
      if (!track_dead[t]) alive.insert(data_.tracks[t].video_id);
    remove_tracks(drop);

    std::vector<std::optional<std::string>> reasons(data_.videos.size());
    for (std::size_t i = 0; i < data_.videos.size(); ++i)
      if (!alive.count(data_.videos[i].video_id)) reasons[i] = "cycle:no_object";
    apply_drops(reasons);
  }

  void stage_innout() {
    const auto mcfg = miner_config(cfg_);
    const int track_h = static_cast<int>(cfg_.get_int("curation.cycle.track_h", 384));
    const int track_w = static_cast<int>(cfg_.get_int("curation.cycle.track_w", 512));
    const bool coords_native = cfg_.get_bool("miner.coords_native", false);

    std::map<std::string, std::map<std::int64_t, std::vector<std::size_t>>> by_video;
    for (std::size_t t = 0; t < data_.tracks.size(); ++t)
      by_video[data_.tracks[t].video_id][data_.tracks[t].starter_frame].push_back(t);

    std::vector<std::optional<std::string>> reasons(data_.videos.size());
    std::vector<std::vector<PatternRecord>> mined(data_.videos.size());
    parallel_for(data_.videos.size(), workers_, [&](std::size_t i) {
      const auto& v = data_.videos[i];
      auto it = by_video.find(v.video_id);
      if (it == by_video.end()) {
        reasons[i] = "innout:no_track";
        return;
      }
      for (const auto& [starter, entries] : it->second) {
        std::vector<ObjectTrack> tracks;
        tracks.reserve(entries.size());
        for (std::size_t t : entries) {
          ObjectTrack track = data_.tracks[t].track;
          if (!coords_native) {
            track = rescale_track(track, track_w, track_h, v.width_px, v.height_px);
            if (track.first_frame_mask)
              track.first_frame_mask =
                  mask_resize_nearest(*track.first_frame_mask, v.width_px, v.height_px);
          }
          tracks.push_back(std::move(track));
        }
        auto rng = make_rng(derive_seed(derive_seed(seed_, v.video_id),
                                        static_cast<std::uint64_t>(starter)));
        auto records = mine_patterns(v, starter, tracks, mcfg, rng);
        for (auto& r : records) mined[i].push_back(std::move(r));
      }
      if (mined[i].empty()) reasons[i] = "innout:no_pattern";
    });

    patterns_.clear();
    for (std::size_t i = 0; i < data_.videos.size(); ++i)
      for (auto& r : mined[i]) patterns_.push_back(std::move(r));
    apply_drops(reasons);
  }

  void remove_tracks(const std::set<std::size_t>& indices) {
    if (indices.empty()) return;
    std::vector<TrackEntry> kept;
    kept.reserve(data_.tracks.size() - indices.size());
    for (std::size_t t = 0; t < data_.tracks.size(); ++t)
      if (!indices.count(t)) kept.push_back(std::move(data_.tracks[t]));
    data_.tracks = std::move(kept);
  }

  PipelineDataset data_;
  Config cfg_;
  std::uint64_t seed_;
  int workers_;
  std::int64_t initial_count_;
  std::vector<StageReport> reports_;
  std::vector<VideoRecord> rejects_;
  std::vector<PatternRecord> patterns_;
};

// ---- filesystem driver ----

struct RunPaths {
  std::filesystem::path input_dir;
  std::filesystem::path output_dir;
};

inline PipelineDataset load_dataset(const std::filesystem::path& dir) {
  PipelineDataset d;
  d.videos = manifest_read_as<VideoRecord>(dir / "videos.jsonl");
  if (std::filesystem::exists(dir / "tracks.jsonl"))
    d.tracks = manifest_read_as<TrackEntry>(dir / "tracks.jsonl");
  if (std::filesystem::exists(dir / "masks.jsonl"))
    d.masks = manifest_read_as<MaskEntry>(dir / "masks.jsonl");
  if (std::filesystem::exists(dir / "poses.jsonl"))
    d.poses = manifest_read_as<PoseEntry>(dir / "poses.jsonl");
  return d;
}

// Executes every stage and writes final/rejects/patterns/stats manifests plus
// a resolved-config snapshot.
inline void run_all_to_disk(const RunPaths& paths, const Config& cfg,
                            std::uint64_t seed, int workers) {
  Pipeline pipe(load_dataset(paths.input_dir), cfg, seed, workers);
  std::filesystem::create_directories(paths.output_dir);
  pipe.run_all();

  manifest_write_as(paths.output_dir / "final.videos.jsonl", pipe.dataset().videos);
  manifest_write_as(paths.output_dir / "rejects.jsonl", pipe.rejects());
  manifest_write_as(paths.output_dir / "patterns.jsonl", pipe.patterns());
  manifest_write_as(paths.output_dir / "stats.jsonl", pipe.reports());
  cfg.dump(paths.output_dir / "resolved_config.txt");

  std::ofstream table(paths.output_dir / "stats.txt", std::ios::trunc);
  table << stats_report(pipe.reports());
}

}  // namespace innout

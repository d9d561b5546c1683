#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "innout/error.hpp"
#include "innout/rle.hpp"

namespace innout {

using json = nlohmann::json;

// Per-video metadata and scores; the unit of pipeline flow.
struct VideoRecord {
  std::string video_id;
  std::string dataset_tag;
  int width_px = 0;
  int height_px = 0;
  double fps = 0.0;
  double duration_s = 0.0;
  std::int64_t frame_count = 0;
  int scene_count = 0;
  std::vector<std::int64_t> iframe_indices;
  std::map<std::string, double> scores;
  std::optional<std::string> caption;
  std::optional<std::string> drop_reason;
  json extra = json::object();  // unknown manifest fields, preserved verbatim

  double aspect_ratio() const { return double(width_px) / height_px; }

  void validate() const {
    if (video_id.empty()) throw ValidationError("VideoRecord: empty video_id");
    if (width_px <= 0 || height_px <= 0)
      throw ValidationError("VideoRecord " + video_id + ": non-positive dims");
    if (fps <= 0 || duration_s <= 0)
      throw ValidationError("VideoRecord " + video_id + ": non-positive fps/duration");
    if (frame_count <= 0)
      throw ValidationError("VideoRecord " + video_id + ": non-positive frame_count");
    if (std::abs(double(frame_count) - fps * duration_s) > 1.0 + 1e-9)
      throw ValidationError("VideoRecord " + video_id +
                            ": frame_count inconsistent with fps*duration");
    for (std::size_t i = 0; i < iframe_indices.size(); ++i) {
      if (iframe_indices[i] >= frame_count ||
          (i > 0 && iframe_indices[i] <= iframe_indices[i - 1]))
        throw ValidationError("VideoRecord " + video_id + ": bad iframe_indices");
    }
  }
};

struct TrackPosition {
  double x = 0.0;
  double y = 0.0;
  bool visible = false;
};

// One tracked point across the clip, in full-frame coordinates at tracking
// resolution.
struct TrackPoint {
  int point_id = 0;
  std::vector<TrackPosition> positions;
  std::optional<std::array<double, 2>> backtracked_start;
};

// One semantic object's tracking points (forward + back-tracked).
struct ObjectTrack {
  int object_id = 0;
  std::string class_label;
  std::vector<TrackPoint> points;
  std::optional<MaskRLE> first_frame_mask;

  std::size_t frame_count() const {
    return points.empty() ? 0 : points.front().positions.size();
  }

  void validate() const {
    if (points.empty()) throw ValidationError("ObjectTrack: no points");
    const std::size_t n = points.front().positions.size();
    for (const auto& p : points) {
      if (p.positions.size() != n)
        throw ValidationError("ObjectTrack: inconsistent frame counts");
      for (const auto& pos : p.positions)
        if (!std::isfinite(pos.x) || !std::isfinite(pos.y))
          throw ValidationError("ObjectTrack: non-finite coordinate");
    }
  }
};

// First-frame <-> canvas expansion geometry (B_canvas).
struct CanvasSpec {
  int frame_w = 0;
  int frame_h = 0;
  int expand_top = 0;
  int expand_left = 0;
  int expand_bottom = 0;
  int expand_right = 0;

  int canvas_w() const { return frame_w + expand_left + expand_right; }
  int canvas_h() const { return frame_h + expand_top + expand_bottom; }

  void validate() const {
    if (frame_w <= 0 || frame_h <= 0)
      throw ValidationError("CanvasSpec: non-positive frame dims");
    if (expand_top < 0 || expand_left < 0 || expand_bottom < 0 || expand_right < 0)
      throw ValidationError("CanvasSpec: negative expansion");
  }
};

enum class PatternKind { FrameIn, FrameOut };

inline std::string to_string(PatternKind k) {
  return k == PatternKind::FrameIn ? "frame_in" : "frame_out";
}

inline PatternKind pattern_kind_from_string(const std::string& s) {
  if (s == "frame_in") return PatternKind::FrameIn;
  if (s == "frame_out") return PatternKind::FrameOut;
  throw ValidationError("unknown pattern kind: " + s);
}

struct IdCrop {
  CanvasBox rect;
  MaskRLE mask;  // cropped to rect
};

// A mined Frame In / Frame Out instance.
struct PatternRecord {
  std::string video_id;
  std::int64_t starter_frame = 0;
  CanvasBox box;
  int object_id = 0;
  PatternKind kind = PatternKind::FrameOut;
  std::optional<IdCrop> id_crop;
  double enter_fraction = 0.5;  // threshold the FrameIn test was mined with

  void validate(int frame_w, int frame_h) const {
    if (kind == PatternKind::FrameIn && !id_crop)
      throw ValidationError("PatternRecord: FrameIn without id_crop");
    if (box.x0 < 0 || box.y0 < 0 || box.x1 > frame_w || box.y1 > frame_h ||
        box.x0 >= box.x1 || box.y0 >= box.y1)
      throw ValidationError("PatternRecord: box outside frame");
  }
};

struct EmbeddingVec {
  std::vector<double> values;

  int dim() const { return static_cast<int>(values.size()); }

  double norm() const {
    double s = 0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }

  EmbeddingVec normalized() const {
    const double n = norm();
    if (n <= 1e-12) throw ValidationError("EmbeddingVec: zero norm");
    EmbeddingVec out;
    out.values.reserve(values.size());
    for (double v : values) out.values.push_back(v / n);
    return out;
  }
};

inline double dot(const EmbeddingVec& a, const EmbeddingVec& b) {
  if (a.values.size() != b.values.size())
    throw ValidationError("EmbeddingVec: dimension mismatch");
  double s = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
  return s;
}

// One estimated camera pose sample.
struct PoseSample {
  std::int64_t frame_index = 0;
  std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
  std::array<double, 3> translation{0, 0, 0};
  double focal = 1.0;

  void validate() const {
    // R^T R == I and det(R) == 1, within 1e-6
    const auto& r = rotation;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double dotc = 0;
        for (int k = 0; k < 3; ++k) dotc += r[k * 3 + i] * r[k * 3 + j];
        if (std::abs(dotc - (i == j ? 1.0 : 0.0)) > 1e-6)
          throw ValidationError("PoseSample: rotation not orthonormal");
      }
    }
    const double det = r[0] * (r[4] * r[8] - r[5] * r[7]) -
                       r[1] * (r[3] * r[8] - r[5] * r[6]) +
                       r[2] * (r[3] * r[7] - r[4] * r[6]);
    if (std::abs(det - 1.0) > 1e-6)
      throw ValidationError("PoseSample: det(R) != 1");
    if (focal <= 0) throw ValidationError("PoseSample: non-positive focal");
  }
};

// ---- JSON serialization (manifest schemas) ----

inline void to_json(json& j, const MaskRLE& m) {
  j = json{{"width", m.width}, {"height", m.height}, {"counts", m.counts}};
}
inline void from_json(const json& j, MaskRLE& m) {
  j.at("width").get_to(m.width);
  j.at("height").get_to(m.height);
  j.at("counts").get_to(m.counts);
}

inline void to_json(json& j, const CanvasBox& b) {
  j = json{{"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}};
}
inline void from_json(const json& j, CanvasBox& b) {
  j.at("x0").get_to(b.x0);
  j.at("y0").get_to(b.y0);
  j.at("x1").get_to(b.x1);
  j.at("y1").get_to(b.y1);
}

inline void to_json(json& j, const CanvasSpec& s) {
  j = json{{"frame_w", s.frame_w},         {"frame_h", s.frame_h},
           {"expand_top", s.expand_top},   {"expand_left", s.expand_left},
           {"expand_bottom", s.expand_bottom}, {"expand_right", s.expand_right}};
}
inline void from_json(const json& j, CanvasSpec& s) {
  j.at("frame_w").get_to(s.frame_w);
  j.at("frame_h").get_to(s.frame_h);
  j.at("expand_top").get_to(s.expand_top);
  j.at("expand_left").get_to(s.expand_left);
  j.at("expand_bottom").get_to(s.expand_bottom);
  j.at("expand_right").get_to(s.expand_right);
}

inline void to_json(json& j, const VideoRecord& r) {
  j = r.extra;
  j["video_id"] = r.video_id;
  j["dataset_tag"] = r.dataset_tag;
  j["width_px"] = r.width_px;
  j["height_px"] = r.height_px;
  j["fps"] = r.fps;
  j["duration_s"] = r.duration_s;
  j["frame_count"] = r.frame_count;
  j["scene_count"] = r.scene_count;
  j["iframe_indices"] = r.iframe_indices;
  j["scores"] = r.scores;
  if (r.caption) j["caption"] = *r.caption;
  if (r.drop_reason) j["drop_reason"] = *r.drop_reason;
}

inline void from_json(const json& j, VideoRecord& r) {
  j.at("video_id").get_to(r.video_id);
  r.dataset_tag = j.value("dataset_tag", std::string{});
  j.at("width_px").get_to(r.width_px);
  j.at("height_px").get_to(r.height_px);
  j.at("fps").get_to(r.fps);
  j.at("duration_s").get_to(r.duration_s);
  j.at("frame_count").get_to(r.frame_count);
  r.scene_count = j.value("scene_count", 0);
  if (j.contains("iframe_indices")) j.at("iframe_indices").get_to(r.iframe_indices);
  if (j.contains("scores")) j.at("scores").get_to(r.scores);
  if (j.contains("caption")) r.caption = j.at("caption").get<std::string>();
  if (j.contains("drop_reason")) r.drop_reason = j.at("drop_reason").get<std::string>();
  static const char* known[] = {"video_id",   "dataset_tag", "width_px",
                                "height_px",  "fps",         "duration_s",
                                "frame_count", "scene_count", "iframe_indices",
                                "scores",     "caption",     "drop_reason"};
  r.extra = json::object();
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool is_known = false;
    for (const char* k : known)
      if (it.key() == k) { is_known = true; break; }
    if (!is_known) r.extra[it.key()] = it.value();
  }
}

inline void to_json(json& j, const TrackPoint& p) {
  json xs = json::array(), ys = json::array(), vis = json::array();
  for (const auto& pos : p.positions) {
    xs.push_back(pos.x);
    ys.push_back(pos.y);
    vis.push_back(pos.visible);
  }
  j = json{{"point_id", p.point_id}, {"x", xs}, {"y", ys}, {"visible", vis}};
  if (p.backtracked_start)
    j["backtracked_start"] = {(*p.backtracked_start)[0], (*p.backtracked_start)[1]};
}

inline void from_json(const json& j, TrackPoint& p) {
  j.at("point_id").get_to(p.point_id);
  const auto& xs = j.at("x");
  const auto& ys = j.at("y");
  const auto& vis = j.at("visible");
  if (xs.size() != ys.size() || xs.size() != vis.size())
    throw ValidationError("TrackPoint: ragged position arrays");
  p.positions.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    p.positions[i] = {xs[i].get<double>(), ys[i].get<double>(), vis[i].get<bool>()};
  if (j.contains("backtracked_start")) {
    const auto& b = j.at("backtracked_start");
    p.backtracked_start = std::array<double, 2>{b.at(0).get<double>(), b.at(1).get<double>()};
  }
}

inline void to_json(json& j, const ObjectTrack& t) {
  j = json{{"object_id", t.object_id},
           {"class_label", t.class_label},
           {"points", t.points}};
  if (t.first_frame_mask) j["first_frame_mask"] = *t.first_frame_mask;
}

inline void from_json(const json& j, ObjectTrack& t) {
  j.at("object_id").get_to(t.object_id);
  j.at("class_label").get_to(t.class_label);
  j.at("points").get_to(t.points);
  if (j.contains("first_frame_mask"))
    t.first_frame_mask = j.at("first_frame_mask").get<MaskRLE>();
}

inline void to_json(json& j, const PoseSample& p) {
  j = json{{"frame_index", p.frame_index},
           {"rotation", p.rotation},
           {"translation", p.translation},
           {"focal", p.focal}};
}

inline void from_json(const json& j, PoseSample& p) {
  j.at("frame_index").get_to(p.frame_index);
  j.at("rotation").get_to(p.rotation);
  j.at("translation").get_to(p.translation);
  j.at("focal").get_to(p.focal);
}

inline void to_json(json& j, const PatternRecord& r) {
  j = json{{"video_id", r.video_id},
           {"starter_frame", r.starter_frame},
           {"box", r.box},
           {"object_id", r.object_id},
           {"kind", to_string(r.kind)},
           {"enter_fraction", r.enter_fraction}};
  if (r.id_crop) {
    j["id_crop"] = json{{"rect", r.id_crop->rect}, {"mask", r.id_crop->mask}};
  }
}

inline void from_json(const json& j, PatternRecord& r) {
  j.at("video_id").get_to(r.video_id);
  j.at("starter_frame").get_to(r.starter_frame);
  j.at("box").get_to(r.box);
  j.at("object_id").get_to(r.object_id);
  r.kind = pattern_kind_from_string(j.at("kind").get<std::string>());
  r.enter_fraction = j.value("enter_fraction", 0.5);
  if (j.contains("id_crop")) {
    IdCrop c;
    j.at("id_crop").at("rect").get_to(c.rect);
    j.at("id_crop").at("mask").get_to(c.mask);
    r.id_crop = std::move(c);
  }
}

inline void to_json(json& j, const EmbeddingVec& e) {
  j = json{{"dim", e.dim()}, {"values", e.values}};
}

inline void from_json(const json& j, EmbeddingVec& e) {
  j.at("values").get_to(e.values);
  if (j.contains("dim") && j.at("dim").get<int>() != e.dim())
    throw ValidationError("EmbeddingVec: dim field disagrees with values");
}

}  // namespace innout

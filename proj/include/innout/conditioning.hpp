#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "innout/error.hpp"
#include "innout/rng.hpp"
#include "innout/types.hpp"

namespace innout {

using Rgb = std::array<std::uint8_t, 3>;

struct Raster {
  int w = 0;
  int h = 0;
  std::vector<Rgb> px;

  static Raster filled(int w, int h, Rgb color) {
    if (w <= 0 || h <= 0) throw ValidationError("Raster: non-positive dims");
    Raster r;
    r.w = w;
    r.h = h;
    r.px.assign(std::size_t(w) * h, color);
    return r;
  }

  Rgb& at(int x, int y) { return px[std::size_t(y) * w + x]; }
  const Rgb& at(int x, int y) const { return px[std::size_t(y) * w + x]; }

  bool operator==(const Raster&) const = default;
};

inline void write_ppm(const std::filesystem::path& path, const Raster& img) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write ppm: " + path.string());
  out << "P6\n" << img.w << " " << img.h << "\n255\n";
  for (const auto& p : img.px) out.write(reinterpret_cast<const char*>(p.data()), 3);
  if (!out) throw IoError("ppm write failed: " + path.string());
}

struct MotionRasterConfig {
  int box_side_base = 6;  // px at reference height 384
  int reference_height = 384;
  int dilation_kernel = 3;  // odd square kernel
  int dilation_iters = 1;
  std::vector<Rgb> palette;  // empty -> generated hues

  void validate() const {
    if (box_side_base <= 0) throw ValidationError("MotionRasterConfig: box side");
    if (dilation_kernel < 1 || dilation_kernel % 2 == 0)
      throw ValidationError("MotionRasterConfig: kernel must be odd");
  }
};

inline Rgb hsv_to_rgb(double h_deg, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(h_deg, 360.0) / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = v - c;
  auto to8 = [](double t) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(t, 0.0, 1.0) * 255));
  };
  return {to8(r + m), to8(g + m), to8(b + m)};
}

// Evenly spaced full-saturation hues; distinct for n <= 64.
inline std::vector<Rgb> palette_for_objects(int n,
                                            const MotionRasterConfig& cfg = {}) {
  if (n < 1) throw ValidationError("palette_for_objects: n must be >= 1");
  if (!cfg.palette.empty()) {
    if (n > static_cast<int>(cfg.palette.size()))
      throw ValidationError("palette_for_objects: configured palette too small");
    return {cfg.palette.begin(), cfg.palette.begin() + n};
  }
  if (n > 64) throw ValidationError("palette_for_objects: n exceeds capacity 64");
  std::vector<Rgb> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(hsv_to_rgb(360.0 * i / n, 1.0, 1.0));
  return out;
}

namespace detail {

// one dilation pass with a square kernel
inline void dilate_once(std::vector<std::uint8_t>& layer, int w, int h,
                        int kernel) {
  const int r = kernel / 2;
  std::vector<std::uint8_t> out(layer.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!layer[std::size_t(y) * w + x]) continue;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -r; dx <= r; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= w) continue;
          out[std::size_t(yy) * w + xx] = 1;
        }
      }
    }
  }
  layer.swap(out);
}

}  // namespace detail

// Per-frame color rasters of the tracked points: filled squares scaled with
// frame height, then per-object dilation; later objects overwrite earlier.
inline std::vector<Raster> rasterize_motion(std::span<const ObjectTrack> tracks,
                                            int frame_w, int frame_h,
                                            int frame_count,
                                            const MotionRasterConfig& cfg = {}) {
  cfg.validate();
  if (frame_w <= 0 || frame_h <= 0)
    throw ValidationError("rasterize_motion: zero frame dims");
  const int side = static_cast<int>(
      std::llround(double(cfg.box_side_base) * frame_h / cfg.reference_height));
  const auto colors = palette_for_objects(
      std::max<int>(1, static_cast<int>(tracks.size())), cfg);

  std::vector<Raster> frames(frame_count, Raster::filled(frame_w, frame_h, {0, 0, 0}));
  std::vector<std::uint8_t> layer;
  for (int f = 0; f < frame_count; ++f) {
    for (std::size_t oi = 0; oi < tracks.size(); ++oi) {
      const auto& track = tracks[oi];
      if (f >= static_cast<int>(track.frame_count())) continue;
      layer.assign(std::size_t(frame_w) * frame_h, 0);
      bool any = false;
      for (const auto& p : track.points) {
        const auto& pos = p.positions[f];
        if (!pos.visible) continue;
        any = true;
        // rounding ties toward top-left
        const int cx = static_cast<int>(std::ceil(pos.x - 0.5));
        const int cy = static_cast<int>(std::ceil(pos.y - 0.5));
        const int x_begin = cx - side / 2;
        const int y_begin = cy - side / 2;
        for (int y = std::max(0, y_begin);
             y < std::min(frame_h, y_begin + side); ++y)
          for (int x = std::max(0, x_begin);
               x < std::min(frame_w, x_begin + side); ++x)
            layer[std::size_t(y) * frame_w + x] = 1;
      }
      if (!any) continue;
      for (int it = 0; it < cfg.dilation_iters; ++it)
        detail::dilate_once(layer, frame_w, frame_h, cfg.dilation_kernel);
      auto& img = frames[f];
      for (std::size_t i = 0; i < layer.size(); ++i)
        if (layer[i]) img.px[i] = colors[oi];
    }
  }
  return frames;
}

// Sparse-motion augmentation: drop points independently, always keeping at
// least one per object (the lowest point_id when all are drawn for drop).
inline std::vector<ObjectTrack> drop_points(std::span<const ObjectTrack> tracks,
                                            double drop_prob, Rng& rng) {
  if (drop_prob < 0 || drop_prob >= 1)
    throw ValidationError("drop_points: probability outside [0,1)");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ObjectTrack> out;
  out.reserve(tracks.size());
  for (const auto& track : tracks) {
    ObjectTrack t = track;
    t.points.clear();
    for (const auto& p : track.points)
      if (unit(rng) >= drop_prob) t.points.push_back(p);
    if (t.points.empty() && !track.points.empty()) {
      auto lowest = std::min_element(
          track.points.begin(), track.points.end(),
          [](const auto& a, const auto& b) { return a.point_id < b.point_id; });
      t.points.push_back(*lowest);
    }
    out.push_back(std::move(t));
  }
  return out;
}

// tau_canvas on coordinates: shift into canvas space.
inline std::array<double, 2> canvas_expand(const CanvasSpec& spec, double x,
                                           double y) {
  spec.validate();
  return {x + spec.expand_left, y + spec.expand_top};
}

// tau_canvas on rasters: zero-pad the first-frame image into the canvas.
inline Raster canvas_expand_raster(const CanvasSpec& spec, const Raster& img) {
  spec.validate();
  if (img.w != spec.frame_w || img.h != spec.frame_h)
    throw ValidationError("canvas_expand_raster: raster dims != frame dims");
  Raster out = Raster::filled(spec.canvas_w(), spec.canvas_h(), {0, 0, 0});
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      out.at(x + spec.expand_left, y + spec.expand_top) = img.at(x, y);
  return out;
}

// Inverse of canvas_expand_raster: recover the first-frame rectangle.
inline Raster crop_back(const Raster& canvas, const CanvasSpec& spec) {
  spec.validate();
  if (canvas.w != spec.canvas_w() || canvas.h != spec.canvas_h())
    throw ValidationError("crop_back: raster dims != canvas dims");
  Raster out = Raster::filled(spec.frame_w, spec.frame_h, {0, 0, 0});
  for (int y = 0; y < spec.frame_h; ++y)
    for (int x = 0; x < spec.frame_w; ++x)
      out.at(x, y) = canvas.at(x + spec.expand_left, y + spec.expand_top);
  return out;
}

struct IdPlacement {
  double scale = 1.0;
  CanvasBox paste;  // in canvas coordinates
};

// Letterbox the ID crop into the canvas: uniform scale, centered, white pad.
inline IdPlacement id_reference_placement(int crop_w, int crop_h, int canvas_w,
                                          int canvas_h) {
  if (crop_w <= 0 || crop_h <= 0 || canvas_w <= 0 || canvas_h <= 0)
    throw ValidationError("id_reference_placement: non-positive dims");
  const double scale =
      std::min(double(canvas_w) / crop_w, double(canvas_h) / crop_h);
  const int sw = static_cast<int>(std::llround(crop_w * scale));
  const int sh = static_cast<int>(std::llround(crop_h * scale));
  const int x0 = (canvas_w - sw) / 2;
  const int y0 = (canvas_h - sh) / 2;
  return {scale, CanvasBox{x0, y0, x0 + sw, y0 + sh}};
}

// White placeholder standing in for the ID reference in Frame Out cases.
inline Raster id_placeholder(int canvas_w, int canvas_h) {
  return Raster::filled(canvas_w, canvas_h, {255, 255, 255});
}

struct SpeedAugment {
  int stride = 1;
  std::vector<std::int64_t> source_indices;
};

// With probability prob fetch at double speed (stride 2); falls back to
// stride 1 when the source clip is too short.
inline SpeedAugment speed_augment(std::int64_t needed_frames,
                                  std::int64_t source_frames, double prob,
                                  Rng& rng) {
  if (needed_frames <= 0) throw ValidationError("speed_augment: needed_frames");
  if (source_frames < needed_frames)
    throw ValidationError("speed_augment: source shorter than needed");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int stride = unit(rng) < prob ? 2 : 1;
  if (stride == 2 && 2 * (needed_frames - 1) + 1 > source_frames) stride = 1;
  SpeedAugment out;
  out.stride = stride;
  out.source_indices.reserve(needed_frames);
  for (std::int64_t i = 0; i < needed_frames; ++i)
    out.source_indices.push_back(i * stride);
  return out;
}

struct DropoutFlags {
  bool drop_text = false;
  bool drop_first_frame = false;
  bool drop_id = false;
};

// Classifier-free-guidance style condition dropout; three independent draws.
inline DropoutFlags dropout_flags(Rng& rng, double p_text = 0.05,
                                  double p_frame = 0.05, double p_id = 0.15) {
  for (double p : {p_text, p_frame, p_id})
    if (p < 0 || p > 1) throw ValidationError("dropout_flags: bad probability");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DropoutFlags f;
  f.drop_text = unit(rng) < p_text;
  f.drop_first_frame = unit(rng) < p_frame;
  f.drop_id = unit(rng) < p_id;
  return f;
}

struct ChannelSlice {
  std::string name;
  int begin = 0;
  int end = 0;
};

struct ZeroSlice {
  std::string channel;
  int frame_begin = 0;  // latent frame range [begin, end) filled with placeholder
  int frame_end = 0;
};

// Frame/channel/position plan for the conditioning tensor: channel-wise
// [noisy latent | first frame | motion] on every video frame, plus an
// appended ID frame whose non-ID channels are placeholders and whose
// position-encoding origin copies the first video frame.
struct LayoutDescriptor {
  int latent_frames = 0;
  int latent_h = 0;
  int latent_w = 0;
  std::vector<ChannelSlice> channel_slices;
  std::optional<int> id_frame_index;
  std::vector<std::array<int, 3>> pe_index_map;  // per-frame (t, y, x) origin
  std::vector<ZeroSlice> zero_slices;
  std::array<int, 2> compression{1, 1};  // (temporal, spatial)
  std::vector<std::string> token_order{"text", "video", "id"};

  int total_channels() const {
    int c = 0;
    for (const auto& s : channel_slices) c = std::max(c, s.end);
    return c;
  }
};

inline void to_json(json& j, const ChannelSlice& s) {
  j = json{{"name", s.name}, {"begin", s.begin}, {"end", s.end}};
}
inline void from_json(const json& j, ChannelSlice& s) {
  j.at("name").get_to(s.name);
  j.at("begin").get_to(s.begin);
  j.at("end").get_to(s.end);
}
inline void to_json(json& j, const ZeroSlice& s) {
  j = json{{"channel", s.channel},
           {"frame_begin", s.frame_begin},
           {"frame_end", s.frame_end}};
}
inline void from_json(const json& j, ZeroSlice& s) {
  j.at("channel").get_to(s.channel);
  j.at("frame_begin").get_to(s.frame_begin);
  j.at("frame_end").get_to(s.frame_end);
}
inline void to_json(json& j, const LayoutDescriptor& d) {
  j = json{{"latent_frames", d.latent_frames},
           {"latent_h", d.latent_h},
           {"latent_w", d.latent_w},
           {"channel_slices", d.channel_slices},
           {"pe_index_map", d.pe_index_map},
           {"zero_slices", d.zero_slices},
           {"compression", d.compression},
           {"token_order", d.token_order}};
  if (d.id_frame_index) j["id_frame_index"] = *d.id_frame_index;
}
inline void from_json(const json& j, LayoutDescriptor& d) {
  j.at("latent_frames").get_to(d.latent_frames);
  j.at("latent_h").get_to(d.latent_h);
  j.at("latent_w").get_to(d.latent_w);
  j.at("channel_slices").get_to(d.channel_slices);
  j.at("pe_index_map").get_to(d.pe_index_map);
  j.at("zero_slices").get_to(d.zero_slices);
  j.at("compression").get_to(d.compression);
  j.at("token_order").get_to(d.token_order);
  if (j.contains("id_frame_index"))
    d.id_frame_index = j.at("id_frame_index").get<int>();
}

inline LayoutDescriptor plan_conditioning_layout(const CanvasSpec& spec,
                                                 int pixel_frames,
                                                 int temporal_factor,
                                                 int spatial_factor, int c_z,
                                                 int c_i, int c_m, bool has_id) {
  spec.validate();
  if (temporal_factor <= 0 || spatial_factor <= 0 || pixel_frames <= 0)
    throw ValidationError("plan_conditioning_layout: non-positive factors");
  if (spec.canvas_w() % spatial_factor != 0 || spec.canvas_h() % spatial_factor != 0)
    throw ValidationError("plan_conditioning_layout: canvas not divisible by spatial factor");
  if ((pixel_frames - 1) % temporal_factor != 0)
    throw ValidationError("plan_conditioning_layout: (frames-1) not divisible by temporal factor");

  LayoutDescriptor d;
  const int video_frames = 1 + (pixel_frames - 1) / temporal_factor;
  d.latent_frames = video_frames + (has_id ? 1 : 0);
  d.latent_h = spec.canvas_h() / spatial_factor;
  d.latent_w = spec.canvas_w() / spatial_factor;
  d.compression = {temporal_factor, spatial_factor};
  d.channel_slices = {{"noisy_latent", 0, c_z},
                      {"first_frame", c_z, c_z + c_i},
                      {"motion", c_z + c_i, c_z + c_i + c_m}};
  // first-frame latent is a real encoding only on latent frame 0
  if (video_frames > 1)
    d.zero_slices.push_back({"first_frame", 1, video_frames});
  for (int f = 0; f < video_frames; ++f) d.pe_index_map.push_back({f, 0, 0});
  if (has_id) {
    d.id_frame_index = video_frames;
    d.pe_index_map.push_back({0, 0, 0});  // copies frame 0's origin
    d.zero_slices.push_back({"first_frame", video_frames, video_frames + 1});
    d.zero_slices.push_back({"motion", video_frames, video_frames + 1});
  }
  return d;
}

// Zero-initialize the widened input projector and copy the pre-trained
// weights into the overlapping channels.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // row-major

  double& at(int r, int c) { return data[std::size_t(r) * cols + c]; }
  double at(int r, int c) const { return data[std::size_t(r) * cols + c]; }
};

inline Matrix expand_projector_weights(const Matrix& old, int c_new) {
  if (c_new < old.cols)
    throw ValidationError("expand_projector_weights: c_new < c_old");
  Matrix out;
  out.rows = old.rows;
  out.cols = c_new;
  out.data.assign(std::size_t(out.rows) * c_new, 0.0);
  for (int r = 0; r < old.rows; ++r)
    for (int c = 0; c < old.cols; ++c) out.at(r, c) = old.at(r, c);
  return out;
}

// T x H x W x D grid of reals, flattened with D fastest.
struct PeGrid {
  int t = 0, h = 0, w = 0, d = 0;
  std::vector<double> data;

  double at(int ti, int yi, int xi, int di) const {
    return data[((std::size_t(ti) * h + yi) * w + xi) * d + di];
  }
  double& at(int ti, int yi, int xi, int di) {
    return data[((std::size_t(ti) * h + yi) * w + xi) * d + di];
  }
};

// Trilinear resize with align-corners (endpoints map to endpoints), applied
// independently per embedding dimension.
inline PeGrid interpolate_abs_pe(const PeGrid& src, int t2, int h2, int w2) {
  if (src.t < 1 || src.h < 1 || src.w < 1 || t2 < 1 || h2 < 1 || w2 < 1)
    throw ValidationError("interpolate_abs_pe: dims must be >= 1");
  PeGrid out;
  out.t = t2;
  out.h = h2;
  out.w = w2;
  out.d = src.d;
  out.data.resize(std::size_t(t2) * h2 * w2 * src.d);

  auto src_coord = [](int i, int n_out, int n_in) {
    return n_out == 1 ? 0.0 : double(i) * (n_in - 1) / (n_out - 1);
  };
  for (int ti = 0; ti < t2; ++ti) {
    const double tf = src_coord(ti, t2, src.t);
    const int t0 = static_cast<int>(tf);
    const int t1 = std::min(t0 + 1, src.t - 1);
    const double ta = tf - t0;
    for (int yi = 0; yi < h2; ++yi) {
      const double yf = src_coord(yi, h2, src.h);
      const int y0 = static_cast<int>(yf);
      const int y1 = std::min(y0 + 1, src.h - 1);
      const double ya = yf - y0;
      for (int xi = 0; xi < w2; ++xi) {
        const double xf = src_coord(xi, w2, src.w);
        const int x0 = static_cast<int>(xf);
        const int x1 = std::min(x0 + 1, src.w - 1);
        const double xa = xf - x0;
        for (int di = 0; di < src.d; ++di) {
          const double c00 = src.at(t0, y0, x0, di) * (1 - xa) + src.at(t0, y0, x1, di) * xa;
          const double c01 = src.at(t0, y1, x0, di) * (1 - xa) + src.at(t0, y1, x1, di) * xa;
          const double c10 = src.at(t1, y0, x0, di) * (1 - xa) + src.at(t1, y0, x1, di) * xa;
          const double c11 = src.at(t1, y1, x0, di) * (1 - xa) + src.at(t1, y1, x1, di) * xa;
          const double c0 = c00 * (1 - ya) + c01 * ya;
          const double c1 = c10 * (1 - ya) + c11 * ya;
          out.at(ti, yi, xi, di) = c0 * (1 - ta) + c1 * ta;
        }
      }
    }
  }
  return out;
}

// Dense integer (t, y, x) triples for RoPE, canvas top-left of frame 0 being
// (0,0,0); the appended ID frame repeats the t=0 plane.
inline std::vector<std::array<int, 3>> rope_position_grid(int latent_t,
                                                          int latent_h,
                                                          int latent_w,
                                                          bool has_id) {
  if (latent_t <= 0 || latent_h <= 0 || latent_w <= 0)
    throw ValidationError("rope_position_grid: non-positive dims");
  std::vector<std::array<int, 3>> out;
  out.reserve(std::size_t(latent_t + (has_id ? 1 : 0)) * latent_h * latent_w);
  for (int t = 0; t < latent_t; ++t)
    for (int y = 0; y < latent_h; ++y)
      for (int x = 0; x < latent_w; ++x) out.push_back({t, y, x});
  if (has_id)
    for (int y = 0; y < latent_h; ++y)
      for (int x = 0; x < latent_w; ++x) out.push_back({0, y, x});
  return out;
}

enum class LossRegion { FullField, FirstFrameOnly };

// Training-objective support at canvas pixel resolution.
inline std::vector<std::uint8_t> loss_region_mask(const CanvasSpec& spec,
                                                  LossRegion mode) {
  spec.validate();
  const int cw = spec.canvas_w(), ch = spec.canvas_h();
  std::vector<std::uint8_t> mask(std::size_t(cw) * ch,
                                 mode == LossRegion::FullField ? 1 : 0);
  if (mode == LossRegion::FirstFrameOnly) {
    for (int y = spec.expand_top; y < spec.expand_top + spec.frame_h; ++y)
      for (int x = spec.expand_left; x < spec.expand_left + spec.frame_w; ++x)
        mask[std::size_t(y) * cw + x] = 1;
  }
  return mask;
}

}  // namespace innout

// innout-forge: dataset curation, pattern mining, conditioning geometry, and
// evaluation metrics over JSONL manifests. Exit codes: 0 success, 1 validation
// error, 2 I/O error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "innout/innout.hpp"

namespace fs = std::filesystem;
using namespace innout;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string in_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int workers = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool need_out = true) {
  cmd->add_option("--config", opts.config_path, "dotted-key config file");
  cmd->add_option("--in", opts.in_path, "input path")->required();
  if (need_out)
    cmd->add_option("--out", opts.out_path, "output path")->required();
  else
    cmd->add_option("--out", opts.out_path, "output path");
  cmd->add_option("--seed", opts.seed, "global seed");
  cmd->add_option("--workers", opts.workers, "worker threads");
}

Config load_config(const CommonOpts& opts) {
  return opts.config_path.empty() ? Config{} : Config::load(opts.config_path);
}

// Run one pipeline stage over a manifest directory and write the surviving
// dataset plus rejects and the stage report.
void run_single_stage(const CommonOpts& opts, const std::string& stage) {
  const Config cfg = load_config(opts);
  Pipeline pipe(load_dataset(opts.in_path), cfg, opts.seed, opts.workers);
  auto report = pipe.run_stage(stage);

  // when stages are chained across invocations, the original pool size comes
  // from the accumulated stats file, not this stage's input
  std::vector<StageReport> prior;
  if (fs::exists(fs::path(opts.in_path) / "stats.jsonl"))
    prior = manifest_read_as<StageReport>(fs::path(opts.in_path) / "stats.jsonl");
  if (!prior.empty() && prior.front().input_count > 0)
    report.left_ratio =
        100.0 * double(report.output_count) / double(prior.front().input_count);

  const fs::path out(opts.out_path);
  fs::create_directories(out);
  manifest_write_as(out / "videos.jsonl", pipe.dataset().videos);
  manifest_write_as(out / "tracks.jsonl", pipe.dataset().tracks);
  manifest_write_as(out / "masks.jsonl", pipe.dataset().masks);
  manifest_write_as(out / "poses.jsonl", pipe.dataset().poses);
  manifest_write_as(out / "rejects.jsonl", pipe.rejects());
  if (stage == "innout")
    manifest_write_as(out / "patterns.jsonl", pipe.patterns());

  // stats.jsonl accumulates across chained stage invocations
  prior.push_back(report);
  manifest_write_as(out / "stats.jsonl", prior);
  std::cout << stats_report(std::vector<StageReport>{report});
}

void cmd_render_motion(const CommonOpts& opts, const std::string& video_id,
                       std::int64_t starter, int width, int height, int frames,
                       const std::string& format) {
  auto entries = manifest_read_as<TrackEntry>(opts.in_path);
  std::vector<ObjectTrack> tracks;
  for (auto& e : entries) {
    if (!video_id.empty() && e.video_id != video_id) continue;
    if (e.starter_frame != starter) continue;
    tracks.push_back(std::move(e.track));
  }
  if (tracks.empty()) throw ValidationError("render-motion: no matching tracks");
  std::sort(tracks.begin(), tracks.end(),
            [](const auto& a, const auto& b) { return a.object_id < b.object_id; });
  if (frames <= 0)
    frames = static_cast<int>(tracks.front().frame_count());

  MotionRasterConfig cfg;
  const auto rasters = rasterize_motion(tracks, width, height, frames, cfg);
  const auto colors = palette_for_objects(static_cast<int>(tracks.size()), cfg);

  if (format == "ppm") {
    fs::create_directories(opts.out_path);
    for (std::size_t f = 0; f < rasters.size(); ++f) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%05zu.ppm", f);
      write_ppm(fs::path(opts.out_path) / name, rasters[f]);
    }
  } else if (format == "rle") {
    // one line per frame: per-object masks of pixels carrying that color
    std::ofstream out(opts.out_path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + opts.out_path);
    for (std::size_t f = 0; f < rasters.size(); ++f) {
      json layers = json::array();
      for (std::size_t oi = 0; oi < tracks.size(); ++oi) {
        std::vector<std::uint8_t> bits(std::size_t(width) * height, 0);
        for (std::size_t i = 0; i < bits.size(); ++i)
          bits[i] = rasters[f].px[i] == colors[oi];
        layers.push_back(json{{"object_id", tracks[oi].object_id},
                              {"color", {colors[oi][0], colors[oi][1], colors[oi][2]}},
                              {"mask", rle_encode(bits, width, height)}});
      }
      out << json{{"frame", f}, {"layers", layers}}.dump() << '\n';
    }
  } else {
    throw ValidationError("render-motion: unknown format " + format);
  }
}

// Per-video evaluation payload: whichever fields both sides carry get scored.
struct EvalEntry {
  std::string video_id;
  std::vector<TrackPoint> tracks;
  std::vector<MaskRLE> masks;
  std::optional<EmbeddingVec> id_embedding;
  std::vector<EmbeddingVec> frame_embeddings;
  std::vector<bool> judgments;
};

void from_json(const json& j, EvalEntry& e) {
  j.at("video_id").get_to(e.video_id);
  if (j.contains("tracks")) j.at("tracks").get_to(e.tracks);
  if (j.contains("masks")) j.at("masks").get_to(e.masks);
  if (j.contains("id_embedding"))
    e.id_embedding = j.at("id_embedding").get<EmbeddingVec>();
  if (j.contains("frame_embeddings"))
    j.at("frame_embeddings").get_to(e.frame_embeddings);
  if (j.contains("judgments")) j.at("judgments").get_to(e.judgments);
}
void to_json(json&, const EvalEntry&) {}  // manifests are read-only here

void cmd_metrics(const std::string& gt_path, const std::string& gen_path,
                 const std::string& out_path) {
  const auto gt = manifest_read_as<EvalEntry>(gt_path);
  const auto gen = manifest_read_as<EvalEntry>(gen_path);
  std::map<std::string, const EvalEntry*> gen_by_id;
  for (const auto& e : gen) gen_by_id[e.video_id] = &e;

  json rows = json::array();
  std::map<std::string, std::pair<double, int>> agg;
  auto add = [&](json& row, const char* key, double value) {
    row[key] = value;
    agg[key].first += value;
    agg[key].second += 1;
  };
  for (const auto& a : gt) {
    auto it = gen_by_id.find(a.video_id);
    if (it == gen_by_id.end())
      throw ValidationError("metrics: no generated entry for " + a.video_id);
    const auto& b = *it->second;
    json row{{"video_id", a.video_id}};
    if (!a.tracks.empty() && !b.tracks.empty())
      add(row, "traj_err", trajectory_error(a.tracks, b.tracks));
    if (!a.masks.empty() && !b.masks.empty())
      add(row, "vseg_mae", vseg_mae(a.masks, b.masks));
    if (a.id_embedding && !a.frame_embeddings.empty() &&
        !b.frame_embeddings.empty())
      add(row, "rel_dino",
          relative_dino(*a.id_embedding, b.frame_embeddings, a.frame_embeddings));
    if (!a.judgments.empty() && !b.judgments.empty())
      add(row, "vlm", vlm_correctness(b.judgments, a.judgments));
    rows.push_back(std::move(row));
  }
  json aggregate = json::object();
  for (const auto& [key, sum_count] : agg)
    aggregate[key] = sum_count.first / double(sum_count.second);
  const json report{{"per_video", rows}, {"aggregate", aggregate}};
  if (out_path.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + out_path);
    out << report.dump(2) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"video curation and frame-in/frame-out pattern mining"};
  app.require_subcommand(1);

  CommonOpts opts;

  // curation stages, each a filter over a manifest directory
  const std::map<std::string, std::pair<std::string, std::string>> stages = {
      {"filter-basic", {"basic", "metadata thresholds (duration/fps/aspect/width)"}},
      {"filter-scores", {"image-scores", "per-dataset image-score percentiles"}},
      {"filter-scene", {"scene", "multi-scene removal"}},
      {"select-identity", {"identity", "starter frames and object selection"}},
      {"filter-camera", {"camera", "camera-motion percentile cuts"}},
      {"cycle-filter", {"cycle", "tracking round-trip and motion filters"}},
      {"mine-innout", {"innout", "frame-in / frame-out box mining"}},
  };
  std::map<const CLI::App*, std::string> stage_of;
  for (const auto& [name, pair] : stages) {
    auto* cmd = app.add_subcommand(name, pair.second);
    add_common(cmd, opts);
    stage_of[cmd] = pair.first;
  }

  auto* run_all = app.add_subcommand("run-all", "run every stage in order");
  add_common(run_all, opts);

  auto* stats = app.add_subcommand("stats", "format a stage-report manifest");
  add_common(stats, opts, false);

  auto* render = app.add_subcommand("render-motion", "rasterize track motion");
  std::string rm_video, rm_format = "ppm";
  std::int64_t rm_starter = 0;
  int rm_width = 0, rm_height = 0, rm_frames = 0;
  add_common(render, opts);
  render->add_option("--video", rm_video, "video id filter");
  render->add_option("--starter", rm_starter, "starter frame");
  render->add_option("--width", rm_width, "frame width")->required();
  render->add_option("--height", rm_height, "frame height")->required();
  render->add_option("--frames", rm_frames, "frame count (0 = track length)");
  render->add_option("--format", rm_format, "ppm|rle");

  auto* canvas = app.add_subcommand("canvas", "canvas expansion geometry");
  int cv_fw = 0, cv_fh = 0, cv_top = 0, cv_left = 0, cv_bottom = 0, cv_right = 0;
  std::vector<double> cv_point;
  canvas->add_option("--frame-w", cv_fw, "frame width")->required();
  canvas->add_option("--frame-h", cv_fh, "frame height")->required();
  canvas->add_option("--top", cv_top, "expansion above");
  canvas->add_option("--left", cv_left, "expansion left");
  canvas->add_option("--bottom", cv_bottom, "expansion below");
  canvas->add_option("--right", cv_right, "expansion right");
  canvas->add_option("--point", cv_point, "x y to map into canvas coordinates")
      ->expected(2);

  auto* layout = app.add_subcommand("plan-layout", "conditioning tensor plan");
  int ly_frames = 49, ly_tc = 4, ly_sc = 8, ly_cz = 16, ly_ci = 16, ly_cm = 3;
  bool ly_id = false;
  std::string ly_out;
  int ly_fw = 0, ly_fh = 0, ly_top = 0, ly_left = 0, ly_bottom = 0, ly_right = 0;
  layout->add_option("--frame-w", ly_fw, "frame width")->required();
  layout->add_option("--frame-h", ly_fh, "frame height")->required();
  layout->add_option("--top", ly_top, "expansion above");
  layout->add_option("--left", ly_left, "expansion left");
  layout->add_option("--bottom", ly_bottom, "expansion below");
  layout->add_option("--right", ly_right, "expansion right");
  layout->add_option("--frames", ly_frames, "pixel frame count");
  layout->add_option("--temporal", ly_tc, "temporal compression factor");
  layout->add_option("--spatial", ly_sc, "spatial compression factor");
  layout->add_option("--cz", ly_cz, "noisy latent channels");
  layout->add_option("--ci", ly_ci, "first-frame channels");
  layout->add_option("--cm", ly_cm, "motion channels");
  layout->add_flag("--id", ly_id, "append an identity reference frame");
  layout->add_option("--out", ly_out, "output JSON file (default stdout)");

  auto* metrics = app.add_subcommand("metrics", "evaluation metric report");
  std::string mt_gt, mt_gen, mt_out;
  metrics->add_option("--gt", mt_gt, "ground-truth manifest")->required();
  metrics->add_option("--gen", mt_gen, "generated manifest")->required();
  metrics->add_option("--out", mt_out, "output JSON file (default stdout)");

  try {
    app.parse(argc, argv);

    for (const auto& [cmd, stage] : stage_of)
      if (cmd->parsed()) run_single_stage(opts, stage);

    if (run_all->parsed()) {
      run_all_to_disk({opts.in_path, opts.out_path}, load_config(opts),
                      opts.seed, opts.workers);
      std::cout << stats_report(manifest_read_as<StageReport>(
          fs::path(opts.out_path) / "stats.jsonl"));
    }

    if (stats->parsed()) {
      const auto reports = manifest_read_as<StageReport>(opts.in_path);
      const std::string table = stats_report(reports);
      if (opts.out_path.empty()) {
        std::cout << table;
      } else {
        std::ofstream out(opts.out_path, std::ios::trunc);
        if (!out) throw IoError("cannot write " + opts.out_path);
        out << table;
      }
    }

    if (render->parsed())
      cmd_render_motion(opts, rm_video, rm_starter, rm_width, rm_height,
                        rm_frames, rm_format);

    if (canvas->parsed()) {
      const CanvasSpec spec{cv_fw, cv_fh, cv_top, cv_left, cv_bottom, cv_right};
      spec.validate();
      json out{{"spec", spec},
               {"canvas_w", spec.canvas_w()},
               {"canvas_h", spec.canvas_h()}};
      if (cv_point.size() == 2) {
        const auto mapped = canvas_expand(spec, cv_point[0], cv_point[1]);
        out["point"] = {mapped[0], mapped[1]};
      }
      std::cout << out.dump(2) << '\n';
    }

    if (layout->parsed()) {
      const CanvasSpec spec{ly_fw, ly_fh, ly_top, ly_left, ly_bottom, ly_right};
      const auto plan = plan_conditioning_layout(spec, ly_frames, ly_tc, ly_sc,
                                                 ly_cz, ly_ci, ly_cm, ly_id);
      const json j = plan;
      if (ly_out.empty()) {
        std::cout << j.dump(2) << '\n';
      } else {
        std::ofstream out(ly_out, std::ios::trunc);
        if (!out) throw IoError("cannot write " + ly_out);
        out << j.dump(2) << '\n';
      }
    }

    if (metrics->parsed()) cmd_metrics(mt_gt, mt_gen, mt_out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "innout/error.hpp"
#include "innout/rle.hpp"
#include "innout/types.hpp"

namespace innout {

// Shift first-frame coordinates into canvas coordinates. Not idempotent:
// applying twice shifts twice.
inline std::vector<ObjectTrack> pad_coords_to_canvas(
    std::span<const ObjectTrack> tracks, const CanvasSpec& spec) {
  spec.validate();
  std::vector<ObjectTrack> out;
  out.reserve(tracks.size());
  for (const auto& track : tracks) {
    ObjectTrack t = track;
    for (auto& p : t.points)
      for (auto& pos : p.positions) {
        pos.x += spec.expand_left;
        pos.y += spec.expand_top;
      }
    out.push_back(std::move(t));
  }
  return out;
}

// Mean Euclidean distance over aligned (point_id, frame) pairs where both
// points are visible. Both inputs must be in canvas coordinates.
inline double trajectory_error(std::span<const TrackPoint> gt,
                               std::span<const TrackPoint> gen) {
  if (gt.size() != gen.size())
    throw ValidationError("trajectory_error: point count mismatch");
  std::map<int, const TrackPoint*> gen_by_id;
  for (const auto& p : gen) gen_by_id[p.point_id] = &p;
  double total = 0;
  std::int64_t pairs = 0;
  for (const auto& a : gt) {
    auto it = gen_by_id.find(a.point_id);
    if (it == gen_by_id.end())
      throw ValidationError("trajectory_error: point_id " +
                            std::to_string(a.point_id) + " missing from gen");
    const auto& b = *it->second;
    if (a.positions.size() != b.positions.size())
      throw ValidationError("trajectory_error: frame count mismatch");
    for (std::size_t f = 0; f < a.positions.size(); ++f) {
      if (!a.positions[f].visible || !b.positions[f].visible) continue;
      total += std::hypot(a.positions[f].x - b.positions[f].x,
                          a.positions[f].y - b.positions[f].y);
      ++pairs;
    }
  }
  if (pairs == 0) throw ValidationError("trajectory_error: no aligned pairs");
  return total / double(pairs);
}

// Mean absolute per-pixel difference between two binary mask sequences.
inline double vseg_mae(std::span<const MaskRLE> gt, std::span<const MaskRLE> gen) {
  if (gt.size() != gen.size() || gt.empty())
    throw ValidationError("vseg_mae: frame count mismatch");
  std::int64_t diff = 0;
  std::int64_t total = 0;
  for (std::size_t f = 0; f < gt.size(); ++f) {
    if (gt[f].width != gen[f].width || gt[f].height != gen[f].height)
      throw ValidationError("vseg_mae: dimension mismatch at frame " +
                            std::to_string(f));
    const auto a = rle_decode(gt[f]);
    const auto b = rle_decode(gen[f]);
    for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] != b[i];
    total += static_cast<std::int64_t>(a.size());
  }
  return double(diff) / double(total);
}

// |mean cosine(ID, gen frames) - mean cosine(ID, gt frames)| relative to the
// ground-truth mean. All embeddings are normalized before dotting.
inline double relative_dino(const EmbeddingVec& id_emb,
                            std::span<const EmbeddingVec> gen_embs,
                            std::span<const EmbeddingVec> gt_embs) {
  if (gen_embs.empty() || gen_embs.size() != gt_embs.size())
    throw ValidationError("relative_dino: list length mismatch");
  const EmbeddingVec id_n = id_emb.normalized();
  double s_gen = 0, s_gt = 0;
  for (std::size_t i = 0; i < gen_embs.size(); ++i) {
    s_gen += dot(id_n, gen_embs[i].normalized());
    s_gt += dot(id_n, gt_embs[i].normalized());
  }
  s_gen /= double(gen_embs.size());
  s_gt /= double(gt_embs.size());
  if (std::abs(s_gt) <= 1e-6)
    throw ValidationError("relative_dino: ground-truth similarity near zero");
  return std::abs(s_gen - s_gt) / s_gt;
}

// Fraction of judgments agreeing with the ground-truth judgments.
inline double vlm_correctness(const std::vector<bool>& gen_judgments,
                              const std::vector<bool>& gt_judgments) {
  if (gen_judgments.empty() || gen_judgments.size() != gt_judgments.size())
    throw ValidationError("vlm_correctness: judgment list mismatch");
  std::int64_t match = 0;
  for (std::size_t i = 0; i < gen_judgments.size(); ++i)
    match += gen_judgments[i] == gt_judgments[i];
  return double(match) / double(gen_judgments.size());
}

// External vision-language judging: the artifact only aggregates responses.
struct JudgmentRequest {
  std::string video_ref;       // path or id of the frame sequence
  std::string instruction;     // deployment-configured prompt
};

class JudgmentProvider {
 public:
  virtual ~JudgmentProvider() = default;
  virtual bool judge(const JudgmentRequest& request) = 0;
};

// File-backed provider: judgments precomputed into a map keyed by video_ref.
class RecordedJudgmentProvider : public JudgmentProvider {
 public:
  explicit RecordedJudgmentProvider(std::map<std::string, bool> judgments)
      : judgments_(std::move(judgments)) {}

  bool judge(const JudgmentRequest& request) override {
    auto it = judgments_.find(request.video_ref);
    if (it == judgments_.end())
      throw ValidationError("no recorded judgment for " + request.video_ref);
    return it->second;
  }

 private:
  std::map<std::string, bool> judgments_;
};

}  // namespace innout

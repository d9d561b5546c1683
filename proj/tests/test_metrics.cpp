#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "innout/metrics.hpp"

using namespace innout;

namespace {

TrackPoint point_at(int id, std::vector<std::array<double, 2>> coords) {
  TrackPoint p;
  p.point_id = id;
  for (const auto& c : coords) p.positions.push_back({c[0], c[1], true});
  return p;
}

MaskRLE from_bits(std::vector<std::uint8_t> bits, int w, int h) {
  return rle_encode(bits, w, h);
}

}  // namespace

TEST_CASE("pad_coords_to_canvas") {
  CanvasSpec spec{100, 100, 10, 20, 0, 0};
  ObjectTrack t;
  t.object_id = 0;
  t.points.push_back(point_at(0, {{5, 5}}));
  std::vector<ObjectTrack> tracks = {t};

  const auto out = pad_coords_to_canvas(tracks, spec);
  CHECK(out[0].points[0].positions[0].x == Catch::Approx(25));
  CHECK(out[0].points[0].positions[0].y == Catch::Approx(15));

  // documented non-idempotence: applying twice shifts twice
  const auto twice = pad_coords_to_canvas(out, spec);
  CHECK(twice[0].points[0].positions[0].x == Catch::Approx(45));

  const CanvasSpec none{100, 100, 0, 0, 0, 0};
  const auto same = pad_coords_to_canvas(tracks, none);
  CHECK(same[0].points[0].positions[0].x == Catch::Approx(5));
}

TEST_CASE("trajectory_error") {
  SECTION("identical tracks") {
    std::vector<TrackPoint> a, b;
    for (int i = 0; i < 5; ++i) {
      a.push_back(point_at(i, {{double(i), 0}, {double(i), 1}}));
      b.push_back(point_at(i, {{double(i), 0}, {double(i), 1}}));
    }
    CHECK(trajectory_error(a, b) == Catch::Approx(0.0).margin(1e-15));
  }
  SECTION("one pair offset by (3,4) among ten") {
    std::vector<TrackPoint> gt, gen;
    for (int i = 0; i < 10; ++i) {
      gt.push_back(point_at(i, {{double(i), 0}}));
      gen.push_back(point_at(i, {{double(i), 0}}));
    }
    gen[0].positions[0].x += 3;
    gen[0].positions[0].y += 4;
    CHECK(trajectory_error(gt, gen) == Catch::Approx(0.5).margin(1e-15));
  }
  SECTION("mismatched point ids") {
    std::vector<TrackPoint> gt = {point_at(0, {{0, 0}})};
    std::vector<TrackPoint> gen = {point_at(7, {{0, 0}})};
    CHECK_THROWS_AS(trajectory_error(gt, gen), ValidationError);
  }
  SECTION("occluded pairs are skipped") {
    std::vector<TrackPoint> gt = {point_at(0, {{0, 0}, {10, 0}})};
    std::vector<TrackPoint> gen = {point_at(0, {{0, 0}, {99, 99}})};
    gen[0].positions[1].visible = false;
    CHECK(trajectory_error(gt, gen) == Catch::Approx(0.0).margin(1e-15));
  }
  SECTION("symmetric") {
    std::vector<TrackPoint> a = {point_at(0, {{0, 0}})};
    std::vector<TrackPoint> b = {point_at(0, {{6, 8}})};
    CHECK(trajectory_error(a, b) == Catch::Approx(trajectory_error(b, a)));
  }
}

TEST_CASE("vseg_mae") {
  SECTION("identical sequences") {
    std::vector<MaskRLE> m = {from_bits({1, 0, 1, 0}, 2, 2)};
    CHECK(vseg_mae(m, m) == 0.0);
  }
  SECTION("complementary sequences") {
    std::vector<MaskRLE> a = {from_bits({1, 1, 1, 1}, 2, 2)};
    std::vector<MaskRLE> b = {from_bits({0, 0, 0, 0}, 2, 2)};
    CHECK(vseg_mae(a, b) == 1.0);
  }
  SECTION("one differing pixel in a 2x2 frame") {
    std::vector<MaskRLE> a = {from_bits({1, 0, 0, 0}, 2, 2)};
    std::vector<MaskRLE> b = {from_bits({0, 0, 0, 0}, 2, 2)};
    CHECK(vseg_mae(a, b) == 0.25);
  }
  SECTION("matches brute force and stays in [0,1]") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      const int w = 1 + int(rng() % 8), h = 1 + int(rng() % 8);
      const int frames = 1 + int(rng() % 4);
      std::vector<MaskRLE> a, b;
      std::int64_t diff = 0;
      for (int f = 0; f < frames; ++f) {
        std::vector<std::uint8_t> ba(std::size_t(w) * h), bb(std::size_t(w) * h);
        for (std::size_t i = 0; i < ba.size(); ++i) {
          ba[i] = rng() & 1;
          bb[i] = rng() & 1;
          diff += ba[i] != bb[i];
        }
        a.push_back(from_bits(ba, w, h));
        b.push_back(from_bits(bb, w, h));
      }
      const double mae = vseg_mae(a, b);
      REQUIRE(mae == Catch::Approx(double(diff) / (frames * w * h)).margin(1e-12));
      REQUIRE(mae >= 0.0);
      REQUIRE(mae <= 1.0);
      REQUIRE(vseg_mae(b, a) == Catch::Approx(mae).margin(1e-15));
    }
  }
  SECTION("dimension mismatch") {
    std::vector<MaskRLE> a = {from_bits({1, 0, 0, 0}, 2, 2)};
    std::vector<MaskRLE> b = {from_bits({1, 0, 0, 0, 0, 0}, 3, 2)};
    CHECK_THROWS_AS(vseg_mae(a, b), ValidationError);
  }
}

TEST_CASE("relative_dino") {
  SECTION("identical embeddings give zero") {
    EmbeddingVec id{{1, 0}};
    std::vector<EmbeddingVec> frames = {{{0.6, 0.8}}, {{1, 0}}};
    CHECK(relative_dino(id, frames, frames) == Catch::Approx(0.0).margin(1e-15));
  }
  SECTION("constructed cosines: s_gen 0.25, s_gt 0.5 -> 0.5") {
    // unit vectors at angles with cosines exactly 0.25 and 0.5 to (1,0)
    EmbeddingVec id{{1, 0}};
    const double a_gen = std::acos(0.25), a_gt = std::acos(0.5);
    std::vector<EmbeddingVec> gen = {{{std::cos(a_gen), std::sin(a_gen)}}};
    std::vector<EmbeddingVec> gt = {{{std::cos(a_gt), std::sin(a_gt)}}};
    CHECK(relative_dino(id, gen, gt) == Catch::Approx(0.5).margin(1e-12));
  }
  SECTION("orthogonal ground truth is an error") {
    EmbeddingVec id{{1, 0}};
    std::vector<EmbeddingVec> gen = {{{1, 0}}};
    std::vector<EmbeddingVec> gt = {{{0, 1}}};
    CHECK_THROWS_AS(relative_dino(id, gen, gt), ValidationError);
  }
  SECTION("invariant to rescaling of inputs") {
    EmbeddingVec id{{2, 0, 0}};
    std::vector<EmbeddingVec> gen = {{{3, 4, 0}}, {{0.1, 0.1, 0}}};
    std::vector<EmbeddingVec> gt = {{{5, 1, 0}}, {{1, 1, 1}}};
    const double base = relative_dino(id, gen, gt);
    std::vector<EmbeddingVec> gen2 = gen, gt2 = gt;
    for (auto& e : gen2)
      for (auto& v : e.values) v *= 17.0;
    for (auto& e : gt2)
      for (auto& v : e.values) v *= 0.003;
    CHECK(relative_dino(id, gen2, gt2) == Catch::Approx(base).margin(1e-12));
  }
}

TEST_CASE("vlm_correctness") {
  std::vector<bool> all_true = {true, true, true, true};
  CHECK(vlm_correctness(std::vector<bool>{true, true, true, true}, all_true) == 1.0);
  CHECK(vlm_correctness(std::vector<bool>{false, false, false, false}, all_true) == 0.0);
  CHECK(vlm_correctness(std::vector<bool>{true, true, true, false}, all_true) == 0.75);
  CHECK_THROWS_AS(vlm_correctness(std::vector<bool>{}, std::vector<bool>{}),
                  ValidationError);
}

TEST_CASE("judgment provider") {
  RecordedJudgmentProvider provider({{"vid_a", true}, {"vid_b", false}});
  CHECK(provider.judge({"vid_a", "did the object leave the first frame?"}));
  CHECK_FALSE(provider.judge({"vid_b", "did the object leave the first frame?"}));
  CHECK_THROWS_AS(provider.judge({"vid_c", ""}), ValidationError);
}

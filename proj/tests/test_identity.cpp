#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "innout/identity.hpp"

using namespace innout;

TEST_CASE("starter_frames snapping") {
  IdentityConfig cfg;
  SECTION("nearby iframes snap") {
    const std::vector<std::int64_t> iframes = {0, 340, 720};
    CHECK(starter_frames(1000, iframes, cfg) ==
          std::vector<std::int64_t>{0, 340, 720});
  }
  SECTION("distant iframes keep the nominal index") {
    const std::vector<std::int64_t> iframes = {0, 500};
    CHECK(starter_frames(1000, iframes, cfg) ==
          std::vector<std::int64_t>{0, 350, 700});
  }
  SECTION("short video discards starters without clip room") {
    // 35 and 70 leave fewer than 49 frames at count 100 -> only 0 and 35 fit
    const std::vector<std::int64_t> iframes = {0};
    CHECK(starter_frames(100, iframes, cfg) == std::vector<std::int64_t>{0, 35});
    // with the clip requirement lifted, all three nominal indices survive
    IdentityConfig no_clip = cfg;
    no_clip.min_clip_frames = 0;
    CHECK(starter_frames(100, iframes, no_clip) ==
          std::vector<std::int64_t>{0, 35, 70});
  }
  SECTION("empty video") {
    CHECK_THROWS_AS(starter_frames(0, {}, cfg), ValidationError);
  }
  SECTION("outputs strictly increasing, bounded, snap distance limited") {
    std::mt19937_64 rng(23);
    IdentityConfig no_clip = cfg;
    no_clip.min_clip_frames = 0;
    for (int trial = 0; trial < 200; ++trial) {
      std::uniform_int_distribution<std::int64_t> count(1, 2000);
      const std::int64_t n = count(rng);
      std::vector<std::int64_t> iframes;
      for (std::int64_t f = 0; f < n;
           f += std::uniform_int_distribution<std::int64_t>(1, 200)(rng))
        iframes.push_back(f);
      const auto starters = starter_frames(n, iframes, no_clip);
      for (std::size_t i = 0; i < starters.size(); ++i) {
        REQUIRE(starters[i] >= 0);
        REQUIRE(starters[i] < n);
        if (i > 0) REQUIRE(starters[i] > starters[i - 1]);
      }
      // snapping never moves an index by more than the snap limit
      for (double frac : no_clip.starter_fracs) {
        const std::int64_t nominal = static_cast<std::int64_t>(frac * double(n));
        bool found_near = false;
        for (auto s : starters)
          if (std::llabs(s - std::min(nominal, n - 1)) <=
              static_cast<std::int64_t>(no_clip.iframe_snap_frac * double(n)) + 1)
            found_near = true;
        REQUIRE(found_near);
      }
    }
  }
}

TEST_CASE("motionable_filter whitelist") {
  IdentityConfig cfg;
  CHECK(motionable_filter("person", cfg));
  CHECK(motionable_filter("flower", cfg));
  CHECK_FALSE(motionable_filter("house", cfg));
  CHECK_FALSE(motionable_filter("tree", cfg));
  CHECK(cfg.motionable_classes.size() == 22);
}

TEST_CASE("area_filter") {
  IdentityConfig cfg;
  CHECK_FALSE(area_filter(0.03, cfg));
  CHECK(area_filter(0.20, cfg));
  CHECK_FALSE(area_filter(0.50, cfg));
  CHECK(area_filter(0.04, cfg));
  CHECK(area_filter(0.40, cfg));
  CHECK_THROWS_AS(area_filter(1.5, cfg), ValidationError);
}

TEST_CASE("label_cap_keep") {
  IdentityConfig cfg;
  auto mk = [](int id, const std::string& label) {
    ObjectTrack t;
    t.object_id = id;
    t.class_label = label;
    t.points.resize(1);
    t.points[0].positions.resize(1);
    return t;
  };
  std::vector<ObjectTrack> three_people = {mk(0, "person"), mk(1, "person"),
                                           mk(2, "person"), mk(3, "dog")};
  CHECK(label_cap_keep(three_people, cfg));
  three_people.push_back(mk(4, "person"));
  CHECK_FALSE(label_cap_keep(three_people, cfg));
  CHECK(label_cap_keep(std::vector<ObjectTrack>{}, cfg));
}

TEST_CASE("kmeans_point_count") {
  IdentityConfig cfg;
  CHECK(kmeans_point_count(0.04, cfg) == 12);
  CHECK(kmeans_point_count(0.40, cfg) == 36);
  CHECK(kmeans_point_count(0.22, cfg) == 24);
  CHECK_THROWS_AS(kmeans_point_count(0.02, cfg), ValidationError);

  // monotone non-decreasing across the range
  int prev = 0;
  for (double a = 0.04; a <= 0.40; a += 0.002) {
    const int k = kmeans_point_count(a, cfg);
    REQUIRE(k >= prev);
    prev = k;
  }
}

namespace {

MaskRLE filled_square(int side) {
  return rle_encode(std::vector<std::uint8_t>(std::size_t(side) * side, 1), side,
                    side);
}

}  // namespace

TEST_CASE("kmeans_sample") {
  SECTION("k=1 returns the pixel nearest the centroid") {
    const auto pts = kmeans_sample(filled_square(11), 1, 42);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0] == std::array<int, 2>{5, 5});
  }
  SECTION("all points lie on the mask and are distinct") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      std::uniform_int_distribution<int> dim(4, 24);
      const int w = dim(rng), h = dim(rng);
      std::vector<std::uint8_t> bm(std::size_t(w) * h);
      std::bernoulli_distribution bit(0.6);
      for (auto& b : bm) b = bit(rng);
      const auto mask = rle_encode(bm, w, h);
      const auto area = mask_area(mask);
      if (area < 3) continue;
      const auto pts = kmeans_sample(mask, 3, trial);
      std::set<std::array<int, 2>> uniq(pts.begin(), pts.end());
      REQUIRE(uniq.size() == 3);
      for (const auto& p : pts)
        REQUIRE(bm[std::size_t(p[1]) * w + p[0]] == 1);
    }
  }
  SECTION("k=4 on a filled 20x20 square gives one point per quadrant") {
    const auto pts = kmeans_sample(filled_square(20), 4, 7);
    REQUIRE(pts.size() == 4);
    std::set<std::pair<bool, bool>> quadrants;
    for (const auto& p : pts) quadrants.insert({p[0] < 10, p[1] < 10});
    CHECK(quadrants.size() == 4);
  }
  SECTION("deterministic in seed") {
    const auto a = kmeans_sample(filled_square(15), 5, 99);
    const auto b = kmeans_sample(filled_square(15), 5, 99);
    CHECK(a == b);
  }
  SECTION("mask smaller than k") {
    CHECK_THROWS_AS(kmeans_sample(filled_square(2), 5, 0), ValidationError);
  }
}

TEST_CASE("load_motionable_classes") {
  const auto loaded = load_motionable_classes(
      std::filesystem::path(INNOUT_DATA_DIR) / "motionable_classes.txt");
  CHECK(loaded.size() == 22);
  CHECK(loaded == default_motionable_classes());
  CHECK_THROWS_AS(load_motionable_classes("/no/such/file.txt"), IoError);
}

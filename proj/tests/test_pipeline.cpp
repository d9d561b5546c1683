#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include "fixture.hpp"
#include "innout/pipeline.hpp"

using namespace innout;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("innout_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

json snapshot(const Pipeline& pipe) {
  json j;
  j["videos"] = pipe.dataset().videos;
  j["rejects"] = pipe.rejects();
  j["patterns"] = pipe.patterns();
  j["reports"] = pipe.reports();
  return j;
}

}  // namespace

TEST_CASE("format_count") {
  CHECK(format_count(537000) == "537K");
  CHECK(format_count(29700) == "29.7K");
  CHECK(format_count(1000000) == "1.00M");
  CHECK(format_count(2340000) == "2.34M");
  CHECK(format_count(999) == "999");
  CHECK(format_count(1500) == "1.5K");
  CHECK(format_count(0) == "0");
}

TEST_CASE("format_ratio") {
  CHECK(format_ratio(53.7) == "53.7%");
  CHECK(format_ratio(3.0) == "3.0%");
  CHECK(format_ratio(100.0) == "100.0%");
  CHECK(format_ratio(0.049) == "0.0%");
}

TEST_CASE("make_stage_report") {
  const auto r = make_stage_report("basic", 10, 6, 10);
  CHECK(r.stage_name == "basic");
  CHECK(r.input_count == 10);
  CHECK(r.output_count == 6);
  CHECK(r.left_ratio == Catch::Approx(60.0));
  CHECK(make_stage_report("basic", 0, 0, 0).left_ratio == 0.0);
  // ratio is against the initial pool, not the stage input
  CHECK(make_stage_report("scene", 6, 3, 10).left_ratio == Catch::Approx(30.0));
}

TEST_CASE("stats_report formatting") {
  std::vector<StageReport> reports = {
      make_stage_report("basic", 1000000, 537000, 1000000),
      make_stage_report("innout", 537000, 29700, 1000000)};
  const std::string table = stats_report(reports);
  CHECK(table.find("537K  53.7%") != std::string::npos);
  CHECK(table.find("29.7K  3.0%") != std::string::npos);
  CHECK(table.find("basic") != std::string::npos);
}

TEST_CASE("parallel_for") {
  SECTION("same result for any worker count") {
    std::vector<int> base(1000);
    parallel_for(base.size(), 1, [&](std::size_t i) { base[i] = int(i * i % 97); });
    for (int workers : {2, 4, 8}) {
      std::vector<int> out(1000);
      parallel_for(out.size(), workers, [&](std::size_t i) { out[i] = int(i * i % 97); });
      REQUIRE(out == base);
    }
  }
  SECTION("propagates worker exceptions") {
    CHECK_THROWS_AS(parallel_for(100, 4,
                                 [&](std::size_t i) {
                                   if (i == 50) throw ValidationError("boom");
                                 }),
                    ValidationError);
  }
}

TEST_CASE("config parsing") {
  const auto dir = temp_dir("config");
  {
    std::ofstream out(dir / "cfg.txt");
    out << "# comment line\n"
        << "curation.basic.min_duration_s = 6\n"
        << "pipeline.flag = true\n"
        << "name = hello # trailing comment\n"
        << "\n";
  }
  const auto cfg = Config::load(dir / "cfg.txt");
  CHECK(cfg.get_double("curation.basic.min_duration_s", 4) == 6.0);
  CHECK(cfg.get_bool("pipeline.flag", false));
  CHECK(cfg.get_string("name", "") == "hello");
  CHECK(cfg.get_int("missing", 42) == 42);
  CHECK(cfg.keys_with_prefix("curation") ==
        std::vector<std::string>{"curation.basic.min_duration_s"});

  {
    std::ofstream out(dir / "bad.txt");
    out << "not a key value pair\n";
  }
  CHECK_THROWS_AS(Config::load(dir / "bad.txt"), ValidationError);

  // dump is reloadable
  cfg.dump(dir / "snap.txt");
  const auto again = Config::load(dir / "snap.txt");
  CHECK(again.get_double("curation.basic.min_duration_s", 0) == 6.0);
}

TEST_CASE("score_rules_for") {
  Config cfg;
  SECTION("per-tag defaults") {
    const auto openvid = score_rules_for(cfg, "openvid");
    REQUIRE(openvid.rules.size() == 4);
    CHECK(openvid.rules[0].metric_name == "clipiqa");
    CHECK(openvid.rules[0].tail == Tail::Low);
    CHECK(openvid.rules[0].low_fraction == 0.03);
    CHECK(openvid.rules[1].metric_name == "ocr_area");
    CHECK(openvid.rules[1].high_fraction == 0.15);
    CHECK(openvid.rules[3].metric_name == "ic9600");
    CHECK(openvid.rules[3].tail == Tail::Both);
    CHECK(openvid.rules[3].low_fraction == 0.10);
    CHECK(openvid.rules[3].high_fraction == 0.05);

    const auto webvid = score_rules_for(cfg, "webvid");
    CHECK(webvid.rules[0].low_fraction == 0.15);
    CHECK(webvid.rules[1].high_fraction == 0.05);

    // unknown tags fall back to the openvid strengths
    CHECK(score_rules_for(cfg, "other").rules[0].low_fraction == 0.03);
  }
  SECTION("config overrides") {
    cfg.set("curation.scores.openvid.clipiqa.low", "0.5");
    cfg.set("curation.scores.openvid.clipiqa.tail", "both");
    cfg.set("curation.scores.openvid.clipiqa.high", "0.25");
    const auto rules = score_rules_for(cfg, "openvid");
    CHECK(rules.rules[0].low_fraction == 0.5);
    CHECK(rules.rules[0].high_fraction == 0.25);
    CHECK(rules.rules[0].tail == Tail::Both);
    cfg.set("curation.scores.openvid.clipiqa.tail", "sideways");
    CHECK_THROWS_AS(score_rules_for(cfg, "openvid"), ValidationError);
  }
}

TEST_CASE("mask_resize_nearest") {
  const auto m = fixture::rect_mask(2, 2, 0, 0, 1, 1);  // single top-left pixel
  const auto up = mask_resize_nearest(m, 4, 4);
  const auto bits = rle_decode(up);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      CHECK(int(bits[std::size_t(y) * 4 + x]) == (x < 2 && y < 2 ? 1 : 0));
  // identity resize round-trips
  CHECK(mask_resize_nearest(m, 2, 2).counts == m.counts);
  CHECK_THROWS_AS(mask_resize_nearest(m, 0, 2), ValidationError);
}

TEST_CASE("pipeline stage order") {
  Config cfg;
  Pipeline pipe({}, cfg, 1, 1);
  CHECK(pipe.stage_order() ==
        std::vector<std::string>{"basic", "image-scores", "scene", "identity",
                                 "camera", "cycle", "innout"});
  Config swapped;
  swapped.set("pipeline.camera_before_identity", "true");
  Pipeline pipe2({}, swapped, 1, 1);
  CHECK(pipe2.stage_order() ==
        std::vector<std::string>{"basic", "image-scores", "scene", "camera",
                                 "identity", "cycle", "innout"});
  CHECK_THROWS_AS(pipe.run_stage("bogus"), ValidationError);
}

TEST_CASE("pipeline stage behavior on the synthetic set") {
  Pipeline pipe(fixture::make_dataset(), fixture::make_config(), 7, 1);
  REQUIRE(pipe.initial_count() == 20);

  const auto basic = pipe.run_stage("basic");
  CHECK(basic.input_count == 20);
  CHECK(basic.output_count == 16);  // short, low-fps, narrow, square
  std::set<std::string> reject_ids;
  std::map<std::string, std::string> reasons;
  for (const auto& r : pipe.rejects()) {
    reject_ids.insert(r.video_id);
    reasons[r.video_id] = r.drop_reason.value_or("");
  }
  CHECK(reject_ids ==
        std::set<std::string>{"vid_003", "vid_007", "vid_011", "vid_015"});
  CHECK(reasons["vid_003"] == "basic:duration");
  CHECK(reasons["vid_007"] == "basic:fps");
  CHECK(reasons["vid_011"] == "basic:width");
  CHECK(reasons["vid_015"] == "basic:aspect");
  // dependent records for dropped videos are erased
  for (const auto& t : pipe.dataset().tracks)
    CHECK(reject_ids.count(t.video_id) == 0);
  for (const auto& p : pipe.dataset().poses)
    CHECK(reject_ids.count(p.video_id) == 0);

  const auto scores = pipe.run_stage("image-scores");
  CHECK(scores.input_count == 16);
  // floor(16*0.15)=2 ocr drops, floor of the rest: 0 clipiqa, 0 nima,
  // ic9600 both floor(14*0.10)+floor(14*0.05)=1
  CHECK(scores.output_count == 13);

  const auto scene = pipe.run_stage("scene");
  CHECK(scene.input_count == 13);

  pipe.run_stage("identity");
  std::map<std::string, std::string> all_reasons;
  for (const auto& r : pipe.rejects())
    all_reasons[r.video_id] = r.drop_reason.value_or("");
  if (all_reasons.count("vid_009")) CHECK(all_reasons["vid_009"] == "identity:label_cap");
  if (all_reasons.count("vid_013")) CHECK(all_reasons["vid_013"] == "identity:no_object");

  pipe.run_stage("camera");
  pipe.run_stage("cycle");
  // backtracking filter removed the two bad points from each survivor
  for (const auto& t : pipe.dataset().tracks) CHECK(t.track.points.size() == 10);
  const auto innout = pipe.run_stage("innout");
  CHECK(innout.output_count > 0);
  CHECK_FALSE(pipe.patterns().empty());
  for (const auto& p : pipe.patterns()) p.validate(1280, 720);

  // conservation: every input video is either retained or rejected, once
  std::set<std::string> seen;
  for (const auto& v : pipe.dataset().videos) seen.insert(v.video_id);
  for (const auto& r : pipe.rejects()) seen.insert(r.video_id);
  CHECK(seen.size() == 20);
  CHECK(std::int64_t(pipe.dataset().videos.size() + pipe.rejects().size()) == 20);

  // report chain: each stage's input is the previous stage's output
  const auto& reports = pipe.reports();
  REQUIRE(reports.size() == 7);
  for (std::size_t i = 1; i < reports.size(); ++i)
    CHECK(reports[i].input_count == reports[i - 1].output_count);
  CHECK(reports.back().left_ratio ==
        Catch::Approx(100.0 * double(reports.back().output_count) / 20.0));
}

TEST_CASE("pipeline determinism across runs and worker counts") {
  Pipeline a(fixture::make_dataset(), fixture::make_config(), 99, 1);
  a.run_all();
  const std::string base = snapshot(a).dump();
  for (int workers : {1, 8}) {
    Pipeline b(fixture::make_dataset(), fixture::make_config(), 99, workers);
    b.run_all();
    REQUIRE(snapshot(b).dump() == base);
  }
  // a different seed changes mined boxes but not curation decisions
  Pipeline c(fixture::make_dataset(), fixture::make_config(), 100, 1);
  c.run_all();
  json ja = snapshot(a), jc = snapshot(c);
  CHECK(ja["rejects"] == jc["rejects"]);
}

TEST_CASE("run_all wraps stage failures with the stage name") {
  auto cfg = fixture::make_config();
  cfg.set("curation.scores.openvid.clipiqa.tail", "sideways");
  Pipeline pipe(fixture::make_dataset(), cfg, 1, 1);
  CHECK_THROWS_WITH(pipe.run_all(),
                    Catch::Matchers::ContainsSubstring("stage 'image-scores'"));

  // the cycle stage requires tracks; a dataset without them is an input error
  auto data = fixture::make_dataset();
  data.tracks.clear();
  Pipeline pipe2(std::move(data), fixture::make_config(), 1, 1);
  CHECK_THROWS_AS(pipe2.run_stage("cycle"), IoError);
}

TEST_CASE("run_all_to_disk") {
  const auto in_dir = temp_dir("run_in");
  manifest_write_as(in_dir / "videos.jsonl", fixture::make_dataset().videos);
  manifest_write_as(in_dir / "tracks.jsonl", fixture::make_dataset().tracks);
  manifest_write_as(in_dir / "masks.jsonl", fixture::make_dataset().masks);
  manifest_write_as(in_dir / "poses.jsonl", fixture::make_dataset().poses);

  const auto out_a = temp_dir("run_out_a");
  const auto out_b = temp_dir("run_out_b");
  run_all_to_disk({in_dir, out_a}, fixture::make_config(), 42, 1);
  run_all_to_disk({in_dir, out_b}, fixture::make_config(), 42, 8);

  for (const char* name : {"final.videos.jsonl", "rejects.jsonl",
                           "patterns.jsonl", "stats.jsonl",
                           "resolved_config.txt", "stats.txt"}) {
    INFO(name);
    REQUIRE(fs::exists(out_a / name));
    CHECK(slurp(out_a / name) == slurp(out_b / name));
  }

  const auto finals = manifest_read_as<VideoRecord>(out_a / "final.videos.jsonl");
  const auto rejects = manifest_read_as<VideoRecord>(out_a / "rejects.jsonl");
  CHECK(finals.size() + rejects.size() == 20);
  for (const auto& r : rejects) CHECK(r.drop_reason.has_value());
  const auto reports = manifest_read_as<StageReport>(out_a / "stats.jsonl");
  CHECK(reports.size() == 7);
  CHECK(slurp(out_a / "stats.txt") == stats_report(reports));
}

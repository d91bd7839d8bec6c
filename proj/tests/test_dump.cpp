#include "test_support.hpp"
#include "visenv/dump.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

using namespace visenv;
namespace fs = std::filesystem;

namespace {

class ScratchDir {
 public:
  ScratchDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("visenv_dump_" + std::to_string(rd()) + std::to_string(rd()));
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_with_suffix(const fs::path& dir, const std::string& suffix) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) ++n;
  }
  return n;
}

DumpOptions small(const fs::path& dir) {
  DumpOptions o;
  o.width = 64;
  o.height = 48;
  o.outdir = dir.string();
  return o;
}

}  // namespace

TEST(Dump, OneSecondAtTenFpsWritesFiftyImagesAndTenFlowFiles) {
  ScratchDir dir;
  const auto written = run_dump(*find_builtin_scene("optical"), small(dir.path()));
  EXPECT_EQ(written.size(), 60u);
  EXPECT_EQ(count_with_suffix(dir.path(), ".png"), 50u);
  EXPECT_EQ(count_with_suffix(dir.path(), ".flo"), 10u);
  for (const char* view : {"_main.png", "_depth.png", "_category.png", "_object.png", "_flow_hsv.png"}) {
    EXPECT_EQ(count_with_suffix(dir.path(), view), 10u) << view;
  }
  EXPECT_TRUE(fs::exists(dir.path() / "t000000_main.png"));
  for (const auto& p : written) {
    ASSERT_TRUE(fs::exists(p)) << p;
    const auto bytes = slurp(p);
    if (p.ends_with(".png")) {
      EXPECT_EQ(bytes.substr(0, 8), std::string("\x89PNG\r\n\x1a\n", 8)) << p;
    } else {
      int w = 0, h = 0;
      const auto flow = read_flo(p, w, h);
      EXPECT_EQ(w, 64);
      EXPECT_EQ(h, 48);
      EXPECT_EQ(flow.size(), 2u * 64 * 48);
    }
  }
}

TEST(Dump, StaticSceneHasZeroFlowAndBlackVisualization) {
  const Scene still = testkit::scene_with_objects(
      R"({"primitive": {"kind": "box"}, "pose": {"position": [0, 0, -3]}, "category": 1})");
  ScratchDir dir, reference;
  DumpOptions o = small(dir.path());
  o.seconds = 0.3;
  const auto written = run_dump(still, o);
  ASSERT_EQ(written.size(), 18u);

  // All-black reference image of the same size.
  fs::create_directories(reference.path());
  const auto black = (reference.path() / "black.png").string();
  write_png(black, 64, 48, 3, std::vector<std::uint8_t>(3 * 64 * 48, 0));
  const auto black_bytes = slurp(black);

  for (const auto& p : written) {
    if (p.ends_with("_flow_hsv.png")) EXPECT_EQ(slurp(p), black_bytes) << p;
    if (p.ends_with(".flo")) {
      int w = 0, h = 0;
      const auto flow = read_flo(p, w, h);
      EXPECT_TRUE(std::all_of(flow.begin(), flow.end(), [](float v) { return v == 0.0f; })) << p;
    }
  }
}

TEST(Dump, SameSeedSameBytes) {
  ScratchDir a, b;
  const Scene scene = *find_builtin_scene("room_simple");
  DumpOptions oa = small(a.path()), ob = small(b.path());
  oa.seconds = ob.seconds = 0.5;
  oa.seed = ob.seed = 9;
  const auto wa = run_dump(scene, oa);
  const auto wb = run_dump(scene, ob);
  ASSERT_EQ(wa.size(), wb.size());
  for (std::size_t i = 0; i < wa.size(); ++i) {
    EXPECT_EQ(fs::path(wa[i]).filename(), fs::path(wb[i]).filename());
    EXPECT_EQ(slurp(wa[i]), slurp(wb[i])) << wa[i];
  }
}

TEST(Dump, RejectsBadOptions) {
  ScratchDir dir;
  const Scene scene = *find_builtin_scene("optical");
  DumpOptions o = small(dir.path());
  o.fps = 0;
  EXPECT_THROW(run_dump(scene, o), std::invalid_argument);
  o = small(dir.path());
  o.width = 0;
  EXPECT_THROW(run_dump(scene, o), std::invalid_argument);
}

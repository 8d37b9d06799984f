#include "doctest.h"

#include <array>
#include <filesystem>
#include <fstream>
#include <vector>

#include "mdf/errors.hpp"
#include "mdf/patch.hpp"
#include "mdf/rng.hpp"

using namespace mdf;

namespace {

std::vector<std::array<double, 2>> rect(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

RgbImage gradient_slide(int w, int h) {
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = static_cast<std::uint8_t>((x * 7 + y * 3) & 0xff);
      img.at(x, y, 1) = static_cast<std::uint8_t>((x + 2 * y) & 0xff);
      img.at(x, y, 2) = static_cast<std::uint8_t>((3 * x + y) & 0xff);
    }
  return img;
}

}  // namespace

TEST_CASE("point in polygon") {
  auto square = rect(0, 0, 1, 1);

  SUBCASE("interior, exterior, boundary") {
    CHECK(point_in_polygon(0.5, 0.5, square));
    CHECK_FALSE(point_in_polygon(2.0, 2.0, square));
    CHECK(point_in_polygon(0.0, 0.5, square));   // edge
    CHECK(point_in_polygon(1.0, 1.0, square));   // vertex
  }

  SUBCASE("degenerate polygon is rejected") {
    std::vector<std::array<double, 2>> two{{0, 0}, {1, 1}};
    CHECK_THROWS_AS(point_in_polygon(0.5, 0.5, two), ValidationError);
  }

  SUBCASE("non-convex even-odd behaviour") {
    // U-shape: the notch in the middle is outside.
    std::vector<std::array<double, 2>> u{{0, 0}, {3, 0}, {3, 3}, {2, 3},
                                         {2, 1}, {1, 1}, {1, 3}, {0, 3}};
    CHECK(point_in_polygon(0.5, 2.0, u));
    CHECK_FALSE(point_in_polygon(1.5, 2.0, u));
    CHECK(point_in_polygon(1.5, 0.5, u));
  }

  SUBCASE("random points against a convex half-plane oracle") {
    // Convex pentagon, counter-clockwise.
    std::vector<std::array<double, 2>> pent{{2, 0}, {4, 1}, {4.5, 3}, {2, 4.5}, {0, 2}};
    auto convex_inside = [&](double x, double y) {
      for (std::size_t i = 0; i < pent.size(); ++i) {
        const auto& a = pent[i];
        const auto& b = pent[(i + 1) % pent.size()];
        double cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
        if (cross < 0.0) return false;  // boundary counts as inside
      }
      return true;
    };
    Rng rng(77);
    for (int i = 0; i < 1000; ++i) {
      double x = rng.uniform() * 6.0 - 0.5;
      double y = rng.uniform() * 6.0 - 0.5;
      CHECK(point_in_polygon(x, y, pent) == convex_inside(x, y));
    }
  }
}

TEST_CASE("block mean downsample") {
  SUBCASE("exact means with round-half-up") {
    RgbImage img(2, 2);
    // channel 0 values 1,2,3,4 -> mean 2.5 -> rounds up to 3
    img.at(0, 0, 0) = 1;
    img.at(1, 0, 0) = 2;
    img.at(0, 1, 0) = 3;
    img.at(1, 1, 0) = 4;
    RgbImage out = block_mean_downsample(img, 2);
    CHECK(out.width == 1);
    CHECK(out.height == 1);
    CHECK(out.at(0, 0, 0) == 3);
    CHECK(out.at(0, 0, 1) == 0);
  }

  SUBCASE("factor 1 is the identity") {
    RgbImage img = gradient_slide(4, 4);
    RgbImage out = block_mean_downsample(img, 1);
    CHECK(out.pixels == img.pixels);
  }

  SUBCASE("non-divisible dimensions are rejected") {
    CHECK_THROWS_AS(block_mean_downsample(RgbImage(5, 4), 2), ValidationError);
  }
}

TEST_CASE("extract_patches grid counting") {
  TileSpec spec;
  spec.patch_size = 512;
  spec.stride = 512;
  spec.resize_to = 128;
  spec.max_per_slide = 100;
  spec.coverage_threshold = 1.0;

  SUBCASE("whole-image polygon on a 1024x1024 slide gives 4 patches") {
    RgbImage slide = gradient_slide(1024, 1024);
    Annotation ann{"s1", "IDHC", {rect(0, 0, 1024, 1024)}};
    Rng rng(1);
    auto patches = extract_patches(slide, ann, spec, rng);
    CHECK(patches.size() == 4);
    CHECK(patches[0].image.width == 128);
    CHECK(patches[0].image.height == 128);
    CHECK(patches[0].label == "IDHC");
    // Scan order by (y, x).
    CHECK(patches[0].x == 0);
    CHECK(patches[0].y == 0);
    CHECK(patches[1].x == 512);
    CHECK(patches[1].y == 0);
    CHECK(patches[2].y == 512);
  }

  SUBCASE("left-half polygon gives exactly the 2 left patches") {
    RgbImage slide = gradient_slide(1024, 1024);
    Annotation ann{"s1", "IDHNC", {rect(0, 0, 512, 1024)}};
    Rng rng(1);
    auto patches = extract_patches(slide, ann, spec, rng);
    CHECK(patches.size() == 2);
    CHECK(patches[0].x == 0);
    CHECK(patches[1].x == 0);
  }

  SUBCASE("patch content equals crop followed by block mean") {
    RgbImage slide = gradient_slide(1024, 1024);
    Annotation ann{"s1", "IDHWT", {rect(0, 0, 1024, 1024)}};
    Rng rng(1);
    auto patches = extract_patches(slide, ann, spec, rng);
    RgbImage crop(512, 512);
    for (int y = 0; y < 512; ++y)
      for (int x = 0; x < 512; ++x)
        for (int c = 0; c < 3; ++c) crop.at(x, y, c) = slide.at(512 + x, y, c);
    RgbImage expect = block_mean_downsample(crop, 4);
    CHECK(patches[1].image.pixels == expect.pixels);
  }

  SUBCASE("coverage monotonicity: higher threshold, never more patches") {
    RgbImage slide = gradient_slide(1024, 1024);
    // Diagonal polygon covering roughly half.
    Annotation ann{"s1", "IDHC",
                   {{{0.0, 0.0}, {1024.0, 0.0}, {0.0, 1024.0}}}};
    std::size_t prev = 100;
    for (double thr : {0.25, 0.5, 0.75, 1.0}) {
      TileSpec t = spec;
      t.coverage_threshold = thr;
      Rng rng(1);
      auto patches = extract_patches(slide, ann, t, rng);
      CHECK(patches.size() <= prev);
      prev = patches.size();
    }
  }

  SUBCASE("parameter validation") {
    RgbImage slide = gradient_slide(1024, 1024);
    Annotation ann{"s1", "IDHC", {rect(0, 0, 1024, 1024)}};
    Rng rng(1);
    TileSpec bad = spec;
    bad.resize_to = 100;  // 512 not divisible by 100
    CHECK_THROWS_AS(extract_patches(slide, ann, bad, rng), ValidationError);
    Annotation out_of_bounds{"s1", "IDHC", {rect(0, 0, 2000, 2000)}};
    CHECK_THROWS_AS(extract_patches(slide, out_of_bounds, spec, rng), ValidationError);
    RgbImage small(256, 256);
    CHECK_THROWS_AS(extract_patches(small, ann, spec, rng), ValidationError);
  }

  SUBCASE("no qualifying patches yields an empty list, not an error") {
    RgbImage slide = gradient_slide(1024, 1024);
    Annotation ann{"s1", "IDHC", {{{1.0, 1.0}, {3.0, 1.0}, {2.0, 3.0}}}};
    Rng rng(1);
    CHECK(extract_patches(slide, ann, spec, rng).empty());
  }
}

TEST_CASE("extract_patches cap and determinism") {
  // 4096x4096 with stride 512 gives an 8x8 = 64-candidate grid, capped to 10.
  TileSpec spec;
  spec.patch_size = 512;
  spec.stride = 512;
  spec.resize_to = 128;
  spec.max_per_slide = 10;
  RgbImage slide = gradient_slide(4096, 4096);
  Annotation ann{"s1", "IDHC", {rect(0, 0, 4096, 4096)}};

  Rng rng1(42), rng2(42), rng3(43);
  auto a = extract_patches(slide, ann, spec, rng1);
  auto b = extract_patches(slide, ann, spec, rng2);
  auto c = extract_patches(slide, ann, spec, rng3);

  CHECK(a.size() == 10);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].y == b[i].y);
    CHECK(a[i].image.pixels == b[i].image.pixels);
  }
  // Different seed, different subset (overwhelmingly likely).
  bool same = a.size() == c.size();
  if (same)
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].x != c[i].x || a[i].y != c[i].y) same = false;
  CHECK_FALSE(same);

  // Selected patches stay in scan order.
  for (std::size_t i = 1; i < a.size(); ++i)
    CHECK(std::tie(a[i - 1].y, a[i - 1].x) < std::tie(a[i].y, a[i].x));
}

TEST_CASE("manifest") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "mdf_manifest_test.jsonl";

  SUBCASE("empty manifest is a valid empty file") {
    write_manifest({}, path);
    CHECK(fs::file_size(path) == 0);
    CHECK(read_manifest(path).empty());
  }

  SUBCASE("round trip preserves entries, sorted by (slide_id, y, x)") {
    std::vector<ManifestEntry> entries{
        {"p/b.ppm", "IDHNC", "slide_b", 512, 0},
        {"p/a2.ppm", "IDHC", "slide_a", 0, 512},
        {"p/a1.ppm", "IDHC", "slide_a", 512, 0},
        {"p/a0.ppm", "IDHC", "slide_a", 0, 0},
    };
    write_manifest(entries, path);
    auto back = read_manifest(path);
    REQUIRE(back.size() == 4);
    CHECK(back[0].path == "p/a0.ppm");
    CHECK(back[1].path == "p/a1.ppm");
    CHECK(back[2].path == "p/a2.ppm");
    CHECK(back[3].path == "p/b.ppm");
    CHECK(back[3].label == "IDHNC");
    CHECK(back[1].x == 512);
    CHECK(back[1].y == 0);

    // Byte-identical on rewrite.
    std::ifstream in1(path);
    std::string first((std::istreambuf_iterator<char>(in1)), std::istreambuf_iterator<char>());
    write_manifest(back, path);
    std::ifstream in2(path);
    std::string second((std::istreambuf_iterator<char>(in2)), std::istreambuf_iterator<char>());
    CHECK(first == second);
  }

  SUBCASE("malformed lines are rejected") {
    std::ofstream out(path);
    out << "{\"path\": \"x\"}\n";
    out.close();
    CHECK_THROWS_AS(read_manifest(path), ValidationError);
  }

  fs::remove(path);
}

#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mdf/image.hpp"
#include "mdf/rng.hpp"

namespace mdf {

struct Annotation {
  std::string slide_id;
  std::string label;
  // Closed polygons in pixel coordinates; the last vertex connects to the first.
  std::vector<std::vector<std::array<double, 2>>> polygons;
};

struct TileSpec {
  int patch_size = 512;
  int stride = 512;
  int resize_to = 128;
  int max_per_slide = 100;
  double coverage_threshold = 1.0;  // fraction of patch pixels inside the annotation
};

// Even-odd (ray casting) membership; points on the boundary count as inside.
bool point_in_polygon(double x, double y, std::span<const std::array<double, 2>> polygon);

// Exact block-mean reduction by an integer factor, rounding half up.
RgbImage block_mean_downsample(const RgbImage& img, int factor);

struct PatchRecord {
  RgbImage image;  // downsampled to resize_to
  std::string label;
  int x = 0;  // top-left corner in slide coordinates
  int y = 0;
};

// Tiles the slide on a stride-aligned grid from (0,0), keeps patches whose
// pixel-center coverage by the annotation polygons reaches the threshold,
// caps them at max_per_slide by a seeded uniform subset, and block-mean
// downsamples each kept patch. Kept patches are ordered by (y, x).
std::vector<PatchRecord> extract_patches(const RgbImage& slide, const Annotation& ann,
                                         const TileSpec& spec, Rng& rng);

struct ManifestEntry {
  std::string path;
  std::string label;
  std::string slide_id;
  int x = 0;
  int y = 0;
};

// JSON-lines manifest, one object per patch, sorted by (slide_id, y, x).
void write_manifest(std::span<const ManifestEntry> entries, const std::filesystem::path& path);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace mdf

#include "mdf/patch.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "mdf/errors.hpp"

namespace mdf {

bool point_in_polygon(double x, double y, std::span<const std::array<double, 2>> polygon) {
  if (polygon.size() < 3) throw ValidationError("point_in_polygon: fewer than 3 vertices");

  const std::size_t n = polygon.size();
  // Boundary points are inside by contract.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = polygon[i];
    const auto& b = polygon[(i + 1) % n];
    double cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
    if (cross == 0.0 && x >= std::min(a[0], b[0]) && x <= std::max(a[0], b[0]) &&
        y >= std::min(a[1], b[1]) && y <= std::max(a[1], b[1]))
      return true;
  }

  bool inside = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = polygon[i];
    const auto& b = polygon[(i + 1) % n];
    if ((a[1] > y) != (b[1] > y)) {
      double x_cross = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
      if (x < x_cross) inside = !inside;
    }
  }
  return inside;
}

RgbImage block_mean_downsample(const RgbImage& img, int factor) {
  if (factor < 1) throw ValidationError("block_mean_downsample: factor must be >= 1");
  if (img.width % factor != 0 || img.height % factor != 0)
    throw ValidationError("block_mean_downsample: dimensions not divisible by factor");
  RgbImage out(img.width / factor, img.height / factor);
  const unsigned block = static_cast<unsigned>(factor) * factor;
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < 3; ++c) {
        unsigned long long sum = 0;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx)
            sum += img.at(x * factor + dx, y * factor + dy, c);
        // round half up
        out.at(x, y, c) = static_cast<std::uint8_t>((2 * sum + block) / (2ULL * block));
      }
  return out;
}

namespace {

double patch_coverage(const Annotation& ann, int px, int py, int size) {
  long long inside = 0;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double cx = px + x + 0.5;
      double cy = py + y + 0.5;
      for (const auto& poly : ann.polygons) {
        if (point_in_polygon(cx, cy, poly)) {
          ++inside;
          break;
        }
      }
    }
  }
  return static_cast<double>(inside) / (static_cast<double>(size) * size);
}

}  // namespace

std::vector<PatchRecord> extract_patches(const RgbImage& slide, const Annotation& ann,
                                         const TileSpec& spec, Rng& rng) {
  if (spec.patch_size < 1 || spec.stride < 1 || spec.resize_to < 1)
    throw ValidationError("extract_patches: sizes must be positive");
  if (spec.patch_size % spec.resize_to != 0)
    throw ValidationError("extract_patches: patch_size not divisible by resize_to");
  if (spec.max_per_slide < 1)
    throw ValidationError("extract_patches: max_per_slide must be >= 1");
  if (!(spec.coverage_threshold > 0.0 && spec.coverage_threshold <= 1.0))
    throw ValidationError("extract_patches: coverage_threshold outside (0,1]");
  if (slide.width < spec.patch_size || slide.height < spec.patch_size)
    throw ValidationError("extract_patches: slide smaller than patch_size");
  for (const auto& poly : ann.polygons) {
    if (poly.size() < 3) throw ValidationError("extract_patches: degenerate polygon");
    for (const auto& v : poly)
      if (v[0] < 0.0 || v[0] > slide.width || v[1] < 0.0 || v[1] > slide.height)
        throw ValidationError("extract_patches: polygon vertex outside slide bounds");
  }

  // Candidate grid positions, scanned row by row.
  std::vector<std::pair<int, int>> kept;  // (y, x)
  for (int y = 0; y + spec.patch_size <= slide.height; y += spec.stride)
    for (int x = 0; x + spec.patch_size <= slide.width; x += spec.stride) {
      double cov = patch_coverage(ann, x, y, spec.patch_size);
      if (cov + 1e-12 >= spec.coverage_threshold) kept.emplace_back(y, x);
    }

  if (static_cast<int>(kept.size()) > spec.max_per_slide) {
    // Seeded partial Fisher-Yates, then restore scan order for the survivors.
    std::vector<std::size_t> idx(kept.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < spec.max_per_slide; ++i) {
      int j = rng.uniform_int(i, static_cast<int>(idx.size()) - 1);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(spec.max_per_slide);
    std::sort(idx.begin(), idx.end());
    std::vector<std::pair<int, int>> subset;
    subset.reserve(idx.size());
    for (std::size_t i : idx) subset.push_back(kept[i]);
    kept = std::move(subset);
  }

  const int factor = spec.patch_size / spec.resize_to;
  std::vector<PatchRecord> out;
  out.reserve(kept.size());
  for (auto [y, x] : kept) {
    RgbImage crop(spec.patch_size, spec.patch_size);
    for (int row = 0; row < spec.patch_size; ++row) {
      const std::uint8_t* src = &slide.pixels[(static_cast<std::size_t>(y + row) * slide.width + x) * 3];
      std::copy(src, src + static_cast<std::size_t>(spec.patch_size) * 3,
                &crop.pixels[static_cast<std::size_t>(row) * spec.patch_size * 3]);
    }
    PatchRecord rec;
    rec.image = block_mean_downsample(crop, factor);
    rec.label = ann.label;
    rec.x = x;
    rec.y = y;
    out.push_back(std::move(rec));
  }
  return out;
}

void write_manifest(std::span<const ManifestEntry> entries, const std::filesystem::path& path) {
  std::vector<const ManifestEntry*> order;
  order.reserve(entries.size());
  for (const auto& e : entries) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(), [](const ManifestEntry* a, const ManifestEntry* b) {
    return std::tie(a->slide_id, a->y, a->x) < std::tie(b->slide_id, b->y, b->x);
  });

  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  for (const ManifestEntry* e : order) {
    nlohmann::json j{{"path", e->path},
                     {"label", e->label},
                     {"slide_id", e->slide_id},
                     {"x", e->x},
                     {"y", e->y}};
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("short write: " + path.string());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest: " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.path = j.at("path").get<std::string>();
      e.label = j.at("label").get<std::string>();
      e.slide_id = j.at("slide_id").get<std::string>();
      e.x = j.at("x").get<int>();
      e.y = j.at("y").get<int>();
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ValidationError("manifest line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return entries;
}

}  // namespace mdf

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mdf/metrics.hpp"

namespace mdf {

// Flat matrix file: magic "F32\n", u32 LE rows, u32 LE cols, then rows*cols
// float32 LE values, row-major.
struct F32Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;
};

void write_f32(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
               std::span<const double> values);
F32Matrix read_f32(const std::filesystem::path& path);

FeatureSet to_feature_set(const F32Matrix& m, const std::string& space_name = "final");
ProbTable to_prob_table(const F32Matrix& m);

}  // namespace mdf

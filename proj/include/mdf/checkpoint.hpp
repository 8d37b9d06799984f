#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mdf/denoiser.hpp"
#include "mdf/diffusion.hpp"

namespace mdf {

// Model checkpoint, binary format "MDF1":
//   magic 'M','D','F','1'
//   u32 version (= 1)
//   u32 steps, f64 beta_start, f64 beta_end
//   u8 weighting (0 simple, 1 p2), f64 c, f64 p2_k, f64 p2_gamma
//   u32 label count, then per label: u32 length + bytes
//   u32 input_dim, u32 embed_dim, u8 activation (0 silu, 1 tanh),
//   u32 hidden layer count, u32 per hidden width
//   u64 parameter count, then float32 LE parameters in model layout order
//   u32 CRC32 (IEEE) of everything above
// All integers and floats little-endian. load(save(x)) is bit-exact: the
// in-memory parameters are float32.
struct Checkpoint {
  int steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  Weighting weighting = Weighting::p2;
  double c = 1e-3;
  double p2_k = 1.0;
  double p2_gamma = 1.0;
  std::vector<std::string> labels;
  DenoiserConfig model;  // num_labels must equal labels.size()
  std::vector<float> params;
};

std::uint32_t crc32(std::span<const std::uint8_t> data);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint make_checkpoint(const NoiseSchedule& schedule_src, const LossConfig& loss,
                           const std::vector<std::string>& labels, const DenoiserModel& model,
                           double beta_start, double beta_end);
DenoiserModel model_from_checkpoint(const Checkpoint& ckpt);
NoiseSchedule schedule_from_checkpoint(const Checkpoint& ckpt);

}  // namespace mdf

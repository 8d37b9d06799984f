#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace mdf {

// Run configuration. Parsed strictly: unknown sections or keys are rejected,
// missing keys fall back to the defaults below.
struct RunConfig {
  struct Schedule {
    int steps = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
  } schedule;

  struct Loss {
    std::string weighting = "p2";  // "simple" or "p2"
    double c = 1e-3;
    double p2_k = 1.0;
    double p2_gamma = 1.0;
  } loss;

  struct Model {
    std::vector<int> hidden_dims{128, 128};
    int embed_dim = 32;
    std::string activation = "silu";  // "silu" or "tanh"
  } model;

  struct Train {
    double lr = 1e-4;
    int batch = 32;
    int steps = 10000;
    std::uint64_t seed = 1;
  } train;

  struct Data {
    std::vector<std::string> labels{"IDHC", "IDHNC", "IDHWT"};
    int patch = 512;
    int stride = 512;
    int resize = 128;
    int max_per_slide = 100;
    double coverage = 1.0;
  } data;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json run_config_to_json(const RunConfig& cfg);

}  // namespace mdf

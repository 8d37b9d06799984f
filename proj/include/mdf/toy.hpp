#pragma once

#include <functional>
#include <vector>

#include "mdf/diffusion.hpp"

namespace mdf {

// Two-label planar mixture used for desk-scale training runs:
// label 0 -> N((-offset, 0), stddev^2 I), label 1 -> N((+offset, 0), stddev^2 I).
struct TwoGaussians {
  double offset = 3.0;
  double stddev = 0.5;

  Sample draw(int label, Rng& rng) const;
  std::vector<Sample> batch(std::size_t n, Rng& rng) const;  // labels uniform
};

using BatchProvider = std::function<std::vector<Sample>(std::size_t, Rng&)>;

struct TrainOptions {
  int steps = 10000;
  int batch = 32;
  double lr = 1e-4;
  int log_every = 50;
};

struct TrainLogEntry {
  int step = 0;
  double loss = 0.0;
};

// Plain training loop: loss + gradients per step, Adam update, periodic loss
// log (always includes the final step). Deterministic given the rng.
std::vector<TrainLogEntry> train_denoiser(DenoiserModel& model, const NoiseSchedule& s,
                                          const BatchProvider& provider, const LossConfig& loss,
                                          const TrainOptions& opts, Rng& rng,
                                          Exec exec = Exec::parallel);

}  // namespace mdf

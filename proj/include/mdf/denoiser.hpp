#pragma once

#include <span>
#include <vector>

#include "mdf/rng.hpp"

namespace mdf {

enum class Activation { silu, tanh };

// Sinusoidal embedding: emb[2i] = sin(t * w_i), emb[2i+1] = cos(t * w_i) with
// w_i = 10000^(-2i/E). embed_dim must be even.
std::vector<double> time_embedding(int t, int embed_dim);

struct DenoiserConfig {
  int input_dim = 2;                     // D, also the output dimension
  std::vector<int> hidden_dims{128, 128};
  int embed_dim = 32;                    // E, shared by timestep and label embeddings
  int num_labels = 2;                    // G
  Activation activation = Activation::silu;
};

// Reference noise-prediction network eps(x, t, g): the input vector is the
// concatenation [x | time_embedding(t) | label_embedding(g)], followed by
// fully connected hidden layers and a linear output of dimension D. The label
// embedding table is a learned parameter; the time embedding is fixed.
//
// All parameters live in one flat vector, ordered layer by layer (W row-major,
// then b) with the label table (G x E row-major) at the end. Checkpoints and
// the optimizer use the same ordering.
class DenoiserModel {
 public:
  // Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) init of every weight and bias,
  // drawn from `rng` in parameter-layout order; label embedding rows use
  // fan_in = embed_dim.
  DenoiserModel(DenoiserConfig cfg, Rng& rng);

  static DenoiserModel from_params(DenoiserConfig cfg, std::vector<double> params);

  const DenoiserConfig& config() const { return cfg_; }
  std::size_t param_count() const { return params_.size(); }
  std::span<const double> params() const { return params_; }
  std::span<double> params() { return params_; }

  struct ForwardCache {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;   // z per layer
    std::vector<std::vector<double>> post;  // activation output per hidden layer
  };

  std::vector<double> predict_eps(std::span<const double> x, int t, int label) const;
  std::vector<double> predict_eps(std::span<const double> x, int t, int label,
                                  ForwardCache& cache) const;

  // Accumulate d<upstream, eps(x,t,label)>/dtheta into grad (same layout and
  // length as params()). Recomputes the forward pass.
  void backward(std::span<const double> x, int t, int label,
                std::span<const double> upstream, std::span<double> grad) const;
  // Same, reusing a cache produced by predict_eps.
  void backward(const ForwardCache& cache, int label, std::span<const double> upstream,
                std::span<double> grad) const;

 private:
  DenoiserConfig cfg_;
  std::vector<int> dims_;            // layer widths: [D+2E, hidden..., D]
  std::vector<std::size_t> w_off_;   // per-layer weight offsets into params_
  std::vector<std::size_t> b_off_;
  std::size_t embed_off_ = 0;
  std::vector<double> params_;

  explicit DenoiserModel(DenoiserConfig cfg);
  void build_layout();
  double activate(double z) const;
  double activate_grad(double z) const;
};

struct AdamParams {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamState {
 public:
  AdamState(std::size_t param_count, AdamParams hp = {});

  // Standard bias-corrected update in place.
  void step(std::span<double> params, std::span<const double> grad);

  long step_count() const { return step_; }
  const AdamParams& hyperparams() const { return hp_; }

 private:
  AdamParams hp_;
  long step_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace mdf

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mdf/denoiser.hpp"
#include "mdf/exec.hpp"
#include "mdf/rng.hpp"
#include "mdf/schedule.hpp"

namespace mdf {

struct Sample {
  std::vector<double> data;
  int label = 0;
};

enum class Weighting { simple, p2 };

struct LossConfig {
  Weighting weighting = Weighting::p2;
  double c = 1e-3;  // mixing coefficient of the fixed-variance VLB term
  P2Params p2;
};

// Any noise predictor, including closed-form test oracles.
using EpsFn = std::function<std::vector<double>(std::span<const double> x, int t, int label)>;

// x_t = sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * eps.
std::vector<double> forward_sample(const NoiseSchedule& s, std::span<const double> x0, int t,
                                   std::span<const double> eps);

struct PosteriorParams {
  std::vector<double> mean;
  double variance = 0.0;
};

// Mean and variance of q(x_{t-1} | x_t, x_0):
//   mean = (sqrt(ab_{t-1}) beta_t x0 + sqrt(1-beta_t)(1-ab_{t-1}) xt) / (1-ab_t)
//   var  = beta_tilde_t
PosteriorParams posterior_params(const NoiseSchedule& s, std::span<const double> x0,
                                 std::span<const double> xt, int t);

struct LossResult {
  double loss = 0.0;
  std::vector<double> grads;
};

// Per-sample randomness of one loss evaluation: timestep and noise vector.
struct NoiseDraw {
  int t = 1;
  std::vector<double> eps;
};

// The draws behind one loss evaluation: t uniform in 1..T and eps ~ N(0,I)
// per sample, in batch order.
std::vector<NoiseDraw> draw_training_noise(const NoiseSchedule& s, std::size_t batch_size,
                                           int dim, Rng& rng);

// Single training objective evaluation over a batch:
//   mean_i [ weight(t_i) * |eps_i - eps_theta(x_ti)|^2 / D  +  c * vlb_{t_i} ]
// where weight is the simple or P2 weight and vlb_t is the per-step
// KL-matching term in epsilon form, beta_t / ((1-beta_t)(1-ab_t)) * |eps -
// eps_theta|^2 / D. Gradients are accumulated per sample and merged in batch
// order, so serial and parallel execution agree bit for bit.
LossResult training_loss(const DenoiserModel& model, const NoiseSchedule& s,
                         std::span<const Sample> batch, const LossConfig& cfg, Rng& rng,
                         Exec exec = Exec::parallel);
LossResult training_loss(const DenoiserModel& model, const NoiseSchedule& s,
                         std::span<const Sample> batch, const LossConfig& cfg,
                         std::span<const NoiseDraw> draws, Exec exec = Exec::parallel);

// Loss value alone for an arbitrary predictor (no gradients); the second
// route through the same objective used to cross-check the model path.
double training_loss_value(const EpsFn& eps_fn, const NoiseSchedule& s,
                           std::span<const Sample> batch, const LossConfig& cfg,
                           std::span<const NoiseDraw> draws);

// x_{t-1} = (x_t - beta_t / sqrt(1-ab_t) * eps_theta) / sqrt(1-beta_t) + sigma_t * z,
// sigma_t = sqrt(beta_tilde_t). The noise term is dropped at t == 1 unless
// noise_at_final_step is set.
std::vector<double> reverse_step(const EpsFn& eps_fn, const NoiseSchedule& s,
                                 std::span<const double> xt, int t, int label,
                                 std::span<const double> z, bool noise_at_final_step = false);

// Ancestral sampling from x_T ~ N(0,I) down to x_0, conditioning every
// predictor call on `label`. Chain i draws all its noise from rng.fork(i), so
// results are reproducible and independent of the execution mode.
std::vector<std::vector<double>> sample_chain(const EpsFn& eps_fn, const NoiseSchedule& s,
                                              int label, int count, int dim, Rng& rng,
                                              Exec exec = Exec::parallel,
                                              bool noise_at_final_step = false);

EpsFn as_eps_fn(const DenoiserModel& model);

// Exact eps predictor for x0 ~ N(mean, var * I), for verifying the sampler
// against a closed-form target. With a = sqrt(ab_t):
//   E[x0 | x_t] = mean + a * var / (a^2 var + 1 - ab_t) * (x_t - a * mean)
//   eps*(x_t,t) = (x_t - a * E[x0 | x_t]) / sqrt(1 - ab_t)
// following from the joint Gaussian of (x0, x_t); the label is ignored.
class AnalyticGaussianDenoiser {
 public:
  AnalyticGaussianDenoiser(const NoiseSchedule& s, std::vector<double> mean, double var);

  std::vector<double> conditional_x0_mean(std::span<const double> xt, int t) const;
  std::vector<double> operator()(std::span<const double> xt, int t, int label) const;
  EpsFn as_eps_fn() const;

 private:
  const NoiseSchedule* schedule_;
  std::vector<double> mean_;
  double var_;
};

}  // namespace mdf

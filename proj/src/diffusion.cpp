#include "mdf/diffusion.hpp"

#include <cmath>
#include <string>

#include "mdf/errors.hpp"

namespace mdf {

std::vector<double> forward_sample(const NoiseSchedule& s, std::span<const double> x0, int t,
                                   std::span<const double> eps) {
  if (eps.size() != x0.size())
    throw ValidationError("forward_sample: eps dimension " + std::to_string(eps.size()) +
                          " != data dimension " + std::to_string(x0.size()));
  double ab = s.alpha_bar(t);
  if (t < 1) throw std::out_of_range("forward_sample: t must be >= 1");
  double a = std::sqrt(ab);
  double b = std::sqrt(1.0 - ab);
  std::vector<double> xt(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) xt[i] = a * x0[i] + b * eps[i];
  return xt;
}

PosteriorParams posterior_params(const NoiseSchedule& s, std::span<const double> x0,
                                 std::span<const double> xt, int t) {
  if (x0.size() != xt.size()) throw ValidationError("posterior_params: dimension mismatch");
  double beta = s.beta(t);
  double ab = s.alpha_bar(t);
  double ab_prev = s.alpha_bar(t - 1);
  double denom = 1.0 - ab;
  double c0 = std::sqrt(ab_prev) * beta / denom;
  double ct = std::sqrt(1.0 - beta) * (1.0 - ab_prev) / denom;
  PosteriorParams out;
  out.mean.resize(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) out.mean[i] = c0 * x0[i] + ct * xt[i];
  out.variance = s.posterior_variance(t);
  return out;
}

namespace {

void check_batch(std::span<const Sample> batch, int dim, int num_labels, double c) {
  if (batch.empty()) throw ValidationError("training_loss: empty batch");
  if (c < 0.0) throw ValidationError("training_loss: c must be >= 0");
  for (const Sample& smp : batch) {
    if (smp.data.size() != static_cast<std::size_t>(dim))
      throw ValidationError("training_loss: sample dimension mismatch");
    if (smp.label < 0 || smp.label >= num_labels)
      throw ValidationError("training_loss: label outside model range");
  }
}

// weight(t) + c * vlb coefficient, divided by the dimension.
double loss_scale(const NoiseSchedule& s, int t, const LossConfig& cfg, int dim) {
  double weight = cfg.weighting == Weighting::simple ? simple_weight(s, t)
                                                     : p2_weight(s, t, cfg.p2);
  double vlb_coeff = s.beta(t) / ((1.0 - s.beta(t)) * (1.0 - s.alpha_bar(t)));
  return (weight + cfg.c * vlb_coeff) / dim;
}

}  // namespace

std::vector<NoiseDraw> draw_training_noise(const NoiseSchedule& s, std::size_t batch_size,
                                           int dim, Rng& rng) {
  std::vector<NoiseDraw> draws(batch_size);
  for (auto& d : draws) {
    d.t = rng.uniform_int(1, s.steps());
    d.eps.resize(dim);
    for (int i = 0; i < dim; ++i) d.eps[i] = rng.normal();
  }
  return draws;
}

LossResult training_loss(const DenoiserModel& model, const NoiseSchedule& s,
                         std::span<const Sample> batch, const LossConfig& cfg, Rng& rng,
                         Exec exec) {
  check_batch(batch, model.config().input_dim, model.config().num_labels, cfg.c);
  std::vector<NoiseDraw> draws =
      draw_training_noise(s, batch.size(), model.config().input_dim, rng);
  return training_loss(model, s, batch, cfg, draws, exec);
}

LossResult training_loss(const DenoiserModel& model, const NoiseSchedule& s,
                         std::span<const Sample> batch, const LossConfig& cfg,
                         std::span<const NoiseDraw> draws, Exec exec) {
  const int dim = model.config().input_dim;
  check_batch(batch, dim, model.config().num_labels, cfg.c);
  if (draws.size() != batch.size())
    throw ValidationError("training_loss: one noise draw per sample required");

  const int batch_size = static_cast<int>(batch.size());
  std::vector<double> losses(batch_size, 0.0);
  std::vector<std::vector<double>> grads(batch_size);

  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (par)
  for (int i = 0; i < batch_size; ++i) {
    const int t = draws[i].t;
    const double scale = loss_scale(s, t, cfg, dim);
    std::vector<double> xt = forward_sample(s, batch[i].data, t, draws[i].eps);
    DenoiserModel::ForwardCache cache;
    std::vector<double> eps_hat = model.predict_eps(xt, t, batch[i].label, cache);

    double mse = 0.0;
    for (int d = 0; d < dim; ++d) {
      double diff = draws[i].eps[d] - eps_hat[d];
      mse += diff * diff;
    }
    losses[i] = scale * mse;

    // d(loss_i)/d(eps_hat), already divided by the batch size for the mean.
    std::vector<double> upstream(dim);
    for (int d = 0; d < dim; ++d)
      upstream[d] = 2.0 * scale * (eps_hat[d] - draws[i].eps[d]) / batch_size;
    grads[i].assign(model.param_count(), 0.0);
    model.backward(cache, batch[i].label, upstream, grads[i]);
  }

  // Fixed merge order keeps the reduction identical across execution modes.
  LossResult out;
  out.grads.assign(model.param_count(), 0.0);
  for (int i = 0; i < batch_size; ++i) {
    out.loss += losses[i];
    for (std::size_t p = 0; p < out.grads.size(); ++p) out.grads[p] += grads[i][p];
  }
  out.loss /= batch_size;
  return out;
}

double training_loss_value(const EpsFn& eps_fn, const NoiseSchedule& s,
                           std::span<const Sample> batch, const LossConfig& cfg,
                           std::span<const NoiseDraw> draws) {
  if (batch.empty()) throw ValidationError("training_loss: empty batch");
  if (draws.size() != batch.size())
    throw ValidationError("training_loss: one noise draw per sample required");
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const int t = draws[i].t;
    const int dim = static_cast<int>(batch[i].data.size());
    const double scale = loss_scale(s, t, cfg, dim);
    std::vector<double> xt = forward_sample(s, batch[i].data, t, draws[i].eps);
    std::vector<double> eps_hat = eps_fn(xt, t, batch[i].label);
    double mse = 0.0;
    for (int d = 0; d < dim; ++d) {
      double diff = draws[i].eps[d] - eps_hat[d];
      mse += diff * diff;
    }
    total += scale * mse;
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> reverse_step(const EpsFn& eps_fn, const NoiseSchedule& s,
                                 std::span<const double> xt, int t, int label,
                                 std::span<const double> z, bool noise_at_final_step) {
  if (z.size() != xt.size()) throw ValidationError("reverse_step: z dimension mismatch");
  double beta = s.beta(t);
  double ab = s.alpha_bar(t);
  double c1 = 1.0 / std::sqrt(1.0 - beta);
  double c2 = beta / std::sqrt(1.0 - ab);
  double sigma = std::sqrt(s.posterior_variance(t));
  if (t == 1 && !noise_at_final_step) sigma = 0.0;

  std::vector<double> eps = eps_fn(xt, t, label);
  if (eps.size() != xt.size()) throw ValidationError("reverse_step: predictor dimension mismatch");
  std::vector<double> prev(xt.size());
  for (std::size_t i = 0; i < xt.size(); ++i)
    prev[i] = c1 * (xt[i] - c2 * eps[i]) + sigma * z[i];
  return prev;
}

std::vector<std::vector<double>> sample_chain(const EpsFn& eps_fn, const NoiseSchedule& s,
                                              int label, int count, int dim, Rng& rng,
                                              Exec exec, bool noise_at_final_step) {
  if (count < 1) throw ValidationError("sample_chain: count must be >= 1");
  if (dim < 1) throw ValidationError("sample_chain: dim must be >= 1");

  std::vector<std::vector<double>> out(count);
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (par)
  for (int i = 0; i < count; ++i) {
    Rng chain_rng = rng.fork(static_cast<std::uint64_t>(i));
    std::vector<double> x(dim);
    for (int d = 0; d < dim; ++d) x[d] = chain_rng.normal();
    std::vector<double> z(dim, 0.0);
    for (int t = s.steps(); t >= 1; --t) {
      if (t > 1 || noise_at_final_step)
        for (int d = 0; d < dim; ++d) z[d] = chain_rng.normal();
      else
        std::fill(z.begin(), z.end(), 0.0);
      x = reverse_step(eps_fn, s, x, t, label, z, noise_at_final_step);
    }
    out[i] = std::move(x);
  }
  return out;
}

EpsFn as_eps_fn(const DenoiserModel& model) {
  return [&model](std::span<const double> x, int t, int label) {
    return model.predict_eps(x, t, label);
  };
}

AnalyticGaussianDenoiser::AnalyticGaussianDenoiser(const NoiseSchedule& s,
                                                   std::vector<double> mean, double var)
    : schedule_(&s), mean_(std::move(mean)), var_(var) {
  if (var_ < 0.0) throw ValidationError("analytic denoiser: variance must be >= 0");
}

std::vector<double> AnalyticGaussianDenoiser::conditional_x0_mean(std::span<const double> xt,
                                                                  int t) const {
  if (xt.size() != mean_.size())
    throw ValidationError("analytic denoiser: dimension mismatch");
  double ab = schedule_->alpha_bar(t);
  double a = std::sqrt(ab);
  double gain = a * var_ / (ab * var_ + 1.0 - ab);
  std::vector<double> x0(xt.size());
  for (std::size_t i = 0; i < xt.size(); ++i)
    x0[i] = mean_[i] + gain * (xt[i] - a * mean_[i]);
  return x0;
}

std::vector<double> AnalyticGaussianDenoiser::operator()(std::span<const double> xt, int t,
                                                         int /*label*/) const {
  double ab = schedule_->alpha_bar(t);
  double a = std::sqrt(ab);
  double b = std::sqrt(1.0 - ab);
  std::vector<double> x0 = conditional_x0_mean(xt, t);
  std::vector<double> eps(xt.size());
  for (std::size_t i = 0; i < xt.size(); ++i) eps[i] = (xt[i] - a * x0[i]) / b;
  return eps;
}

EpsFn AnalyticGaussianDenoiser::as_eps_fn() const {
  return [this](std::span<const double> xt, int t, int label) {
    return (*this)(xt, t, label);
  };
}

}  // namespace mdf

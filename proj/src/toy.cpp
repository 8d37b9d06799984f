#include "mdf/toy.hpp"

#include "mdf/errors.hpp"

namespace mdf {

Sample TwoGaussians::draw(int label, Rng& rng) const {
  if (label < 0 || label > 1) throw ValidationError("two-gaussians: label must be 0 or 1");
  double cx = label == 0 ? -offset : offset;
  Sample s;
  s.label = label;
  s.data = {cx + stddev * rng.normal(), stddev * rng.normal()};
  return s;
}

std::vector<Sample> TwoGaussians::batch(std::size_t n, Rng& rng) const {
  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw(rng.uniform_int(0, 1), rng));
  return out;
}

std::vector<TrainLogEntry> train_denoiser(DenoiserModel& model, const NoiseSchedule& s,
                                          const BatchProvider& provider, const LossConfig& loss,
                                          const TrainOptions& opts, Rng& rng, Exec exec) {
  if (opts.steps < 0) throw ValidationError("train: steps must be >= 0");
  if (opts.batch < 1) throw ValidationError("train: batch must be >= 1");

  AdamParams adam_hp;
  adam_hp.lr = opts.lr;
  AdamState adam(model.param_count(), adam_hp);

  std::vector<TrainLogEntry> log;
  for (int step = 1; step <= opts.steps; ++step) {
    std::vector<Sample> batch = provider(static_cast<std::size_t>(opts.batch), rng);
    LossResult res = training_loss(model, s, batch, loss, rng, exec);
    adam.step(model.params(), res.grads);
    if (step % std::max(1, opts.log_every) == 0 || step == opts.steps)
      log.push_back({step, res.loss});
  }
  return log;
}

}  // namespace mdf

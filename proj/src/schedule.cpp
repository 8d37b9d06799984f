#include "mdf/schedule.hpp"

#include <cmath>
#include <string>

#include "mdf/errors.hpp"

namespace mdf {

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  if (betas_.empty()) throw ValidationError("schedule: needs at least one step");
  alpha_bars_.resize(betas_.size());
  double prod = 1.0;
  for (std::size_t i = 0; i < betas_.size(); ++i) {
    if (!(betas_[i] > 0.0 && betas_[i] < 1.0))
      throw ValidationError("schedule: beta_" + std::to_string(i + 1) + " outside (0,1)");
    prod *= 1.0 - betas_[i];
    alpha_bars_[i] = prod;
  }
}

void NoiseSchedule::check_step(int t, int lo) const {
  if (t < lo || t > steps())
    throw std::out_of_range("schedule: step " + std::to_string(t) + " outside " +
                            std::to_string(lo) + ".." + std::to_string(steps()));
}

double NoiseSchedule::beta(int t) const {
  check_step(t, 1);
  return betas_[t - 1];
}

double NoiseSchedule::alpha_bar(int t) const {
  check_step(t, 0);
  return t == 0 ? 1.0 : alpha_bars_[t - 1];
}

double NoiseSchedule::posterior_variance(int t) const {
  check_step(t, 1);
  return (1.0 - alpha_bar(t - 1)) / (1.0 - alpha_bar(t)) * beta(t);
}

NoiseSchedule make_linear_schedule(int steps, double beta_start, double beta_end) {
  if (steps < 1) throw ValidationError("make_linear_schedule: steps must be >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
    throw ValidationError("make_linear_schedule: need 0 < beta_start <= beta_end < 1");
  std::vector<double> betas(steps);
  if (steps == 1) {
    betas[0] = beta_start;
  } else {
    for (int i = 0; i < steps; ++i)
      betas[i] = beta_start + static_cast<double>(i) / (steps - 1) * (beta_end - beta_start);
  }
  return NoiseSchedule(std::move(betas));
}

double snr(const NoiseSchedule& s, int t) {
  double ab = s.alpha_bar(t);
  if (t < 1) throw std::out_of_range("snr: step must be >= 1");
  return ab / (1.0 - ab);
}

double simple_weight(const NoiseSchedule& s, int t) {
  return (1.0 - s.beta(t)) * (1.0 - s.alpha_bar(t)) / s.beta(t);
}

double p2_weight(const NoiseSchedule& s, int t, const P2Params& p) {
  if (p.k < 0.0 || p.gamma < 0.0) throw ValidationError("p2_weight: k and gamma must be >= 0");
  double w = simple_weight(s, t);
  if (p.gamma == 0.0) return w;
  double denom = p.k + snr(s, t);
  if (!(denom > 0.0)) throw ValidationError("p2_weight: k + SNR(t) must be positive");
  return w / std::pow(denom, p.gamma);
}

}  // namespace mdf

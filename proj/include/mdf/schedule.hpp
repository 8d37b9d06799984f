#pragma once

#include <span>
#include <vector>

namespace mdf {

// Reweighting knobs for the perception-prioritized loss:
//   w'(t) = w(t) / (k + SNR(t))^gamma
// k keeps the weight bounded as SNR(t) -> 0, gamma controls how strongly the
// high-SNR (late clean-up) steps are damped.
struct P2Params {
  double k = 1.0;
  double gamma = 1.0;
};

// Per-timestep constants of the forward noising process. Timesteps are
// 1-indexed: t in 1..steps(), with alpha_bar(0) == 1 by convention.
// Immutable after construction; safe to share across threads.
class NoiseSchedule {
 public:
  NoiseSchedule(std::vector<double> betas);

  int steps() const { return static_cast<int>(betas_.size()); }
  double beta(int t) const;        // noise scale at step t
  double alpha_bar(int t) const;   // prod_{s<=t} (1 - beta_s); accepts t = 0
  double posterior_variance(int t) const;  // beta_tilde_t

  std::span<const double> betas() const { return betas_; }
  std::span<const double> alpha_bars() const { return alpha_bars_; }

 private:
  void check_step(int t, int lo) const;
  std::vector<double> betas_;
  std::vector<double> alpha_bars_;
};

// Evenly spaced betas from beta_start to beta_end inclusive.
NoiseSchedule make_linear_schedule(int steps, double beta_start, double beta_end);

// SNR(t) = alpha_bar_t / (1 - alpha_bar_t); strictly decreasing in t.
double snr(const NoiseSchedule& s, int t);

// lambda_t = (1 - beta_t)(1 - alpha_bar_t) / beta_t.
double simple_weight(const NoiseSchedule& s, int t);

// lambda'_t = lambda_t / (k + SNR(t))^gamma; equals lambda_t when gamma == 0.
double p2_weight(const NoiseSchedule& s, int t, const P2Params& p);

}  // namespace mdf

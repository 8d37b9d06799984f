// Benchmark of the OpenMP kernels against their serial reference paths.
// Results are required to match bit for bit; the table reports timings only.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "mdf/diffusion.hpp"
#include "mdf/exec.hpp"
#include "mdf/metrics.hpp"
#include "mdf/rng.hpp"
#include "mdf/stain.hpp"
#include "mdf/toy.hpp"

using namespace mdf;

namespace {

using clock_type = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& fn) {
  auto t0 = clock_type::now();
  fn();
  auto t1 = clock_type::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const std::string& name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-28s %10.1f ms %10.1f ms %8.2fx   %s\n", name.c_str(), serial_ms, parallel_ms,
              serial_ms / parallel_ms, identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads: %d\n", max_threads());
  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  {
    Rng rng(1);
    FeatureSet f;
    f.rows = 4000;
    f.cols = 32;
    f.values.resize(f.rows * f.cols);
    for (double& v : f.values) v = rng.normal();

    std::vector<double> serial_r, parallel_r;
    double s = time_ms([&] { serial_r = knn_radii(f, 3, Exec::serial); });
    double p = time_ms([&] { parallel_r = knn_radii(f, 3, Exec::parallel); });
    report("knn_radii 4000x32 k=3", s, p, serial_r == parallel_r);
  }

  {
    Rng rng(2);
    FeatureSet r, g;
    r.rows = g.rows = 2000;
    r.cols = g.cols = 32;
    r.values.resize(r.rows * r.cols);
    g.values.resize(g.rows * g.cols);
    for (double& v : r.values) v = rng.normal();
    for (double& v : g.values) v = rng.normal() + 0.5;

    double pr_s = 0.0, pr_p = 0.0;
    double s = time_ms([&] { pr_s = improved_precision(r, g, 3, Exec::serial); });
    double p = time_ms([&] { pr_p = improved_precision(r, g, 3, Exec::parallel); });
    report("improved_precision 2k/2k", s, p, pr_s == pr_p);
  }

  {
    Rng rng(3);
    FeatureSet f;
    f.rows = 20000;
    f.cols = 64;
    f.values.resize(f.rows * f.cols);
    for (double& v : f.values) v = rng.normal();

    GaussianStats a, b;
    double s = time_ms([&] { a = gaussian_stats(f, Exec::serial); });
    double p = time_ms([&] { b = gaussian_stats(f, Exec::parallel); });
    report("covariance 20000x64", s, p, a.mean == b.mean && a.covariance == b.covariance);
  }

  {
    Rng rng(4);
    std::array<double, 6> basis{0.65, 0.07, 0.70, 0.99, 0.29, 0.11};
    OdMatrix od;
    od.pixel_count = 1 << 20;
    od.values.resize(od.pixel_count * 3);
    for (std::size_t i = 0; i < od.pixel_count; ++i) {
      double h0 = rng.uniform(), h1 = rng.uniform();
      for (int c = 0; c < 3; ++c) od.values[3 * i + c] = basis[2 * c] * h0 + basis[2 * c + 1] * h1;
    }
    std::vector<double> hs, hp;
    double s = time_ms([&] { hs = solve_concentrations(basis, od, 0.1, Exec::serial); });
    double p = time_ms([&] { hp = solve_concentrations(basis, od, 0.1, Exec::parallel); });
    report("stain solve 1M px", s, p, hs == hp);
  }

  {
    NoiseSchedule sched = make_linear_schedule(1000, 1e-4, 0.02);
    DenoiserConfig cfg;
    cfg.input_dim = 2;
    cfg.hidden_dims = {128, 128};
    cfg.embed_dim = 32;
    cfg.num_labels = 2;
    Rng init(5);
    DenoiserModel model(cfg, init);
    TwoGaussians task;
    Rng batch_rng(6);
    std::vector<Sample> batch = task.batch(256, batch_rng);
    LossConfig lc;

    Rng r1(7), r2(7);
    LossResult a, b;
    double s = time_ms([&] { a = training_loss(model, sched, batch, lc, r1, Exec::serial); });
    double p = time_ms([&] { b = training_loss(model, sched, batch, lc, r2, Exec::parallel); });
    report("training_loss batch 256", s, p, a.loss == b.loss && a.grads == b.grads);
  }

  {
    NoiseSchedule sched = make_linear_schedule(250, 4e-4, 0.05);
    AnalyticGaussianDenoiser den(sched, {0.5, -0.5}, 0.25);
    Rng r1(8), r2(8);
    std::vector<std::vector<double>> a, b;
    double s = time_ms([&] { a = sample_chain(den.as_eps_fn(), sched, 0, 512, 2, r1, Exec::serial); });
    double p = time_ms([&] { b = sample_chain(den.as_eps_fn(), sched, 0, 512, 2, r2, Exec::parallel); });
    report("sample_chain 512x250", s, p, a == b);
  }

  return 0;
}

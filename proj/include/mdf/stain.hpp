#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "mdf/exec.hpp"
#include "mdf/image.hpp"
#include "mdf/rng.hpp"

namespace mdf {

// Optical density samples, 3 values per pixel in image order.
struct OdMatrix {
  std::size_t pixel_count = 0;
  std::vector<double> values;

  const double* pixel(std::size_t p) const { return values.data() + 3 * p; }
  double l1(std::size_t p) const {
    const double* v = pixel(p);
    return v[0] + v[1] + v[2];
  }
};

// Pixels with OD L1 below this are treated as background (glass, no tissue).
inline constexpr double kBackgroundOdL1 = 0.15;

// Beer-Lambert conversion: od = -log((value + 1) / (i0 + 1)) per channel.
OdMatrix rgb_to_od(const RgbImage& img, double i0 = 255.0);
RgbImage od_to_rgb(const OdMatrix& od, int width, int height, double i0 = 255.0);

// Two-stain color model: basis is the 3x2 OD matrix (row-major, columns are
// unit-norm stain vectors, hematoxylin-like column first) and c99 the 99th
// percentile concentration of each stain over tissue pixels.
struct StainModel {
  std::array<double, 6> basis{};
  std::array<double, 2> c99{};
};

struct StainFitOptions {
  double lambda = 0.1;   // L1 penalty on concentrations
  int iterations = 200;  // alternating iterations
  int warm_start_iterations = 15;  // multiplicative-update rounds before alternating
  int restarts = 2;                // seeded restarts, best objective kept
  int polish_iterations = 30;  // final unpenalized iterations to debias the basis
};

struct StainFit {
  std::array<double, 6> basis{};
  std::vector<double> concentrations;    // 2 x pixel_count, row-major
  std::vector<double> objective_trace;   // per alternating iteration, non-increasing
};

// ||OD - W H||_F^2 + lambda * |H|_1 for the 3x2 basis / 2xN concentration pair.
double stain_objective(const OdMatrix& od, const std::array<double, 6>& basis,
                       const std::vector<double>& concentrations, double lambda);

// Exact minimizer of ||od_pixel - W h||^2 + lambda*(h1+h2) over h >= 0, by
// enumerating the active sets of the 2-variable problem.
std::array<double, 2> solve_concentration(const std::array<double, 6>& basis,
                                          const double od_pixel[3], double lambda);
std::vector<double> solve_concentrations(const std::array<double, 6>& basis,
                                         const OdMatrix& od, double lambda,
                                         Exec exec = Exec::parallel);

// Sparse non-negative factorization OD ~ W H with unit-norm W columns. Each
// half step is an exact block minimizer (per-pixel concentration solve, then a
// closed-form column update), so the objective never increases across
// alternating iterations. Requires at least 2 non-background pixels.
StainFit fit_stains(const OdMatrix& od, const StainFitOptions& opts, Rng& rng,
                    Exec exec = Exec::parallel);
StainFit fit_stains(const OdMatrix& od, double lambda_sparse, int iterations, Rng& rng);

// Fits a full stain model (basis + c99 concentrations) from an image.
StainModel fit_stain_model(const RgbImage& img, const StainFitOptions& opts, Rng& rng,
                           Exec exec = Exec::parallel);

// JSON form: {"W": [6 basis entries row-major], "c99": [2 values]}.
void save_stain_model(const StainModel& model, const std::filesystem::path& path);
StainModel load_stain_model(const std::filesystem::path& path);

// Re-expresses src in the target stain basis while keeping its own
// concentration pattern: per-stain concentrations are rescaled by the ratio of
// the models' c99 statistics and reconstructed against the target basis.
// Background pixels pass through unchanged. Transfer concentrations use plain
// non-negative least squares (lambda 0): shrinkage here would shift every
// tissue pixel, breaking the lossless identity transfer.
RgbImage normalize_to_target(const RgbImage& src, const StainModel& src_model,
                             const StainModel& tgt_model, double lambda = 0.0,
                             Exec exec = Exec::parallel);

}  // namespace mdf

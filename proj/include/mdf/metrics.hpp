#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdf/exec.hpp"
#include "mdf/image.hpp"

namespace mdf {

// One row per image, F columns of real-valued features. space_name tags which
// feature space the rows live in ("final", "spatial", ...).
struct FeatureSet {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major
  std::string space_name = "final";

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  const double* row(std::size_t r) const { return values.data() + r * cols; }
};

struct GaussianStats {
  std::vector<double> mean;        // F
  std::vector<double> covariance;  // F x F row-major, 1/(N-1) normalization
};

struct ProbTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major; rows are class distributions
};

// Row = ground truth (real, synthetic), column = judged (real, synthetic).
struct Contingency2x2 {
  std::uint64_t a = 0, b = 0, c = 0, d = 0;
};

GaussianStats gaussian_stats(const FeatureSet& f, Exec exec = Exec::parallel);

// Frechet distance between Gaussian fits:
//   |mu_r - mu_g|^2 + Tr(S_r + S_g - 2 (S_r S_g)^(1/2))
// with the trace term evaluated as Tr((S_r^1/2 S_g S_r^1/2)^1/2) via symmetric
// eigendecomposition. Tiny negative eigenvalues are clamped to zero; identical
// stats short-circuit to exactly 0.
double fid(const GaussianStats& r, const GaussianStats& g);

// FID over a spatially sensitive feature space; both sets must carry the same
// spatial space_name.
double sfid(const FeatureSet& r_spatial, const FeatureSet& g_spatial,
            Exec exec = Exec::parallel);

// IS = exp(mean_x KL(p(y|x) || p(y))) with p(y) the column mean and 0 log 0 = 0.
double inception_score(const ProbTable& p);

// Distance from each row to its k-th nearest neighbor, excluding itself.
std::vector<double> knn_radii(const FeatureSet& f, int k, Exec exec = Exec::parallel);

// Fraction of generated rows inside the union of balls centered at real rows
// with their k-NN radii (and the role-swapped recall variant).
double improved_precision(const FeatureSet& real_f, const FeatureSet& gen_f, int k,
                          Exec exec = Exec::parallel);
double improved_recall(const FeatureSet& real_f, const FeatureSet& gen_f, int k,
                       Exec exec = Exec::parallel);

// Two-sided Fisher exact p-value by the point-probability rule: the sum of
// hypergeometric probabilities of all tables with the observed margins that
// are no more likely than the observed one (1e-12 relative slack), using
// log-factorial accumulation. Any zero margin yields p = 1.
double fisher_exact_two_sided(const Contingency2x2& t);

enum class FeatureExtractor { identity, random_projection, histogram };

// Deterministic stand-ins for a pretrained embedding network:
//   identity          - flattened channels / 255
//   random_projection - seeded Gaussian projection to proj_dim features
//   histogram         - 16-bin per-channel histograms plus mean gradient magnitude
FeatureSet extract_features(std::span<const RgbImage> images, FeatureExtractor extractor,
                            std::uint64_t seed = 0, int proj_dim = 64,
                            const std::string& space_name = "final");

}  // namespace mdf

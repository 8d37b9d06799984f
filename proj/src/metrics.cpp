#include "mdf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mdf/errors.hpp"
#include "mdf/linalg.hpp"
#include "mdf/rng.hpp"

namespace mdf {

namespace {

void check_feature_set(const FeatureSet& f, const char* who) {
  if (f.rows == 0 || f.cols == 0)
    throw ValidationError(std::string(who) + ": empty feature set");
  if (f.values.size() != f.rows * f.cols)
    throw ValidationError(std::string(who) + ": inconsistent feature buffer");
  for (double v : f.values)
    if (!std::isfinite(v)) throw ValidationError(std::string(who) + ": non-finite feature");
}

double sq_dist(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

GaussianStats gaussian_stats(const FeatureSet& f, Exec exec) {
  check_feature_set(f, "gaussian_stats");
  if (f.rows < 2) throw ValidationError("gaussian_stats: needs at least 2 rows");

  const std::size_t n = f.rows, dim = f.cols;
  GaussianStats out;
  out.mean.assign(dim, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < dim; ++c) out.mean[c] += f.at(r, c);
  for (double& m : out.mean) m /= static_cast<double>(n);

  out.covariance.assign(dim * dim, 0.0);
  // One covariance entry per task; the inner sum over rows stays serial so the
  // result is identical to the serial path.
  const bool par = exec == Exec::parallel;
  const long long total = static_cast<long long>(dim * dim);
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (par)
  for (long long e = 0; e < total; ++e) {
    std::size_t i = static_cast<std::size_t>(e) / dim;
    std::size_t j = static_cast<std::size_t>(e) % dim;
    if (j < i) continue;  // fill upper triangle, mirror below
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      s += (f.at(r, i) - out.mean[i]) * (f.at(r, j) - out.mean[j]);
    out.covariance[i * dim + j] = s / static_cast<double>(n - 1);
  }
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < i; ++j) out.covariance[i * dim + j] = out.covariance[j * dim + i];
  return out;
}

double fid(const GaussianStats& r, const GaussianStats& g) {
  const std::size_t dim = r.mean.size();
  if (g.mean.size() != dim || r.covariance.size() != dim * dim ||
      g.covariance.size() != dim * dim)
    throw ValidationError("fid: dimension mismatch");
  if (r.mean == g.mean && r.covariance == g.covariance) return 0.0;

  const int n = static_cast<int>(dim);
  double mean_term = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    double d = r.mean[i] - g.mean[i];
    mean_term += d * d;
  }

  // Scale-aware tolerance for eigenvalue clamping.
  double scale = std::max(1e-10, std::max(std::abs(trace(r.covariance, n)),
                                          std::abs(trace(g.covariance, n))));
  double clamp_tol = 1e-8 * scale;

  std::vector<double> root_r = sym_sqrt(r.covariance, n, clamp_tol);
  std::vector<double> inner = mat_mul(mat_mul(root_r, g.covariance, n), root_r, n);
  // Symmetrize away the rounding skew before the final eigendecomposition.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double avg = 0.5 * (inner[static_cast<std::size_t>(i) * n + j] +
                          inner[static_cast<std::size_t>(j) * n + i]);
      inner[static_cast<std::size_t>(i) * n + j] = avg;
      inner[static_cast<std::size_t>(j) * n + i] = avg;
    }
  SymEig eig = sym_eig(inner, n);
  double inner_tol = 1e-8 * std::max(1e-10, std::abs(trace(inner, n)));
  double tr_sqrt = 0.0;
  for (double lam : eig.values) {
    if (lam < -inner_tol)
      throw NumericError("fid: covariance product not PSD within tolerance");
    tr_sqrt += std::sqrt(std::max(lam, 0.0));
  }

  double value = mean_term + trace(r.covariance, n) + trace(g.covariance, n) - 2.0 * tr_sqrt;
  return std::max(value, 0.0);
}

double sfid(const FeatureSet& r_spatial, const FeatureSet& g_spatial, Exec exec) {
  if (r_spatial.space_name != g_spatial.space_name)
    throw ValidationError("sfid: feature spaces differ ('" + r_spatial.space_name + "' vs '" +
                          g_spatial.space_name + "')");
  return fid(gaussian_stats(r_spatial, exec), gaussian_stats(g_spatial, exec));
}

double inception_score(const ProbTable& p) {
  if (p.rows == 0 || p.cols == 0) throw ValidationError("inception_score: empty table");
  if (p.values.size() != p.rows * p.cols)
    throw ValidationError("inception_score: inconsistent buffer");
  for (std::size_t r = 0; r < p.rows; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < p.cols; ++c) {
      double v = p.values[r * p.cols + c];
      if (!(v >= 0.0)) throw ValidationError("inception_score: negative probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ValidationError("inception_score: row " + std::to_string(r) +
                            " sums to " + std::to_string(sum));
  }

  // Compensated column sums so constant columns yield their exact mean (a
  // uniform table must produce an IS of exactly 1).
  std::vector<double> marginal(p.cols, 0.0);
  std::vector<double> comp(p.cols, 0.0);
  for (std::size_t r = 0; r < p.rows; ++r)
    for (std::size_t c = 0; c < p.cols; ++c) {
      double y = p.values[r * p.cols + c] - comp[c];
      double t = marginal[c] + y;
      comp[c] = (t - marginal[c]) - y;
      marginal[c] = t;
    }
  for (double& m : marginal) m /= static_cast<double>(p.rows);

  double mean_kl = 0.0;
  for (std::size_t r = 0; r < p.rows; ++r) {
    double kl = 0.0;
    for (std::size_t c = 0; c < p.cols; ++c) {
      double v = p.values[r * p.cols + c];
      if (v > 0.0) kl += v * std::log(v / marginal[c]);
    }
    mean_kl += std::max(kl, 0.0);  // KL is nonnegative; guard rounding
  }
  mean_kl /= static_cast<double>(p.rows);
  return std::exp(mean_kl);
}

std::vector<double> knn_radii(const FeatureSet& f, int k, Exec exec) {
  check_feature_set(f, "knn_radii");
  if (k < 1) throw ValidationError("knn_radii: k must be >= 1");
  if (static_cast<std::size_t>(k) >= f.rows)
    throw ValidationError("knn_radii: k must be smaller than the number of rows");

  const long long n = static_cast<long long>(f.rows);
  std::vector<double> radii(f.rows, 0.0);
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (par)
  for (long long i = 0; i < n; ++i) {
    std::vector<double> d;
    d.reserve(f.rows - 1);
    for (long long j = 0; j < n; ++j) {
      if (j == i) continue;
      d.push_back(sq_dist(f.row(i), f.row(j), f.cols));
    }
    std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
    radii[i] = std::sqrt(d[k - 1]);
  }
  return radii;
}

namespace {

// Count of candidate rows falling inside the k-NN ball union of the anchors.
std::size_t manifold_hits(const FeatureSet& anchors, const std::vector<double>& radii,
                          const FeatureSet& candidates, Exec exec) {
  const long long n = static_cast<long long>(candidates.rows);
  std::vector<unsigned char> hit(candidates.rows, 0);
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (par)
  for (long long i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < anchors.rows; ++j) {
      double d2 = sq_dist(candidates.row(i), anchors.row(j), anchors.cols);
      if (d2 <= radii[j] * radii[j]) {
        hit[i] = 1;
        break;
      }
    }
  }
  std::size_t count = 0;
  for (unsigned char h : hit) count += h;
  return count;
}

}  // namespace

double improved_precision(const FeatureSet& real_f, const FeatureSet& gen_f, int k, Exec exec) {
  check_feature_set(real_f, "improved_precision");
  check_feature_set(gen_f, "improved_precision");
  if (real_f.cols != gen_f.cols)
    throw ValidationError("improved_precision: feature dimensions differ");
  std::vector<double> radii = knn_radii(real_f, k, exec);
  std::size_t hits = manifold_hits(real_f, radii, gen_f, exec);
  return static_cast<double>(hits) / static_cast<double>(gen_f.rows);
}

double improved_recall(const FeatureSet& real_f, const FeatureSet& gen_f, int k, Exec exec) {
  return improved_precision(gen_f, real_f, k, exec);
}

double fisher_exact_two_sided(const Contingency2x2& t) {
  const std::uint64_t r1 = t.a + t.b, r2 = t.c + t.d;
  const std::uint64_t c1 = t.a + t.c, c2 = t.b + t.d;
  const std::uint64_t n = r1 + r2;
  if (n == 0) throw ValidationError("fisher_exact: empty table");
  if (n > 1000000) throw ValidationError("fisher_exact: table total too large");
  if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0) return 1.0;

  // log k! by cumulative summation; exact enough for the table sizes at hand.
  std::vector<double> logfact(n + 1, 0.0);
  for (std::uint64_t i = 2; i <= n; ++i) logfact[i] = logfact[i - 1] + std::log(static_cast<double>(i));

  auto log_prob = [&](std::uint64_t k) {
    // P(k) = C(r1,k) C(r2,c1-k) / C(n,c1)
    return logfact[r1] - logfact[k] - logfact[r1 - k] + logfact[r2] -
           logfact[c1 - k] - logfact[r2 - (c1 - k)] -
           (logfact[n] - logfact[c1] - logfact[n - c1]);
  };

  const std::uint64_t lo = c1 > r2 ? c1 - r2 : 0;
  const std::uint64_t hi = std::min(r1, c1);
  const double log_p_obs = log_prob(t.a);
  const double slack = std::log1p(1e-12);

  double p = 0.0;
  for (std::uint64_t k = lo; k <= hi; ++k) {
    double lp = log_prob(k);
    if (lp <= log_p_obs + slack) p += std::exp(lp);
  }
  return std::min(p, 1.0);
}

FeatureSet extract_features(std::span<const RgbImage> images, FeatureExtractor extractor,
                            std::uint64_t seed, int proj_dim, const std::string& space_name) {
  if (images.empty()) throw ValidationError("extract_features: no images");
  const int w = images[0].width, h = images[0].height;
  for (const RgbImage& img : images)
    if (img.width != w || img.height != h)
      throw ValidationError("extract_features: images have mixed dimensions");

  const std::size_t flat = static_cast<std::size_t>(w) * h * 3;
  FeatureSet out;
  out.rows = images.size();
  out.space_name = space_name;

  switch (extractor) {
    case FeatureExtractor::identity: {
      out.cols = flat;
      out.values.resize(out.rows * out.cols);
      for (std::size_t r = 0; r < out.rows; ++r)
        for (std::size_t i = 0; i < flat; ++i)
          out.values[r * flat + i] = images[r].pixels[i] / 255.0;
      break;
    }
    case FeatureExtractor::random_projection: {
      if (proj_dim < 1) throw ValidationError("extract_features: proj_dim must be >= 1");
      out.cols = static_cast<std::size_t>(proj_dim);
      // One Gaussian matrix per (seed, shape), fixed for the whole run.
      Rng rng(mix_seed(seed, flat * 31 + static_cast<std::size_t>(proj_dim)));
      std::vector<double> proj(out.cols * flat);
      for (double& v : proj) v = rng.normal() / std::sqrt(static_cast<double>(proj_dim));
      out.values.assign(out.rows * out.cols, 0.0);
      for (std::size_t r = 0; r < out.rows; ++r)
        for (std::size_t c = 0; c < out.cols; ++c) {
          double s = 0.0;
          const double* row = proj.data() + c * flat;
          for (std::size_t i = 0; i < flat; ++i) s += row[i] * (images[r].pixels[i] / 255.0);
          out.values[r * out.cols + c] = s;
        }
      break;
    }
    case FeatureExtractor::histogram: {
      out.cols = 16 * 3 + 1;
      out.values.assign(out.rows * out.cols, 0.0);
      for (std::size_t r = 0; r < out.rows; ++r) {
        double* feat = out.values.data() + r * out.cols;
        const RgbImage& img = images[r];
        const double inv_n = 1.0 / static_cast<double>(img.pixel_count());
        for (std::size_t p = 0; p < img.pixel_count(); ++p)
          for (int c = 0; c < 3; ++c) feat[c * 16 + (img.pixels[3 * p + c] >> 4)] += inv_n;
        // Mean gradient magnitude of the gray image over the valid grid.
        if (w > 1 && h > 1) {
          double total = 0.0;
          for (int y = 0; y + 1 < h; ++y)
            for (int x = 0; x + 1 < w; ++x) {
              auto gray = [&](int xx, int yy) {
                return (img.at(xx, yy, 0) + img.at(xx, yy, 1) + img.at(xx, yy, 2)) /
                       (3.0 * 255.0);
              };
              double gx = gray(x + 1, y) - gray(x, y);
              double gy = gray(x, y + 1) - gray(x, y);
              total += std::sqrt(gx * gx + gy * gy);
            }
          feat[48] = total / (static_cast<double>(w - 1) * (h - 1));
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace mdf

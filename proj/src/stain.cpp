#include "mdf/stain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "json.hpp"
#include "mdf/errors.hpp"

namespace mdf {

namespace {

// Column j of the row-major 3x2 basis.
inline void get_col(const std::array<double, 6>& w, int j, double out[3]) {
  out[0] = w[j];
  out[1] = w[2 + j];
  out[2] = w[4 + j];
}

inline void set_col(std::array<double, 6>& w, int j, const double in[3]) {
  w[j] = in[0];
  w[2 + j] = in[1];
  w[4 + j] = in[2];
}

inline double dot3(const double a[3], const double b[3]) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

void normalize_columns(std::array<double, 6>& w) {
  for (int j = 0; j < 2; ++j) {
    double col[3];
    get_col(w, j, col);
    double n = std::sqrt(dot3(col, col));
    if (n > 0.0) {
      col[0] /= n;
      col[1] /= n;
      col[2] /= n;
      set_col(w, j, col);
    }
  }
}

std::size_t tissue_count(const OdMatrix& od) {
  std::size_t n = 0;
  for (std::size_t p = 0; p < od.pixel_count; ++p)
    if (od.l1(p) > kBackgroundOdL1) ++n;
  return n;
}

// A few rounds of the classic multiplicative updates to move the random init
// toward the data before the exact alternating phase.
void warm_start(const OdMatrix& od, std::array<double, 6>& w, std::vector<double>& h,
                double lambda, int rounds) {
  const std::size_t n = od.pixel_count;
  const double tiny = 1e-12;
  for (int round = 0; round < rounds; ++round) {
    double wtw[4] = {0, 0, 0, 0};  // 2x2
    {
      double c0[3], c1[3];
      get_col(w, 0, c0);
      get_col(w, 1, c1);
      wtw[0] = dot3(c0, c0);
      wtw[1] = wtw[2] = dot3(c0, c1);
      wtw[3] = dot3(c1, c1);
    }
    for (std::size_t p = 0; p < n; ++p) {
      const double* v = od.pixel(p);
      double c0[3], c1[3];
      get_col(w, 0, c0);
      get_col(w, 1, c1);
      double num0 = dot3(c0, v);
      double num1 = dot3(c1, v);
      double h0 = h[2 * p], h1 = h[2 * p + 1];
      double den0 = wtw[0] * h0 + wtw[1] * h1 + lambda * 0.5 + tiny;
      double den1 = wtw[2] * h0 + wtw[3] * h1 + lambda * 0.5 + tiny;
      h[2 * p] = h0 * num0 / den0;
      h[2 * p + 1] = h1 * num1 / den1;
    }
    // W <- W * (V H^T) / (W H H^T)
    double vht[6] = {0, 0, 0, 0, 0, 0};
    double hht[4] = {0, 0, 0, 0};
    for (std::size_t p = 0; p < n; ++p) {
      const double* v = od.pixel(p);
      double h0 = h[2 * p], h1 = h[2 * p + 1];
      for (int r = 0; r < 3; ++r) {
        vht[2 * r] += v[r] * h0;
        vht[2 * r + 1] += v[r] * h1;
      }
      hht[0] += h0 * h0;
      hht[1] += h0 * h1;
      hht[3] += h1 * h1;
    }
    hht[2] = hht[1];
    std::array<double, 6> w_new = w;
    for (int r = 0; r < 3; ++r)
      for (int j = 0; j < 2; ++j) {
        double denom = w[2 * r] * hht[2 * 0 + j] + w[2 * r + 1] * hht[2 * 1 + j] + tiny;
        w_new[2 * r + j] = w[2 * r + j] * vht[2 * r + j] / denom;
      }
    w = w_new;
    normalize_columns(w);
  }
}

struct ColumnStats {
  double a[2][3];  // a[j] = sum_p od_p * h_j(p)
  double s11 = 0.0, s12 = 0.0, s22 = 0.0;
};

ColumnStats column_stats(const OdMatrix& od, const std::vector<double>& h) {
  ColumnStats st{};
  for (std::size_t p = 0; p < od.pixel_count; ++p) {
    const double* v = od.pixel(p);
    double h0 = h[2 * p], h1 = h[2 * p + 1];
    for (int r = 0; r < 3; ++r) {
      st.a[0][r] += v[r] * h0;
      st.a[1][r] += v[r] * h1;
    }
    st.s11 += h0 * h0;
    st.s12 += h0 * h1;
    st.s22 += h1 * h1;
  }
  return st;
}

// Exact minimizer of ||R_j - w h_j||_F^2 over w >= 0, |w| = 1 with everything
// else fixed: maximize w.c over the nonnegative unit sphere, i.e. the
// normalized positive part of c (or the least-negative axis when c <= 0).
void update_column(std::array<double, 6>& w, int j, const ColumnStats& st) {
  double sjj = (j == 0) ? st.s11 : st.s22;
  if (sjj == 0.0) return;  // stain unused, objective independent of this column
  double other[3];
  get_col(w, 1 - j, other);
  double c[3];
  for (int r = 0; r < 3; ++r) c[r] = st.a[j][r] - other[r] * st.s12;

  double pos[3] = {std::max(c[0], 0.0), std::max(c[1], 0.0), std::max(c[2], 0.0)};
  double n = std::sqrt(dot3(pos, pos));
  if (n > 0.0) {
    pos[0] /= n;
    pos[1] /= n;
    pos[2] /= n;
    set_col(w, j, pos);
  } else {
    int best = 0;
    if (c[1] > c[best]) best = 1;
    if (c[2] > c[best]) best = 2;
    double axis[3] = {0, 0, 0};
    axis[best] = 1.0;
    set_col(w, j, axis);
  }
}

}  // namespace

OdMatrix rgb_to_od(const RgbImage& img, double i0) {
  if (!(i0 > 0.0)) throw ValidationError("rgb_to_od: i0 must be positive");
  OdMatrix od;
  od.pixel_count = img.pixel_count();
  od.values.resize(od.pixel_count * 3);
  for (std::size_t i = 0; i < od.values.size(); ++i)
    od.values[i] = -std::log((static_cast<double>(img.pixels[i]) + 1.0) / (i0 + 1.0));
  return od;
}

RgbImage od_to_rgb(const OdMatrix& od, int width, int height, double i0) {
  if (od.pixel_count != static_cast<std::size_t>(width) * height)
    throw ValidationError("od_to_rgb: dimension mismatch");
  RgbImage img(width, height);
  for (std::size_t i = 0; i < od.values.size(); ++i) {
    double v = (i0 + 1.0) * std::exp(-od.values[i]) - 1.0;
    img.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return img;
}

double stain_objective(const OdMatrix& od, const std::array<double, 6>& basis,
                       const std::vector<double>& concentrations, double lambda) {
  if (concentrations.size() != od.pixel_count * 2)
    throw ValidationError("stain_objective: concentration size mismatch");
  double obj = 0.0;
  for (std::size_t p = 0; p < od.pixel_count; ++p) {
    const double* v = od.pixel(p);
    double h0 = concentrations[2 * p], h1 = concentrations[2 * p + 1];
    for (int r = 0; r < 3; ++r) {
      double resid = v[r] - basis[2 * r] * h0 - basis[2 * r + 1] * h1;
      obj += resid * resid;
    }
    obj += lambda * (h0 + h1);
  }
  return obj;
}

std::array<double, 2> solve_concentration(const std::array<double, 6>& basis,
                                          const double od_pixel[3], double lambda) {
  double w0[3], w1[3];
  get_col(basis, 0, w0);
  get_col(basis, 1, w1);
  double g = dot3(w0, w1);
  double n0 = dot3(w0, w0), n1 = dot3(w1, w1);
  double c0 = dot3(w0, od_pixel), c1 = dot3(w1, od_pixel);
  double vv = dot3(od_pixel, od_pixel);
  double half = lambda * 0.5;

  auto value = [&](double h0, double h1) {
    return vv - 2.0 * (h0 * c0 + h1 * c1) + n0 * h0 * h0 + 2.0 * g * h0 * h1 +
           n1 * h1 * h1 + lambda * (h0 + h1);
  };

  double best0 = 0.0, best1 = 0.0;
  double best = vv;  // both zero

  if (n0 > 0.0) {
    double h = std::max(0.0, (c0 - half) / n0);
    double f = value(h, 0.0);
    if (f < best) {
      best = f;
      best0 = h;
      best1 = 0.0;
    }
  }
  if (n1 > 0.0) {
    double h = std::max(0.0, (c1 - half) / n1);
    double f = value(0.0, h);
    if (f < best) {
      best = f;
      best0 = 0.0;
      best1 = h;
    }
  }
  double det = n0 * n1 - g * g;
  if (det > 1e-12) {
    double r0 = c0 - half, r1 = c1 - half;
    double h0 = (n1 * r0 - g * r1) / det;
    double h1 = (n0 * r1 - g * r0) / det;
    if (h0 > 0.0 && h1 > 0.0) {
      double f = value(h0, h1);
      if (f < best) {
        best = f;
        best0 = h0;
        best1 = h1;
      }
    }
  }
  return {best0, best1};
}

std::vector<double> solve_concentrations(const std::array<double, 6>& basis,
                                         const OdMatrix& od, double lambda, Exec exec) {
  std::vector<double> h(od.pixel_count * 2, 0.0);
  const bool par = exec == Exec::parallel;
  const long long n = static_cast<long long>(od.pixel_count);
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (par)
  for (long long p = 0; p < n; ++p) {
    auto conc = solve_concentration(basis, od.pixel(static_cast<std::size_t>(p)), lambda);
    h[2 * p] = conc[0];
    h[2 * p + 1] = conc[1];
  }
  return h;
}

StainFit fit_stains(const OdMatrix& od, const StainFitOptions& opts, Rng& rng, Exec exec) {
  if (opts.lambda < 0.0) throw ValidationError("fit_stains: lambda must be >= 0");
  if (opts.iterations < 1) throw ValidationError("fit_stains: iterations must be >= 1");
  if (tissue_count(od) < 2)
    throw ValidationError("fit_stains: fewer than 2 non-background pixels");

  StainFit best;
  double best_obj = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
    Rng local = rng.fork(static_cast<std::uint64_t>(restart));
    std::array<double, 6> w{};
    for (double& v : w) v = local.uniform() + 1e-3;
    normalize_columns(w);
    std::vector<double> h(od.pixel_count * 2);
    for (double& v : h) v = local.uniform();

    warm_start(od, w, h, opts.lambda, opts.warm_start_iterations);

    StainFit fit;
    fit.objective_trace.reserve(opts.iterations);
    double prev_obj = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.iterations; ++it) {
      h = solve_concentrations(w, od, opts.lambda, exec);
      ColumnStats st = column_stats(od, h);
      update_column(w, 0, st);  // column 1's update sees the refreshed column 0
      update_column(w, 1, st);
      double obj = stain_objective(od, w, h, opts.lambda);
      fit.objective_trace.push_back(obj);
      if (prev_obj - obj < 1e-12 * std::max(1.0, prev_obj) && it > 2) break;
      prev_obj = obj;
    }
    // Debias: the sparse phase has settled the basin; a short unpenalized
    // phase removes the shrinkage bias from the basis.
    for (int it = 0; it < opts.polish_iterations; ++it) {
      h = solve_concentrations(w, od, 0.0, exec);
      ColumnStats st = column_stats(od, h);
      update_column(w, 0, st);
      update_column(w, 1, st);
    }

    h = solve_concentrations(w, od, opts.lambda, exec);
    double obj = stain_objective(od, w, h, opts.lambda);
    if (obj < best_obj) {
      best_obj = obj;
      fit.basis = w;
      fit.concentrations = std::move(h);
      best = std::move(fit);
    }
  }

  // Hematoxylin-like column (larger blue-channel OD) first.
  if (best.basis[4 + 1] > best.basis[4 + 0]) {
    std::swap(best.basis[0], best.basis[1]);
    std::swap(best.basis[2], best.basis[3]);
    std::swap(best.basis[4], best.basis[5]);
    for (std::size_t p = 0; p < od.pixel_count; ++p)
      std::swap(best.concentrations[2 * p], best.concentrations[2 * p + 1]);
  }
  return best;
}

StainFit fit_stains(const OdMatrix& od, double lambda_sparse, int iterations, Rng& rng) {
  StainFitOptions opts;
  opts.lambda = lambda_sparse;
  opts.iterations = iterations;
  return fit_stains(od, opts, rng);
}

StainModel fit_stain_model(const RgbImage& img, const StainFitOptions& opts, Rng& rng,
                           Exec exec) {
  OdMatrix od = rgb_to_od(img);
  StainFit fit = fit_stains(od, opts, rng, exec);

  // c99 statistics come from the unshrunk concentrations, matching how
  // normalize_to_target computes them at transfer time.
  std::vector<double> h = solve_concentrations(fit.basis, od, 0.0, exec);
  StainModel model;
  model.basis = fit.basis;
  for (int j = 0; j < 2; ++j) {
    std::vector<double> conc;
    conc.reserve(od.pixel_count);
    for (std::size_t p = 0; p < od.pixel_count; ++p)
      if (od.l1(p) > kBackgroundOdL1) conc.push_back(h[2 * p + j]);
    if (conc.empty()) throw ValidationError("fit_stain_model: no tissue pixels");
    std::sort(conc.begin(), conc.end());
    std::size_t idx = static_cast<std::size_t>(
        std::ceil(0.99 * static_cast<double>(conc.size()))) - 1;
    model.c99[j] = conc[std::min(idx, conc.size() - 1)];
  }
  return model;
}

void save_stain_model(const StainModel& model, const std::filesystem::path& path) {
  nlohmann::json j{{"W", model.basis}, {"c99", model.c99}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write stain model: " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("short write: " + path.string());
}

StainModel load_stain_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open stain model: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    StainModel model;
    auto w = j.at("W").get<std::vector<double>>();
    auto c = j.at("c99").get<std::vector<double>>();
    if (w.size() != 6 || c.size() != 2)
      throw ValidationError("stain model: expected 6 W entries and 2 c99 values");
    std::copy(w.begin(), w.end(), model.basis.begin());
    std::copy(c.begin(), c.end(), model.c99.begin());
    return model;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError("stain model parse error in " + path.string() + ": " + ex.what());
  }
}

RgbImage normalize_to_target(const RgbImage& src, const StainModel& src_model,
                             const StainModel& tgt_model, double lambda, Exec exec) {
  for (int j = 0; j < 2; ++j)
    if (!(src_model.c99[j] > 0.0))
      throw ValidationError("normalize_to_target: source c99 is zero for stain " +
                            std::to_string(j));

  OdMatrix od = rgb_to_od(src);
  OdMatrix out_od;
  out_od.pixel_count = od.pixel_count;
  out_od.values = od.values;  // background pixels keep their OD

  const double scale0 = tgt_model.c99[0] / src_model.c99[0];
  const double scale1 = tgt_model.c99[1] / src_model.c99[1];
  const bool par = exec == Exec::parallel;
  const long long n = static_cast<long long>(od.pixel_count);
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (par)
  for (long long p = 0; p < n; ++p) {
    std::size_t q = static_cast<std::size_t>(p);
    if (od.l1(q) < kBackgroundOdL1) continue;
    auto h = solve_concentration(src_model.basis, od.pixel(q), lambda);
    double h0 = h[0] * scale0;
    double h1 = h[1] * scale1;
    for (int r = 0; r < 3; ++r)
      out_od.values[3 * q + r] =
          tgt_model.basis[2 * r] * h0 + tgt_model.basis[2 * r + 1] * h1;
  }

  RgbImage out = od_to_rgb(out_od, src.width, src.height);
  // Exact passthrough for background, unaffected by the OD round trip.
  for (std::size_t p = 0; p < od.pixel_count; ++p)
    if (od.l1(p) < kBackgroundOdL1)
      for (int c = 0; c < 3; ++c) out.pixels[3 * p + c] = src.pixels[3 * p + c];
  return out;
}

}  // namespace mdf

#include "mdf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mdf/errors.hpp"

namespace mdf {

SymEig sym_eig(std::span<const double> a, int n) {
  if (n <= 0 || a.size() != static_cast<std::size_t>(n) * n)
    throw ValidationError("sym_eig: bad dimensions");

  std::vector<double> m(a.begin(), a.end());
  std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[i + static_cast<std::size_t>(n) * i] = 1.0;

  auto at = [&](std::vector<double>& mat, int r, int c) -> double& {
    return mat[static_cast<std::size_t>(r) * n + c];
  };

  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += at(m, p, q) * at(m, p, q);
    double diag = 0.0;
    for (int p = 0; p < n; ++p) diag += at(m, p, p) * at(m, p, p);
    if (off <= 1e-30 * std::max(1.0, diag)) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = at(m, p, q);
        if (apq == 0.0) continue;
        double app = at(m, p, p);
        double aqq = at(m, q, q);
        double tau = (aqq - app) / (2.0 * apq);
        double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;

        for (int k = 0; k < n; ++k) {
          double mkp = at(m, k, p);
          double mkq = at(m, k, q);
          at(m, k, p) = c * mkp - s * mkq;
          at(m, k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          double mpk = at(m, p, k);
          double mqk = at(m, q, k);
          at(m, p, k) = c * mpk - s * mqk;
          at(m, q, k) = s * mpk + c * mqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v[static_cast<std::size_t>(k) * n + p];
          double vkq = v[static_cast<std::size_t>(k) * n + q];
          v[static_cast<std::size_t>(k) * n + p] = c * vkp - s * vkq;
          v[static_cast<std::size_t>(k) * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  SymEig out;
  out.n = n;
  out.values.resize(n);
  for (int i = 0; i < n; ++i) out.values[i] = m[static_cast<std::size_t>(i) * n + i];

  // Sort ascending, carrying eigenvectors along.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return out.values[i] < out.values[j]; });
  SymEig sorted;
  sorted.n = n;
  sorted.values.resize(n);
  sorted.vectors.resize(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    sorted.values[j] = out.values[order[j]];
    for (int i = 0; i < n; ++i)
      sorted.vectors[i + static_cast<std::size_t>(n) * j] =
          v[static_cast<std::size_t>(i) * n + order[j]];
  }
  return sorted;
}

std::vector<double> sym_sqrt(std::span<const double> a, int n, double clamp_tol) {
  SymEig eig = sym_eig(a, n);
  for (double& lam : eig.values) {
    if (lam < -clamp_tol)
      throw NumericError("sym_sqrt: matrix not PSD within tolerance (eigenvalue " +
                         std::to_string(lam) + ")");
    lam = std::sqrt(std::max(lam, 0.0));
  }
  // Q * sqrt(L) * Q^T
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        s += eig.vectors[i + static_cast<std::size_t>(n) * k] * eig.values[k] *
             eig.vectors[j + static_cast<std::size_t>(n) * k];
      out[static_cast<std::size_t>(i) * n + j] = s;
    }
  }
  return out;
}

std::vector<double> cholesky(std::span<const double> a, int n) {
  if (n <= 0 || a.size() != static_cast<std::size_t>(n) * n)
    throw ValidationError("cholesky: bad dimensions");
  std::vector<double> l(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[static_cast<std::size_t>(i) * n + j];
      for (int k = 0; k < j; ++k)
        s -= l[static_cast<std::size_t>(i) * n + k] * l[static_cast<std::size_t>(j) * n + k];
      if (i == j) {
        if (s <= 0.0) throw NumericError("cholesky: matrix not positive definite");
        l[static_cast<std::size_t>(i) * n + j] = std::sqrt(s);
      } else {
        l[static_cast<std::size_t>(i) * n + j] = s / l[static_cast<std::size_t>(j) * n + j];
      }
    }
  }
  return l;
}

std::vector<double> mat_mul(std::span<const double> a, std::span<const double> b, int n) {
  std::vector<double> c(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double aik = a[static_cast<std::size_t>(i) * n + k];
      if (aik == 0.0) continue;
      for (int j = 0; j < n; ++j)
        c[static_cast<std::size_t>(i) * n + j] += aik * b[static_cast<std::size_t>(k) * n + j];
    }
  return c;
}

double trace(std::span<const double> a, int n) {
  double t = 0.0;
  for (int i = 0; i < n; ++i) t += a[static_cast<std::size_t>(i) * n + i];
  return t;
}

}  // namespace mdf

#include "mdf/denoiser.hpp"

#include <cmath>
#include <string>

#include "mdf/errors.hpp"

namespace mdf {

std::vector<double> time_embedding(int t, int embed_dim) {
  if (embed_dim <= 0 || embed_dim % 2 != 0)
    throw ValidationError("time_embedding: embed_dim must be positive and even");
  if (t < 0) throw ValidationError("time_embedding: t must be >= 0");
  std::vector<double> emb(embed_dim);
  int half = embed_dim / 2;
  for (int i = 0; i < half; ++i) {
    double omega = std::pow(10000.0, -2.0 * i / embed_dim);
    emb[2 * i] = std::sin(t * omega);
    emb[2 * i + 1] = std::cos(t * omega);
  }
  return emb;
}

DenoiserModel::DenoiserModel(DenoiserConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.input_dim < 1) throw ValidationError("denoiser: input_dim must be >= 1");
  if (cfg_.embed_dim <= 0 || cfg_.embed_dim % 2 != 0)
    throw ValidationError("denoiser: embed_dim must be positive and even");
  if (cfg_.num_labels < 1) throw ValidationError("denoiser: num_labels must be >= 1");
  for (int h : cfg_.hidden_dims)
    if (h < 1) throw ValidationError("denoiser: hidden layer width must be >= 1");
  build_layout();
}

DenoiserModel::DenoiserModel(DenoiserConfig cfg, Rng& rng) : DenoiserModel(std::move(cfg)) {
  // Weights and biases layer by layer, then embedding rows, in layout order.
  std::size_t n_layers = dims_.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    double bound = 1.0 / std::sqrt(static_cast<double>(dims_[l]));
    std::size_t count = static_cast<std::size_t>(dims_[l + 1]) * dims_[l] + dims_[l + 1];
    for (std::size_t i = 0; i < count; ++i)
      params_[w_off_[l] + i] = (2.0 * rng.uniform() - 1.0) * bound;
  }
  double bound = 1.0 / std::sqrt(static_cast<double>(cfg_.embed_dim));
  std::size_t embed_count = static_cast<std::size_t>(cfg_.num_labels) * cfg_.embed_dim;
  for (std::size_t i = 0; i < embed_count; ++i)
    params_[embed_off_ + i] = (2.0 * rng.uniform() - 1.0) * bound;
}

DenoiserModel DenoiserModel::from_params(DenoiserConfig cfg, std::vector<double> params) {
  DenoiserModel m(std::move(cfg));
  if (params.size() != m.params_.size())
    throw ValidationError("denoiser: parameter vector has length " +
                          std::to_string(params.size()) + ", expected " +
                          std::to_string(m.params_.size()));
  m.params_ = std::move(params);
  return m;
}

void DenoiserModel::build_layout() {
  dims_.clear();
  dims_.push_back(cfg_.input_dim + 2 * cfg_.embed_dim);
  for (int h : cfg_.hidden_dims) dims_.push_back(h);
  dims_.push_back(cfg_.input_dim);

  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    w_off_.push_back(off);
    off += static_cast<std::size_t>(dims_[l + 1]) * dims_[l];
    b_off_.push_back(off);
    off += dims_[l + 1];
  }
  embed_off_ = off;
  off += static_cast<std::size_t>(cfg_.num_labels) * cfg_.embed_dim;
  params_.assign(off, 0.0);
}

double DenoiserModel::activate(double z) const {
  if (cfg_.activation == Activation::tanh) return std::tanh(z);
  return z / (1.0 + std::exp(-z));
}

double DenoiserModel::activate_grad(double z) const {
  if (cfg_.activation == Activation::tanh) {
    double th = std::tanh(z);
    return 1.0 - th * th;
  }
  double sig = 1.0 / (1.0 + std::exp(-z));
  return sig * (1.0 + z * (1.0 - sig));
}

std::vector<double> DenoiserModel::predict_eps(std::span<const double> x, int t,
                                               int label) const {
  ForwardCache cache;
  return predict_eps(x, t, label, cache);
}

std::vector<double> DenoiserModel::predict_eps(std::span<const double> x, int t, int label,
                                               ForwardCache& cache) const {
  if (x.size() != static_cast<std::size_t>(cfg_.input_dim))
    throw ValidationError("predict_eps: input has dimension " + std::to_string(x.size()) +
                          ", model expects " + std::to_string(cfg_.input_dim));
  if (label < 0 || label >= cfg_.num_labels)
    throw ValidationError("predict_eps: label " + std::to_string(label) +
                          " outside 0.." + std::to_string(cfg_.num_labels - 1));

  cache.input.assign(dims_[0], 0.0);
  std::copy(x.begin(), x.end(), cache.input.begin());
  std::vector<double> temb = time_embedding(t, cfg_.embed_dim);
  std::copy(temb.begin(), temb.end(), cache.input.begin() + cfg_.input_dim);
  const double* erow = params_.data() + embed_off_ +
                       static_cast<std::size_t>(label) * cfg_.embed_dim;
  std::copy(erow, erow + cfg_.embed_dim,
            cache.input.begin() + cfg_.input_dim + cfg_.embed_dim);

  std::size_t n_layers = dims_.size() - 1;
  cache.pre.assign(n_layers, {});
  cache.post.assign(n_layers, {});

  const std::vector<double>* h = &cache.input;
  for (std::size_t l = 0; l < n_layers; ++l) {
    int in = dims_[l], out = dims_[l + 1];
    auto& z = cache.pre[l];
    z.assign(out, 0.0);
    const double* w = params_.data() + w_off_[l];
    const double* b = params_.data() + b_off_[l];
    for (int r = 0; r < out; ++r) {
      double s = b[r];
      const double* wrow = w + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) s += wrow[c] * (*h)[c];
      z[r] = s;
    }
    if (l + 1 < n_layers) {
      auto& a = cache.post[l];
      a.resize(out);
      for (int r = 0; r < out; ++r) a[r] = activate(z[r]);
      h = &a;
    }
  }
  return cache.pre.back();
}

void DenoiserModel::backward(std::span<const double> x, int t, int label,
                             std::span<const double> upstream,
                             std::span<double> grad) const {
  ForwardCache cache;
  predict_eps(x, t, label, cache);
  backward(cache, label, upstream, grad);
}

void DenoiserModel::backward(const ForwardCache& cache, int label,
                             std::span<const double> upstream,
                             std::span<double> grad) const {
  if (upstream.size() != static_cast<std::size_t>(cfg_.input_dim))
    throw ValidationError("backward: upstream gradient has wrong dimension");
  if (grad.size() != params_.size())
    throw ValidationError("backward: gradient buffer has wrong length");

  std::size_t n_layers = dims_.size() - 1;
  std::vector<double> delta(upstream.begin(), upstream.end());

  for (std::size_t li = n_layers; li-- > 0;) {
    int in = dims_[li], out = dims_[li + 1];
    const std::vector<double>& h = (li == 0) ? cache.input : cache.post[li - 1];
    const double* w = params_.data() + w_off_[li];

    double* gw = grad.data() + w_off_[li];
    double* gb = grad.data() + b_off_[li];
    for (int r = 0; r < out; ++r) {
      double d = delta[r];
      gb[r] += d;
      double* gwrow = gw + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) gwrow[c] += d * h[c];
    }

    std::vector<double> prev(in, 0.0);
    for (int r = 0; r < out; ++r) {
      double d = delta[r];
      const double* wrow = w + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) prev[c] += wrow[c] * d;
    }
    if (li > 0) {
      const std::vector<double>& z = cache.pre[li - 1];
      for (int c = 0; c < in; ++c) prev[c] *= activate_grad(z[c]);
    }
    delta = std::move(prev);
  }

  // The tail of the input gradient lands on the looked-up embedding row.
  double* ge = grad.data() + embed_off_ + static_cast<std::size_t>(label) * cfg_.embed_dim;
  for (int i = 0; i < cfg_.embed_dim; ++i)
    ge[i] += delta[cfg_.input_dim + cfg_.embed_dim + i];
}

AdamState::AdamState(std::size_t param_count, AdamParams hp)
    : hp_(hp), m_(param_count, 0.0), v_(param_count, 0.0) {}

void AdamState::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw ValidationError("adam: parameter/gradient length mismatch");
  ++step_;
  double bc1 = 1.0 - std::pow(hp_.beta1, static_cast<double>(step_));
  double bc2 = 1.0 - std::pow(hp_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    m_[i] = hp_.beta1 * m_[i] + (1.0 - hp_.beta1) * grad[i];
    v_[i] = hp_.beta2 * v_[i] + (1.0 - hp_.beta2) * grad[i] * grad[i];
    double mhat = m_[i] / bc1;
    double vhat = v_[i] / bc2;
    params[i] -= hp_.lr * mhat / (std::sqrt(vhat) + hp_.eps);
  }
}

}  // namespace mdf

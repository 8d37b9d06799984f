#include "mdf/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "mdf/errors.hpp"

namespace mdf {

std::uint32_t crc32(std::span<const std::uint8_t> data) {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::uint8_t b : data) crc = table[(crc ^ b) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

namespace {

void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<std::uint8_t>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<std::uint8_t>& buf, double v) {
  put_u64(buf, std::bit_cast<std::uint64_t>(v));
}

void put_f32(std::vector<std::uint8_t>& buf, float v) {
  put_u32(buf, std::bit_cast<std::uint32_t>(v));
}

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size, const std::string& path)
      : data_(data), size_(size), path_(path) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(std::size_t len) {
    need(len);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), len);
    pos_ += len;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > size_) throw ValidationError("truncated checkpoint: " + path_);
  }
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::string path_;
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  if (ckpt.labels.size() != static_cast<std::size_t>(ckpt.model.num_labels))
    throw ValidationError("checkpoint: label set size does not match model");

  std::vector<std::uint8_t> buf;
  buf.push_back('M');
  buf.push_back('D');
  buf.push_back('F');
  buf.push_back('1');
  put_u32(buf, 1);  // format version

  put_u32(buf, static_cast<std::uint32_t>(ckpt.steps));
  put_f64(buf, ckpt.beta_start);
  put_f64(buf, ckpt.beta_end);

  buf.push_back(ckpt.weighting == Weighting::p2 ? 1 : 0);
  put_f64(buf, ckpt.c);
  put_f64(buf, ckpt.p2_k);
  put_f64(buf, ckpt.p2_gamma);

  put_u32(buf, static_cast<std::uint32_t>(ckpt.labels.size()));
  for (const std::string& label : ckpt.labels) {
    put_u32(buf, static_cast<std::uint32_t>(label.size()));
    buf.insert(buf.end(), label.begin(), label.end());
  }

  put_u32(buf, static_cast<std::uint32_t>(ckpt.model.input_dim));
  put_u32(buf, static_cast<std::uint32_t>(ckpt.model.embed_dim));
  buf.push_back(ckpt.model.activation == Activation::tanh ? 1 : 0);
  put_u32(buf, static_cast<std::uint32_t>(ckpt.model.hidden_dims.size()));
  for (int h : ckpt.model.hidden_dims) put_u32(buf, static_cast<std::uint32_t>(h));

  put_u64(buf, ckpt.params.size());
  for (float p : ckpt.params) put_f32(buf, p);

  put_u32(buf, crc32(buf));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("short write: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint: " + path.string());
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (buf.size() < 12) throw ValidationError("truncated checkpoint: " + path.string());

  std::uint32_t stored_crc = 0;
  for (int i = 0; i < 4; ++i)
    stored_crc |= static_cast<std::uint32_t>(buf[buf.size() - 4 + i]) << (8 * i);
  if (crc32(std::span(buf.data(), buf.size() - 4)) != stored_crc)
    throw ValidationError("checkpoint CRC mismatch: " + path.string());

  Reader r(buf.data(), buf.size() - 4, path.string());
  if (r.str(4) != "MDF1") throw ValidationError("not an MDF1 checkpoint: " + path.string());
  std::uint32_t version = r.u32();
  if (version != 1)
    throw ValidationError("unsupported checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  ckpt.steps = static_cast<int>(r.u32());
  ckpt.beta_start = r.f64();
  ckpt.beta_end = r.f64();
  ckpt.weighting = r.u8() ? Weighting::p2 : Weighting::simple;
  ckpt.c = r.f64();
  ckpt.p2_k = r.f64();
  ckpt.p2_gamma = r.f64();

  std::uint32_t n_labels = r.u32();
  ckpt.labels.reserve(n_labels);
  for (std::uint32_t i = 0; i < n_labels; ++i) {
    std::uint32_t len = r.u32();
    ckpt.labels.push_back(r.str(len));
  }

  ckpt.model.input_dim = static_cast<int>(r.u32());
  ckpt.model.embed_dim = static_cast<int>(r.u32());
  ckpt.model.activation = r.u8() ? Activation::tanh : Activation::silu;
  std::uint32_t n_hidden = r.u32();
  ckpt.model.hidden_dims.clear();
  for (std::uint32_t i = 0; i < n_hidden; ++i)
    ckpt.model.hidden_dims.push_back(static_cast<int>(r.u32()));
  ckpt.model.num_labels = static_cast<int>(n_labels);

  std::uint64_t n_params = r.u64();
  ckpt.params.resize(n_params);
  for (std::uint64_t i = 0; i < n_params; ++i) ckpt.params[i] = r.f32();
  return ckpt;
}

Checkpoint make_checkpoint(const NoiseSchedule& schedule_src, const LossConfig& loss,
                           const std::vector<std::string>& labels, const DenoiserModel& model,
                           double beta_start, double beta_end) {
  Checkpoint ckpt;
  ckpt.steps = schedule_src.steps();
  ckpt.beta_start = beta_start;
  ckpt.beta_end = beta_end;
  ckpt.weighting = loss.weighting;
  ckpt.c = loss.c;
  ckpt.p2_k = loss.p2.k;
  ckpt.p2_gamma = loss.p2.gamma;
  ckpt.labels = labels;
  ckpt.model = model.config();
  ckpt.params.assign(model.params().begin(), model.params().end());
  return ckpt;
}

DenoiserModel model_from_checkpoint(const Checkpoint& ckpt) {
  std::vector<double> params(ckpt.params.begin(), ckpt.params.end());
  return DenoiserModel::from_params(ckpt.model, std::move(params));
}

NoiseSchedule schedule_from_checkpoint(const Checkpoint& ckpt) {
  return make_linear_schedule(ckpt.steps, ckpt.beta_start, ckpt.beta_end);
}

}  // namespace mdf

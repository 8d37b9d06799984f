#include "mdf/f32io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "mdf/errors.hpp"

namespace mdf {

namespace {

void put_u32le(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_f32(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
               std::span<const double> values) {
  if (values.size() != rows * cols) throw ValidationError("write_f32: size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path.string());
  out.write("F32\n", 4);
  put_u32le(out, static_cast<std::uint32_t>(rows));
  put_u32le(out, static_cast<std::uint32_t>(cols));
  for (double v : values) {
    float f = static_cast<float>(v);
    std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
    put_u32le(out, bits);
  }
  if (!out) throw IoError("short write: " + path.string());
}

F32Matrix read_f32(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("bad embedding file: cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "F32\n", 4) != 0)
    throw ValidationError("bad embedding file: missing F32 magic in " + path.string());
  F32Matrix m;
  m.rows = get_u32le(in);
  m.cols = get_u32le(in);
  if (!in) throw ValidationError("bad embedding file: truncated header in " + path.string());
  m.values.resize(m.rows * m.cols);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    std::uint32_t bits = get_u32le(in);
    if (!in) throw ValidationError("bad embedding file: truncated data in " + path.string());
    m.values[i] = std::bit_cast<float>(bits);
  }
  return m;
}

FeatureSet to_feature_set(const F32Matrix& m, const std::string& space_name) {
  FeatureSet f;
  f.rows = m.rows;
  f.cols = m.cols;
  f.space_name = space_name;
  f.values.assign(m.values.begin(), m.values.end());
  return f;
}

ProbTable to_prob_table(const F32Matrix& m) {
  ProbTable p;
  p.rows = m.rows;
  p.cols = m.cols;
  p.values.assign(m.values.begin(), m.values.end());
  return p;
}

}  // namespace mdf

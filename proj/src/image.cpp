#include "mdf/image.hpp"

#include <fstream>
#include <string>

#include "mdf/errors.hpp"

namespace mdf {

namespace {

// Next whitespace-delimited token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open image: " + path.string());

  if (next_token(in) != "P6") throw ValidationError("not a P6 PPM: " + path.string());
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token(in));
    height = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (...) {
    throw ValidationError("malformed PPM header: " + path.string());
  }
  if (width <= 0 || height <= 0) throw ValidationError("bad PPM dimensions: " + path.string());
  if (maxval != 255) throw ValidationError("PPM maxval must be 255: " + path.string());

  RgbImage img(width, height);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw ValidationError("truncated PPM data: " + path.string());
  return img;
}

void write_ppm(const RgbImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image: " + path.string());
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError("short write: " + path.string());
}

}  // namespace mdf

#include "sola/idx.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace sola {

namespace {

uint32_t read_u32_be(std::istream& f, const std::string& path) {
  unsigned char b[4];
  if (!f.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("short read in " + path);
  return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}

void write_u32_be(std::ostream& f, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  f.write(reinterpret_cast<char*>(b), 4);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return f;
}

}  // namespace

Eigen::MatrixXd load_idx_images(const std::string& path, int* rows, int* cols) {
  std::ifstream f = open_or_throw(path);
  if (read_u32_be(f, path) != 0x00000803u)
    throw std::runtime_error("not an IDX image file: " + path);
  uint32_t count = read_u32_be(f, path);
  uint32_t h = read_u32_be(f, path);
  uint32_t w = read_u32_be(f, path);
  std::size_t total = std::size_t(count) * h * w;
  std::vector<unsigned char> raw(total);
  if (!f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(total)))
    throw std::runtime_error("short read in " + path);
  Eigen::MatrixXd out(count, std::size_t(h) * w);
  for (uint32_t i = 0; i < count; ++i)
    for (uint32_t j = 0; j < h * w; ++j)
      out(i, j) = raw[std::size_t(i) * h * w + j] / 255.0;
  if (rows) *rows = static_cast<int>(h);
  if (cols) *cols = static_cast<int>(w);
  return out;
}

Eigen::VectorXi load_idx_labels(const std::string& path) {
  std::ifstream f = open_or_throw(path);
  if (read_u32_be(f, path) != 0x00000801u)
    throw std::runtime_error("not an IDX label file: " + path);
  uint32_t count = read_u32_be(f, path);
  std::vector<unsigned char> raw(count);
  if (!f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count)))
    throw std::runtime_error("short read in " + path);
  Eigen::VectorXi out(count);
  for (uint32_t i = 0; i < count; ++i) out[i] = raw[i];
  return out;
}

void write_idx_images(const std::string& path, const Eigen::MatrixXd& pixels, int rows,
                      int cols) {
  if (pixels.cols() != Eigen::Index(rows) * cols)
    throw std::invalid_argument("pixel width does not match rows*cols");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  write_u32_be(f, 0x00000803u);
  write_u32_be(f, static_cast<uint32_t>(pixels.rows()));
  write_u32_be(f, static_cast<uint32_t>(rows));
  write_u32_be(f, static_cast<uint32_t>(cols));
  for (Eigen::Index i = 0; i < pixels.rows(); ++i)
    for (Eigen::Index j = 0; j < pixels.cols(); ++j) {
      double v = std::min(1.0, std::max(0.0, pixels(i, j)));
      unsigned char b = static_cast<unsigned char>(std::lround(v * 255.0));
      f.write(reinterpret_cast<char*>(&b), 1);
    }
}

void write_idx_labels(const std::string& path, const Eigen::VectorXi& labels) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  write_u32_be(f, 0x00000801u);
  write_u32_be(f, static_cast<uint32_t>(labels.size()));
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    unsigned char b = static_cast<unsigned char>(labels[i]);
    f.write(reinterpret_cast<char*>(&b), 1);
  }
}

}  // namespace sola

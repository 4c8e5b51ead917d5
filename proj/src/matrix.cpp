#include "spfc/matrix.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "spfc/error.hpp"

namespace spfc {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  if (rows == 0 || cols == 0)
    throw Error("matrix: dimensions must be positive, got " + shape_string());
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0)
    throw Error("matrix: dimensions must be positive, got " + shape_string());
  if (data_.size() != rows * cols)
    throw Error("matrix: data length " + std::to_string(data_.size()) +
                " does not match " + shape_string());
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool DenseMatrix::all_finite() const noexcept {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string DenseMatrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows())
    throw Error("matmul: dimension mismatch " + a.shape_string() + " * " +
                b.shape_string());
  DenseMatrix out(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), c = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* oi = &out(i, 0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a(i, p);
      const double* bp = &b(p, 0);
      for (std::size_t j = 0; j < c; ++j) oi[j] += aip * bp[j];
    }
  }
  return out;
}

std::vector<double> matvec(const DenseMatrix& m, std::span<const double> v) {
  if (m.cols() != v.size())
    throw Error("matvec: dimension mismatch " + m.shape_string() +
                " * vector of length " + std::to_string(v.size()));
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) acc += m(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  return out;
}

std::vector<double> column(const DenseMatrix& m, std::size_t j) {
  if (j >= m.cols())
    throw Error("column: index " + std::to_string(j) + " out of range for " +
                m.shape_string());
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = m(i, j);
  return out;
}

double dot(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw Error("dot: length mismatch " + std::to_string(u.size()) + " vs " +
                std::to_string(v.size()));
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

double norm2(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double norm_inf(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc = std::max(acc, std::abs(x));
  return acc;
}

double frobenius(const DenseMatrix& m) { return norm2(m.data()); }

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() &&
         (a.empty() ||
          std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

bool bitwise_equal(const DenseMatrix& a, const DenseMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         bitwise_equal(a.data(), b.data());
}

DenseMatrix relu(const DenseMatrix& m) {
  DenseMatrix out(m.rows(), m.cols());
  auto src = m.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = src[i] > 0.0 ? src[i] : 0.0;
  return out;
}

namespace {

void append_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void append_f64le(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(char((bits >> (8 * i)) & 0xff));
}

std::uint32_t read_u32le(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
         std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

double read_f64le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_mat1(const DenseMatrix& m, const std::string& path) {
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() ||
      m.cols() > std::numeric_limits<std::uint32_t>::max())
    throw Error("mat1: matrix too large for format: " + m.shape_string());
  std::string buf;
  buf.reserve(12 + 8 * m.rows() * m.cols());
  buf += "MAT1";
  append_u32le(buf, std::uint32_t(m.rows()));
  append_u32le(buf, std::uint32_t(m.cols()));
  if constexpr (std::endian::native == std::endian::little) {
    const auto span = m.data();
    buf.append(reinterpret_cast<const char*>(span.data()),
               span.size() * sizeof(double));
  } else {
    for (double v : m.data()) append_f64le(buf, v);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("mat1: cannot open for writing: " + path);
  out.write(buf.data(), std::streamsize(buf.size()));
  if (!out) throw Error("mat1: write failed: " + path);
}

DenseMatrix load_mat1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("mat1: cannot open: " + path);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < 12)
    throw Error("mat1: " + path + ": header truncated, got " +
                std::to_string(buf.size()) + " bytes, need at least 12");
  if (buf.compare(0, 4, "MAT1") != 0)
    throw Error("mat1: " + path + ": bad magic bytes");
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  const std::uint64_t rows = read_u32le(p + 4);
  const std::uint64_t cols = read_u32le(p + 8);
  if (rows == 0 || cols == 0)
    throw Error("mat1: " + path + ": dimensions must be positive, got " +
                std::to_string(rows) + "x" + std::to_string(cols));
  const std::uint64_t expected = 12 + 8 * rows * cols;
  if (buf.size() != expected)
    throw Error("mat1: " + path + ": truncated payload, expected " +
                std::to_string(expected) + " bytes, got " +
                std::to_string(buf.size()));
  std::vector<double> data(rows * cols);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(data.data(), buf.data() + 12, data.size() * sizeof(double));
  } else {
    for (std::size_t i = 0; i < data.size(); ++i)
      data[i] = read_f64le(p + 12 + 8 * i);
  }
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!std::isfinite(data[i]))
      throw Error("mat1: " + path + ": non-finite entry at flat index " +
                  std::to_string(i));
  return DenseMatrix(rows, cols, std::move(data));
}

}  // namespace spfc

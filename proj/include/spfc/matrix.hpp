#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace spfc {

// Dense row-major float64 matrix. Treated as immutable once filled; all the
// free functions below are pure.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) noexcept {
    return data_[i * cols_ + j];
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool all_finite() const noexcept;
  std::string shape_string() const;  // e.g. "3x4"

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
std::vector<double> matvec(const DenseMatrix& m, std::span<const double> v);
DenseMatrix transpose(const DenseMatrix& m);
std::vector<double> column(const DenseMatrix& m, std::size_t j);

double dot(std::span<const double> u, std::span<const double> v);
double norm2(std::span<const double> v);
double norm_inf(std::span<const double> v);
double frobenius(const DenseMatrix& m);

// Exact representation equality (memcmp), stricter than operator== which
// treats 0.0 and -0.0 as equal.
bool bitwise_equal(std::span<const double> a, std::span<const double> b);
bool bitwise_equal(const DenseMatrix& a, const DenseMatrix& b);

// Entrywise max(0, x).
DenseMatrix relu(const DenseMatrix& m);

// MAT1 binary format: magic "MAT1", rows and cols as u32 little-endian, then
// rows*cols IEEE-754 binary64 little-endian values in row-major order.
void save_mat1(const DenseMatrix& m, const std::string& path);
DenseMatrix load_mat1(const std::string& path);

}  // namespace spfc

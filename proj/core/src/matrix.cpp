#include "nqkv/matrix.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "nqkv/error.hpp"

namespace nqkv {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows_ * cols_, ErrorKind::kShape,
          "matrix data has " + std::to_string(data_.size()) + " elements, expected " +
              std::to_string(rows_ * cols_));
}

Matrix Matrix::slice_rows(std::size_t begin, std::size_t end) const {
  require(begin <= end && end <= rows_, ErrorKind::kShape, "row slice out of range");
  return Matrix(end - begin, cols_,
                std::vector<float>(data_.begin() + begin * cols_,
                                   data_.begin() + end * cols_));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0f;
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), ErrorKind::kShape,
          "matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
              " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  Matrix out(a.rows(), b.cols());
  std::vector<double> acc(b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) acc[j] += aik * brow[j];
    }
    for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) = static_cast<float>(acc[j]);
  }
  return out;
}

}  // namespace nqkv

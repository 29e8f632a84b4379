#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "false_al/errors.hpp"

namespace false_al {

// Stable identifier of a sample within a dataset pool (its row index in the
// generating file or bundle). Ids survive pool shrinkage across rounds.
using SampleId = int;

// Dense row-major matrix of doubles. Deliberately minimal: the project only
// needs storage, row views and element access.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) {
    return {data.data() + r * cols, cols};
  }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// Copies the given rows of src into a new matrix, in the given order.
inline Matrix gather_rows(const Matrix& src, const std::vector<SampleId>& ids) {
  Matrix out(ids.size(), src.cols);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto r = static_cast<std::size_t>(ids[i]);
    if (r >= src.rows) {
      throw ShapeError("gather_rows: row index out of range");
    }
    for (std::size_t c = 0; c < src.cols; ++c) {
      out.at(i, c) = src.at(r, c);
    }
  }
  return out;
}

}  // namespace false_al

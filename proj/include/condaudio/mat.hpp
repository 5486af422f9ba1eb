#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace condaudio {

// Dense row-major matrix of doubles. Everything in this project is small
// enough (a few thousand elements) that a flat vector is the right tool.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

  static Mat from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Mat m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t r = 0;
    for (const auto& row : rows) {
      if (row.size() != m.cols_) throw std::invalid_argument("ragged row initializer");
      std::size_t c = 0;
      for (double x : row) m(r, c++) = x;
      ++r;
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }

  double* row(std::size_t r) { return v_.data() + r * cols_; }
  const double* row(std::size_t r) const { return v_.data() + r * cols_; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::vector<double>& raw() { return v_; }
  const std::vector<double>& raw() const { return v_; }

  void fill(double x) { std::fill(v_.begin(), v_.end(), x); }

  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool operator==(const Mat& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && v_ == o.v_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> v_;
};

Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
bool all_finite(const Mat& a);
double max_abs_diff(const Mat& a, const Mat& b);

}  // namespace condaudio

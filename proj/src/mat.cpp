#include "condaudio/mat.hpp"

#include <cmath>
#include <stdexcept>

namespace condaudio {

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  Mat out(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* ar = a.row(i);
    double* orow = out.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ar[p];
      if (av == 0.0) continue;
      const double* br = b.row(p);
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * br[j];
    }
  }
  return out;
}

Mat transpose(const Mat& a) {
  Mat out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

bool all_finite(const Mat& a) {
  for (double x : a.raw())
    if (!std::isfinite(x)) return false;
  return true;
}

double max_abs_diff(const Mat& a, const Mat& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a.raw()[i] - b.raw()[i]));
  return m;
}

}  // namespace condaudio

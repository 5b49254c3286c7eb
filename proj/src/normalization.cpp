#include "fsical/normalization.hpp"

#include <stdexcept>

namespace fsical {

AffineScaling AffineScaling::fit(const Matrix& data) {
  if (data.cols() == 0) throw std::invalid_argument("AffineScaling::fit: no samples");
  return {data.rowwise().minCoeff(), data.rowwise().maxCoeff()};
}

Vector AffineScaling::apply(const Vector& x) const {
  if (x.size() != size()) throw std::invalid_argument("AffineScaling::apply: length mismatch");
  Vector y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double width = max(i) - min(i);
    y(i) = width > 0.0 ? 2.0 * (x(i) - min(i)) / width - 1.0 : 0.0;
  }
  return y;
}

Vector AffineScaling::invert(const Vector& y) const {
  if (y.size() != size()) throw std::invalid_argument("AffineScaling::invert: length mismatch");
  Vector x(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double width = max(i) - min(i);
    x(i) = width > 0.0 ? min(i) + 0.5 * (y(i) + 1.0) * width : min(i);
  }
  return x;
}

Matrix AffineScaling::apply(const Matrix& data) const {
  Matrix out(data.rows(), data.cols());
  for (Eigen::Index c = 0; c < data.cols(); ++c) out.col(c) = apply(Vector(data.col(c)));
  return out;
}

Matrix AffineScaling::invert(const Matrix& data) const {
  Matrix out(data.rows(), data.cols());
  for (Eigen::Index c = 0; c < data.cols(); ++c) out.col(c) = invert(Vector(data.col(c)));
  return out;
}

}  // namespace fsical

#pragma once

#include "fsical/types.hpp"

namespace fsical {

/// Per-feature affine map of [min, max] onto [-1, 1]. Features with
/// max == min map to 0 and invert back to min.
struct AffineScaling {
  Vector min;
  Vector max;

  Eigen::Index size() const { return min.size(); }

  /// Columns of `data` are samples.
  static AffineScaling fit(const Matrix& data);

  Vector apply(const Vector& x) const;
  Vector invert(const Vector& y) const;
  Matrix apply(const Matrix& data) const;
  Matrix invert(const Matrix& data) const;

  bool operator==(const AffineScaling&) const = default;
};

struct NormalizationStats {
  AffineScaling features;
  AffineScaling labels;

  bool operator==(const NormalizationStats&) const = default;
};

}  // namespace fsical

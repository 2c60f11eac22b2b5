#pragma once

#include <functional>

#include "rfgan/ext_real.hpp"

namespace rfgan {

struct Maximum1D {
  double arg = 0.0;
  ExtReal value;
  /// The maximizer sits on the corresponding search limit.
  bool hit_lower = false;
  bool hit_upper = false;
  int evaluations = 0;
};

/// Maximizes a concave extended-real function of one variable over
/// [lower, upper]. A bracket is grown geometrically from `start` (steps
/// 1, 2, 4, ...) and then refined by golden-section search until its width
/// is below `tol` (relative to |t| for large t). -inf values mark points
/// outside the effective domain.
Maximum1D maximize_concave(const std::function<ExtReal(double)>& fn, double start, double lower, double upper,
                           double tol = 1e-12);

}  // namespace rfgan

#include "rfgan/optim1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rfgan {

namespace {

struct Tracker {
  const std::function<ExtReal(double)>& fn;
  double best_arg = 0.0;
  ExtReal best = ExtReal::neg_inf();
  int evaluations = 0;

  ExtReal operator()(double t) {
    ++evaluations;
    const ExtReal v = fn(t);
    if (v > best || evaluations == 1) {
      best = v;
      best_arg = t;
    }
    return v;
  }
};

}  // namespace

Maximum1D maximize_concave(const std::function<ExtReal(double)>& fn, double start, double lower, double upper,
                           double tol) {
  Tracker eval{fn};
  start = std::clamp(start, lower, upper);
  double m = start;
  ExtReal fm = eval(m);

  // Find a point inside the effective domain when the start is outside it.
  if (fm.is_neg_inf()) {
    for (double step = 1.0; fm.is_neg_inf(); step *= 2.0) {
      const double left = std::max(lower, start - step);
      const double right = std::min(upper, start + step);
      const ExtReal fl = eval(left);
      const ExtReal fr = eval(right);
      if (!fl.is_neg_inf() || !fr.is_neg_inf()) {
        if (fl >= fr) { m = left; fm = fl; } else { m = right; fm = fr; }
        break;
      }
      if (left == lower && right == upper) {
        return {start, ExtReal::neg_inf(), false, false, eval.evaluations};
      }
    }
  }

  // Grow to the right.
  double l = m, r = m;
  ExtReal fl = fm, fr = fm;
  bool moved_right = false;
  double step = 1.0;
  while (r < upper) {
    const double next = std::min(upper, m + step);
    const ExtReal fnext = eval(next);
    r = next;
    fr = fnext;
    if (fnext > fm) {
      l = m; fl = fm;
      m = next; fm = fnext;
      moved_right = true;
      step *= 2.0;
    } else {
      break;
    }
  }
  // Grow to the left when the maximum may lie below the start.
  if (!moved_right) {
    step = 1.0;
    l = m; fl = fm;
    while (l > lower) {
      const double next = std::max(lower, m - step);
      const ExtReal fnext = eval(next);
      l = next;
      fl = fnext;
      if (fnext > fm) {
        r = m; fr = fm;
        m = next; fm = fnext;
        step *= 2.0;
      } else {
        break;
      }
    }
  }

  // Golden-section refinement on [l, r].
  constexpr double kInvPhi = 0.6180339887498949;
  double a = l, b = r;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  ExtReal fc = eval(c), fd = eval(d);
  for (int it = 0; it < 400; ++it) {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    if (b - a <= std::max(tol, 8.0 * std::numeric_limits<double>::epsilon() * scale)) break;
    if (fc >= fd) {
      b = d; d = c; fd = fc;
      c = b - kInvPhi * (b - a);
      fc = eval(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + kInvPhi * (b - a);
      fd = eval(d);
    }
  }
  Maximum1D out;
  out.arg = eval.best_arg;
  out.value = eval.best;
  const double edge = std::max(tol, 8.0 * std::numeric_limits<double>::epsilon() *
                                        std::max({1.0, std::abs(lower), std::abs(upper)}));
  out.hit_lower = out.arg - lower <= edge;
  out.hit_upper = upper - out.arg <= edge;
  out.evaluations = eval.evaluations;
  return out;
}

}  // namespace rfgan

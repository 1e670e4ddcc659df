#pragma once

namespace stackelq {

// Cubic Hermite reconstruction on [t0, t0 + h] from end values and end
// derivatives, evaluated at t0 + theta h. Fourth-order accurate for smooth
// paths, which keeps RK4 stages that need off-node values at full order.
template <typename T>
T HermiteValue(const T& y0, const T& y1, const T& d0, const T& d1, double h,
               double theta) {
  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + theta;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return T(h00 * y0 + (h10 * h) * d0 + h01 * y1 + (h11 * h) * d1);
}

}  // namespace stackelq

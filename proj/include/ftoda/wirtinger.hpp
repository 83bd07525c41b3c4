#pragma once

// Central-difference Wirtinger derivatives of functions of one complex
// variable. Following the Toda convention used throughout the library,
// d_minus is d/dz and d_plus is d/dzbar.

#include <complex>

namespace ftoda::wirtinger {

using Complex = std::complex<double>;

template <class F>
auto d_minus(F&& f, Complex z, double step) {
  const Complex i(0.0, 1.0);
  const auto xp = f(z + step), xm = f(z - step), yp = f(z + i * step), ym = f(z - i * step);
  return ((0.25 / step) * ((xp - xm) - i * (yp - ym))).eval();
}

template <class F>
auto d_plus(F&& f, Complex z, double step) {
  const Complex i(0.0, 1.0);
  const auto xp = f(z + step), xm = f(z - step), yp = f(z + i * step), ym = f(z - i * step);
  return ((0.25 / step) * ((xp - xm) + i * (yp - ym))).eval();
}

/// d/dz d/dzbar = Laplacian / 4 on the five-point subset of the 3x3 stencil.
template <class F>
double d_plus_d_minus(F&& f, Complex z, double step) {
  const Complex i(0.0, 1.0);
  const double lap = (f(z + step) + f(z - step) + f(z + i * step) + f(z - i * step) - 4.0 * f(z)) /
                     (step * step);
  return 0.25 * lap;
}

}  // namespace ftoda::wirtinger

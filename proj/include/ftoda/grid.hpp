#pragma once

#include <cmath>
#include <vector>

#include "ftoda/linalg.hpp"

namespace ftoda {

/// nx * ny points of the square inscribed in the disc |z - center| <= radius,
/// row-major in y then x. A count of 1 puts that coordinate at the center.
inline std::vector<Complex> square_grid(Complex center, double radius, int nx, int ny) {
  auto axis = [](int count, int i) {
    return count == 1 ? 0.0 : -1.0 + 2.0 * i / (count - 1);
  };
  const double half = radius / std::sqrt(2.0);
  std::vector<Complex> out;
  out.reserve(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) out.push_back(center + half * Complex(axis(nx, i), axis(ny, j)));
  return out;
}

}  // namespace ftoda

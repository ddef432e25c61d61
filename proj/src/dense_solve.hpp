#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace bellbox::detail {

/// Gaussian elimination with largest-magnitude pivoting on a square row-major
/// system. Works for double and for exact types (mpq_class) alike; a pivot is
/// accepted when |pivot| > `zero`. Returns nullopt for a singular matrix.
template <class T>
std::optional<std::vector<T>> solve_square(std::vector<T> m, std::vector<T> rhs, const T& zero) {
  const std::size_t n = rhs.size();
  auto at = [&](std::size_t r, std::size_t c) -> T& { return m[r * n + c]; };
  auto mag = [](const T& v) { return v < 0 ? T(-v) : v; };
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t best = col;
    T best_mag = mag(at(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      T v = mag(at(r, col));
      if (v > best_mag) {
        best_mag = v;
        best = r;
      }
    }
    if (!(best_mag > zero)) return std::nullopt;
    if (best != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(at(best, c), at(col, c));
      std::swap(rhs[best], rhs[col]);
    }
    const T pivot = at(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      if (at(r, col) == 0) continue;
      const T f = at(r, col) / pivot;
      for (std::size_t c = col; c < n; ++c) at(r, c) -= f * at(col, c);
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<T> x(n);
  for (std::size_t i = n; i-- > 0;) {
    T s = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= at(i, c) * x[c];
    x[i] = s / at(i, i);
  }
  return x;
}

} // namespace bellbox::detail

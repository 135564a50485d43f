#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace loctrace {

using cplx = std::complex<double>;

struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
  std::size_t size() const { return x.size(); }
};

// Gauss-Legendre on [-1,1]; nodes by Newton iteration on the three-term
// recurrence, accurate to ~2 ulp for n up to at least 2^16.
QuadRule gauss_legendre(int n);

// Same rule mapped to [a,b].
QuadRule gauss_legendre(int n, double a, double b);

// Gauss-Hermite for weight exp(-x^2) on the whole line (Golub-Welsch).
QuadRule gauss_hermite(int n);

// Deterministic tiled reduction: partial sums are computed per fixed-size
// index tile (serial inner order), then combined by a fixed pairwise tree.
// Bit-identical for any number of OpenMP threads, including 1.
template <class T, class F>
T tiled_sum(std::size_t n, std::size_t tile, F&& partial_of_range) {
  if (n == 0) return T{};
  if (tile == 0) tile = 1;
  const std::size_t ntiles = (n + tile - 1) / tile;
  std::vector<T> part(ntiles, T{});
#pragma omp parallel for schedule(static)
  for (long long ti = 0; ti < static_cast<long long>(ntiles); ++ti) {
    const std::size_t b = static_cast<std::size_t>(ti) * tile;
    const std::size_t e = std::min(n, b + tile);
    part[static_cast<std::size_t>(ti)] = partial_of_range(b, e);
  }
  // pairwise combine, fixed structure
  for (std::size_t stride = 1; stride < ntiles; stride *= 2)
    for (std::size_t i = 0; i + stride < ntiles; i += 2 * stride)
      part[i] += part[i + stride];
  return part[0];
}

}  // namespace loctrace

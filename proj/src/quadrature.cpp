#include "loctrace/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace loctrace {

namespace {

QuadRule gauss_legendre_raw(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  const int m = (n + 1) / 2;  // roots come in +/- pairs
  for (int i = 0; i < m; ++i) {
    // Tricomi-style initial guess, then Newton on P_n
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 1; k < n; ++k) {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15 * (1.0 + std::abs(x))) {
        // one clean-up step, then recompute dp at the converged node
        p0 = 1.0;
        p1 = x;
        for (int k = 1; k < n; ++k) {
          const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.x[i] = -x;  // ascending order
    r.w[i] = w;
    r.x[n - 1 - i] = x;
    r.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) {  // center node is exactly zero
    r.x[n / 2] = 0.0;
  }
  return r;
}

std::mutex g_cache_mutex;
std::map<int, QuadRule> g_gl_cache;
std::map<int, QuadRule> g_gh_cache;

}  // namespace

QuadRule gauss_legendre(int n) {
  std::lock_guard<std::mutex> lk(g_cache_mutex);
  auto it = g_gl_cache.find(n);
  if (it == g_gl_cache.end()) it = g_gl_cache.emplace(n, gauss_legendre_raw(n)).first;
  return it->second;
}

QuadRule gauss_legendre(int n, double a, double b) {
  QuadRule r = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    r.x[i] = mid + half * r.x[i];
    r.w[i] *= half;
  }
  return r;
}

QuadRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  {
    std::lock_guard<std::mutex> lk(g_cache_mutex);
    auto it = g_gh_cache.find(n);
    if (it != g_gh_cache.end()) return it->second;
  }
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(0.5 * k);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("gauss_hermite: eigensolver failed");
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  for (int i = 0; i < n; ++i) {
    r.x[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    r.w[i] = sqrt_pi * v0 * v0;
  }
  std::lock_guard<std::mutex> lk(g_cache_mutex);
  g_gh_cache.emplace(n, r);
  return r;
}

}  // namespace loctrace

// Benchmark: the three inner-integral engines on one slice integrand, plus a
// determinism check of the tiled parallel reduction. The tensor engine is the
// serial reference (a literal four-axis sum); factored and separable fold one
// or both of the exactly integrable axes.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "loctrace/oscillatory.hpp"
#include "loctrace/quadrature.hpp"
#include "loctrace/symplectic.hpp"

using namespace loctrace;
using osc::Engine;
using prof::FixedPointDatum;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using sym::cplx;

namespace {

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Timed {
  osc::IntegralResult result;
  double wall = 0;
};

Timed run(const FixedPointDatum& d, const VectorXd& n, const VectorXd& v,
          const osc::QuadratureSpec& spec, const VectorXd& upsf, Engine e,
          bool phase_free) {
  const auto t0 = std::chrono::steady_clock::now();
  Timed t;
  t.result = phase_free ? osc::inner_integral_phase_free(d, n, v, spec, upsf, e)
                        : osc::inner_integral(d, n, v, spec, upsf, e);
  t.wall = seconds(t0);
  return t;
}

void scenario(const char* title, const FixedPointDatum& d, const VectorXd& n,
              const VectorXd& v, const osc::QuadratureSpec& spec,
              const VectorXd& upsf, bool phase_free) {
  std::printf("%s\n", title);
  const Timed ref = run(d, n, v, spec, upsf, Engine::Tensor, phase_free);
  struct Named {
    const char* name;
    Engine e;
  };
  const Named engines[] = {{"tensor (serial reference)", Engine::Tensor},
                           {"factored", Engine::Factored},
                           {"separable", Engine::Separable}};
  for (const Named& en : engines) {
    if (en.e == Engine::Separable && upsf.norm() != 0.0) {
      std::printf("  %-26s (skipped: needs zero drift)\n", en.name);
      continue;
    }
    const Timed t = en.e == Engine::Tensor ? ref : run(d, n, v, spec, upsf, en.e, phase_free);
    const double rel =
        std::abs(t.result.value - ref.result.value) / std::abs(ref.result.value);
    std::printf(
        "  %-26s re %+.12e  im %+.12e  est %.1e  vs ref %.1e  %8.3f s  %6.1fx\n",
        en.name, t.result.value.real(), t.result.value.imag(),
        t.result.est_error, rel, t.wall, ref.wall / t.wall);
  }
  std::printf("\n");
}

bool reduction_deterministic() {
  // the tiled reduction must give bit-identical sums for any thread count
  const std::size_t n = 1u << 22;
  std::vector<double> xs(n);
  std::mt19937_64 gen(12345);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (double& x : xs) x = uni(gen);
  auto sum = [&] {
    return tiled_sum<double>(n, 4096, [&](std::size_t b, std::size_t e) {
      double s = 0;
      for (std::size_t i = b; i < e; ++i) s += xs[i] * xs[i] - 0.25 * xs[i];
      return s;
    });
  };
  std::vector<double> results;
#ifdef _OPENMP
  const int def = omp_get_max_threads();
  for (int threads : {1, 2, 4, 8}) {
    omp_set_num_threads(threads);
    results.push_back(sum());
  }
  omp_set_num_threads(def);
#else
  results.push_back(sum());
  results.push_back(sum());
#endif
  bool same = true;
  for (double r : results) same = same && (r == results[0]);
  std::printf("deterministic reduction across thread counts: %s (sum %.17g)\n\n",
              same ? "yes" : "NO", results[0]);
  return same;
}

}  // namespace

int main() {
  FixedPointDatum d;
  d.A = sym::make_symplectic(-MatrixXd::Identity(2, 2));
  d.f0 = 1.0;
  d.dim_d = 1;
  VectorXd n(2), v(2), ups(2), zero = VectorXd::Zero(2);
  n << 0.2, 0.0;
  v << 0.1, -0.1;
  ups << 0.3, 0.2;

  const bool det_ok = reduction_deterministic();

  osc::QuadratureSpec flat;
  flat.lambda = 30.0;
  flat.D = 2.0;
  flat.box_radius_thetatau = 10.0;
  flat.nodes_per_axis = 64;
  scenario("no-phase envelope, zero drift (lambda=30, D=2, R=10, nodes 64):", d,
           n, v, flat, zero, /*phase_free=*/true);
  scenario("no-phase envelope, fixed drift (separable not applicable):", d, n, v,
           flat, ups, /*phase_free=*/true);

  osc::QuadratureSpec wave;
  wave.lambda = 30.0;
  wave.D = 2.0;
  wave.box_radius_thetatau = 6.0;
  wave.nodes_per_axis = 16;
  scenario("oscillatory (lambda=30, D=2, R=6, auto node planning):", d, n, v,
           wave, zero, /*phase_free=*/false);

  return det_ok ? 0 : 1;
}

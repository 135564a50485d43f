#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "loctrace/oscillatory.hpp"
#include "loctrace/quadrature.hpp"

using namespace loctrace;
using osc::Engine;
using osc::QuadratureSpec;
using prof::FixedPointDatum;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using sym::cplx;

namespace {

FixedPointDatum reflection_datum(double f0 = 1.0) {
  FixedPointDatum d;
  d.A = sym::make_symplectic(-MatrixXd::Identity(2, 2));
  d.f0 = f0;
  d.rho0 = 1.0;
  d.tau0 = 0.0;
  d.dim_d = 1;
  return d;
}

cplx e_moment_oracle(int d, cplx c, double D) {
  const QuadRule gl = gauss_legendre(400, 1.0 / D, D);
  cplx acc = 0.0;
  for (std::size_t i = 0; i < gl.size(); ++i)
    acc += gl.w[i] * std::pow(gl.x[i], d) * std::exp(c * gl.x[i]);
  return acc;
}

}  // namespace

TEST_CASE("window moments against direct quadrature") {
  const cplx cases[] = {{0.0, 0.0},  {-0.5, 0.0}, {-4.2, 0.0},
                        {-0.5, 3.0}, {-4.0, -7.0}, {0.0, 1.5}};
  for (double D : {2.0, 2.5})
    for (int d = 0; d <= 3; ++d)
      for (const cplx c : cases) {
        const cplx got = osc::e_moment(d, c, D);
        const cplx want = e_moment_oracle(d, c, D);
        CHECK(std::abs(got - want) <= 1e-12 * (1.0 + std::abs(want)));
      }
}

TEST_CASE("window moments: evaluation is continuous across the path switch") {
  // the series and recursion regimes meet near |c| D = 4
  for (int d = 0; d <= 2; ++d) {
    const double D = 2.0;
    const cplx lo(-(4.0 - 1e-7) / D, 0.0), hi(-(4.0 + 1e-7) / D, 0.0);
    CHECK(std::abs(osc::e_moment(d, lo, D) - osc::e_moment(d, hi, D)) <=
          1e-6 * std::abs(osc::e_moment(d, lo, D)));
  }
}

TEST_CASE("closed forms: zero-exponent moments") {
  CHECK(std::abs(osc::e_moment(0, 0.0, 2.0) - cplx(1.5, 0)) <= 1e-14);
  CHECK(std::abs(osc::e_moment(1, 0.0, 2.0) - cplx((4.0 - 0.25) / 2.0, 0)) <= 1e-14);
}

TEST_CASE("argument validation") {
  const FixedPointDatum d = reflection_datum();
  const VectorXd z = VectorXd::Zero(2);
  QuadratureSpec spec;
  spec.lambda = 10.0;  // too small for the asymptotic window
  CHECK_THROWS(osc::inner_integral(d, z, z, spec, z));
  spec.lambda = 100.0;
  spec.nodes_per_axis = 8;
  CHECK_THROWS(osc::inner_integral(d, z, z, spec, z));
  spec.nodes_per_axis = 16;
  spec.D = 0.9;
  CHECK_THROWS(osc::inner_integral(d, z, z, spec, z));
  spec.D = 2.0;
  VectorXd ups(2);
  ups << 0.1, 0.0;
  CHECK_THROWS(osc::inner_integral(d, z, z, spec, ups, Engine::Separable));
}

TEST_CASE("engines agree on the no-oscillation integrand") {
  const FixedPointDatum d = reflection_datum();
  VectorXd n(2), v(2);
  n << 0.2, 0.0;
  v << 0.1, -0.1;
  const VectorXd ups0 = VectorXd::Zero(2);

  SUBCASE("separable vs factored, large box") {
    QuadratureSpec spec;
    spec.lambda = 30.0;
    spec.D = 2.0;
    spec.box_radius_thetatau = 12.0;
    spec.nodes_per_axis = 400;
    const auto a = osc::inner_integral_phase_free(d, n, v, spec, ups0,
                                                  Engine::Separable);
    const auto b =
        osc::inner_integral_phase_free(d, n, v, spec, ups0, Engine::Factored);
    CHECK(std::abs(a.value - b.value) <= 1e-8 * std::abs(a.value));
    CHECK(a.value.imag() == 0.0);
    CHECK(a.value.real() > 0.0);
  }
  SUBCASE("factored vs tensor, fixed-direction drift") {
    VectorXd ups(2);
    ups << 0.3, 0.2;
    QuadratureSpec spec;
    spec.lambda = 30.0;
    spec.D = 2.0;
    spec.box_radius_thetatau = 6.0;
    spec.nodes_per_axis = 48;
    const auto a =
        osc::inner_integral_phase_free(d, n, v, spec, ups, Engine::Factored);
    const auto b = osc::inner_integral_phase_free(d, n, v, spec, ups, Engine::Tensor);
    CHECK(std::abs(a.value - b.value) <= 1e-7 * std::abs(a.value));
  }
}

TEST_CASE("engines agree on the oscillatory integrand") {
  const FixedPointDatum d = reflection_datum();
  const VectorXd z = VectorXd::Zero(2);
  VectorXd v(2);
  v << 0.25, 0.15;
  QuadratureSpec spec;
  spec.lambda = 30.0;
  spec.D = 2.0;
  spec.box_radius_thetatau = 12.0;
  spec.nodes_per_axis = 16;
  const auto a = osc::inner_integral(d, z, v, spec, z, Engine::Separable);
  const auto b = osc::inner_integral(d, z, v, spec, z, Engine::Factored);
  CHECK(std::abs(a.value - b.value) <= 1e-6 * std::abs(a.value));
  CHECK(a.converged);
  CHECK(b.converged);
  CHECK(a.est_error > 0.0);
}

TEST_CASE("slice integral approaches its closed-form critical value") {
  const FixedPointDatum d = reflection_datum();
  const VectorXd n = VectorXd::Zero(2);
  VectorXd v(2);
  v << 0.4, -0.3;
  QuadratureSpec spec;
  spec.lambda = 400.0;
  const auto got = osc::inner_integral(d, n, v, spec, n);
  const cplx lead = osc::stationary_reduce(d, 400.0, n, v);
  CHECK(std::abs(got.value / lead - 1.0) <= 0.05);
}

TEST_CASE("closed-form transverse integration matches the predicted kernel") {
  SUBCASE("point reflection") {
    const FixedPointDatum d = reflection_datum();
    VectorXd n(2);
    n << 0.3, 0.1;
    const cplx a = osc::stationary_reduce_v_integrated(d, 50.0, n);
    const cplx b = prof::predicted_kernel(d, 50.0, n, 1.0);
    CHECK(std::abs(a - b) <= 1e-10 * std::abs(b));
  }
  SUBCASE("rotation with phase, symbol and period") {
    FixedPointDatum d;
    MatrixXd A(2, 2);
    const double beta = 2.0;
    A << std::cos(beta), -std::sin(beta), std::sin(beta), std::cos(beta);
    d.A = sym::make_symplectic(A);
    d.f0 = 0.7;
    d.rho0 = cplx(0.5, 0.25);
    d.tau0 = 3.0;
    d.dim_d = 1;
    VectorXd n(2);
    n << 0.0, 0.2;
    const cplx a = osc::stationary_reduce_v_integrated(d, 77.0, n);
    const cplx b = prof::predicted_kernel(d, 77.0, n, 1.0);
    CHECK(std::abs(a - b) <= 1e-10 * std::abs(b));
  }
  SUBCASE("generic linearization") {
    FixedPointDatum d;
    d.A = sym::random_symplectic(1, 0.5, 3);
    d.f0 = 1.2;
    d.dim_d = 1;
    VectorXd n(2);
    n << 0.15, -0.1;
    const cplx a = osc::stationary_reduce_v_integrated(d, 60.0, n);
    const cplx b = prof::predicted_kernel(d, 60.0, n, 1.0);
    CHECK(std::abs(a - b) <= 1e-8 * std::abs(b));
  }
}

TEST_CASE("transverse-integrated quadrature approaches the predicted kernel") {
  const FixedPointDatum d = reflection_datum();
  const VectorXd n = VectorXd::Zero(2);
  QuadratureSpec spec;
  spec.lambda = 100.0;
  const auto got = osc::full_profile_integral(d, n, spec, n);
  const cplx want = prof::predicted_kernel(d, 100.0, n, 1.0);
  CHECK(std::abs(got.value / want - 1.0) <= 0.25);
  CHECK(got.converged);
}

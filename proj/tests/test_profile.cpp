#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "loctrace/profile.hpp"

using namespace loctrace;
using prof::FixedPointDatum;
using prof::PhasePoint;
using Eigen::Matrix4d;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using sym::cplx;

namespace {

constexpr double kPi = std::numbers::pi;

FixedPointDatum reflection_datum(double f0 = 1.0) {
  FixedPointDatum d;
  d.A = sym::make_symplectic(-MatrixXd::Identity(2, 2));
  d.f0 = f0;
  d.rho0 = 1.0;
  d.tau0 = 0.0;
  d.dim_d = 1;
  return d;
}

}  // namespace

TEST_CASE("phase function value and critical point") {
  PhasePoint p;
  p.theta = 0.3;
  p.t = 1.2;
  p.u = 0.7;
  p.tau = -0.4;
  const double f0 = 2.0;
  CHECK(prof::upsilon(p, f0) ==
        doctest::Approx(0.3 * (0.7 - 1.2) + (-0.4) * (0.7 * 2.0 - 1.0)));
  const PhasePoint s = prof::stationary_point(f0);
  CHECK(s.theta == 0.0);
  CHECK(s.tau == 0.0);
  CHECK(s.t == doctest::Approx(0.5));
  CHECK(s.u == doctest::Approx(0.5));
  CHECK(prof::upsilon(s, f0) == doctest::Approx(0.0));
}

TEST_CASE("displayed second-derivative data") {
  for (double f0 : {0.5, 1.0, 2.0, 5.0}) {
    const Matrix4d H = prof::upsilon_hessian(f0);
    CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(H.determinant() == doctest::Approx(f0 * f0).epsilon(1e-12));
    const Matrix4d P = H * prof::upsilon_hessian_inverse(f0);
    CHECK((P - Matrix4d::Identity()).cwiseAbs().maxCoeff() <= 1e-14);
    const cplx root = prof::sqrt_hessian_factor(f0, 400.0);
    CHECK(root.imag() == 0.0);
    CHECK(root.real() ==
          doctest::Approx(400.0 * f0 / ((2 * kPi) * (2 * kPi))).epsilon(1e-14));
  }
}

TEST_CASE("closed-form gaussian integral against 1d/2d formulas") {
  SUBCASE("one variable") {
    MatrixXd Q(1, 1);
    Q << 1.7;
    VectorXd xi(1);
    xi << 0.9;
    const cplx got = prof::gaussian_integral_closed(Q, xi);
    const double expect = std::sqrt(2 * kPi / 1.7) * std::exp(-0.9 * 0.9 / (2 * 1.7));
    CHECK(std::abs(got - expect) <= 1e-14 * expect);
    CHECK(got.imag() == doctest::Approx(0.0));
  }
  SUBCASE("diagonal two-variable") {
    MatrixXd Q = MatrixXd::Zero(2, 2);
    Q(0, 0) = 2.0;
    Q(1, 1) = 0.5;
    VectorXd xi(2);
    xi << 1.0, -0.3;
    const cplx got = prof::gaussian_integral_closed(Q, xi);
    const double expect = std::sqrt(2 * kPi / 2.0) * std::exp(-1.0 / 4.0) *
                          std::sqrt(2 * kPi / 0.5) * std::exp(-0.09 / 1.0);
    CHECK(std::abs(got - expect) <= 1e-13 * expect);
  }
  SUBCASE("input validation") {
    MatrixXd bad(2, 2);
    bad << 1, 0.5, 0.2, 1;  // not symmetric
    CHECK_THROWS_AS(prof::gaussian_integral_closed(bad, VectorXd::Zero(2)),
                    std::invalid_argument);
    MatrixXd neg = -MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(prof::gaussian_integral_closed(neg, VectorXd::Zero(2)),
                    std::invalid_argument);
  }
}

TEST_CASE("shift term and exponent collapse at the point reflection") {
  const FixedPointDatum d = reflection_datum();
  VectorXd n(2);
  n << 1.0, 0.0;
  CHECK(std::abs(prof::gamma_shift(d.A, n) - cplx(1.0, 0.0)) <= 1e-12);
  CHECK(prof::exponent_identity_check(d.A, n, 1.0) <= 1e-13);
}

TEST_CASE("exponent collapse on random data") {
  std::mt19937_64 rng(2026);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> uf(0.3, 3.0);
  for (int d = 1; d <= 3; ++d)
    for (int i = 0; i < 50; ++i) {
      const auto A = sym::random_symplectic(d, 0.8, 7000ULL * d + i);
      VectorXd n(2 * d);
      for (int k = 0; k < 2 * d; ++k) n(k) = 1.5 * g(rng);
      CHECK(prof::exponent_identity_check(A, n, uf(rng)) <=
            1e-9 * (1.0 + n.squaredNorm()));
    }
}

TEST_CASE("real part of the exponent: two routes") {
  const FixedPointDatum d = reflection_datum(1.3);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  const VectorXd upsf = VectorXd::Zero(2);
  for (int i = 0; i < 30; ++i) {
    PhasePoint p;
    p.theta = g(rng);
    p.t = 0.2 + std::abs(g(rng));
    p.u = 0.2 + std::abs(g(rng));
    p.tau = g(rng);
    VectorXd n(2), v(2);
    n << g(rng), g(rng);
    v << g(rng), g(rng);
    const cplx th = prof::theta_fn(p, n, v, d, upsf);
    CHECK(th.real() ==
          doctest::Approx(prof::re_theta_direct(p, n, v, d, upsf)).epsilon(1e-10));
  }
}

TEST_CASE("uniform transverse damping for the point reflection") {
  const FixedPointDatum d = reflection_datum();
  const double a = prof::damping_bound(d, 2.0, VectorXd::Zero(2));
  // frozen: (3 - sqrt(5))/8, attained at the corner t = u = 1/D
  CHECK(a == doctest::Approx((3.0 - std::sqrt(5.0)) / 8.0).epsilon(1e-6));
  const double a6 = prof::damping_bound(d, 6.0, VectorXd::Zero(2));
  CHECK(a6 > 0);
  CHECK(a6 < a);  // wider amplitude window weakens the uniform constant
}

TEST_CASE("leading profile and predicted kernel at the point reflection") {
  const FixedPointDatum d = reflection_datum();
  const prof::LeadingProfile lp = prof::leading_profile(d);
  CHECK(std::abs(lp.coefficient - cplx(2 * kPi, 0)) <= 1e-12);
  CHECK((lp.profile.M + 2.0 * Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() <=
        1e-12);

  const VectorXd n0 = VectorXd::Zero(2);
  const cplx k100 = prof::predicted_kernel(d, 100.0, n0, 1.0);
  CHECK(std::abs(k100 - cplx(200.0, 0.0)) <= 1e-9);

  // displaced value picks up exactly exp(psi2A(n)/f0)
  VectorXd n(2);
  n << 0.5, -0.25;
  const cplx kn = prof::predicted_kernel(d, 100.0, n, 1.0);
  CHECK(std::abs(kn - k100 * std::exp(sym::psi2_A(d.A, n))) <= 1e-9);

  // a nonzero period contributes a pure phase
  FixedPointDatum dp = d;
  dp.tau0 = 2 * kPi;
  const cplx kp = prof::predicted_kernel(dp, 100.0, n0, 1.0);
  CHECK(std::abs(kp - k100 * std::exp(cplx(0.0, -100.0 * 2 * kPi))) <= 1e-9);

  bool warned = false;
  prof::predicted_kernel(d, 100.0, 10.0 * VectorXd::Ones(2), 1.0, 2.0, &warned);
  CHECK(warned);  // far outside the shrinking validity window
  warned = false;
  prof::predicted_kernel(d, 100.0, n, 1.0, 2.0, &warned);
  CHECK_FALSE(warned);
}

TEST_CASE("parity splitting") {
  VectorXd n(2);
  n << 0.4, 0.0;
  std::vector<std::pair<VectorXd, cplx>> samples;
  // f(n) = 2 + n0 at the two mirror points
  samples.emplace_back(n, cplx(2.4, 0.0));
  samples.emplace_back(VectorXd(-n), cplx(1.6, 0.0));
  samples.emplace_back(VectorXd::Zero(2), cplx(2.0, 0.0));
  const prof::ParitySplit ps = prof::parity_split(samples);
  CHECK(std::abs(ps.even[0] - cplx(2.0, 0)) <= 1e-15);
  CHECK(std::abs(ps.odd[0] - cplx(0.4, 0)) <= 1e-15);
  CHECK(std::abs(ps.odd[1] + cplx(0.4, 0)) <= 1e-15);
  CHECK(std::abs(ps.odd[2]) == 0.0);

  std::vector<std::pair<VectorXd, cplx>> missing;
  missing.emplace_back(n, cplx(1.0, 0.0));
  CHECK_THROWS_AS(prof::parity_split(missing), std::invalid_argument);
}

TEST_CASE("damping bound input validation") {
  FixedPointDatum shear;
  MatrixXd A(2, 2);
  A << 1, 1, 0, 1;
  shear.A = sym::make_symplectic(A);
  CHECK_THROWS_AS(prof::damping_bound(shear, 2.0, VectorXd::Zero(2)),
                  std::domain_error);
}

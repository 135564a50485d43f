#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>

#include "loctrace/symplectic.hpp"

using namespace loctrace::sym;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd rot2(double beta) {
  MatrixXd A(2, 2);
  A << std::cos(beta), -std::sin(beta), std::sin(beta), std::cos(beta);
  return A;
}

}  // namespace

TEST_CASE("canonical form on the standard basis") {
  const MatrixXd J = J0(2);
  CHECK((J + J.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((J * J + MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  VectorXd e1 = VectorXd::Zero(2), e2 = VectorXd::Zero(2);
  e1(0) = 1;
  e2(1) = 1;
  CHECK(omega0(e1, e2) == doctest::Approx(1.0));  // omega(q, p) = +1
  CHECK(omega0(e2, e1) == doctest::Approx(-1.0));
  CHECK(omega0(e1, e1) == doctest::Approx(0.0));
}

TEST_CASE("membership test accepts rotations, rejects perturbations") {
  CHECK_NOTHROW(make_symplectic(rot2(0.7)));
  CHECK(symplectic_defect(rot2(1.3)) <= 1e-15);
  MatrixXd bad = rot2(0.7);
  bad(0, 1) += 1e-3;
  CHECK(symplectic_defect(bad) > 1e-5);
  CHECK_THROWS_AS(make_symplectic(bad), std::invalid_argument);
  CHECK_THROWS_AS(make_symplectic(MatrixXd::Zero(3, 3)), std::invalid_argument);
}

TEST_CASE("random samples land on the group and invert in closed form") {
  for (int d = 1; d <= 3; ++d) {
    for (std::uint64_t s = 0; s < 25; ++s) {
      const SymplecticMatrix A = random_symplectic(d, 0.7, 1000 * d + s);
      CHECK(symplectic_defect(A.M) <= 1e-10);
      CHECK(std::abs(A.M.determinant() - 1.0) <= 1e-9);
      const MatrixXd J = J0(d);
      const MatrixXd Ainv = -J * A.M.transpose() * J;
      CHECK((Ainv * A.M - MatrixXd::Identity(2 * d, 2 * d)).cwiseAbs().maxCoeff() <=
            1e-10);
    }
  }
}

TEST_CASE("orthogonal-symplectic sampler") {
  for (int d = 1; d <= 3; ++d) {
    const SymplecticMatrix A = random_unitary_symplectic(d, 42 + d);
    CHECK(symplectic_defect(A.M) <= 1e-12);
    CHECK((A.M.transpose() * A.M - MatrixXd::Identity(2 * d, 2 * d))
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
  }
}

TEST_CASE("polar factors multiply back and stay on the group") {
  const SymplecticMatrix A = random_symplectic(2, 0.9, 7);
  const PolarFactors pf = polar_decompose(A);
  CHECK((pf.O * pf.P - A.M).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((pf.O.transpose() * pf.O - MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <=
        1e-12);
  CHECK(symplectic_defect(pf.O) <= 1e-10);
  CHECK(symplectic_defect(pf.P) <= 1e-10);
  CHECK((pf.P - pf.P.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(pf.P);
  CHECK(es.eigenvalues().minCoeff() > 0);
}

TEST_CASE("psi2 antisymmetry of the phase and conjugate exchange") {
  VectorXd v(2), w(2);
  v << 0.3, -1.1;
  w << 0.9, 0.4;
  CHECK(std::abs(psi2(v, v)) == 0.0);
  CHECK(std::abs(psi2(v, w) - std::conj(psi2(w, v))) <= 1e-15);
  // explicit value: -i omega0(v,w) - |v-w|^2/2
  const cplx expect(-0.5 * (v - w).squaredNorm(), -omega0(v, w));
  CHECK(std::abs(psi2(v, w) - expect) <= 1e-15);
}

TEST_CASE("two assembly routes agree and symmetrize identically") {
  for (int d = 1; d <= 3; ++d) {
    for (std::uint64_t s = 0; s < 40; ++s) {
      const SymplecticMatrix A = random_symplectic(d, 0.8, 31337 * d + s);
      const double scale = 1.0 + std::pow(A.M.operatorNorm(), 2);
      const auto P = profile_matrix(A);
      const auto S = profile_matrix_alt(A);
      CHECK((P.M - S.M).cwiseAbs().maxCoeff() <= 1e-10 * scale);
      CHECK((P.M - P.M.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    }
  }
}

TEST_CASE("point reflection: frozen closed forms") {
  const SymplecticMatrix A = make_symplectic(-MatrixXd::Identity(2, 2));
  CHECK((q_of(A) - 2.0 * MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((f_of(A) + 2.0 * J0(1)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((g_of(A) - 2.0 * MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-14);
  // generator: -2I - i J0, whose symmetrization is exactly -2I
  const auto P = profile_matrix(A);
  CHECK((P.M + 2.0 * Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() <=
        1e-12);
  VectorXd n(2);
  n << 0.7, -0.2;
  CHECK(std::abs(psi2_A(A, n) - cplx(-2.0 * n.squaredNorm(), 0.0)) <= 1e-12);
  CHECK(negdef_on_image(A) == doctest::Approx(-2.0).epsilon(1e-10));
}

TEST_CASE("quarter turn: frozen top eigenvalue") {
  const SymplecticMatrix A = make_symplectic(rot2(std::numbers::pi / 2));
  CHECK(negdef_on_image(A) == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("unitary collapse of the quadratic generator") {
  for (int d = 1; d <= 2; ++d) {
    const SymplecticMatrix A = random_unitary_symplectic(d, 99 + d);
    VectorXd v = VectorXd::LinSpaced(2 * d, -0.8, 1.1);
    CHECK(std::abs(psi2_A(A, v) - psi2(A.M * v, v)) <= 1e-12);
  }
}

TEST_CASE("fixed and image splittings") {
  SUBCASE("identity fixes everything") {
    const SymplecticMatrix A = make_symplectic(MatrixXd::Identity(4, 4));
    CHECK(fixed_subspace(A).dim == 4);
    CHECK(image_subspace(A).dim == 0);
    const CleanlinessReport r = cleanliness(A);
    CHECK(r.very_clean);
    CHECK(r.intersection_dim == 0);
    CHECK_THROWS_AS(negdef_on_image(A), std::domain_error);
  }
  SUBCASE("point reflection fixes nothing") {
    const SymplecticMatrix A = make_symplectic(-MatrixXd::Identity(2, 2));
    CHECK(fixed_subspace(A).dim == 0);
    CHECK(image_subspace(A).dim == 2);
    CHECK(cleanliness(A).very_clean);
  }
  SUBCASE("mixed block splits cleanly") {
    MatrixXd A = MatrixXd::Identity(4, 4);
    // d = 2, variables ordered (q1,q2,p1,p2): rotate the (q1,p1) pair
    const double c = std::cos(1.1), s = std::sin(1.1);
    A(0, 0) = c;
    A(0, 2) = -s;
    A(2, 0) = s;
    A(2, 2) = c;
    const SymplecticMatrix M = make_symplectic(A);
    const Subspace fix = fixed_subspace(M);
    const Subspace im = image_subspace(M);
    CHECK(fix.dim == 2);
    CHECK(im.dim == 2);
    CHECK((fix.basis.transpose() * fix.basis - MatrixXd::Identity(2, 2))
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
    const CleanlinessReport r = cleanliness(M);
    CHECK(r.very_clean);
    CHECK(r.ker_symplectic);
    CHECK(r.intersection_dim == 0);
    CHECK(negdef_on_image(M) < 0);
  }
  SUBCASE("shear is not very clean") {
    MatrixXd A(2, 2);
    A << 1, 1, 0, 1;
    const SymplecticMatrix M = make_symplectic(A);
    const CleanlinessReport r = cleanliness(M);
    CHECK_FALSE(r.very_clean);
    CHECK(r.intersection_dim == 1);
    CHECK_THROWS_AS(negdef_on_image(M), std::domain_error);
  }
}

TEST_CASE("transverse negativity across random samples") {
  for (int d = 1; d <= 3; ++d)
    for (std::uint64_t s = 0; s < 60; ++s) {
      const SymplecticMatrix A = random_symplectic(d, 0.8, 555 * d + s);
      if (!cleanliness(A).very_clean || image_subspace(A).dim == 0) continue;
      CHECK(negdef_on_image(A) < 0);
    }
}

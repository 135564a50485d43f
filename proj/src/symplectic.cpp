#include "loctrace/symplectic.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <random>
#include <stdexcept>

namespace loctrace::sym {

MatrixXd J0(int d) {
  MatrixXd J = MatrixXd::Zero(2 * d, 2 * d);
  J.topRightCorner(d, d) = -MatrixXd::Identity(d, d);
  J.bottomLeftCorner(d, d) = MatrixXd::Identity(d, d);
  return J;
}

double omega0(const VectorXd& v, const VectorXd& w) {
  if (v.size() != w.size() || v.size() % 2 != 0)
    throw std::invalid_argument("omega0: dimension mismatch");
  const int d = static_cast<int>(v.size()) / 2;
  // -v^t J0 w, expanded to avoid building J0
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += v(i) * w(d + i) - v(d + i) * w(i);
  return s;
}

double symplectic_defect(const MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || n % 2 != 0)
    throw std::invalid_argument("symplectic_defect: need square even-dim matrix");
  const MatrixXd J = J0(n / 2);
  return (A.transpose() * J * A - J).cwiseAbs().maxCoeff();
}

SymplecticMatrix make_symplectic(const MatrixXd& A, double tol) {
  const double defect = symplectic_defect(A);
  if (defect > tol)
    throw std::invalid_argument("make_symplectic: defect " + std::to_string(defect) +
                                " exceeds tol");
  SymplecticMatrix S;
  S.d = static_cast<int>(A.rows()) / 2;
  S.M = A;
  return S;
}

SymplecticMatrix random_symplectic(int d, double spread, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("random_symplectic: d must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-spread, spread);
  MatrixXd S(2 * d, 2 * d);
  for (int i = 0; i < 2 * d; ++i)
    for (int j = i; j < 2 * d; ++j) {
      const double x = uni(rng);
      S(i, j) = x;
      S(j, i) = x;
    }
  const MatrixXd JS = J0(d) * S;
  SymplecticMatrix A;
  A.d = d;
  A.M = JS.exp();
  return A;
}

SymplecticMatrix random_unitary_symplectic(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXcd Z(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) Z(i, j) = cplx(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<MatrixXcd> qr(Z);
  MatrixXcd Q = qr.householderQ();
  // fix phases so the factorization is unique-ish (not required, keeps spread)
  MatrixXcd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    cplx r = R(j, j);
    if (std::abs(r) > 0) Q.col(j) *= r / std::abs(r);
  }
  // complex U = X + iY acts on (x, y) stacked as [[X, -Y],[Y, X]]
  SymplecticMatrix A;
  A.d = d;
  A.M.resize(2 * d, 2 * d);
  A.M.topLeftCorner(d, d) = Q.real();
  A.M.topRightCorner(d, d) = -Q.imag();
  A.M.bottomLeftCorner(d, d) = Q.imag();
  A.M.bottomRightCorner(d, d) = Q.real();
  return A;
}

PolarFactors polar_decompose(const SymplecticMatrix& A) {
  const MatrixXd AtA = A.M.transpose() * A.M;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(AtA);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("polar_decompose: eigensolver failed");
  if (es.eigenvalues().minCoeff() < 1e-14)
    throw std::runtime_error("polar_decompose: A^tA nearly singular");
  PolarFactors pf;
  const VectorXd sqrt_ev = es.eigenvalues().cwiseSqrt();
  pf.P = es.eigenvectors() * sqrt_ev.asDiagonal() * es.eigenvectors().transpose();
  pf.O = A.M * (es.eigenvectors() * sqrt_ev.cwiseInverse().asDiagonal() *
                es.eigenvectors().transpose());
  return pf;
}

MatrixXd q_of(const SymplecticMatrix& A) {
  const int n = 2 * A.d;
  return MatrixXd::Identity(n, n) + A.M.transpose() * A.M;
}

MatrixXd f_of(const SymplecticMatrix& A) {
  // symplectic inverse: A^{-1} = -J0 A^t J0 (exact given A in the group)
  const MatrixXd J = J0(A.d);
  const MatrixXd Ainv = -J * A.M.transpose() * J;
  return J * (Ainv - MatrixXd::Identity(2 * A.d, 2 * A.d));
}

MatrixXd g_of(const SymplecticMatrix& A) {
  return A.M.transpose() * (A.M - MatrixXd::Identity(2 * A.d, 2 * A.d));
}

namespace {
ProfileMatrix symmetrized(const MatrixXcd& M) {
  ProfileMatrix p;
  p.M = 0.5 * (M + M.transpose());
  return p;
}
}  // namespace

ProfileMatrix profile_matrix(const SymplecticMatrix& A) {
  const int n = 2 * A.d;
  const MatrixXd I = MatrixXd::Identity(n, n);
  const MatrixXd J = J0(A.d);
  const PolarFactors pf = polar_decompose(A);
  const MatrixXd Q = q_of(A);
  const Eigen::LDLT<MatrixXd> Qf(Q);
  const MatrixXd F = f_of(A);
  const MatrixXd G = g_of(A);
  const MatrixXd re =
      -(A.M.transpose() - I) * pf.O * Qf.solve(pf.O.transpose() * (A.M - I));
  const MatrixXd im = -(G.transpose() * Qf.solve(F) - A.M.transpose() * J);
  return symmetrized(re.cast<cplx>() + cplx(0, 1) * im.cast<cplx>());
}

ProfileMatrix profile_matrix_alt(const SymplecticMatrix& A) {
  const int n = 2 * A.d;
  const MatrixXd I = MatrixXd::Identity(n, n);
  const MatrixXd J = J0(A.d);
  const MatrixXd Q = q_of(A);
  const Eigen::LDLT<MatrixXd> Qf(Q);
  const MatrixXd F = f_of(A);
  const MatrixXd G = g_of(A);
  const MatrixXd AmI = A.M - I;
  const MatrixXd re = -0.5 * (AmI.transpose() * AmI + F.transpose() * Qf.solve(F) -
                              G.transpose() * Qf.solve(G));
  const MatrixXd im = -(G.transpose() * Qf.solve(F) - A.M.transpose() * J);
  return symmetrized(re.cast<cplx>() + cplx(0, 1) * im.cast<cplx>());
}

cplx psi2(const VectorXd& v, const VectorXd& w) {
  return cplx(0, -1) * omega0(v, w) - 0.5 * (v - w).squaredNorm();
}

cplx psi2_A(const SymplecticMatrix& A, const VectorXd& n) {
  const ProfileMatrix P = profile_matrix(A);
  const Eigen::VectorXcd nc = n.cast<cplx>();
  return nc.transpose() * P.M * nc;
}

namespace {

struct SvdSplit {
  MatrixXd ker;  // right singular vectors at (near-)zero sigma
  MatrixXd im;   // left singular vectors at nonzero sigma
  bool gap_warning = false;
};

SvdSplit split_A_minus_I(const SymplecticMatrix& A, double tol) {
  const int n = 2 * A.d;
  const MatrixXd B = A.M - MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<MatrixXd> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd s = svd.singularValues();
  SvdSplit out;
  const double smax = s.size() ? s(0) : 0.0;
  if (smax == 0.0) {  // A = I exactly: kernel is everything
    out.ker = MatrixXd::Identity(n, n);
    out.im = MatrixXd(n, 0);
    return out;
  }
  const double cut = tol * smax;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > cut) ++rank;
    const double ratio = s(i) / cut;
    if (ratio > 0.1 && ratio < 10.0) out.gap_warning = true;
  }
  out.im = svd.matrixU().leftCols(rank);
  out.ker = svd.matrixV().rightCols(n - rank);
  return out;
}

}  // namespace

Subspace fixed_subspace(const SymplecticMatrix& A, double tol) {
  if (tol <= 0) throw std::invalid_argument("fixed_subspace: tol must be > 0");
  const SvdSplit sp = split_A_minus_I(A, tol);
  return Subspace{sp.ker, static_cast<int>(sp.ker.cols()), sp.gap_warning};
}

Subspace image_subspace(const SymplecticMatrix& A, double tol) {
  if (tol <= 0) throw std::invalid_argument("image_subspace: tol must be > 0");
  const SvdSplit sp = split_A_minus_I(A, tol);
  return Subspace{sp.im, static_cast<int>(sp.im.cols()), sp.gap_warning};
}

CleanlinessReport cleanliness(const SymplecticMatrix& A, double tol) {
  const SvdSplit sp = split_A_minus_I(A, tol);
  CleanlinessReport rep;
  rep.ker_dim = static_cast<int>(sp.ker.cols());
  rep.im_dim = static_cast<int>(sp.im.cols());
  rep.gap_warning = sp.gap_warning;
  // principal angles: singular values of K^t B are the cosines
  if (rep.ker_dim > 0 && rep.im_dim > 0) {
    Eigen::JacobiSVD<MatrixXd> svd(sp.ker.transpose() * sp.im);
    const VectorXd c = svd.singularValues();
    for (int i = 0; i < c.size(); ++i)
      if (c(i) > 1.0 - 1e-8) ++rep.intersection_dim;
  }
  if (rep.ker_dim == 0) {
    rep.ker_symplectic = true;  // omega0 restricted to (0) is vacuously nondegenerate
  } else if (rep.ker_dim % 2 == 1) {
    rep.ker_symplectic = false;
  } else {
    const MatrixXd Gram = -sp.ker.transpose() * J0(A.d) * sp.ker;
    Eigen::JacobiSVD<MatrixXd> svd(Gram);
    rep.ker_symplectic = svd.singularValues().minCoeff() > tol;
  }
  rep.very_clean = (rep.intersection_dim == 0) && rep.ker_symplectic;
  return rep;
}

double negdef_on_image(const SymplecticMatrix& A, double tol) {
  const CleanlinessReport rep = cleanliness(A, tol);
  if (rep.intersection_dim != 0)
    throw std::domain_error("negdef_on_image: ker/im intersection is nontrivial");
  if (rep.im_dim == 0)
    throw std::domain_error("negdef_on_image: image of A - I is trivial");
  const Subspace N = image_subspace(A, tol);
  const ProfileMatrix P = profile_matrix(A);
  const MatrixXd ReP = P.M.real();
  const MatrixXd R = N.basis.transpose() * ReP * N.basis;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (R + R.transpose()));
  return es.eigenvalues().maxCoeff();
}

}  // namespace loctrace::sym

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace loctrace::sym {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatrixXcd = Eigen::MatrixXcd;
using cplx = std::complex<double>;

// Sign convention, fixed once: the symplectic form is represented by -J0,
// i.e. omega0(v,w) = -v^t J0 w, with J0 = [[0,-I],[I,0]]. Everything in this
// library uses this sign.
MatrixXd J0(int d);
double omega0(const VectorXd& v, const VectorXd& w);

struct SymplecticMatrix {
  int d = 0;            // half-dimension
  MatrixXd M;           // 2d x 2d
};

struct PolarFactors {
  MatrixXd O;           // orthogonal and symplectic
  MatrixXd P;           // symmetric positive definite, symplectic
};

// complex symmetric 2d x 2d; stored symmetrized so v^t M v is well-posed
struct ProfileMatrix {
  MatrixXcd M;
};

struct Subspace {
  MatrixXd basis;       // orthonormal columns
  int dim = 0;
  bool gap_warning = false;  // some singular value within 10x of the cutoff
};

struct CleanlinessReport {
  int ker_dim = 0;
  int im_dim = 0;
  int intersection_dim = 0;
  bool ker_symplectic = false;
  bool very_clean = false;
  bool gap_warning = false;
};

// checks ||A^t J0 A - J0||_max <= tol, wraps; throws std::invalid_argument
SymplecticMatrix make_symplectic(const MatrixXd& A, double tol = 1e-10);

double symplectic_defect(const MatrixXd& A);

// exp(J0 S), S seeded random symmetric with entries uniform in [-spread,spread]
SymplecticMatrix random_symplectic(int d, double spread, std::uint64_t seed);

// random orthogonal-symplectic matrix (embedding of a Haar-ish unitary)
SymplecticMatrix random_unitary_symplectic(int d, std::uint64_t seed);

PolarFactors polar_decompose(const SymplecticMatrix& A);

MatrixXd q_of(const SymplecticMatrix& A);  // I + A^t A
MatrixXd f_of(const SymplecticMatrix& A);  // J0 (A^{-1} - I)
MatrixXd g_of(const SymplecticMatrix& A);  // A^t (A - I)

ProfileMatrix profile_matrix(const SymplecticMatrix& A);      // polar route
ProfileMatrix profile_matrix_alt(const SymplecticMatrix& A);  // Q,F,G route

cplx psi2(const VectorXd& v, const VectorXd& w);
cplx psi2_A(const SymplecticMatrix& A, const VectorXd& n);

Subspace fixed_subspace(const SymplecticMatrix& A, double tol = 1e-8);
Subspace image_subspace(const SymplecticMatrix& A, double tol = 1e-8);

CleanlinessReport cleanliness(const SymplecticMatrix& A, double tol = 1e-8);

// largest eigenvalue of Re(profile matrix) restricted to im(A-I); requires
// trivial ker/im intersection and nontrivial image
double negdef_on_image(const SymplecticMatrix& A, double tol = 1e-8);

}  // namespace loctrace::sym

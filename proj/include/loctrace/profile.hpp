#pragma once

#include <utility>
#include <vector>

#include "loctrace/symplectic.hpp"

namespace loctrace::prof {

using loctrace::sym::cplx;
using loctrace::sym::MatrixXd;
using loctrace::sym::ProfileMatrix;
using loctrace::sym::SymplecticMatrix;
using loctrace::sym::VectorXd;
using Eigen::Matrix4d;

struct FixedPointDatum {
  SymplecticMatrix A;  // linearization of the return map at time -tau0
  double f0 = 1.0;     // Hamiltonian value at the fixed point, > 0
  cplx rho0 = 1.0;     // symbol value at the period
  double tau0 = 0.0;   // the period
  int dim_d = 1;
};

struct PhasePoint {
  double theta = 0.0;
  double t = 1.0;  // > 0
  double u = 1.0;  // > 0
  double tau = 0.0;
};

// n-independent prefactor (without (lambda/pi)^d and the e^{-i lambda tau0}
// phase) plus the exponent generator Profile/f0
struct LeadingProfile {
  cplx coefficient;
  ProfileMatrix profile;
};

double upsilon(const PhasePoint& p, double f0);

cplx theta_fn(const PhasePoint& p, const VectorXd& n, const VectorXd& v,
              const FixedPointDatum& datum, const VectorXd& upsf);

// independent evaluation of the displayed real part, for cross-checks
double re_theta_direct(const PhasePoint& p, const VectorXd& n, const VectorXd& v,
                       const FixedPointDatum& datum, const VectorXd& upsf);

// largest a > 0 with Re Theta <= -a(theta^2+tau^2+|n|^2+|v|^2) for
// t,u in [1/D,D]; n,v range over the transverse subspace im(A-I) (directions
// fixed by the flow are tangent to the fixed locus, not displacement data).
// Exact per-(t,u) smallest eigenvalue on a grid, validated by seeded sphere
// sampling; throws if the sampled max ratio is >= 0 or A is not very clean.
double damping_bound(const FixedPointDatum& datum, double D, const VectorXd& upsf);

PhasePoint stationary_point(double f0);
Matrix4d upsilon_hessian(double f0);          // variables ordered (theta, t, u, tau)
Matrix4d upsilon_hessian_inverse(double f0);  // closed form, checked against H
cplx sqrt_hessian_factor(double f0, double lambda);  // = lambda f0/(2 pi)^2

cplx gamma_shift(const SymplecticMatrix& A, const VectorXd& nprime);

// integral over R^m of exp(i s.xi - s^t Q s/2); evenness in s makes the sign
// of xi immaterial
cplx gaussian_integral_closed(const MatrixXd& Q, const VectorXd& xi);

double exponent_identity_check(const SymplecticMatrix& A, const VectorXd& n,
                               double f0);

LeadingProfile leading_profile(const FixedPointDatum& datum);

// leading term only; warns (via flag or stderr) if |n| exceeds the validity
// window C lambda^{1/9}
cplx predicted_kernel(const FixedPointDatum& datum, double lambda, const VectorXd& n,
                      cplx chi_at_tau0, double window_C = 2.0,
                      bool* window_warned = nullptr);

struct ParitySplit {
  std::vector<cplx> even;  // aligned with input order
  std::vector<cplx> odd;
};

ParitySplit parity_split(const std::vector<std::pair<VectorXd, cplx>>& samples);

}  // namespace loctrace::prof

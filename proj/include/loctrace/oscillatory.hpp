#pragma once

#include "loctrace/profile.hpp"
#include "loctrace/quadrature.hpp"

namespace loctrace::osc {

using loctrace::prof::FixedPointDatum;
using loctrace::sym::cplx;
using loctrace::sym::VectorXd;

// E_d(c) = integral of s^d e^{cs} over (1/D, D); series for small |c|D,
// closed-form recursion otherwise. Requires Re c <= ~0 for stability (callers
// only produce nonpositive real parts).
cplx e_moment(int d, cplx c, double D);

struct QuadratureSpec {
  int nodes_per_axis = 16;         // minimum per oscillatory axis
  double box_radius_thetatau = -1;  // <= 0: auto, 8/sqrt(damping_bound)
  double D = -1;                    // (t,u) window (1/D, D); <= 0: auto 6/f0
  int hermite_order = 32;           // per v axis
  double lambda = 0;                // > 0
};

struct IntegralResult {
  cplx value{};
  double est_error = 0;  // from node doubling
  double wall_time = 0;  // seconds
  bool converged = true; // false if doubling moved the value by > 10%
};

enum class Engine {
  Auto,       // Separable when upsf = 0, else Factored
  Tensor,     // Gauss-Legendre on all four axes (serial reference)
  Factored,   // (t,u) integrals in closed form, 2D GL over (theta,tau)
  Separable,  // upsf = 0 only: product of two 1D integrals
};

// I_lambda(n,v): amplitude t^d u^d, phase i sqrt(lambda) Upsilon + Theta,
// prefactor rho0/(2 pi^d) (lambda/pi)^{1+d} e^{-i lambda tau0}
IntegralResult inner_integral(const FixedPointDatum& datum, const VectorXd& n,
                              const VectorXd& v, const QuadratureSpec& spec,
                              const VectorXd& upsf, Engine engine = Engine::Auto);

// same integrand with the oscillatory phases removed and Theta replaced by
// its real part; used by the no-oscillation sanity checks
IntegralResult inner_integral_phase_free(const FixedPointDatum& datum,
                                         const VectorXd& n, const VectorXd& v,
                                         const QuadratureSpec& spec,
                                         const VectorXd& upsf,
                                         Engine engine = Engine::Auto);

// dv integral of inner_integral, Gauss-Hermite adapted to the Re Theta
// damping scale. Converges to predicted_kernel as lambda grows; the
// normalization constant linking the two is exactly 1 (see profile.cpp note).
IntegralResult full_profile_integral(const FixedPointDatum& datum, const VectorXd& n,
                                     const QuadratureSpec& spec, const VectorXd& upsf,
                                     Engine engine = Engine::Auto);

// closed-form stationary-phase value of the inner integral at (n, v)
cplx stationary_reduce(const FixedPointDatum& datum, double lambda,
                       const VectorXd& n, const VectorXd& v);

// dv integral of stationary_reduce done in closed form (real square
// completion + gaussian_integral_closed); equals predicted_kernel
cplx stationary_reduce_v_integrated(const FixedPointDatum& datum, double lambda,
                                    const VectorXd& n);

}  // namespace loctrace::osc

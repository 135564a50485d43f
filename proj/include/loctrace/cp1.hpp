#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "loctrace/profile.hpp"

namespace loctrace::cp1 {

using loctrace::prof::FixedPointDatum;
using loctrace::sym::cplx;
using loctrace::sym::VectorXd;

// f = a + b m on the projective line, m = |z1|^2/|z|^2 in [0,1]; the flow
// fixes both poles and is holomorphic, so all linearizations are unitary
struct RotationHamiltonian {
  double a = 1.0;  // value at the pole [1:0]
  double b = 0.0;  // height range; requires a > 0 and a + b > 0
};

struct LiftPhases {
  double alpha0 = 0;        // rotation rate of z0 under the lifted flow
  double alpha1 = 0;        // rotation rate of z1
  double ode_deviation = 0; // max endpoint error of the generic ODE cross-check
};

// analytic phases plus a cross-check integrating the assembled contact field
// from 20 seeded points; throws if they disagree beyond 1e-6
LiftPhases contact_lift_phases(const RotationHamiltonian& ham);

// closed-form spectral data of the quantized model: frequencies mu_{k,j} and
// squared section norms c_{k,j} (stored as logs), 0 <= j <= k, 1 <= k <= kmax.
// The k = 0 level (constant sections, frequency 0) is handled analytically by
// brute_force_S so that every stored frequency is strictly positive.
struct SpectralModel {
  RotationHamiltonian ham;
  int kmax = 0;
  std::vector<double> mu;     // flattened, offset(k) = (k-1)(k+2)/2
  std::vector<double> log_c;
  double mu_min = 0, mu_max = 0;

  std::size_t offset(int k) const { return std::size_t(k - 1) * (k + 2) / 2; }
  double mu_at(int k, int j) const { return mu[offset(k) + j]; }
  double log_c_at(int k, int j) const { return log_c[offset(k) + j]; }
};

SpectralModel build_spectral_model(const RotationHamiltonian& ham, int kmax);

int suggested_kmax(const RotationHamiltonian& ham, double lambda, double eps);

// integral of the level-k diagonal kernel against the model measure,
// evaluated by quadrature; equals k+1 (dimension calibration)
double dimension_integral(const SpectralModel& model, int k);

// chi(tau) = exp(1 - 1/(1 - ((tau-tau0)/eps)^2)) on (tau0-eps, tau0+eps);
// W(s) = int chi(tau) e^{-is tau} dtau = e^{-is tau0} W0(s), W0 real even.
// Grid mode caches W0 densely with cubic interpolation (absolute error
// ~1e-11); exact mode re-integrates per call, for measurements that chase
// values many orders below the window peak
struct Window {
  double tau0 = 0, eps = 0.3, smax = 0, ds = 0;
  std::vector<double> w0_grid;          // empty in exact mode
  std::vector<double> gl_x, gl_cw;      // quadrature nodes, chi-weighted

  double chi(double tau) const;
  double w0(double s) const;  // the real even factor
  cplx W(double s) const;
};

Window make_window(double tau0, double eps, double smax, bool exact = false);

struct ModelPoint {
  cplx z0, z1;  // normalized homogeneous pair
  VectorXd n;   // displacement in the chart at the pole (may be empty)
};

ModelPoint heisenberg_displace(const VectorXd& n, double lambda);
ModelPoint point_at_chart(cplx w);

// chart-scale constant: Kahler form at the chart origin vs the standard
// area form, by Richardson-extrapolated finite differences of the potential
double kappa_chart_scale();

// fiber offset of the horizontal lift along the radial path s -> s*nhat
// (Simpson integration of the connection form along the path)
double horizontal_holonomy_radial(const VectorXd& n, double s, int steps = 2000);
// same along the loop w = r e^{i psi}; equals -2 pi r^2/(1+r^2)
double horizontal_holonomy_loop(double r, int steps = 2000);

using SymbolFn = std::function<double(double)>;  // circle-invariant, of m

struct ToeplitzWeights {
  double w00 = 1.0;        // k = 0 weight
  std::vector<double> w;   // aligned with SpectralModel::mu
};

ToeplitzWeights toeplitz_weights(const SpectralModel& model, const SymbolFn& g);

cplx brute_force_S(const SpectralModel& model, const ModelPoint& point,
                   double lambda, const Window& window,
                   const ToeplitzWeights* weights = nullptr);

FixedPointDatum fixed_point_datum_at_pole(const RotationHamiltonian& ham,
                                          int which_period, cplx rho0 = 1.0);

struct ProfileSample {
  VectorXd n;
  cplx brute;
  cplx predicted;
};

struct ProfileScanResult {
  std::vector<ProfileSample> rows;
  std::vector<cplx> even, odd;  // parity split of the brute-force values
};

ProfileScanResult profile_scan(const SpectralModel& model,
                               const FixedPointDatum& datum, double lambda,
                               const std::vector<VectorXd>& n_grid,
                               const Window& window,
                               const ToeplitzWeights* weights = nullptr);

struct DecayRow {
  double lambda = 0;
  double abs_S = 0;
};

std::vector<DecayRow> off_locus_scan(const SpectralModel& model, double r,
                                     const std::vector<double>& lambdas,
                                     const Window& window);

}  // namespace loctrace::cp1

#include "loctrace/cp1.hpp"

#include "loctrace/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace loctrace::cp1 {

namespace {

constexpr double kPi = std::numbers::pi;
using Vec4 = Eigen::Vector4d;
using C2 = Eigen::Vector2cd;

void validate(const RotationHamiltonian& ham) {
  if (ham.a <= 0 || ham.a + ham.b <= 0)
    throw std::invalid_argument("RotationHamiltonian: need a > 0 and a + b > 0");
}

double f_of_w(const RotationHamiltonian& ham, cplx w) {
  const double m = std::norm(w) / (1.0 + std::norm(w));
  return ham.a + ham.b * m;
}

// Kahler potential of the model metric in the affine chart
double potential(cplx w) { return std::log(1.0 + std::norm(w)); }

// area density of the form (i/2) dd-bar potential = g dx dy, by
// Richardson-extrapolated 5-point Laplacians
double area_density(cplx w, double h = 1e-3) {
  auto lap = [&](double hh) {
    return (potential(w + hh) + potential(w - hh) + potential(w + cplx(0, hh)) +
            potential(w - cplx(0, hh)) - 4.0 * potential(w)) /
           (hh * hh);
  };
  const double l1 = lap(h), l2 = lap(0.5 * h);
  return (4.0 * l2 - l1) / 3.0 / 4.0;
}

// chart section of the sphere bundle over w, phase pinned to real z0
C2 chart_section(cplx w) {
  const double r = 1.0 / std::sqrt(1.0 + std::norm(w));
  return C2(cplx(r, 0), w * r);
}

// contact vector field at z on the unit sphere, assembled generically:
// horizontal lift of the Hamiltonian field of f (with respect to twice the
// area form) minus f times the fiber generator iz
C2 contact_field(const RotationHamiltonian& ham, const C2& z) {
  const cplx w = z(1) / z(0);
  // Hamiltonian field in chart coordinates: 2g (ux dy - uy dx) = df
  const double hf = 1e-5;
  const double fx = (f_of_w(ham, w + hf) - f_of_w(ham, w - hf)) / (2 * hf);
  const double fy =
      (f_of_w(ham, w + cplx(0, hf)) - f_of_w(ham, w - cplx(0, hf))) / (2 * hf);
  const double g = area_density(w);
  const cplx u = cplx(fy, -fx) / (2.0 * g);
  // lift of u at z: push the chart section forward, then remove the vertical
  // component alpha(Y) iz
  const cplx phase = z(0) / std::abs(z(0));
  const double hd = 1e-5;
  const C2 dzx = (chart_section(w + hd) - chart_section(w - hd)) / (2 * hd);
  const C2 dzy = (chart_section(w + cplx(0, hd)) - chart_section(w - cplx(0, hd))) /
                 (2 * hd);
  const C2 Y = phase * (u.real() * dzx + u.imag() * dzy);
  const double alphaY = (std::conj(z(0)) * Y(0) + std::conj(z(1)) * Y(1)).imag();
  const C2 iz(cplx(0, 1) * z(0), cplx(0, 1) * z(1));
  return Y - (alphaY + f_of_w(ham, w)) * iz;
}

}  // namespace

LiftPhases contact_lift_phases(const RotationHamiltonian& ham) {
  validate(ham);
  LiftPhases ph;
  ph.alpha0 = -ham.a;
  ph.alpha1 = -(ham.a + ham.b);

  // generic ODE cross-check: RK4 for time 1 from 20 seeded sphere points
  std::mt19937_64 rng(20250814ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    C2 z;
    do {
      z = C2(cplx(gauss(rng), gauss(rng)), cplx(gauss(rng), gauss(rng)));
      z.normalize();
    } while (std::abs(z(0)) < 0.25 || std::abs(z(1)) < 0.25);
    const C2 z_start = z;
    const int nsteps = 2000;
    const double h = 1.0 / nsteps;
    for (int it = 0; it < nsteps; ++it) {
      const C2 k1 = contact_field(ham, z);
      const C2 k2 = contact_field(ham, z + 0.5 * h * k1);
      const C2 k3 = contact_field(ham, z + 0.5 * h * k2);
      const C2 k4 = contact_field(ham, z + h * k3);
      z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    C2 target(z_start(0) * std::exp(cplx(0, ph.alpha0)),
              z_start(1) * std::exp(cplx(0, ph.alpha1)));
    worst = std::max(worst, (z - target).norm());
  }
  ph.ode_deviation = worst;
  if (worst > 1e-6) {
    std::ostringstream os;
    os << "contact_lift_phases: ODE cross-check deviates by " << worst
       << " (sign or normalization convention failure)";
    throw std::runtime_error(os.str());
  }
  return ph;
}

SpectralModel build_spectral_model(const RotationHamiltonian& ham, int kmax) {
  validate(ham);
  if (kmax < 1) throw std::invalid_argument("build_spectral_model: kmax >= 1");
  const LiftPhases ph = contact_lift_phases(ham);
  SpectralModel m;
  m.ham = ham;
  m.kmax = kmax;
  const std::size_t total = std::size_t(kmax) * (kmax + 3) / 2;
  m.mu.resize(total);
  m.log_c.resize(total);
  const double log_pi = std::log(kPi);
  m.mu_min = std::numeric_limits<double>::infinity();
  m.mu_max = 0;
  for (int k = 1; k <= kmax; ++k) {
    const double lk1 = std::log(double(k + 1));
    const double lgk = std::lgamma(double(k + 1));
    for (int j = 0; j <= k; ++j) {
      // a section of joint frequency mu evolves as e^{i mu tau} under the
      // one-parameter group pulled back by the inverse flow, hence the sign
      const double mu = -((k - j) * ph.alpha0 + j * ph.alpha1);
      if (mu <= 0)
        throw std::runtime_error("build_spectral_model: nonpositive frequency");
      const std::size_t idx = m.offset(k) + j;
      m.mu[idx] = mu;
      m.log_c[idx] = lk1 + lgk - std::lgamma(double(j + 1)) -
                     std::lgamma(double(k - j + 1)) - log_pi;
      m.mu_min = std::min(m.mu_min, mu);
      m.mu_max = std::max(m.mu_max, mu);
    }
  }
  // dimension calibration for the cheap levels; the full-range check is a
  // test concern
  for (int k = 1; k <= std::min(kmax, 25); ++k) {
    const double dim = dimension_integral(m, k);
    if (std::abs(dim - (k + 1)) > 1e-8)
      throw std::runtime_error("build_spectral_model: dimension calibration failed");
  }
  return m;
}

int suggested_kmax(const RotationHamiltonian& ham, double lambda, double eps) {
  validate(ham);
  const double slope = std::min(ham.a, ham.a + ham.b);
  return static_cast<int>(std::ceil((std::max(lambda, 0.0) + 12.0 / eps) / slope)) + 1;
}

double dimension_integral(const SpectralModel& model, int k) {
  if (k < 1 || k > model.kmax)
    throw std::invalid_argument("dimension_integral: k out of range");
  // pushforward of the model measure to m = |z1|^2 is pi * dm on [0,1]
  const QuadRule gl = gauss_legendre(std::max(64, k / 2 + 16), 0.0, 1.0);
  double total = 0.0;
  for (std::size_t i = 0; i < gl.size(); ++i) {
    const double mm = gl.x[i];
    const double lm = std::log(mm), l1m = std::log1p(-mm);
    double level = 0.0;
    for (int j = 0; j <= k; ++j)
      level += std::exp(model.log_c_at(k, j) + j * lm + (k - j) * l1m);
    total += gl.w[i] * level * kPi;
  }
  return total;
}

double Window::chi(double tau) const {
  const double x = (tau - tau0) / eps;
  if (std::abs(x) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

double Window::w0(double s) const {
  s = std::abs(s);
  if (s > smax)
    throw std::out_of_range("Window::w0: s beyond cached range; rebuild window");
  if (w0_grid.empty()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < gl_x.size(); ++i) acc += gl_cw[i] * std::cos(s * gl_x[i]);
    return 2.0 * acc;
  }
  const double t = s / ds;
  long long i = static_cast<long long>(std::floor(t)) - 1;
  i = std::clamp<long long>(i, 0, static_cast<long long>(w0_grid.size()) - 4);
  // cubic Lagrange on 4 consecutive grid points
  double result = 0.0;
  for (int a = 0; a < 4; ++a) {
    double basis = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) basis *= (t - (i + b)) / double(a - b);
    result += basis * w0_grid[static_cast<std::size_t>(i) + a];
  }
  return result;
}

cplx Window::W(double s) const {
  return w0(s) * std::exp(cplx(0.0, -s * tau0));
}

Window make_window(double tau0, double eps, double smax, bool exact) {
  if (eps <= 0 || smax <= 0) throw std::invalid_argument("make_window: eps, smax > 0");
  Window w;
  w.tau0 = tau0;
  w.eps = eps;
  w.smax = smax;
  w.ds = eps / 8.0;
  // W0(s) = 2 int_0^eps chi0(sigma) cos(s sigma) dsigma; >= 12 nodes per
  // oscillation at the largest supported s
  const int nodes =
      std::max(96, static_cast<int>(std::ceil(12.0 * smax * eps / (2.0 * kPi))));
  const QuadRule gl = gauss_legendre(nodes, 0.0, eps);
  w.gl_x = gl.x;
  w.gl_cw.resize(gl.size());
  for (std::size_t i = 0; i < gl.size(); ++i) {
    const double x = gl.x[i] / eps;
    w.gl_cw[i] = gl.w[i] * ((x < 1.0) ? std::exp(1.0 - 1.0 / (1.0 - x * x)) : 0.0);
  }
  if (exact) return w;
  const std::size_t npts = static_cast<std::size_t>(std::ceil(smax / w.ds)) + 8;
  w.w0_grid.resize(npts);
  for (std::size_t p = 0; p < npts; ++p) {
    const double s = p * w.ds;
    double acc = 0.0;
    for (std::size_t i = 0; i < gl.size(); ++i)
      acc += w.gl_cw[i] * std::cos(s * gl.x[i]);
    w.w0_grid[p] = 2.0 * acc;
  }
  return w;
}

ModelPoint heisenberg_displace(const VectorXd& n, double lambda) {
  if (n.size() != 2)
    throw std::invalid_argument("heisenberg_displace: n must be a real 2-column");
  if (lambda <= 0) throw std::invalid_argument("heisenberg_displace: lambda > 0");
  if (n.norm() / std::sqrt(lambda) >= 0.5)
    throw std::domain_error("heisenberg_displace: |n|/sqrt(lambda) >= 0.5 leaves the chart");
  const cplx w = cplx(n(0), n(1)) / std::sqrt(lambda);
  ModelPoint p = point_at_chart(w);
  p.n = n;
  return p;
}

ModelPoint point_at_chart(cplx w) {
  ModelPoint p;
  const double r = 1.0 / std::sqrt(1.0 + std::norm(w));
  p.z0 = cplx(r, 0);
  p.z1 = w * r;
  p.n = VectorXd();
  return p;
}

double kappa_chart_scale() {
  return 1.0 / std::sqrt(area_density(cplx(0, 0), 1e-2));
}

namespace {

// connection integrand Im<dz/dsigma, z> along a chart path, derivative by
// central differences
double connection_term(const std::function<cplx(double)>& path, double sigma,
                       double h) {
  const C2 zp = chart_section(path(sigma + h));
  const C2 zm = chart_section(path(sigma - h));
  const C2 dz = (zp - zm) / (2.0 * h);
  const C2 z = chart_section(path(sigma));
  return (std::conj(z(0)) * dz(0) + std::conj(z(1)) * dz(1)).imag();
}

double holonomy_along(const std::function<cplx(double)>& path, double s0, double s1,
                      int steps) {
  if (steps % 2) ++steps;
  const double h = (s1 - s0) / steps;
  const double hd = std::max(1e-7, 1e-6 * std::abs(s1 - s0));
  double acc = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double sigma = s0 + i * h;
    const double wgt = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += wgt * connection_term(path, sigma, hd);
  }
  return -acc * h / 3.0;
}

}  // namespace

double horizontal_holonomy_radial(const VectorXd& n, double s, int steps) {
  if (n.size() != 2 || n.norm() == 0)
    throw std::invalid_argument("horizontal_holonomy_radial: need nonzero 2-column");
  const cplx dir = cplx(n(0), n(1));
  return holonomy_along([dir](double sig) { return sig * dir; }, 0.0, s, steps);
}

double horizontal_holonomy_loop(double r, int steps) {
  if (r <= 0) throw std::invalid_argument("horizontal_holonomy_loop: r > 0");
  return holonomy_along([r](double psi) { return r * std::exp(cplx(0, psi)); }, 0.0,
                        2.0 * kPi, steps);
}

ToeplitzWeights toeplitz_weights(const SpectralModel& model, const SymbolFn& g) {
  if (!g) throw std::invalid_argument("toeplitz_weights: empty symbol");
  ToeplitzWeights tw;
  tw.w.assign(model.mu.size(), 0.0);
  {
    const QuadRule gl = gauss_legendre(64, 0.0, 1.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < gl.size(); ++i) acc += gl.w[i] * g(gl.x[i]);
    tw.w00 = acc;
  }
  for (int k = 1; k <= model.kmax; ++k) {
    const QuadRule gl = gauss_legendre(std::max(64, k / 2 + 16), 0.0, 1.0);
    const double lk1 = std::log(double(k + 1));
    const double lgk = std::lgamma(double(k + 1));
    for (int j = 0; j <= k; ++j) {
      const double logc =
          lk1 + lgk - std::lgamma(double(j + 1)) - std::lgamma(double(k - j + 1));
      double acc = 0.0;
      for (std::size_t i = 0; i < gl.size(); ++i) {
        const double mm = gl.x[i];
        acc += gl.w[i] * g(mm) *
               std::exp(logc + j * std::log(mm) + (k - j) * std::log1p(-mm));
      }
      tw.w[model.offset(k) + j] = acc;
    }
  }
  return tw;
}

cplx brute_force_S(const SpectralModel& model, const ModelPoint& point,
                   double lambda, const Window& window,
                   const ToeplitzWeights* weights) {
  const double m0 = std::norm(point.z0), m1 = std::norm(point.z1);
  if (std::abs(m0 + m1 - 1.0) > 1e-9)
    throw std::invalid_argument("brute_force_S: point not normalized");
  // tail coverage: remaining levels must sit beyond the reach of the window
  const double tail_floor = model.kmax * std::min(model.ham.a, model.ham.a + model.ham.b);
  if (tail_floor <= lambda + 10.0 / window.eps)
    throw std::domain_error("brute_force_S: kmax too small for this lambda (tail coverage)");
  const double needed =
      std::max({std::abs(lambda), std::abs(lambda - model.mu_min),
                std::abs(lambda - model.mu_max)});
  if (needed > window.smax)
    throw std::domain_error("brute_force_S: window cache does not reach the spectrum");

  const double l0 = m0 > 0 ? std::log(m0) : 0.0;
  const double l1 = m1 > 0 ? std::log(m1) : 0.0;
  const cplx sum = tiled_sum<cplx>(model.kmax, 16, [&](std::size_t kb, std::size_t ke) {
    cplx acc = 0.0;
    for (std::size_t kk = kb; kk < ke; ++kk) {
      const int k = static_cast<int>(kk) + 1;
      const int jtop = (m1 == 0.0) ? 0 : k;
      for (int j = 0; j <= jtop; ++j) {
        const std::size_t idx = model.offset(k) + j;
        const double wgt = weights ? weights->w[idx] : 1.0;
        if (wgt == 0.0) continue;
        const double density =
            std::exp(model.log_c_at(k, j) + (k - j) * l0 + j * l1);
        acc += window.W(lambda - model.mu_at(k, j)) * wgt * density;
      }
    }
    return acc;
  });
  // k = 0 level: constant section, frequency exactly 0
  const double w00 = weights ? weights->w00 : 1.0;
  return sum + window.W(lambda) * w00 / kPi;
}

FixedPointDatum fixed_point_datum_at_pole(const RotationHamiltonian& ham,
                                          int which_period, cplx rho0) {
  validate(ham);
  if (which_period < 1)
    throw std::invalid_argument("fixed_point_datum_at_pole: which_period >= 1");
  if (ham.b == 0.0)
    throw std::domain_error(
        "fixed_point_datum_at_pole: constant Hamiltonian fixes all of the sphere "
        "(global loop), no isolated transverse datum exists");
  const double tau0 = 2.0 * kPi * which_period / ham.a;
  // return map at time -tau0 rotates the chart by +b*tau0 (sign pinned by the
  // ODE cross-check in contact_lift_phases: the chart coordinate rotates with
  // rate alpha1 - alpha0 = -b under the flow)
  const double beta = ham.b * tau0;
  if (std::abs(std::remainder(beta, 2.0 * kPi)) < 1e-9)
    throw std::domain_error(
        "fixed_point_datum_at_pole: resonant period, return map is the identity "
        "but the fixed locus is not all of the sphere");
  Eigen::Matrix2d A;
  A << std::cos(beta), -std::sin(beta), std::sin(beta), std::cos(beta);
  FixedPointDatum d;
  d.A = sym::make_symplectic(A);
  d.f0 = ham.a;
  d.rho0 = rho0;
  d.tau0 = tau0;
  d.dim_d = 1;
  return d;
}

ProfileScanResult profile_scan(const SpectralModel& model,
                               const FixedPointDatum& datum, double lambda,
                               const std::vector<VectorXd>& n_grid,
                               const Window& window,
                               const ToeplitzWeights* weights) {
  ProfileScanResult out;
  out.rows.reserve(n_grid.size());
  std::vector<std::pair<VectorXd, cplx>> brute_samples;
  brute_samples.reserve(n_grid.size());
  for (const VectorXd& n : n_grid) {
    ProfileSample row;
    row.n = n;
    row.brute = brute_force_S(model, heisenberg_displace(n, lambda), lambda, window,
                              weights);
    bool warned = false;
    row.predicted = prof::predicted_kernel(datum, lambda, n, 1.0, 2.0, &warned);
    out.rows.push_back(row);
    brute_samples.emplace_back(n, row.brute);
  }
  const prof::ParitySplit ps = prof::parity_split(brute_samples);
  out.even = ps.even;
  out.odd = ps.odd;
  return out;
}

std::vector<DecayRow> off_locus_scan(const SpectralModel& model, double r,
                                     const std::vector<double>& lambdas,
                                     const Window& window) {
  if (r < 0.05 || r > 20.0)
    throw std::invalid_argument("off_locus_scan: point too close to a pole");
  const ModelPoint p = point_at_chart(cplx(r, 0.0));
  std::vector<DecayRow> rows;
  rows.reserve(lambdas.size());
  for (double lam : lambdas)
    rows.push_back({lam, std::abs(brute_force_S(model, p, lam, window))});
  return rows;
}

}  // namespace loctrace::cp1

#include "loctrace/oscillatory.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace loctrace::osc {

namespace {

using loctrace::sym::MatrixXd;
using loctrace::sym::omega0;
using loctrace::sym::psi2;
using clock_type = std::chrono::steady_clock;

constexpr double kPi = std::numbers::pi;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

}  // namespace

cplx e_moment(int d, cplx c, double D) {
  if (d < 0) throw std::invalid_argument("e_moment: d must be >= 0");
  if (D <= 1.0) throw std::invalid_argument("e_moment: D must be > 1");
  if (std::abs(c) * D <= 4.0) {
    // sum_k c^k (D^{k+d+1} - D^{-(k+d+1)}) / (k! (k+d+1))
    cplx sum = 0.0, ck = 1.0;
    for (int k = 0; k < 80; ++k) {
      const double m = k + d + 1;
      const cplx term = ck * ((std::pow(D, m) - std::pow(D, -m)) / m);
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      ck *= c / double(k + 1);
    }
    return sum;
  }
  const cplx eD = std::exp(c * D), elo = std::exp(c / D);
  cplx E = (eD - elo) / c;
  double Dj = 1.0;
  for (int j = 1; j <= d; ++j) {
    Dj *= D;
    E = (Dj * eD - elo / Dj) / c - (double(j) / c) * E;
  }
  return E;
}

namespace {

struct Ctx {
  const FixedPointDatum* dt = nullptr;
  VectorXd n, v, upsf, Av;
  double lambda = 0, sqrtl = 0, D = 0, R = 0, f0 = 1;
  int d = 1;
  cplx psi2_nv, psi2_Avn;
  bool ups_zero = true;
  bool phase_free = false;
};

Ctx make_ctx(const FixedPointDatum& datum, const VectorXd& n, const VectorXd& v,
             double lambda, double D, double R, const VectorXd& upsf,
             bool phase_free) {
  Ctx c;
  c.dt = &datum;
  c.n = n;
  c.v = v;
  c.upsf = upsf.size() ? upsf : VectorXd::Zero(n.size()).eval();
  c.Av = datum.A.M * v;
  c.lambda = lambda;
  c.sqrtl = std::sqrt(lambda);
  c.D = D;
  c.R = R;
  c.f0 = datum.f0;
  c.d = datum.dim_d;
  c.psi2_nv = psi2(n, v);
  c.psi2_Avn = psi2(c.Av, n);
  c.ups_zero = c.upsf.norm() == 0.0;
  c.phase_free = phase_free;
  return c;
}

// t and u coefficients of Theta (amplitude exponents)
cplx p_coef(const Ctx& c, double theta) {
  const cplx p = c.psi2_nv - 0.5 * theta * theta;
  return c.phase_free ? cplx(p.real(), 0.0) : p;
}

cplx q_coef(const Ctx& c, double theta, double tau) {
  const double sq = theta + tau * c.f0;
  cplx q;
  if (c.ups_zero || tau == 0.0) {
    q = c.psi2_Avn - 0.5 * sq * sq;
  } else {
    q = psi2(c.Av - tau * c.upsf, c.n) - 0.5 * sq * sq +
        cplx(0, 1) * tau * omega0(c.upsf, c.Av);
  }
  return c.phase_free ? cplx(q.real(), 0.0) : q;
}

// Effective truncation radii: the integrand envelope decays like
// exp(-theta^2/(2D)) (and the analogous sigma/tau Gaussians); beyond
// sqrt(90 D) it is below e^{-45} of its peak, so the requested box can be
// intersected with that bound without touching the reported precision.
double theta_box(const Ctx& c) { return std::min(c.R, std::sqrt(90.0 * c.D)); }
double sigma_box(const Ctx& c) {
  return std::min(c.R * (1.0 + c.f0), std::sqrt(90.0 * c.D));
}
double tau_box(const Ctx& c) {
  return std::min(c.R, 2.0 * std::sqrt(90.0 * c.D) / c.f0);
}

struct Nodes {
  int n_theta = 0, n_tau = 0, n_sigma = 0, n_tu = 0;
};

// >= 10 nodes per oscillation period across the axis, bounded below by the
// requested minimum
int osc_nodes(int min_nodes, double freq, double halfwidth, int cap) {
  const double phase = freq * 2.0 * halfwidth;
  const int need = static_cast<int>(std::ceil(10.0 * phase / (2.0 * kPi))) + 8;
  return std::min(cap, std::max(min_nodes, need));
}

Nodes plan_nodes(const Ctx& c, int min_nodes, Engine e) {
  Nodes N;
  const double fr_th = c.phase_free ? 0.0 : c.sqrtl * (c.D + 1.0 / c.f0);
  const double fr_ta = c.phase_free ? 0.0 : c.sqrtl * (c.D * c.f0 + 1.0);
  switch (e) {
    case Engine::Separable:
      N.n_theta = osc_nodes(min_nodes, fr_th, theta_box(c), 1 << 20);
      N.n_sigma = osc_nodes(min_nodes, fr_th, sigma_box(c), 1 << 20);
      break;
    case Engine::Factored:
      N.n_theta = osc_nodes(min_nodes, fr_th, theta_box(c), 1 << 16);
      N.n_tau = osc_nodes(min_nodes, fr_ta, tau_box(c), 1 << 16);
      break;
    case Engine::Tensor: {
      N.n_theta = osc_nodes(min_nodes, fr_th, c.R, 4096);
      N.n_tau = osc_nodes(min_nodes, fr_ta, c.R, 4096);
      const double fr_tu =
          c.phase_free ? 0.0 : c.sqrtl * c.R * (1.0 + c.f0);  // worst of t,u axes
      N.n_tu = osc_nodes(std::max(min_nodes, 48), fr_tu, 0.5 * (c.D - 1.0 / c.D), 4096);
      break;
    }
    case Engine::Auto:
      throw std::logic_error("plan_nodes: unresolved engine");
  }
  return N;
}

Nodes doubled(const Nodes& N) {
  Nodes M;
  M.n_theta = N.n_theta ? 2 * N.n_theta : 0;
  M.n_tau = N.n_tau ? 2 * N.n_tau : 0;
  M.n_sigma = N.n_sigma ? 2 * N.n_sigma : 0;
  M.n_tu = N.n_tu ? 2 * N.n_tu : 0;
  return M;
}

cplx eval_separable(const Ctx& c, const Nodes& N) {
  const double Rth = theta_box(c), Rsg = sigma_box(c);
  const QuadRule glt = gauss_legendre(N.n_theta, -Rth, Rth);
  const QuadRule gls = gauss_legendre(N.n_sigma, -Rsg, Rsg);
  const double over_f = c.sqrtl / c.f0;
  const cplx Ith = tiled_sum<cplx>(glt.size(), 1024, [&](std::size_t b, std::size_t e) {
    cplx s = 0.0;
    for (std::size_t k = b; k < e; ++k) {
      const double th = glt.x[k];
      const cplx arg =
          p_coef(c, th) - cplx(0.0, c.phase_free ? 0.0 : c.sqrtl * th);
      const cplx ph = c.phase_free ? cplx(1.0, 0.0)
                                   : std::exp(cplx(0.0, over_f * th));
      s += glt.w[k] * ph * e_moment(c.d, arg, c.D);
    }
    return s;
  });
  const cplx Isg = tiled_sum<cplx>(gls.size(), 1024, [&](std::size_t b, std::size_t e) {
    cplx s = 0.0;
    for (std::size_t k = b; k < e; ++k) {
      const double sg = gls.x[k];
      cplx q = c.psi2_Avn - 0.5 * sg * sg;
      if (c.phase_free) q = cplx(q.real(), 0.0);
      const cplx arg = q + cplx(0.0, c.phase_free ? 0.0 : c.sqrtl * sg);
      const cplx ph = c.phase_free ? cplx(1.0, 0.0)
                                   : std::exp(cplx(0.0, -over_f * sg));
      s += gls.w[k] * ph * e_moment(c.d, arg, c.D);
    }
    return s;
  });
  return Ith * Isg / c.f0;
}

cplx eval_factored(const Ctx& c, const Nodes& N) {
  const double Rth = theta_box(c), Rta = tau_box(c);
  const QuadRule glt = gauss_legendre(N.n_theta, -Rth, Rth);
  const QuadRule gla = gauss_legendre(N.n_tau, -Rta, Rta);
  std::vector<cplx> wphase(gla.size());
  for (std::size_t ia = 0; ia < gla.size(); ++ia)
    wphase[ia] = gla.w[ia] * (c.phase_free
                                  ? cplx(1.0, 0.0)
                                  : std::exp(cplx(0.0, -c.sqrtl * gla.x[ia])));
  return tiled_sum<cplx>(glt.size(), 1, [&](std::size_t b, std::size_t e) {
    cplx acc = 0.0;
    for (std::size_t it = b; it < e; ++it) {
      const double th = glt.x[it];
      const cplx Eth = e_moment(
          c.d, p_coef(c, th) - cplx(0.0, c.phase_free ? 0.0 : c.sqrtl * th), c.D);
      cplx row = 0.0;
      for (std::size_t ia = 0; ia < gla.size(); ++ia) {
        const double ta = gla.x[ia];
        const cplx q = q_coef(c, th, ta);
        const double im = c.phase_free ? 0.0 : c.sqrtl * (th + ta * c.f0);
        row += wphase[ia] * e_moment(c.d, q + cplx(0.0, im), c.D);
      }
      acc += glt.w[it] * Eth * row;
    }
    return acc;
  });
}

cplx eval_tensor(const Ctx& c, const Nodes& N) {
  // the literal tensor Gauss-Legendre sum over (theta, tau, t, u), evaluated
  // by exact reassociation (contract over t, then u); bit-for-bit a
  // reordering of the quadruple loop
  const QuadRule glt = gauss_legendre(N.n_theta, -c.R, c.R);
  const QuadRule gla = gauss_legendre(N.n_tau, -c.R, c.R);
  const QuadRule gtu = gauss_legendre(N.n_tu, 1.0 / c.D, c.D);
  std::vector<double> sw(gtu.size());
  for (std::size_t k = 0; k < gtu.size(); ++k)
    sw[k] = gtu.w[k] * std::pow(gtu.x[k], c.d);
  std::vector<cplx> wphase(gla.size());
  for (std::size_t ia = 0; ia < gla.size(); ++ia)
    wphase[ia] = gla.w[ia] * (c.phase_free
                                  ? cplx(1.0, 0.0)
                                  : std::exp(cplx(0.0, -c.sqrtl * gla.x[ia])));
  return tiled_sum<cplx>(glt.size(), 1, [&](std::size_t b, std::size_t e) {
    cplx acc = 0.0;
    for (std::size_t it = b; it < e; ++it) {
      const double th = glt.x[it];
      const cplx p =
          p_coef(c, th) - cplx(0.0, c.phase_free ? 0.0 : c.sqrtl * th);
      cplx P = 0.0;
      for (std::size_t k = 0; k < gtu.size(); ++k)
        P += sw[k] * std::exp(p * gtu.x[k]);
      cplx row = 0.0;
      for (std::size_t ia = 0; ia < gla.size(); ++ia) {
        const double ta = gla.x[ia];
        const double im = c.phase_free ? 0.0 : c.sqrtl * (th + ta * c.f0);
        const cplx q = q_coef(c, th, ta) + cplx(0.0, im);
        cplx U = 0.0;
        for (std::size_t k = 0; k < gtu.size(); ++k)
          U += sw[k] * std::exp(q * gtu.x[k]);
        row += wphase[ia] * U;
      }
      acc += glt.w[it] * P * row;
    }
    return acc;
  });
}

cplx dispatch(const Ctx& c, const Nodes& N, Engine e) {
  switch (e) {
    case Engine::Separable:
      return eval_separable(c, N);
    case Engine::Factored:
      return eval_factored(c, N);
    case Engine::Tensor:
      return eval_tensor(c, N);
    case Engine::Auto:
      break;
  }
  throw std::logic_error("dispatch: unresolved engine");
}

cplx prefactor(const FixedPointDatum& dt, double lambda, bool phase_free) {
  const int d = dt.dim_d;
  cplx pf = dt.rho0 / (2.0 * std::pow(kPi, d)) * std::pow(lambda / kPi, 1 + d);
  if (!phase_free) pf *= std::exp(cplx(0.0, -lambda * dt.tau0));
  return pf;
}

struct Resolved {
  double D = 0, R = 0, a = 0;
};

Resolved resolve(const FixedPointDatum& dt, const QuadratureSpec& spec,
                 const VectorXd& upsf) {
  if (spec.nodes_per_axis < 16)
    throw std::invalid_argument("QuadratureSpec: nodes_per_axis must be >= 16");
  if (spec.lambda <= 0) throw std::invalid_argument("QuadratureSpec: lambda > 0");
  Resolved r;
  r.D = spec.D > 0 ? spec.D : 6.0 / dt.f0;
  if (r.D <= 1.0) throw std::invalid_argument("QuadratureSpec: D must be > 1");
  if (spec.box_radius_thetatau > 0) {
    r.R = spec.box_radius_thetatau;
  } else {
    // default box: |theta|,|tau| <= 8/sqrt(a), where a is the damping
    // constant; the integrand beyond the box is below e^{-64} of its peak
    r.a = prof::damping_bound(dt, r.D, upsf);
    r.R = 8.0 / std::sqrt(r.a);
  }
  return r;
}

Engine resolve_engine(Engine e, const Ctx& c) {
  if (e == Engine::Auto) return c.ups_zero ? Engine::Separable : Engine::Factored;
  if (e == Engine::Separable && !c.ups_zero)
    throw std::invalid_argument("Separable engine requires upsf = 0");
  return e;
}

IntegralResult run_inner(const FixedPointDatum& datum, const VectorXd& n,
                         const VectorXd& v, const QuadratureSpec& spec,
                         const VectorXd& upsf, Engine engine, bool phase_free) {
  const auto t0 = clock_type::now();
  if (spec.lambda < 25.0)
    throw std::invalid_argument("inner_integral: lambda must be >= 25");
  const Resolved res = resolve(datum, spec, upsf);
  Ctx c = make_ctx(datum, n, v, spec.lambda, res.D, res.R, upsf, phase_free);
  const Engine e = resolve_engine(engine, c);
  const Nodes N1 = plan_nodes(c, spec.nodes_per_axis, e);
  const cplx v1 = dispatch(c, N1, e);
  const cplx v2 = dispatch(c, doubled(N1), e);
  const cplx pf = prefactor(datum, spec.lambda, phase_free);
  IntegralResult r;
  r.value = pf * v2;
  r.est_error = std::abs(pf) * std::abs(v2 - v1);
  const double scale = std::max(std::abs(r.value), 1e-13 * std::abs(pf));
  r.converged = r.est_error <= 0.10 * scale;
  r.wall_time = seconds_since(t0);
  return r;
}

}  // namespace

IntegralResult inner_integral(const FixedPointDatum& datum, const VectorXd& n,
                              const VectorXd& v, const QuadratureSpec& spec,
                              const VectorXd& upsf, Engine engine) {
  return run_inner(datum, n, v, spec, upsf, engine, false);
}

IntegralResult inner_integral_phase_free(const FixedPointDatum& datum,
                                         const VectorXd& n, const VectorXd& v,
                                         const QuadratureSpec& spec,
                                         const VectorXd& upsf, Engine engine) {
  return run_inner(datum, n, v, spec, upsf, engine, true);
}

IntegralResult full_profile_integral(const FixedPointDatum& datum, const VectorXd& n,
                                     const QuadratureSpec& spec, const VectorXd& upsf,
                                     Engine engine) {
  const auto t0 = clock_type::now();
  if (spec.lambda < 25.0)
    throw std::invalid_argument("full_profile_integral: lambda must be >= 25");
  if (spec.hermite_order < 4)
    throw std::invalid_argument("full_profile_integral: hermite_order too small");
  const Resolved res = resolve(datum, spec, upsf);
  const int twod = 2 * datum.A.d;

  // Gauss-Hermite frame adapted to the v-damping of Re Theta at the
  // stationary (t,u) = (1/f0,1/f0): Hessian_v = Q_A/f0, center at the
  // minimizer of |v-n|^2 + |Av-n|^2
  const MatrixXd Q = sym::q_of(datum.A);
  Eigen::SelfAdjointEigenSolver<MatrixXd> qes(Q);
  const MatrixXd T = std::sqrt(2.0 * datum.f0) * qes.operatorInverseSqrt();
  const double detT = std::pow(std::sqrt(2.0 * datum.f0), twod) /
                      std::sqrt(qes.eigenvalues().prod());
  const VectorXd vstar =
      Q.ldlt().solve(n + datum.A.M.transpose() * n);

  Ctx c0 = make_ctx(datum, n, vstar, spec.lambda, res.D, res.R, upsf, false);
  const Engine e = resolve_engine(engine, c0);
  const Nodes N1 = plan_nodes(c0, spec.nodes_per_axis, e);
  const cplx pf = prefactor(datum, spec.lambda, false);

  auto run = [&](int gh_order, const Nodes& N) -> cplx {
    const QuadRule gh = gauss_hermite(gh_order);
    std::size_t total = 1;
    for (int a = 0; a < twod; ++a) total *= gh.size();
    const cplx s = tiled_sum<cplx>(total, gh.size(), [&](std::size_t b, std::size_t en) {
      cplx acc = 0.0;
      VectorXd x(twod);
      for (std::size_t idx = b; idx < en; ++idx) {
        std::size_t rem = idx;
        double wgt = 1.0, x2 = 0.0;
        for (int a = 0; a < twod; ++a) {
          const std::size_t ia = rem % gh.size();
          rem /= gh.size();
          x(a) = gh.x[ia];
          wgt *= gh.w[ia];
          x2 += x(a) * x(a);
        }
        const VectorXd v = vstar + T * x;
        Ctx cv = make_ctx(datum, n, v, spec.lambda, res.D, res.R, upsf, false);
        acc += wgt * std::exp(x2) * dispatch(cv, N, e);
      }
      return acc;
    });
    return pf * detT * s;
  };

  const cplx I1 = run(spec.hermite_order, N1);
  const cplx I2 = run(2 * spec.hermite_order, doubled(N1));
  IntegralResult r;
  r.value = I2;
  r.est_error = std::abs(I2 - I1);
  const double scale = std::max(std::abs(r.value), 1e-13 * std::abs(pf));
  r.converged = r.est_error <= 0.10 * scale;
  r.wall_time = seconds_since(t0);
  return r;
}

cplx stationary_reduce(const FixedPointDatum& datum, double lambda,
                       const VectorXd& n, const VectorXd& v) {
  if (lambda <= 0) throw std::invalid_argument("stationary_reduce: lambda > 0");
  const int d = datum.dim_d;
  const VectorXd Av = datum.A.M * v;
  const cplx expo = (psi2(n, v) + psi2(Av, n)) / datum.f0;
  return 2.0 * kPi * datum.rho0 / std::pow(kPi, d) *
         std::pow(lambda / kPi, d) * std::exp(cplx(0.0, -lambda * datum.tau0)) *
         std::pow(datum.f0, -(2 * d + 1)) * std::exp(expo);
}

cplx stationary_reduce_v_integrated(const FixedPointDatum& datum, double lambda,
                                    const VectorXd& n) {
  const int d = datum.dim_d;
  const double f = datum.f0;
  const MatrixXd Q = sym::q_of(datum.A);
  const MatrixXd F = sym::f_of(datum.A);
  const MatrixXd G = sym::g_of(datum.A);
  const MatrixXd Sigma = Q / f;
  const Eigen::LDLT<MatrixXd> Sf(Sigma);
  const VectorXd bR = -(G * n) / f;
  const VectorXd bI = (F * n) / f;
  const VectorXd SinvbR = Sf.solve(bR);
  const cplx shift =
      std::exp(cplx(0.5 * bR.dot(SinvbR), bI.dot(SinvbR)));
  const cplx gauss = prof::gaussian_integral_closed(Sigma, bI);
  const cplx expo = psi2(datum.A.M * n, n) / f;
  return 2.0 * kPi * datum.rho0 / std::pow(kPi, d) * std::pow(lambda / kPi, d) *
         std::exp(cplx(0.0, -lambda * datum.tau0)) *
         std::pow(f, -(2 * d + 1)) * std::exp(expo) * shift * gauss;
}

}  // namespace loctrace::osc

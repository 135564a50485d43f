#include "loctrace/profile.hpp"

#include <cmath>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace loctrace::prof {

using loctrace::sym::J0;
using loctrace::sym::omega0;
using loctrace::sym::psi2;

double upsilon(const PhasePoint& p, double f0) {
  return p.theta * (p.u - p.t) + p.tau * (p.u * f0 - 1.0);
}

cplx theta_fn(const PhasePoint& p, const VectorXd& n, const VectorXd& v,
              const FixedPointDatum& datum, const VectorXd& upsf) {
  const double f0 = datum.f0;
  const VectorXd Av = datum.A.M * v;
  const double sq = p.theta + p.tau * f0;
  return -0.5 * p.t * p.theta * p.theta - 0.5 * p.u * sq * sq +
         p.t * psi2(n, v) + p.u * psi2(Av - p.tau * upsf, n) +
         cplx(0, 1) * p.u * p.tau * omega0(upsf, Av);
}

double re_theta_direct(const PhasePoint& p, const VectorXd& n, const VectorXd& v,
                       const FixedPointDatum& datum, const VectorXd& upsf) {
  const double f0 = datum.f0;
  const double sq = p.theta + p.tau * f0;
  const VectorXd Av = datum.A.M * v;
  return -0.5 * p.u * sq * sq - 0.5 * p.t * p.theta * p.theta -
         0.5 * p.t * (n - v).squaredNorm() -
         0.5 * p.u * (Av - p.tau * upsf - n).squaredNorm();
}

double damping_bound(const FixedPointDatum& datum, double D, const VectorXd& upsf) {
  if (D <= 1.0) throw std::invalid_argument("damping_bound: D must be > 1");
  if (datum.f0 <= 0) throw std::invalid_argument("damping_bound: f0 must be > 0");
  const auto rep = sym::cleanliness(datum.A);
  if (!rep.very_clean)
    throw std::domain_error("damping_bound: datum is not very clean");

  const int twod = 2 * datum.A.d;
  const sym::Subspace N = sym::image_subspace(datum.A);
  const int r = N.dim;
  const int m = 2 + 2 * r;  // (theta, tau, n~, v~)

  // -Re Theta = z^t M(t,u) z with four rank-structured pieces
  Eigen::RowVectorXd r1 = Eigen::RowVectorXd::Zero(m);
  r1(0) = 1.0;
  Eigen::RowVectorXd r2 = Eigen::RowVectorXd::Zero(m);
  r2(0) = 1.0;
  r2(1) = datum.f0;
  MatrixXd R3 = MatrixXd::Zero(twod, m);  // n - v
  MatrixXd R4 = MatrixXd::Zero(twod, m);  // Av - tau upsf - n
  if (r > 0) {
    R3.block(0, 2, twod, r) = N.basis;
    R3.block(0, 2 + r, twod, r) = -N.basis;
    R4.block(0, 2, twod, r) = -N.basis;
    R4.block(0, 2 + r, twod, r) = datum.A.M * N.basis;
  }
  R4.col(1) = -upsf;

  const MatrixXd M1 = r1.transpose() * r1;
  const MatrixXd M2 = r2.transpose() * r2;
  const MatrixXd M3 = R3.transpose() * R3;
  const MatrixXd M4 = R4.transpose() * R4;

  const int ngrid = 17;
  double a = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> tu;
  for (int i = 0; i < ngrid; ++i)
    for (int j = 0; j < ngrid; ++j) {
      const double t = (1.0 / D) * std::pow(D * D, i / double(ngrid - 1));
      const double u = (1.0 / D) * std::pow(D * D, j / double(ngrid - 1));
      tu.emplace_back(t, u);
    }
  for (const auto& [t, u] : tu) {
    const MatrixXd M = 0.5 * (t * M1 + u * M2 + t * M3 + u * M4);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
    a = std::min(a, es.eigenvalues().minCoeff());
  }

  // sphere-sampling validation of the same bound
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = -std::numeric_limits<double>::infinity();
  VectorXd worst_z;
  double worst_t = 0, worst_u = 0;
  for (int s = 0; s < 2000; ++s) {
    VectorXd z(m);
    for (int i = 0; i < m; ++i) z(i) = gauss(rng);
    z.normalize();
    for (const auto& [t, u] : {tu.front(), tu.back(), tu[tu.size() / 2]}) {
      const PhasePoint p{z(0), t, u, z(1)};
      VectorXd n = VectorXd::Zero(twod), v = VectorXd::Zero(twod);
      if (r > 0) {
        n = N.basis * z.segment(2, r);
        v = N.basis * z.segment(2 + r, r);
      }
      const double ratio = re_theta_direct(p, n, v, datum, upsf);  // /1 on sphere
      if (ratio > worst) {
        worst = ratio;
        worst_z = z;
        worst_t = t;
        worst_u = u;
      }
    }
  }
  if (worst >= 0.0) {
    std::ostringstream os;
    os << "damping_bound: Re Theta ratio " << worst << " >= 0 at t=" << worst_t
       << " u=" << worst_u << " (datum not very clean or D too large)";
    throw std::domain_error(os.str());
  }
  if (a <= 0.0) throw std::domain_error("damping_bound: estimated a <= 0");
  return a;
}

PhasePoint stationary_point(double f0) {
  if (f0 <= 0) throw std::invalid_argument("stationary_point: f0 must be > 0");
  return PhasePoint{0.0, 1.0 / f0, 1.0 / f0, 0.0};
}

Matrix4d upsilon_hessian(double f0) {
  Matrix4d H;
  // order (theta, t, u, tau)
  H << 0, -1, 1, 0,
      -1, 0, 0, 0,
       1, 0, 0, f0,
       0, 0, f0, 0;
  return H;
}

Matrix4d upsilon_hessian_inverse(double f0) {
  Matrix4d Hi;
  Hi << 0, -f0, 0, 0,
      -f0, 0, 0, 1,
       0, 0, 0, 1,
       0, 1, 1, 0;
  return Hi / f0;
}

cplx sqrt_hessian_factor(double f0, double lambda) {
  if (lambda <= 0) throw std::invalid_argument("sqrt_hessian_factor: lambda > 0");
  // vanishing signature: the i-powers cancel and the branch is positive real
  const double twopi = 2.0 * std::numbers::pi;
  return cplx(lambda * f0 / (twopi * twopi), 0.0);
}

cplx gamma_shift(const SymplecticMatrix& A, const VectorXd& nprime) {
  const MatrixXd Q = sym::q_of(A);
  const Eigen::LDLT<MatrixXd> Qf(Q);
  const MatrixXd F = sym::f_of(A);
  const MatrixXd G = sym::g_of(A);
  const VectorXd QinvF_n = Qf.solve(F * nprime);
  const VectorXd QinvG_n = Qf.solve(G * nprime);
  const double first = nprime.dot(G.transpose() * QinvF_n);
  const double second = nprime.dot(G.transpose() * QinvG_n);
  return cplx(0, -1) * first + 0.5 * second;
}

cplx gaussian_integral_closed(const MatrixXd& Q, const VectorXd& xi) {
  if (Q.rows() != Q.cols() || Q.rows() != xi.size())
    throw std::invalid_argument("gaussian_integral_closed: dimension mismatch");
  const MatrixXd Qs = 0.5 * (Q + Q.transpose());
  if ((Q - Qs).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + Qs.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("gaussian_integral_closed: Q not symmetric");
  Eigen::LLT<MatrixXd> llt(Qs);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("gaussian_integral_closed: Q not positive definite");
  const int m = static_cast<int>(Q.rows());
  double logdet = 0.0;
  for (int i = 0; i < m; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  const double quad = xi.dot(llt.solve(xi));
  const double val = std::pow(2.0 * std::numbers::pi, 0.5 * m) *
                     std::exp(-0.5 * logdet) * std::exp(-0.5 * quad);
  return cplx(val, 0.0);
}

double exponent_identity_check(const SymplecticMatrix& A, const VectorXd& n,
                               double f0) {
  if (f0 <= 0) throw std::invalid_argument("exponent_identity_check: f0 > 0");
  const VectorXd np = n / std::sqrt(f0);
  const MatrixXd Q = sym::q_of(A);
  const Eigen::LDLT<MatrixXd> Qf(Q);
  const MatrixXd F = sym::f_of(A);
  const VectorXd Fn = F * np;
  const cplx lhs = psi2(A.M * np, np) + gamma_shift(A, np) - 0.5 * Fn.dot(Qf.solve(Fn));
  const cplx rhs = sym::psi2_A(A, n) / f0;
  return std::abs(lhs - rhs);
}

LeadingProfile leading_profile(const FixedPointDatum& datum) {
  const int d = datum.dim_d;
  const MatrixXd Q = sym::q_of(datum.A);
  const MatrixXd L = Eigen::LLT<MatrixXd>(Q).matrixL();
  const double sqrt_detQ = L.diagonal().prod();
  LeadingProfile lp;
  lp.coefficient = datum.rho0 * 2.0 * std::numbers::pi /
                   std::pow(datum.f0, d + 1) * std::pow(2.0, d) / sqrt_detQ;
  lp.profile.M = sym::profile_matrix(datum.A).M / datum.f0;
  return lp;
}

cplx predicted_kernel(const FixedPointDatum& datum, double lambda, const VectorXd& n,
                      cplx chi_at_tau0, double window_C, bool* window_warned) {
  if (lambda <= 0) throw std::invalid_argument("predicted_kernel: lambda > 0");
  if (n.norm() > window_C * std::pow(lambda, 1.0 / 9.0)) {
    if (window_warned)
      *window_warned = true;
    else
      std::cerr << "predicted_kernel: |n| = " << n.norm()
                << " outside validity window C*lambda^(1/9)\n";
  }
  const LeadingProfile lp = leading_profile(datum);
  const Eigen::VectorXcd nc = n.cast<cplx>();
  const cplx expo = nc.transpose() * lp.profile.M * nc;
  const cplx phase = std::exp(cplx(0, -lambda * datum.tau0));
  return lp.coefficient * phase * std::exp(expo) * chi_at_tau0 *
         std::pow(lambda / std::numbers::pi, datum.dim_d);
}

ParitySplit parity_split(const std::vector<std::pair<VectorXd, cplx>>& samples) {
  struct VecLess {
    bool operator()(const std::vector<double>& a, const std::vector<double>& b) const {
      return a < b;
    }
  };
  std::map<std::vector<double>, std::size_t, VecLess> index;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const VectorXd& n = samples[i].first;
    index.emplace(std::vector<double>(n.data(), n.data() + n.size()), i);
  }
  ParitySplit out;
  out.even.resize(samples.size());
  out.odd.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const VectorXd neg = -samples[i].first;
    auto it = index.find(std::vector<double>(neg.data(), neg.data() + neg.size()));
    if (it == index.end())
      throw std::invalid_argument("parity_split: sample set not closed under n -> -n");
    const cplx s = samples[i].second, sm = samples[it->second].second;
    out.even[i] = 0.5 * (s + sm);
    out.odd[i] = 0.5 * (s - sm);
  }
  return out;
}

}  // namespace loctrace::prof

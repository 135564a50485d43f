#include "loctrace/report.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "loctrace/cp1.hpp"
#include "loctrace/oscillatory.hpp"

namespace loctrace::rep {

namespace {

using Eigen::Matrix4d;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

// decorrelates suite/sample indices from the base seed (splitmix-style)
std::uint64_t sub_seed(std::uint64_t base, std::uint64_t suite, std::uint64_t a,
                       std::uint64_t b = 0) {
  std::uint64_t x = base + 0x9E3779B97F4A7C15ULL * (suite + 1) +
                    0xBF58476D1CE4E5B9ULL * (a + 1) + 0x94D049BB133111EBULL * (b + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::string pad(int v, int width) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%0*d", width, v);
  return buf;
}

VectorXd gaussian_vector(std::mt19937_64& rng, int m, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  VectorXd v(m);
  for (int i = 0; i < m; ++i) v(i) = scale * g(rng);
  return v;
}

double max_abs(const MatrixXcd& M) { return M.cwiseAbs().maxCoeff(); }

}  // namespace

std::string fp17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("loglog_slope: need >= 2 matched points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0 || y[i] <= 0)
      throw std::invalid_argument("loglog_slope: points must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = double(x.size());
  const double denom = n * sxx - sx * sx;
  if (denom <= 0) throw std::invalid_argument("loglog_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

std::vector<double> parse_grid(const std::string& text) {
  double a = 0, b = 0;
  int n = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d%c", &a, &b, &n, &tail) != 3)
    throw std::invalid_argument("grid spec must be a:b:n, got '" + text + "'");
  if (n < 1) throw std::invalid_argument("grid spec: n >= 1");
  if (a <= 0) throw std::invalid_argument("grid spec: endpoints must be positive");
  if (n == 1) return {a};
  if (b <= a) throw std::invalid_argument("grid spec: need b > a for n >= 2");
  std::vector<double> out;
  out.reserve(n);
  for (int i = 0; i < n - 1; ++i)
    out.push_back(a * std::pow(b / a, double(i) / double(n - 1)));
  out.push_back(b);
  return out;
}

ReportRow& Report::add_check(const std::string& id, const std::string& inputs,
                             cplx measured, cplx reference, double tolerance) {
  ReportRow r;
  r.id = id;
  r.inputs = inputs;
  r.measured = measured;
  r.reference = reference;
  r.deviation = std::abs(measured - reference);
  r.tolerance = tolerance;
  r.pass = r.deviation <= tolerance;
  rows.push_back(std::move(r));
  return rows.back();
}

ReportRow& Report::add_signed(const std::string& id, const std::string& inputs,
                              cplx measured, cplx reference, double deviation,
                              double bound, bool strict) {
  ReportRow r;
  r.id = id;
  r.inputs = inputs;
  r.measured = measured;
  r.reference = reference;
  r.deviation = deviation;
  r.tolerance = bound;
  r.strict = strict;
  r.pass = strict ? (deviation < bound) : (deviation <= bound);
  rows.push_back(std::move(r));
  return rows.back();
}

bool Report::all_pass() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const ReportRow& r) { return r.pass; });
}

double Report::max_deviation() const {
  double m = 0;
  for (const ReportRow& r : rows) m = std::max(m, r.deviation);
  return m;
}

void Report::sort_rows() {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ReportRow& a, const ReportRow& b) { return a.id < b.id; });
}

std::string csv_text(const Report& report) {
  std::string out =
      "id,inputs,measured_re,measured_im,reference_re,reference_im,deviation,"
      "tolerance,pass\n";
  for (const ReportRow& r : report.rows) {
    if (r.id.find(',') != std::string::npos ||
        r.inputs.find(',') != std::string::npos)
      throw std::logic_error("csv cells must be comma-free: " + r.id);
    out += r.id;
    out += ',';
    out += r.inputs;
    out += ',';
    out += fp17(r.measured.real());
    out += ',';
    out += fp17(r.measured.imag());
    out += ',';
    out += fp17(r.reference.real());
    out += ',';
    out += fp17(r.reference.imag());
    out += ',';
    out += fp17(r.deviation);
    out += ',';
    out += fp17(r.tolerance);
    out += ',';
    out += r.pass ? '1' : '0';
    out += '\n';
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("short write: " + path);
}

json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return json::parse(f);  // parse errors carry byte/line diagnostics
}

json summary_json(const Report& report, const json& config_echo) {
  json j;
  j["command"] = report.command;
  j["version"] = 1;
  j["rows"] = report.rows.size();
  std::size_t passed = 0;
  json failing = json::array();
  for (const ReportRow& r : report.rows) {
    if (r.pass)
      ++passed;
    else
      failing.push_back(r.id);
  }
  j["passed"] = passed;
  j["failed"] = report.rows.size() - passed;
  j["overall_pass"] = report.all_pass();
  j["failing"] = failing;
  j["max_deviation"] = report.max_deviation();
  j["wall_time_seconds"] = report.wall_time;
  j["config"] = config_echo;
  j["extra"] = report.extra;
  return j;
}

json merge_summaries(const std::vector<json>& summaries) {
  json j;
  j["version"] = 1;
  j["commands"] = json::array();
  bool all = true;
  std::size_t passed = 0;
  for (const json& s : summaries) {
    const bool ok = s.value("overall_pass", false);
    all = all && ok;
    if (ok) ++passed;
    j["commands"].push_back(s);
  }
  j["commands_total"] = summaries.size();
  j["commands_passed"] = passed;
  j["overall_pass"] = all && !summaries.empty();
  return j;
}

namespace {

// single source of truth for the config schema: loader, validator and echo
// all walk this list
template <class C, class V>
void for_each_field(C& c, V&& v) {
  v("version", c.version);
  v("seed", c.seed);
  v("tol_scale", c.tol_scale);
  v("threads", c.threads);
  v("dims", c.dims);
  v("samples_identity", c.samples_identity);
  v("samples_unitary", c.samples_unitary);
  v("vectors_per_sample", c.vectors_per_sample);
  v("samples_negdef", c.samples_negdef);
  v("samples_exponent", c.samples_exponent);
  v("samples_gaussian", c.samples_gaussian);
  v("spread", c.spread);
  v("tol_identity", c.tol_identity);
  v("tol_unitary", c.tol_unitary);
  v("tol_fidentity", c.tol_fidentity);
  v("tol_exponent", c.tol_exponent);
  v("tol_gaussian", c.tol_gaussian);
  v("f0_grid", c.f0_grid);
  v("tol_grad", c.tol_grad);
  v("tol_hess", c.tol_hess);
  v("tol_det", c.tol_det);
  v("tol_inverse", c.tol_inverse);
  v("lambda_grid", c.lambda_grid);
  v("osc_ratio_tol", c.osc_ratio_tol);
  v("slope_center", c.slope_center);
  v("slope_halfwidth", c.slope_halfwidth);
  v("nodes_per_axis", c.nodes_per_axis);
  v("hermite_order", c.hermite_order);
  v("box_D", c.box_D);
  v("box_radius", c.box_radius);
  v("ham_a", c.ham_a);
  v("ham_b", c.ham_b);
  v("which_period", c.which_period);
  v("window_eps", c.window_eps);
  v("cp1_lambda", c.cp1_lambda);
  v("cp1_ratio_tol", c.cp1_ratio_tol);
  v("width_tol", c.width_tol);
  v("toeplitz_tol", c.toeplitz_tol);
  v("g_at_pole", c.g_at_pole);
  v("g_slope", c.g_slope);
  v("n_max", c.n_max);
  v("n_count", c.n_count);
  v("parity_tol", c.parity_tol);
  v("parity_lambda_low", c.parity_lambda_low);
  v("tol_dimension", c.tol_dimension);
  v("decay_b", c.decay_b);
  v("decay_r", c.decay_r);
  v("decay_lambda_grid", c.decay_lambda_grid);
  v("decay_slope_max", c.decay_slope_max);
  v("decay_stability_tol", c.decay_stability_tol);
  v("negative_lambda", c.negative_lambda);
  v("negative_eps", c.negative_eps);
  v("negative_tol", c.negative_tol);
  v("negative_points", c.negative_points);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("config: " + what);
}

void require_increasing(const std::vector<double>& g, const std::string& name) {
  require(!g.empty(), name + " must be nonempty");
  for (std::size_t i = 0; i < g.size(); ++i) {
    require(g[i] > 0, name + " entries must be positive");
    if (i) require(g[i] > g[i - 1], name + " must be strictly increasing");
  }
}

}  // namespace

RunConfig load_config(const std::string& path) {
  const json j = load_json_file(path);
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  RunConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool matched = false;
    for_each_field(c, [&](const char* name, auto& field) {
      if (matched || it.key() != name) return;
      try {
        field = it.value().template get<std::decay_t<decltype(field)>>();
      } catch (const json::exception& e) {
        throw std::invalid_argument("config key '" + it.key() + "': " + e.what());
      }
      matched = true;
    });
    if (!matched)
      throw std::invalid_argument("config: unknown key '" + it.key() + "'");
  }
  validate(c);
  return c;
}

void validate(const RunConfig& c) {
  require(c.version == 1, "unsupported version (expected 1)");
  require(c.tol_scale > 0, "tol_scale must be > 0");
  require(c.threads >= 0, "threads must be >= 0");
  require(!c.dims.empty(), "dims must be nonempty");
  for (int d : c.dims) require(d >= 1 && d <= 8, "dims entries must be in [1,8]");
  require(c.samples_identity >= 1 && c.samples_unitary >= 1 &&
              c.vectors_per_sample >= 1 && c.samples_negdef >= 1 &&
              c.samples_exponent >= 1 && c.samples_gaussian >= 1,
          "sample counts must be >= 1");
  require(c.spread > 0, "spread must be > 0");
  for (double t : {c.tol_identity, c.tol_unitary, c.tol_fidentity, c.tol_exponent,
                   c.tol_gaussian, c.tol_grad, c.tol_hess, c.tol_det, c.tol_inverse,
                   c.osc_ratio_tol, c.slope_halfwidth, c.cp1_ratio_tol, c.width_tol,
                   c.toeplitz_tol, c.parity_tol, c.tol_dimension,
                   c.decay_stability_tol, c.negative_tol})
    require(t > 0, "all tolerances must be > 0");
  require_increasing(c.f0_grid, "f0_grid");
  require_increasing(c.lambda_grid, "lambda_grid");
  require_increasing(c.decay_lambda_grid, "decay_lambda_grid");
  require(c.nodes_per_axis >= 16, "nodes_per_axis must be >= 16");
  require(c.hermite_order >= 4, "hermite_order must be >= 4");
  require(c.ham_a > 0 && c.ham_a + c.ham_b > 0, "need ham_a > 0 and ham_a + ham_b > 0");
  require(c.ham_a + c.decay_b > 0, "need ham_a + decay_b > 0");
  require(c.which_period >= 1, "which_period must be >= 1");
  require(c.window_eps > 0 && c.window_eps < kTwoPi / c.ham_a,
          "window_eps must isolate one period: 0 < eps < 2 pi / a");
  require(c.negative_eps > 0 && c.negative_eps < kTwoPi / c.ham_a,
          "negative_eps must isolate one period: 0 < eps < 2 pi / a");
  require(c.cp1_lambda > 0 && c.parity_lambda_low > 0 && c.negative_lambda > 0,
          "model energies must be positive");
  require(c.n_max > 0 && c.n_count >= 1, "need n_max > 0, n_count >= 1");
  require(c.negative_points >= 1, "negative_points must be >= 1");
  require(c.decay_r >= 0.05 && c.decay_r <= 20.0, "decay_r out of chart range");
  require(c.g_at_pole > 0, "g_at_pole must be > 0");
}

json config_echo(const RunConfig& c) {
  json j;
  for_each_field(const_cast<RunConfig&>(c),
                 [&](const char* name, auto& field) { j[name] = field; });
  return j;
}

Report cmd_identities(const RunConfig& c) {
  validate(c);
  Report rep;
  rep.command = "identities";
  Stopwatch total;
  const int batch = 50;

  // two independently assembled routes to the quadratic generator must match
  for (int d : c.dims) {
    const int nb = (c.samples_identity + batch - 1) / batch;
    for (int b = 0; b < nb; ++b) {
      Stopwatch sw;
      const int lo = b * batch, hi = std::min(c.samples_identity, lo + batch);
      double worst = 0;
      for (int i = lo; i < hi; ++i) {
        const auto A = sym::random_symplectic(d, c.spread, sub_seed(c.seed, 1, d, i));
        const double scale = 1.0 + std::pow(A.M.operatorNorm(), 2);
        worst = std::max(
            worst, max_abs(sym::profile_matrix(A).M - sym::profile_matrix_alt(A).M) /
                       scale);
      }
      std::ostringstream in;
      in << "d=" << d << ";first=" << lo << ";count=" << (hi - lo)
         << ";spread=" << fp17(c.spread) << ";seed=" << c.seed;
      rep.add_check("lemma_routes/d" + std::to_string(d) + "/b" + pad(b, 3), in.str(),
                    worst, 0.0, c.tol_identity * c.tol_scale)
          .wall_time = sw.seconds();
    }
  }

  // on the orthogonal-symplectic locus the generator collapses to psi2(Av, v)
  for (int d : c.dims) {
    const int nb = (c.samples_unitary + batch - 1) / batch;
    for (int b = 0; b < nb; ++b) {
      Stopwatch sw;
      const int lo = b * batch, hi = std::min(c.samples_unitary, lo + batch);
      double worst = 0;
      for (int i = lo; i < hi; ++i) {
        const auto A = sym::random_unitary_symplectic(d, sub_seed(c.seed, 2, d, i));
        std::mt19937_64 vrng(sub_seed(c.seed, 3, d, i));
        for (int k = 0; k < c.vectors_per_sample; ++k) {
          const VectorXd v = gaussian_vector(vrng, 2 * d, 1.0);
          worst = std::max(worst,
                           std::abs(sym::psi2_A(A, v) - sym::psi2(A.M * v, v)));
        }
      }
      std::ostringstream in;
      in << "d=" << d << ";first=" << lo << ";count=" << (hi - lo)
         << ";vectors=" << c.vectors_per_sample << ";seed=" << c.seed;
      rep.add_check("unitary_collapse/d" + std::to_string(d) + "/b" + pad(b, 3),
                    in.str(), worst, 0.0, c.tol_unitary * c.tol_scale)
          .wall_time = sw.seconds();
    }
  }

  // three expressions for the off-diagonal block and the closed-form inverse
  for (int d : c.dims) {
    const int nb = (c.samples_identity + batch - 1) / batch;
    const MatrixXd J = sym::J0(d);
    const MatrixXd I = MatrixXd::Identity(2 * d, 2 * d);
    for (int b = 0; b < nb; ++b) {
      Stopwatch sw;
      const int lo = b * batch, hi = std::min(c.samples_identity, lo + batch);
      double worst = 0;
      for (int i = lo; i < hi; ++i) {
        const auto A = sym::random_symplectic(d, c.spread, sub_seed(c.seed, 4, d, i));
        const double scale = 1.0 + std::pow(A.M.operatorNorm(), 2);
        const MatrixXd F1 = sym::f_of(A);
        const MatrixXd F2 = -A.M.transpose() * J * (A.M - I);
        const MatrixXd F3 = (A.M.transpose() - I) * J;
        const MatrixXd invdef = -J * A.M.transpose() * J * A.M - I;
        const double dev = std::max({(F1 - F2).cwiseAbs().maxCoeff(),
                                     (F1 - F3).cwiseAbs().maxCoeff(),
                                     invdef.cwiseAbs().maxCoeff()});
        worst = std::max(worst, dev / scale);
      }
      std::ostringstream in;
      in << "d=" << d << ";first=" << lo << ";count=" << (hi - lo)
         << ";spread=" << fp17(c.spread) << ";seed=" << c.seed;
      rep.add_check("f_identity/d" + std::to_string(d) + "/b" + pad(b, 3), in.str(),
                    worst, 0.0, c.tol_fidentity * c.tol_scale)
          .wall_time = sw.seconds();
    }
  }

  // the real part must be strictly negative definite transverse to the fixed
  // directions
  for (int d : c.dims) {
    const int nb = (c.samples_negdef + batch - 1) / batch;
    for (int b = 0; b < nb; ++b) {
      Stopwatch sw;
      const int lo = b * batch, hi = std::min(c.samples_negdef, lo + batch);
      double worst = -std::numeric_limits<double>::infinity();
      for (int i = lo; i < hi; ++i) {
        const auto A = sym::random_symplectic(d, c.spread, sub_seed(c.seed, 5, d, i));
        worst = std::max(worst, sym::negdef_on_image(A));
      }
      std::ostringstream in;
      in << "d=" << d << ";first=" << lo << ";count=" << (hi - lo)
         << ";spread=" << fp17(c.spread) << ";seed=" << c.seed;
      rep.add_signed("negdef/d" + std::to_string(d) + "/b" + pad(b, 3), in.str(),
                     worst, 0.0, worst, 0.0, /*strict=*/true)
          .wall_time = sw.seconds();
    }
  }

  // collapse of the shifted exponent to the quadratic generator
  {
    const int ebatch = 250;
    const int nb = (c.samples_exponent + ebatch - 1) / ebatch;
    for (int b = 0; b < nb; ++b) {
      Stopwatch sw;
      const int lo = b * ebatch, hi = std::min(c.samples_exponent, lo + ebatch);
      double worst = 0;
      for (int i = lo; i < hi; ++i) {
        const int d = c.dims[std::size_t(i) % c.dims.size()];
        const auto A = sym::random_symplectic(d, c.spread, sub_seed(c.seed, 6, d, i));
        std::mt19937_64 rng(sub_seed(c.seed, 7, d, i));
        const VectorXd n = gaussian_vector(rng, 2 * d, 1.5);
        std::uniform_real_distribution<double> uf(0.3, 3.0);
        const double f0 = uf(rng);
        worst = std::max(worst, prof::exponent_identity_check(A, n, f0) /
                                    (1.0 + n.squaredNorm()));
      }
      std::ostringstream in;
      in << "first=" << lo << ";count=" << (hi - lo) << ";spread=" << fp17(c.spread)
         << ";seed=" << c.seed;
      rep.add_check("exponent_collapse/b" + pad(b, 3), in.str(), worst, 0.0,
                    c.tol_exponent * c.tol_scale)
          .wall_time = sw.seconds();
    }
  }

  rep.wall_time = total.seconds();
  rep.sort_rows();
  return rep;
}

namespace {

double upsilon_at(std::array<double, 4> x, double f0) {
  prof::PhasePoint p;
  p.theta = x[0];
  p.t = x[1];
  p.u = x[2];
  p.tau = x[3];
  return prof::upsilon(p, f0);
}

cplx gauss_hermite_reference(const MatrixXd& Q, const VectorXd& xi,
                             const QuadRule& gh) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q);
  const VectorXd q = es.eigenvalues();
  const VectorXd eta = es.eigenvectors().transpose() * xi;
  cplx total = 1.0;
  for (int i = 0; i < q.size(); ++i) {
    const double scale = std::sqrt(2.0 / q(i));
    cplx axis = 0.0;
    for (std::size_t k = 0; k < gh.size(); ++k)
      axis += gh.w[k] * std::exp(cplx(0.0, eta(i) * scale * gh.x[k]));
    total *= axis * scale;
  }
  return total;
}

}  // namespace

Report cmd_stationary(const RunConfig& c) {
  validate(c);
  Report rep;
  rep.command = "stationary";
  Stopwatch total;

  for (double f0 : c.f0_grid) {
    const std::string tag = "/f0=" + fp17(f0);
    const std::string in = "f0=" + fp17(f0);
    const prof::PhasePoint s = prof::stationary_point(f0);
    const std::array<double, 4> x0 = {s.theta, s.t, s.u, s.tau};

    double gmax = 0;
    const double h1 = 1e-6;
    for (int a = 0; a < 4; ++a) {
      auto xp = x0, xm = x0;
      xp[a] += h1;
      xm[a] -= h1;
      gmax = std::max(gmax,
                      std::abs(upsilon_at(xp, f0) - upsilon_at(xm, f0)) / (2 * h1));
    }
    rep.add_check("grad" + tag, in + ";h=" + fp17(h1), gmax, 0.0,
                  c.tol_grad * c.tol_scale);

    const Matrix4d H = prof::upsilon_hessian(f0);
    const double h2 = 1e-4;
    double hdev = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double fd;
        if (a == b) {
          auto xp = x0, xm = x0;
          xp[a] += h2;
          xm[a] -= h2;
          fd = (upsilon_at(xp, f0) - 2 * upsilon_at(x0, f0) + upsilon_at(xm, f0)) /
               (h2 * h2);
        } else {
          auto xpp = x0, xpm = x0, xmp = x0, xmm = x0;
          xpp[a] += h2;
          xpp[b] += h2;
          xpm[a] += h2;
          xpm[b] -= h2;
          xmp[a] -= h2;
          xmp[b] += h2;
          xmm[a] -= h2;
          xmm[b] -= h2;
          fd = (upsilon_at(xpp, f0) - upsilon_at(xpm, f0) - upsilon_at(xmp, f0) +
                upsilon_at(xmm, f0)) /
               (4 * h2 * h2);
        }
        hdev = std::max(hdev, std::abs(fd - H(a, b)));
      }
    rep.add_check("hess" + tag, in + ";h=" + fp17(h2), hdev, 0.0,
                  c.tol_hess * c.tol_scale);

    rep.add_check("det" + tag, in, H.determinant(), f0 * f0,
                  c.tol_det * c.tol_scale);
    rep.add_check("inverse" + tag, in,
                  (H * prof::upsilon_hessian_inverse(f0) - Matrix4d::Identity())
                      .cwiseAbs()
                      .maxCoeff(),
                  0.0, c.tol_inverse * c.tol_scale);

    const double lam = 137.0;
    rep.add_check("sqrtfactor" + tag, in + ";lambda=" + fp17(lam),
                  prof::sqrt_hessian_factor(f0, lam),
                  lam * std::sqrt(H.determinant()) / (kTwoPi * kTwoPi),
                  c.tol_det * c.tol_scale);
  }

  // closed-form phase-space integral against direct quadrature
  const QuadRule gh = gauss_hermite(64);
  const int gbatch = 25;
  for (int d : {1, 2}) {
    const int m = 2 * d;
    const int nb = (c.samples_gaussian + gbatch - 1) / gbatch;
    for (int b = 0; b < nb; ++b) {
      Stopwatch sw;
      const int lo = b * gbatch, hi = std::min(c.samples_gaussian, lo + gbatch);
      double worst = 0;
      for (int i = lo; i < hi; ++i) {
        std::mt19937_64 rng(sub_seed(c.seed, 8, d, i));
        MatrixXd B(m, m);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int r = 0; r < m; ++r)
          for (int col = 0; col < m; ++col) B(r, col) = g(rng);
        const MatrixXd Q = B * B.transpose() + MatrixXd::Identity(m, m);
        // unit-scale frequencies keep the value of the integral well above the
        // double-precision floor of the comparison (it decays like
        // exp(-|xi|^2/(2q)), and a relative check on a value near 1e-16 times
        // the integrand peak would measure roundoff, not quadrature)
        const VectorXd xi = gaussian_vector(rng, m, 1.0);
        const cplx closed = prof::gaussian_integral_closed(Q, xi);
        const cplx quad = gauss_hermite_reference(Q, xi, gh);
        worst = std::max(worst, std::abs(closed - quad) / std::abs(closed));
      }
      std::ostringstream in;
      in << "d=" << d << ";first=" << lo << ";count=" << (hi - lo)
         << ";gh_nodes=64;seed=" << c.seed;
      rep.add_check("gaussian/d" + std::to_string(d) + "/b" + pad(b, 3), in.str(),
                    worst, 0.0, c.tol_gaussian * c.tol_scale)
          .wall_time = sw.seconds();
    }
  }

  rep.wall_time = total.seconds();
  rep.sort_rows();
  return rep;
}

Report cmd_oscillatory(const RunConfig& c) {
  validate(c);
  Report rep;
  rep.command = "oscillatory";
  Stopwatch total;

  prof::FixedPointDatum datum;
  datum.A = sym::make_symplectic(-MatrixXd::Identity(2, 2));
  datum.f0 = 1.0;
  datum.rho0 = 1.0;
  datum.tau0 = 0.0;
  datum.dim_d = 1;
  const VectorXd upsf = VectorXd::Zero(2);
  const VectorXd n0 = VectorXd::Zero(2);
  VectorXd v0(2);
  v0 << 0.4, -0.3;

  const double lmax = c.lambda_grid.back();
  std::vector<double> ls, errs;
  for (std::size_t li = 0; li < c.lambda_grid.size(); ++li) {
    const double lam = c.lambda_grid[li];
    osc::QuadratureSpec spec;
    spec.nodes_per_axis = c.nodes_per_axis;
    spec.box_radius_thetatau = c.box_radius;
    spec.D = c.box_D;
    spec.hermite_order = c.hermite_order;
    spec.lambda = lam;
    const std::string tag = "/l" + pad(int(li), 2);
    std::ostringstream in;
    in << "lambda=" << fp17(lam) << ";nodes=" << c.nodes_per_axis
       << ";hermite=" << c.hermite_order << ";D=" << fp17(c.box_D)
       << ";R=" << fp17(c.box_radius);

    Stopwatch sw;
    const osc::IntegralResult full = osc::full_profile_integral(datum, n0, spec, upsf);
    const cplx pred = prof::predicted_kernel(datum, lam, n0, 1.0);
    const cplx ratio = full.value / pred;
    const double tol = c.osc_ratio_tol * std::sqrt(lmax / lam) * c.tol_scale;
    rep.add_check("ratio" + tag, in.str(), ratio, 1.0, tol).wall_time = sw.seconds();
    ls.push_back(lam);
    errs.push_back(std::max(std::abs(ratio - 1.0), 1e-300));

    const double rel = full.est_error / std::max(std::abs(full.value), 1e-300);
    rep.add_check("stability" + tag, in.str(), rel, 0.0, 0.10);

    // off-center slice against the closed-form critical-point value
    Stopwatch sw2;
    const osc::IntegralResult inner = osc::inner_integral(datum, n0, v0, spec, upsf);
    const cplx lead = osc::stationary_reduce(datum, lam, n0, v0);
    rep.add_check("inner" + tag,
                  in.str() + ";v=(" + fp17(v0(0)) + " " + fp17(v0(1)) + ")",
                  inner.value / lead, 1.0, 3.0 * tol)
        .wall_time = sw2.seconds();
  }

  if (ls.size() >= 2) {
    const double slope = loglog_slope(ls, errs);
    std::ostringstream in;
    in << "lambdas=" << ls.size() << ";lmin=" << fp17(ls.front())
       << ";lmax=" << fp17(ls.back());
    rep.add_check("slope", in.str(), slope, c.slope_center,
                  c.slope_halfwidth * c.tol_scale);
    rep.extra["slope"] = slope;
  } else {
    rep.extra["slope"] = "n/a";  // one point fits no line
  }
  rep.extra["lambda_grid"] = c.lambda_grid;

  rep.wall_time = total.seconds();
  rep.sort_rows();
  return rep;
}

namespace {

double window_reach(const cp1::SpectralModel& model, double lambda) {
  return std::max({std::abs(lambda), std::abs(lambda - model.mu_min),
                   std::abs(lambda - model.mu_max)});
}

}  // namespace

Report cmd_cp1_profile(const RunConfig& c) {
  validate(c);
  Report rep;
  rep.command = "cp1_profile";
  Stopwatch total;

  const cp1::RotationHamiltonian ham{c.ham_a, c.ham_b};
  const auto datum = cp1::fixed_point_datum_at_pole(ham, c.which_period);
  const double lhi = c.cp1_lambda, llo = c.parity_lambda_low;
  const int kmax = cp1::suggested_kmax(ham, std::max(lhi, llo), c.window_eps);
  const auto model = cp1::build_spectral_model(ham, kmax);
  const double smax =
      std::max(window_reach(model, lhi), window_reach(model, llo)) + 5.0;
  const auto window = cp1::make_window(datum.tau0, c.window_eps, smax);

  VectorXd dir(2);
  dir << 1.0, 0.0;
  std::vector<VectorXd> grid;
  grid.push_back(VectorXd::Zero(2));
  std::vector<double> radii;
  for (int i = 1; i <= c.n_count; ++i) {
    const double t = c.n_max * double(i) / double(c.n_count);
    radii.push_back(t);
    grid.push_back(t * dir);
    grid.push_back(-t * dir);
  }

  const std::string base_in = "a=" + fp17(c.ham_a) + ";b=" + fp17(c.ham_b) +
                              ";period=" + std::to_string(c.which_period) +
                              ";eps=" + fp17(c.window_eps) +
                              ";kmax=" + std::to_string(kmax);

  Stopwatch sw_hi;
  const auto scan_hi = cp1::profile_scan(model, datum, lhi, grid, window);
  const double t_hi = sw_hi.seconds();

  // head-on comparison at the fixed point
  const cplx ratio0 = scan_hi.rows[0].brute / scan_hi.rows[0].predicted;
  rep.add_check("ratio/n=0", base_in + ";lambda=" + fp17(lhi), ratio0, 1.0,
                c.cp1_ratio_tol * c.tol_scale)
      .wall_time = t_hi;

  // spectral sum against the closed-form profile across the grid; the error
  // is additive in the kernel scale, so the relative allowance grows as the
  // profile decays
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& row = scan_hi.rows[i];
    const double gauss =
        std::exp(-sym::psi2_A(datum.A, row.n).real() / datum.f0);
    const double tol = c.cp1_ratio_tol * c.tol_scale * gauss;
    std::ostringstream in;
    in << base_in << ";lambda=" << fp17(lhi) << ";n=(" << fp17(row.n(0)) << " "
       << fp17(row.n(1)) << ")";
    rep.add_signed("pair/p" + pad(int(i), 2), in.str(), row.brute, row.predicted,
                   std::abs(row.brute - row.predicted) / std::abs(row.predicted),
                   tol, false);
  }

  // transverse width: slope of log|S| against |n|^2 along the ray
  {
    std::vector<double> xs, ys;
    const double s0 = std::abs(scan_hi.even[0]);
    for (int i = 1; i <= c.n_count; ++i) {
      xs.push_back(radii[std::size_t(i) - 1] * radii[std::size_t(i) - 1]);
      ys.push_back(std::log(std::abs(scan_hi.even[std::size_t(2 * i - 1)]) / s0));
    }
    double slope;
    if (xs.size() == 1) {
      slope = ys[0] / xs[0];
    } else {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
      }
      const double n = double(xs.size());
      slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    const double ref = sym::psi2_A(datum.A, dir).real() / datum.f0;
    rep.add_signed("width", base_in + ";lambda=" + fp17(lhi) + ";points=" +
                                std::to_string(xs.size()),
                   slope, ref, std::abs(slope - ref) / std::abs(ref),
                   c.width_tol * c.tol_scale, false);
    rep.extra["width_slope"] = slope;
    rep.extra["width_reference"] = ref;
  }

  // multiplying in a symbol must rescale the fixed-point value by g there
  {
    Stopwatch sw;
    const double gp = c.g_at_pole, gs = c.g_slope;
    const auto tw =
        cp1::toeplitz_weights(model, [gp, gs](double m) { return gp + gs * m; });
    const cplx s_g = cp1::brute_force_S(
        model, cp1::heisenberg_displace(VectorXd::Zero(2), lhi), lhi, window, &tw);
    const cplx ratio_g = s_g / scan_hi.rows[0].brute;
    rep.add_signed("toeplitz", base_in + ";g0=" + fp17(gp) + ";g1=" + fp17(gs) +
                                   ";lambda=" + fp17(lhi),
                   ratio_g, gp, std::abs(ratio_g / gp - 1.0),
                   c.toeplitz_tol * c.tol_scale, false)
        .wall_time = sw.seconds();
  }

  // parity content at two energies
  {
    Stopwatch sw;
    const auto scan_lo = cp1::profile_scan(model, datum, llo, grid, window);
    auto amp_ratio = [](const cp1::ProfileScanResult& s) {
      double e = 0, o = 0;
      for (const cplx& v : s.even) e = std::max(e, std::abs(v));
      for (const cplx& v : s.odd) o = std::max(o, std::abs(v));
      return o / e;
    };
    const double r_hi = amp_ratio(scan_hi), r_lo = amp_ratio(scan_lo);
    rep.add_check("parity/high", base_in + ";lambda=" + fp17(lhi), r_hi, 0.0,
                  c.parity_tol * c.tol_scale);
    rep.add_check("parity/low", base_in + ";lambda=" + fp17(llo), r_lo, 0.0, 1.0);
    rep.add_signed("parity/decrease",
                   base_in + ";high=" + fp17(lhi) + ";low=" + fp17(llo), r_hi, r_lo,
                   r_hi - r_lo, 0.0, /*strict=*/true)
        .wall_time = sw.seconds();
    rep.extra["parity_high"] = r_hi;
    rep.extra["parity_low"] = r_lo;
  }

  // model self-calibration
  for (int k : {1, 10, 25, 50}) {
    if (k > kmax) continue;
    rep.add_check("dimension/k" + pad(k, 2), base_in, cp1::dimension_integral(model, k),
                  double(k + 1), c.tol_dimension * c.tol_scale);
  }
  rep.add_check("kappa", "chart=pole", cp1::kappa_chart_scale(), 1.0, 1e-6);

  rep.extra["kmax"] = kmax;
  rep.extra["rotation_angle"] =
      std::atan2(datum.A.M(1, 0), datum.A.M(0, 0));
  rep.wall_time = total.seconds();
  rep.sort_rows();
  return rep;
}

Report cmd_cp1_decay(const RunConfig& c) {
  validate(c);
  Report rep;
  rep.command = "cp1_decay";
  Stopwatch total;

  const cp1::RotationHamiltonian ham{c.ham_a, c.decay_b};
  const auto datum = cp1::fixed_point_datum_at_pole(ham, c.which_period);
  const double lmax = c.decay_lambda_grid.back();
  const int kmax = cp1::suggested_kmax(ham, lmax, c.window_eps);
  const auto model = cp1::build_spectral_model(ham, kmax);
  double smax = 0;
  for (double lam : c.decay_lambda_grid)
    smax = std::max(smax, window_reach(model, lam));
  smax += 5.0;
  const auto win_grid = cp1::make_window(datum.tau0, c.window_eps, smax);
  const auto win_exact = cp1::make_window(datum.tau0, c.window_eps, smax, true);

  const std::string base_in = "a=" + fp17(c.ham_a) + ";b=" + fp17(c.decay_b) +
                              ";r=" + fp17(c.decay_r) +
                              ";eps=" + fp17(c.window_eps) +
                              ";kmax=" + std::to_string(kmax);

  const cp1::ModelPoint p = cp1::point_at_chart(cplx(c.decay_r, 0.0));
  std::vector<double> mags;
  for (std::size_t i = 0; i < c.decay_lambda_grid.size(); ++i) {
    const double lam = c.decay_lambda_grid[i];
    Stopwatch sw;
    const cplx s_grid = cp1::brute_force_S(model, p, lam, win_grid);
    const cplx s_exact = cp1::brute_force_S(model, p, lam, win_exact);
    mags.push_back(std::abs(s_exact));
    std::ostringstream in;
    in << base_in << ";lambda=" << fp17(lam);
    // cached-transform evaluation against direct re-integration
    rep.add_signed("value/l" + pad(int(i), 2), in.str(), s_grid, s_exact,
                   std::abs(s_grid - s_exact) / std::abs(s_exact),
                   c.decay_stability_tol * c.tol_scale, false)
        .wall_time = sw.seconds();
  }

  if (c.decay_lambda_grid.size() >= 2) {
    const double slope = loglog_slope(c.decay_lambda_grid, mags);
    rep.add_signed("slope", base_in + ";points=" +
                                std::to_string(c.decay_lambda_grid.size()),
                   slope, c.decay_slope_max, slope - c.decay_slope_max, 0.0, false);
    rep.extra["slope"] = slope;
  } else {
    rep.extra["slope"] = "n/a";
  }
  rep.extra["abs_S"] = mags;
  rep.extra["kmax"] = kmax;

  rep.wall_time = total.seconds();
  rep.sort_rows();
  return rep;
}

Report cmd_cp1_negative(const RunConfig& c) {
  validate(c);
  Report rep;
  rep.command = "cp1_negative";
  Stopwatch total;

  const cp1::RotationHamiltonian ham{c.ham_a, c.ham_b};
  const auto datum = cp1::fixed_point_datum_at_pole(ham, c.which_period);
  const double lam = c.negative_lambda;
  const int kmax = cp1::suggested_kmax(ham, lam, c.negative_eps);
  const auto model = cp1::build_spectral_model(ham, kmax);
  const double smax =
      std::max(window_reach(model, lam), window_reach(model, -lam)) + 5.0;
  // exact transform evaluation: the positive-energy values sit many orders
  // above the negative-energy ones, so cached-grid interpolation noise would
  // mask the signal
  const auto window = cp1::make_window(datum.tau0, c.negative_eps, smax, true);

  const std::string base_in = "a=" + fp17(c.ham_a) + ";b=" + fp17(c.ham_b) +
                              ";eps=" + fp17(c.negative_eps) +
                              ";lambda=" + fp17(lam) +
                              ";kmax=" + std::to_string(kmax);

  json plus = json::array(), minus = json::array();
  for (int i = 0; i < c.negative_points; ++i) {
    const double t =
        c.negative_points == 1
            ? 0.0
            : 1.4 * double(i) / double(c.negative_points - 1);
    VectorXd n(2);
    n << t, 0.0;
    const cp1::ModelPoint p = cp1::heisenberg_displace(n, lam);
    Stopwatch sw;
    const cplx sp = cp1::brute_force_S(model, p, lam, window);
    const cplx sm = cp1::brute_force_S(model, p, -lam, window);
    plus.push_back(std::abs(sp));
    minus.push_back(std::abs(sm));
    std::ostringstream in;
    in << base_in << ";n=(" << fp17(t) << " 0)";
    rep.add_check("negative/p" + pad(i, 2), in.str(), std::abs(sm) / std::abs(sp),
                  0.0, c.negative_tol * c.tol_scale)
        .wall_time = sw.seconds();
  }
  rep.extra["abs_plus"] = plus;
  rep.extra["abs_minus"] = minus;
  rep.extra["kmax"] = kmax;

  rep.wall_time = total.seconds();
  rep.sort_rows();
  return rep;
}

}  // namespace loctrace::rep

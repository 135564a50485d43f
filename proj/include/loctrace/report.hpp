#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace loctrace::rep {

using cplx = std::complex<double>;
using json = nlohmann::json;

// every floating-point cell goes through %.17g so that equal doubles give
// equal bytes
std::string fp17(double x);

// least-squares slope of log(y) against log(x); needs >= 2 points, all > 0
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// "a:b:n" -> n geometrically spaced points from a to b inclusive; n = 1
// gives {a}
std::vector<double> parse_grid(const std::string& text);

struct ReportRow {
  std::string id;
  std::string inputs;  // semicolon-separated key=value echo, comma-free
  cplx measured{};
  cplx reference{};
  double deviation = 0;
  double tolerance = 0;
  bool pass = false;
  bool strict = false;   // pass required deviation < tolerance, not <=
  double wall_time = 0;  // seconds; summaries only, never in the CSV
};

struct Report {
  std::string command;
  std::vector<ReportRow> rows;
  json extra;  // command-specific scalars (fitted slopes etc.)
  double wall_time = 0;

  // deviation = |measured - reference|, pass = deviation <= tolerance
  ReportRow& add_check(const std::string& id, const std::string& inputs,
                       cplx measured, cplx reference, double tolerance);
  // signed comparison: deviation is given directly; pass = deviation <= bound
  // (or < bound when strict)
  ReportRow& add_signed(const std::string& id, const std::string& inputs,
                        cplx measured, cplx reference, double deviation,
                        double bound, bool strict);
  bool all_pass() const;
  double max_deviation() const;
  void sort_rows();  // lexicographic by id; ids embed zero-padded indices
};

// id,inputs,measured_re,measured_im,reference_re,reference_im,deviation,
// tolerance,pass -- wall time is excluded because it is the one cell not
// re-derivable from the echoed inputs, and the file must be byte-stable
std::string csv_text(const Report& report);
void write_text(const std::string& path, const std::string& text);
json load_json_file(const std::string& path);

json summary_json(const Report& report, const json& config_echo);
// one acceptance document; overall_pass is the conjunction
json merge_summaries(const std::vector<json>& summaries);

// one flat key-value schema shared by every command; unknown keys in a
// config file are errors, not warnings
struct RunConfig {
  int version = 1;
  std::uint64_t seed = 1;
  double tol_scale = 1.0;
  int threads = 0;  // 0: leave the runtime default

  // sampling sizes for the identity suites
  std::vector<int> dims = {1, 2, 3};
  int samples_identity = 1000;
  int samples_unitary = 500;
  int vectors_per_sample = 100;
  int samples_negdef = 300;
  int samples_exponent = 10000;
  int samples_gaussian = 50;
  double spread = 0.6;

  double tol_identity = 1e-9;   // scaled by (1 + |A|^2) per sample
  double tol_unitary = 1e-10;
  double tol_fidentity = 1e-10;  // scaled by (1 + |A|^2) per sample
  double tol_exponent = 1e-9;    // scaled by (1 + |n|^2) per sample
  double tol_gaussian = 1e-8;

  // critical-point checks
  std::vector<double> f0_grid = {0.5, 1.0, 2.0, 5.0};
  double tol_grad = 1e-8;
  double tol_hess = 1e-6;
  double tol_det = 1e-8;
  double tol_inverse = 1e-12;

  // oscillatory-integral convergence
  std::vector<double> lambda_grid = {50, 100, 200, 400};
  double osc_ratio_tol = 0.08;  // at the largest lambda; scales as sqrt(lmax/l)
  double slope_center = -0.5;
  double slope_halfwidth = 0.2;
  int nodes_per_axis = 16;
  int hermite_order = 32;
  double box_D = -1;       // <= 0: automatic
  double box_radius = -1;  // <= 0: automatic

  // rotation-model profile run
  double ham_a = 1.0;
  double ham_b = 0.37;
  int which_period = 1;
  double window_eps = 0.3;
  double cp1_lambda = 400.0;
  double cp1_ratio_tol = 0.05;
  double width_tol = 0.05;
  double toeplitz_tol = 0.05;
  double g_at_pole = 1.5;  // symbol g(m) = g_at_pole + g_slope * m
  double g_slope = -0.8;
  double n_max = 1.2;
  int n_count = 4;  // positive radii; the grid is {0, +-t_i}
  double parity_tol = 0.2;
  double parity_lambda_low = 100.0;
  double tol_dimension = 1e-8;

  // off-locus decay run
  double decay_b = 0.12;
  double decay_r = 0.5;
  std::vector<double> decay_lambda_grid = {100, 141.4, 200, 282.8, 400};
  double decay_slope_max = -3.0;
  double decay_stability_tol = 1e-6;

  // negative-energy run
  double negative_lambda = 200.0;
  double negative_eps = 1.5;
  double negative_tol = 1e-8;
  int negative_points = 5;
};

// strict JSON loader: unknown key -> error naming the key, wrong type ->
// error naming the key, version other than 1 -> error
RunConfig load_config(const std::string& path);
void validate(const RunConfig& c);
json config_echo(const RunConfig& c);

Report cmd_identities(const RunConfig& c);
Report cmd_stationary(const RunConfig& c);
Report cmd_oscillatory(const RunConfig& c);
Report cmd_cp1_profile(const RunConfig& c);
Report cmd_cp1_decay(const RunConfig& c);
Report cmd_cp1_negative(const RunConfig& c);

}  // namespace loctrace::rep

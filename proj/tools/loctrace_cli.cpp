#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "loctrace/report.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
namespace rep = loctrace::rep;

namespace {

int write_and_report(const rep::Report& r, const rep::RunConfig& cfg,
                     const std::string& out_dir) {
  fs::create_directories(out_dir);
  rep::write_text(out_dir + "/" + r.command + ".csv", rep::csv_text(r));
  const rep::json summary = rep::summary_json(r, rep::config_echo(cfg));
  rep::write_text(out_dir + "/" + r.command + ".summary.json",
                  summary.dump(2) + "\n");

  std::size_t passed = 0;
  for (const auto& row : r.rows) passed += row.pass ? 1 : 0;
  std::cout << r.command << ": " << passed << "/" << r.rows.size()
            << " rows passed, max deviation " << r.max_deviation() << ", wall "
            << r.wall_time << " s\n";
  if (r.extra.contains("slope"))
    std::cout << "  fitted slope: " << r.extra["slope"].dump() << "\n";
  for (const auto& row : r.rows)
    if (!row.pass)
      std::cout << "  FAIL " << row.id << ": measured (" << row.measured.real()
                << ", " << row.measured.imag() << "), deviation " << row.deviation
                << (row.strict ? " !< " : " > ") << row.tolerance << "\n";
  std::cout << "  wrote " << out_dir << "/" << r.command << ".csv\n";
  return r.all_pass() ? 0 : 1;
}

int merge_command(std::vector<std::string> paths, const std::string& out_dir) {
  if (paths.empty()) {
    if (!fs::is_directory(out_dir))
      throw std::runtime_error("no summary files given and no directory " + out_dir);
    for (const auto& e : fs::directory_iterator(out_dir)) {
      const std::string name = e.path().filename().string();
      if (name.size() > 13 &&
          name.compare(name.size() - 13, 13, ".summary.json") == 0)
        paths.push_back(e.path().string());
    }
    std::sort(paths.begin(), paths.end());
  }
  std::vector<rep::json> sums;
  sums.reserve(paths.size());
  for (const std::string& p : paths) sums.push_back(rep::load_json_file(p));
  const rep::json merged = rep::merge_summaries(sums);
  fs::create_directories(out_dir);
  rep::write_text(out_dir + "/acceptance.json", merged.dump(2) + "\n");
  const bool ok = merged["overall_pass"].get<bool>();
  std::cout << "merged " << sums.size() << " summaries -> " << out_dir
            << "/acceptance.json, overall " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verification suite for localized trace-kernel asymptotics"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "reports";
  std::uint64_t seed = 0;
  double tol_scale = 1.0;
  int threads = -1;
  std::string grid_spec;

  auto* opt_config = app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  auto* opt_seed = app.add_option("--seed", seed, "override the config seed");
  auto* opt_tol =
      app.add_option("--tol-scale", tol_scale, "multiply every tolerance");
  app.add_option("--threads", threads, "worker threads (0 = runtime default)");

  auto* c_id = app.add_subcommand("identities", "matrix-identity sampling suites");
  auto* c_st =
      app.add_subcommand("stationary", "critical-point and closed-form integrals");
  auto* c_os = app.add_subcommand(
      "oscillatory", "direct oscillatory integrals against the predicted kernel");
  c_os->add_option("--lambda-grid", grid_spec, "a:b:n geometric energy grid");
  auto* c_cp = app.add_subcommand("cp1", "exact rotation-model checks");
  c_cp->require_subcommand(1);
  auto* c_cp_pr =
      c_cp->add_subcommand("profile", "spectral sum against the predicted profile");
  auto* c_cp_de = c_cp->add_subcommand("decay", "off-locus energy decay");
  c_cp_de->add_option("--lambda-grid", grid_spec, "a:b:n geometric energy grid");
  auto* c_cp_ne = c_cp->add_subcommand("negative", "negative-energy suppression");
  auto* c_re = app.add_subcommand("report", "merge summaries into one document");
  std::vector<std::string> paths;
  c_re->add_option("paths", paths,
                   "summary files (default: <out>/*.summary.json)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_re->parsed()) return merge_command(paths, out_dir);

    rep::RunConfig cfg;
    if (opt_config->count()) cfg = rep::load_config(config_path);
    if (opt_seed->count()) cfg.seed = seed;
    if (opt_tol->count()) cfg.tol_scale = tol_scale;
    if (threads >= 0) cfg.threads = threads;
    if (!grid_spec.empty()) {
      if (c_os->parsed()) cfg.lambda_grid = rep::parse_grid(grid_spec);
      if (c_cp_de->parsed()) cfg.decay_lambda_grid = rep::parse_grid(grid_spec);
    }
    rep::validate(cfg);
#ifdef _OPENMP
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif

    rep::Report r;
    if (c_id->parsed())
      r = rep::cmd_identities(cfg);
    else if (c_st->parsed())
      r = rep::cmd_stationary(cfg);
    else if (c_os->parsed())
      r = rep::cmd_oscillatory(cfg);
    else if (c_cp_pr->parsed())
      r = rep::cmd_cp1_profile(cfg);
    else if (c_cp_de->parsed())
      r = rep::cmd_cp1_decay(cfg);
    else if (c_cp_ne->parsed())
      r = rep::cmd_cp1_negative(cfg);
    else
      throw std::logic_error("unreachable: no subcommand dispatched");
    return write_and_report(r, cfg, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "loctrace/report.hpp"

using namespace loctrace;
namespace fs = std::filesystem;
using rep::Report;
using rep::RunConfig;

namespace {

std::string temp_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  rep::write_text(p.string(), text);
  return p.string();
}

std::string thrown_message(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

RunConfig small_config() {
  RunConfig c;
  c.dims = {1, 2};
  c.samples_identity = 40;
  c.samples_unitary = 20;
  c.vectors_per_sample = 5;
  c.samples_negdef = 20;
  c.samples_exponent = 100;
  c.samples_gaussian = 4;
  return c;
}

}  // namespace

TEST_CASE("shortest-roundtrip formatting") {
  CHECK(rep::fp17(1.0) == "1");
  CHECK(rep::fp17(2.5) == "2.5");
  CHECK(rep::fp17(0.1) == "0.10000000000000001");
  for (double x : {0.1 + 0.2, -3.7e-17, 1e300, 6.02214076e23, 0.0})
    CHECK(std::strtod(rep::fp17(x).c_str(), nullptr) == x);
}

TEST_CASE("grid parsing") {
  const auto g = rep::parse_grid("50:400:4");
  REQUIRE(g.size() == 4);
  CHECK(g[0] == doctest::Approx(50.0).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(g[2] == doctest::Approx(200.0).epsilon(1e-12));
  CHECK(g[3] == doctest::Approx(400.0).epsilon(1e-14));

  const auto one = rep::parse_grid("7:7:1");
  REQUIRE(one.size() == 1);
  CHECK(one[0] == 7.0);

  CHECK_THROWS(rep::parse_grid("x"));
  CHECK_THROWS(rep::parse_grid("1:8"));
  CHECK_THROWS(rep::parse_grid("1:8:0"));
  CHECK_THROWS(rep::parse_grid("1:8:4x"));
  CHECK_THROWS(rep::parse_grid("-1:5:3"));
  CHECK_THROWS(rep::parse_grid("0:5:3"));
}

TEST_CASE("log-log slope") {
  std::vector<double> x = {10, 20, 40, 80}, y;
  for (double xi : x) y.push_back(3.0 * std::pow(xi, -2.5));
  CHECK(rep::loglog_slope(x, y) == doctest::Approx(-2.5).epsilon(1e-12));
  CHECK_THROWS(rep::loglog_slope({1.0}, {1.0}));
  CHECK_THROWS(rep::loglog_slope({1.0, 2.0}, {1.0, 0.0}));
  CHECK_THROWS(rep::loglog_slope({1.0, -2.0}, {1.0, 1.0}));
}

TEST_CASE("row semantics: inclusive checks, strict signed bounds") {
  Report r;
  r.command = "t";
  const auto& a = r.add_check("a", "k=1", 1.0, 1.0, 0.0);
  CHECK(a.pass);  // deviation 0 <= tolerance 0
  const auto& b = r.add_signed("b", "", 0.0, 0.0, 0.0, 0.0, /*strict=*/true);
  CHECK_FALSE(b.pass);  // strict: 0 < 0 fails
  const auto& c = r.add_signed("c", "", 0.0, 0.0, 0.0, 0.0, /*strict=*/false);
  CHECK(c.pass);
  const auto& d = r.add_signed("d", "", 0.0, 0.0, -0.3, 0.0, /*strict=*/true);
  CHECK(d.pass);  // negative margin passes a strict zero bound
  CHECK_FALSE(r.all_pass());
  CHECK(r.max_deviation() == 0.0);

  r.rows.clear();
  r.add_check("z/b01", "", 0, 0, 1);
  r.add_check("a/b02", "", 0, 0, 1);
  r.add_check("a/b01", "", 0, 0, 1);
  r.sort_rows();
  CHECK(r.rows[0].id == "a/b01");
  CHECK(r.rows[1].id == "a/b02");
  CHECK(r.rows[2].id == "z/b01");
}

TEST_CASE("csv layout: stable header, no timing column, comma guard") {
  Report r;
  r.command = "t";
  r.add_check("only", "x=2;y=3", rep::cplx(1.0, -0.5), rep::cplx(1.0, 0.0), 0.75)
      .wall_time = 123.0;  // must not leak into the csv
  const std::string text = rep::csv_text(r);
  CHECK(text ==
        "id,inputs,measured_re,measured_im,reference_re,reference_im,"
        "deviation,tolerance,pass\n"
        "only,x=2;y=3,1,-0.5,1,0,0.5,0.75,1\n");

  r.add_check("bad,id", "", 0, 0, 1);
  CHECK_THROWS_AS((void)rep::csv_text(r), std::logic_error);
}

TEST_CASE("summary and merge documents") {
  Report r;
  r.command = "demo";
  r.add_check("good", "", 1.0, 1.0, 1e-9);
  r.add_check("bad", "", 2.0, 1.0, 1e-9);
  r.wall_time = 0.25;
  const auto s = rep::summary_json(r, rep::json{{"seed", 1}});
  CHECK(s["command"] == "demo");
  CHECK(s["rows"] == 2);
  CHECK(s["passed"] == 1);
  CHECK(s["failed"] == 1);
  CHECK(s["overall_pass"] == false);
  CHECK(s["failing"] == rep::json::array({"bad"}));
  CHECK(s["config"]["seed"] == 1);

  Report ok;
  ok.command = "ok";
  ok.add_check("fine", "", 1.0, 1.0, 1e-9);
  const auto s2 = rep::summary_json(ok, rep::json::object());
  const auto merged = rep::merge_summaries({s, s2});
  CHECK(merged["commands_total"] == 2);
  CHECK(merged["commands_passed"] == 1);
  CHECK(merged["overall_pass"] == false);
  CHECK(rep::merge_summaries({})["overall_pass"] == false);
  CHECK(rep::merge_summaries({s2})["overall_pass"] == true);
}

TEST_CASE("config loading is strict") {
  SUBCASE("defaults survive a minimal file") {
    const auto p = temp_file("loctrace_cfg_min.json",
                             "{\"version\":1,\"seed\":7}\n");
    const auto c = rep::load_config(p);
    CHECK(c.seed == 7);
    CHECK(c.samples_identity == 1000);
    CHECK(c.ham_b == 0.37);
  }
  SUBCASE("unknown keys are named") {
    const auto p = temp_file("loctrace_cfg_unknown.json",
                             "{\"version\":1,\"bogus_key\":3}\n");
    const auto msg = thrown_message([&] { (void)rep::load_config(p); });
    CHECK(msg.find("bogus_key") != std::string::npos);
  }
  SUBCASE("type errors are named") {
    const auto p = temp_file("loctrace_cfg_type.json",
                             "{\"version\":1,\"spread\":\"wide\"}\n");
    const auto msg = thrown_message([&] { (void)rep::load_config(p); });
    CHECK(msg.find("spread") != std::string::npos);
  }
  SUBCASE("unsupported version") {
    const auto p = temp_file("loctrace_cfg_v2.json", "{\"version\":2}\n");
    CHECK_THROWS((void)rep::load_config(p));
  }
}

TEST_CASE("config validation") {
  RunConfig c;
  CHECK_NOTHROW(rep::validate(c));
  c.tol_identity = 0.0;
  CHECK_THROWS(rep::validate(c));
  c = RunConfig{};
  c.dims = {1, 9};
  CHECK_THROWS(rep::validate(c));
  c = RunConfig{};
  c.lambda_grid = {100, 50};
  CHECK_THROWS(rep::validate(c));
  c = RunConfig{};
  c.nodes_per_axis = 8;
  CHECK_THROWS(rep::validate(c));
  c = RunConfig{};
  c.window_eps = 7.0;  // period spacing is 2 pi / a
  CHECK_THROWS(rep::validate(c));
  c = RunConfig{};
  c.ham_a = -1.0;
  CHECK_THROWS(rep::validate(c));
}

TEST_CASE("echo round-trips through the loader") {
  RunConfig c = small_config();
  c.seed = 42;
  const auto echo = rep::config_echo(c);
  const auto p = temp_file("loctrace_cfg_echo.json", echo.dump(2) + "\n");
  const auto back = rep::config_echo(rep::load_config(p));
  CHECK(echo.dump() == back.dump());
}

TEST_CASE("identity suite: deterministic bytes, seed sensitivity, gate") {
  const RunConfig c = small_config();
  Report r1 = rep::cmd_identities(c);
  Report r2 = rep::cmd_identities(c);
  r1.sort_rows();
  r2.sort_rows();
  CHECK(r1.all_pass());
  CHECK(rep::csv_text(r1) == rep::csv_text(r2));

  RunConfig reseeded = c;
  reseeded.seed = 2;
  Report r3 = rep::cmd_identities(reseeded);
  r3.sort_rows();
  CHECK(rep::csv_text(r3) != rep::csv_text(r1));
  CHECK(r3.all_pass());

  RunConfig tight = c;
  tight.tol_scale = 1e-12;
  CHECK_FALSE(rep::cmd_identities(tight).all_pass());
}

TEST_CASE("critical-point suite runs green on a small budget") {
  RunConfig c = small_config();
  c.f0_grid = {1.0, 2.0};
  const Report r = rep::cmd_stationary(c);
  CHECK(r.all_pass());
  CHECK(r.rows.size() == 5 * 2 + 2);  // five checks per energy + one
                                      // gaussian batch per dimension
  bool saw = false;
  for (const auto& row : r.rows) saw = saw || row.id == "det/f0=1";
  CHECK(saw);
}

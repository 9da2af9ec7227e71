#include <doctest.h>

#include <cmath>

#include "ddlab/config.hpp"
#include "ddlab/error.hpp"

using namespace ddlab;

TEST_CASE("minimal simulate config gets defaults") {
  const RunConfig c = parse_config("mode = \"simulate\"\nflux = \"burgers\"\neps = 0.01\ndelta = 0\nn = 512\nt = 1\n");
  CHECK(c.mode == Mode::simulate);
  CHECK(c.dim == 1);
  CHECK(*c.eps == 0.01);
  CHECK(c.delta == 0.0);
  CHECK(*c.n == 512);
  CHECK(c.t_final == 1.0);
  CHECK(c.cfl == 0.4);
  CHECK(c.snapshots == 32);
  CHECK(c.initial.kind == InitialProfile::Kind::sine);
  CHECK(c.flux_params.bound == 3.0);  // 2 sup|u0| + 1
  CHECK(c.make_flux_x().name() == "burgers");
}

TEST_CASE("delta relation expands per eps") {
  const RunConfig c = parse_config(R"(
mode = "sweep"      # comment
flux = "burgers"
initial = "riemann"
u_left = 1
u_right = 0
center = 0
x_min = -4
x_max = 4
eps_list = [0.04, 0.02,
            0.01]
delta = {K = 1, p = 2}
window = [-1, 2]
)");
  REQUIRE(c.delta_rule.has_value());
  const SweepPlan p = c.sweep_plan();
  CHECK(p.eps_list.size() == 3);
  CHECK(p.delta(0.04) == doctest::Approx(0.0016));
  CHECK(c.delta_for(0.01) == doctest::Approx(1e-4));
  CHECK(p.window == Window{-1.0, 2.0});
  CHECK(*p.profile.center == 0.0);
}

TEST_CASE("constraint violations name the precondition") {
  CHECK_THROWS_WITH_AS(parse_config("mode = \"simulate\"\neps = -1\n"),
                       doctest::Contains("Regularization.eps > 0"), InvalidArgument);
  CHECK_THROWS_WITH_AS(parse_config("mode = \"simulate\"\neps = 0.1\nn = 100\n"),
                       doctest::Contains("power of two"), InvalidArgument);
  CHECK_THROWS_WITH_AS(parse_config("mode = \"sweep\"\neps_list = [0.01, 0.02]\ndelta = {K = 1, p = 2}\n"),
                       doctest::Contains("decreasing"), InvalidArgument);
  CHECK_THROWS_WITH_AS(parse_config("mode = \"simulate\"\neps = 0.1\ncfl = 0\n"),
                       doctest::Contains("cfl"), InvalidArgument);
}

TEST_CASE("unknown keys and types are rejected") {
  CHECK_THROWS_WITH_AS(parse_config("mode = \"simulate\"\neps = 0.1\nepsilon = 2\n"),
                       doctest::Contains("unknown key 'epsilon'"), InvalidArgument);
  CHECK_THROWS_WITH_AS(parse_config("mode = \"simulate\"\neps = \"small\"\n"),
                       doctest::Contains("expects a number"), InvalidArgument);
  CHECK_THROWS_WITH_AS(parse_config("mode = \"sweep\"\neps_list = [0.02, 0.01, 0.005]\ndelta = {K = 1, q = 2}\n"),
                       doctest::Contains("unknown key 'q' in delta"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("eps = 0.1\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("mode = \"explode\"\n"), InvalidArgument);
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse_config("mode = \"simulate\"\neps = 0.1\nn = 5x12\n");
    FAIL("expected a syntax error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 5);
  }
  try {
    parse_config("mode = \"simulate\"\n  eps 0.1\n");
    FAIL("expected a syntax error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 7);
  }
  CHECK_THROWS_AS(parse_document("a = \"unterminated\n"), ConfigError);
  CHECK_THROWS_AS(parse_document("[section]\n"), ConfigError);
  CHECK_THROWS_AS(parse_document("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_document("a = [1, 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_document("a = bare\n"), ConfigError);
}

TEST_CASE("document values") {
  const ConfigTable t = parse_document("s = \"a\\\"b\"\nb = true\nx = -1.5e-3\nt = {xc = 0.25, wt = 0.45}\n");
  CHECK(std::get<std::string>(t.at("s").v) == "a\"b");
  CHECK(std::get<bool>(t.at("b").v));
  CHECK(std::get<double>(t.at("x").v) == -1.5e-3);
  CHECK(std::get<ConfigTable>(t.at("t").v).size() == 2);
}

TEST_CASE("referenced files must exist") {
  CHECK_THROWS_WITH_AS(parse_config("mode = \"simulate\"\neps = 0.1\nflux_table = \"missing.csv\"\n", "/nonexistent"),
                       doctest::Contains("does not exist"), InvalidArgument);
  const RunConfig c = parse_config(
      "mode = \"simulate\"\neps = 0.1\nflux_table = \"flux_cubic.csv\"\nflux_bound = 2\n"
      "initial = \"table\"\ninitial_file = \"initial_bump.csv\"\n",
      DDLAB_TEST_DATA);
  CHECK(c.input_files.size() == 2);
  CHECK(c.make_flux_x().kind() == FluxKind::custom);
  CHECK(c.initial.kind == InitialProfile::Kind::table);
}

TEST_CASE("gamma mode requires theta") {
  const char* base = "mode = \"gamma\"\ninitial = \"riemann\"\ncenter = 0\nx_min = -4\nx_max = 4\n"
                     "eps_list = [0.04, 0.02, 0.01]\ndelta = {K = 1, p = 3}\nwindow = [-1, 2]\n";
  CHECK_THROWS_WITH_AS(parse_config(base), doctest::Contains("theta"), InvalidArgument);
  const RunConfig c = parse_config(std::string(base) + "theta = {xc = 0.25, tc = 0.5, wx = 1, wt = 0.45}\n");
  CHECK(c.theta->wt == 0.45);
}

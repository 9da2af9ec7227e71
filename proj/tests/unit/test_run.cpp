#include <doctest.h>

#include <filesystem>
#include <json.hpp>

#include "ddlab/io.hpp"
#include "ddlab/run.hpp"

using namespace ddlab;
namespace fs = std::filesystem;

namespace {

RunOutcome run_text(const std::string& text, const fs::path& out) {
  fs::remove_all(out);
  RunContext ctx;
  ctx.out_dir = out;
  ctx.config_text = text;
  return run(parse_config(text), ctx);
}

const fs::path kTmp = fs::temp_directory_path() / "ddlab_run_test";

}  // namespace

TEST_CASE("simulate writes solution files and a manifest") {
  const std::string cfg = "mode = \"simulate\"\nflux = \"burgers\"\neps = 0.05\nn = 128\nt = 0.5\nsnapshots = 4\n";
  const RunOutcome r = run_text(cfg, kTmp / "sim");
  CHECK(r.status == ExitStatus::ok);
  const auto snaps = CsvTable::parse(read_file(kTmp / "sim" / "snapshots.csv"));
  CHECK(snaps.rows.size() == 5 * 128);
  const auto m = nlohmann::json::parse(read_file(kTmp / "sim" / "manifest.json"));
  CHECK(m["config_sha256"] == sha256_hex(cfg));
  CHECK(m["outputs"].size() == 3);
  for (const auto& o : m["outputs"])
    CHECK(o["sha256"] == sha256_hex(read_file(kTmp / "sim" / o["name"].get<std::string>())));
  CHECK(fs::exists(kTmp / "sim" / "timing.txt"));

  const std::string first = read_file(kTmp / "sim" / "manifest.json");
  run_text(cfg, kTmp / "sim");
  CHECK(read_file(kTmp / "sim" / "manifest.json") == first);
}

TEST_CASE("blow-up exits with the abort status") {
  const RunOutcome r = run_text(
      "mode = \"simulate\"\nflux = \"cubic\"\neps = 0.0001\nn = 256\nt = 10\ncfl = 1\ndt_max = 5\ndt = 5\n",
      kTmp / "blow");
  CHECK(r.status == ExitStatus::aborted);
  CHECK(r.message.find("abort") != std::string::npos);
}

TEST_CASE("verify-estimates on constant data passes") {
  const RunOutcome r = run_text(
      "mode = \"verify-estimates\"\ninitial = \"constant\"\nvalue = 0.5\neps = 0.01\ndelta = 0.0001\nn = 64\nsnapshots = 32\n",
      kTmp / "const");
  CHECK(r.status == ExitStatus::ok);
  const auto s = nlohmann::json::parse(read_file(kTmp / "const" / "estimates_summary.json"));
  CHECK(s["all_pass"] == true);
}

TEST_CASE("two-dimensional simulate writes the binary dump") {
  const RunOutcome r = run_text(
      "mode = \"simulate\"\ndim = 2\nflux = \"burgers\"\nflux_y = \"linear\"\nx_max = 6.283185307179586\n"
      "y_max = 6.283185307179586\namplitude_y = 0.5\neps = 0.05\nn = 32\nt = 0.2\nsnapshots = 2\n",
      kTmp / "sim2d");
  CHECK(r.status == ExitStatus::ok);
  const Field2D f = read_field2d_binary(read_file(kTmp / "sim2d" / "solution2d.bin"));
  CHECK(f.grid.x.n == 32);
  CHECK(f.time == doctest::Approx(0.2));
}

TEST_CASE("riemann mode writes the fan and the godunov comparison") {
  const RunOutcome r = run_text(
      "mode = \"riemann\"\nflux = \"cubic\"\nu_left = 1\nu_right = -1\nx_min = -4\nx_max = 4\ncenter = 0\n"
      "n = 512\nwindow = [-1, 3.5]\n",
      kTmp / "riemann");
  CHECK(r.status == ExitStatus::ok);
  const auto j = nlohmann::json::parse(read_file(kTmp / "riemann" / "fan.json"));
  CHECK(j["waves"].size() == 2);
  CHECK(j["check"]["ok"] == true);
  CHECK(j["godunov"]["l1_error"].get<double>() < 0.2);
}

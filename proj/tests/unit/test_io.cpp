#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "ddlab/error.hpp"
#include "ddlab/io.hpp"

using namespace ddlab;

TEST_CASE("shortest round-trip formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = d(rng) * std::pow(10.0, i % 40 - 20);
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("CSV round trip is byte-identical") {
  CsvTable t{{"label", "x", "u"}, {}};
  std::mt19937_64 rng(11);
  std::normal_distribution<double> d;
  for (int i = 0; i < 200; ++i) t.add_row({std::string("r") + std::to_string(i % 3), d(rng), d(rng) * 1e-9});
  t.add_row({"edge", std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity()});
  const std::string text = t.to_text();
  const CsvTable back = CsvTable::parse(text);
  CHECK(back.header == t.header);
  CHECK(back.rows.size() == t.rows.size());
  CHECK(back.to_text() == text);
  CHECK_THROWS_AS(t.add_row({1.0}), InvalidArgument);
  CHECK_THROWS_AS(CsvTable::parse("a,b\n1,2\n3\n"), InvalidArgument);
}

TEST_CASE("binary 2D field round trip") {
  const Grid2D g = Grid2D::make({-1.0, 1.0, 16}, {0.0, 3.0, 32});
  Field2D f = sample2d(g, [](double x, double y) { return x * y - 0.25; });
  f.time = 0.75;
  const std::string bytes = field2d_binary(f);
  CHECK(bytes.size() == 8 * (1 + 2 + 5 + 16 * 32));
  CHECK(bytes.substr(0, 7) == "DDLAB2D");
  const Field2D back = read_field2d_binary(bytes);
  CHECK(back.values == f.values);
  CHECK(back.time == 0.75);
  CHECK(back.grid.y.max == 3.0);
  CHECK_THROWS_AS(read_field2d_binary(bytes.substr(0, bytes.size() - 8)), InvalidArgument);
  CHECK_THROWS_AS(read_field2d_binary("XXXXXXXX"), InvalidArgument);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("atomic file writes") {
  const auto dir = std::filesystem::temp_directory_path() / "ddlab_io_test";
  std::filesystem::remove_all(dir);
  write_file(dir / "sub" / "a.txt", "hello\n");
  CHECK(read_file(dir / "sub" / "a.txt") == "hello\n");
  CHECK_FALSE(std::filesystem::exists(dir / "sub" / "a.txt.tmp"));
  CHECK_THROWS_AS(read_file(dir / "missing"), InvalidArgument);
  std::filesystem::remove_all(dir);
}

#pragma once
// Result files: CSV with shortest round-trip numbers, a compact binary dump
// for 2D fields, SHA-256 digests and the run manifest.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ddlab/solver2d.hpp"
#include "ddlab/spectral1d.hpp"

namespace ddlab {

/// Shortest decimal text that parses back to the same double (at most 17
/// significant digits); "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

using CsvCell = std::variant<double, std::string>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<CsvCell>> rows;

  void add_row(std::vector<CsvCell> row);
  std::string to_text() const;
  /// Cells that parse completely as numbers become doubles. Throws
  /// InvalidArgument on ragged rows.
  static CsvTable parse(std::string_view text);
};

/// x,u per node.
CsvTable field_csv(const Field1D& f);
/// t,x,u for every snapshot.
CsvTable snapshots_csv(const Trajectory& traj);
/// x,y,u row-major.
CsvTable field2d_csv(const Field2D& f);

/// Binary layout, little-endian: 8-byte magic "DDLAB2D\0", uint64 nx, uint64 ny,
/// float64 x_min, x_max, y_min, y_max, time, then nx*ny float64 values row-major.
std::string field2d_binary(const Field2D& f);
Field2D read_field2d_binary(std::string_view bytes);

std::string sha256_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& p);
/// Writes through a temporary file and renames it into place.
void write_file(const std::filesystem::path& p, std::string_view bytes);

}  // namespace ddlab

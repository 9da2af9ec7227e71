#include "ddlab/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <system_error>

#include "ddlab/error.hpp"

namespace ddlab {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void CsvTable::add_row(std::vector<CsvCell> row) {
  if (row.size() != header.size()) throw InvalidArgument("CsvTable: row width does not match header");
  rows.push_back(std::move(row));
}

std::string CsvTable::to_text() const {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (const double* d = std::get_if<double>(&row[i]))
        out += format_double(*d);
      else
        out += std::get<std::string>(row[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t c = line.find(',', start);
    cells.emplace_back(line.substr(start, c == std::string_view::npos ? c : c - start));
    if (c == std::string_view::npos) break;
    start = c + 1;
  }
  return cells;
}

CsvCell parse_cell(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (!s.empty() && res.ec == std::errc() && res.ptr == s.data() + s.size()) return v;
  return s;
}

}  // namespace

CsvTable CsvTable::parse(std::string_view text) {
  CsvTable t;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    ++line_no;
    if (line_no == 1) {
      t.header = split(line);
      continue;
    }
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size())
      throw InvalidArgument("CSV line " + std::to_string(line_no) + ": expected " +
                            std::to_string(t.header.size()) + " cells");
    std::vector<CsvCell> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_cell(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable field_csv(const Field1D& f) {
  CsvTable t{{"x", "u"}, {}};
  for (std::size_t j = 0; j < f.grid.n; ++j) t.add_row({f.grid.x(j), f.values[j]});
  return t;
}

CsvTable snapshots_csv(const Trajectory& traj) {
  CsvTable t{{"t", "x", "u"}, {}};
  for (const Field1D& s : traj.snapshots)
    for (std::size_t j = 0; j < s.grid.n; ++j) t.add_row({s.time, s.grid.x(j), s.values[j]});
  return t;
}

CsvTable field2d_csv(const Field2D& f) {
  CsvTable t{{"x", "y", "u"}, {}};
  for (std::size_t i = 0; i < f.grid.x.n; ++i)
    for (std::size_t j = 0; j < f.grid.y.n; ++j)
      t.add_row({f.grid.x.x(i), f.grid.y.x(j), f.at(i, j)});
  return t;
}

namespace {

constexpr char kMagic[8] = {'D', 'D', 'L', 'A', 'B', '2', 'D', '\0'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint64_t get_u64(std::string_view in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw InvalidArgument("binary field: truncated input");
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
  pos += 8;
  return v;
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::string_view in, std::size_t& pos) { return std::bit_cast<double>(get_u64(in, pos)); }

}  // namespace

std::string field2d_binary(const Field2D& f) {
  std::string out(kMagic, sizeof kMagic);
  out.reserve(8 * (8 + f.values.size()));
  put_u64(out, f.grid.x.n);
  put_u64(out, f.grid.y.n);
  for (double v : {f.grid.x.min, f.grid.x.max, f.grid.y.min, f.grid.y.max, f.time}) put_f64(out, v);
  for (double v : f.values) put_f64(out, v);
  return out;
}

Field2D read_field2d_binary(std::string_view bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw InvalidArgument("binary field: bad magic");
  std::size_t pos = sizeof kMagic;
  Axis x, y;
  x.n = get_u64(bytes, pos);
  y.n = get_u64(bytes, pos);
  x.min = get_f64(bytes, pos);
  x.max = get_f64(bytes, pos);
  y.min = get_f64(bytes, pos);
  y.max = get_f64(bytes, pos);
  Field2D f{Grid2D::make(x, y), {}, get_f64(bytes, pos)};
  if (bytes.size() - pos != 8 * f.grid.size()) throw InvalidArgument("binary field: size mismatch");
  f.values.resize(f.grid.size());
  for (double& v : f.values) v = get_f64(bytes, pos);
  return f;
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw std::runtime_error("sha256: digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, std::string_view bytes) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::filesystem::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

}  // namespace ddlab

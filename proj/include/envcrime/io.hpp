#pragma once

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "envcrime/grid.hpp"

namespace envcrime {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FieldFormat { text, packed };

/// Grid raster as stored on disk. Text layout:
///
///     ncols nrows dx dy [xorigin yorigin [nodata]]
///     <nrows lines of ncols values, top row (largest y) first>
///
/// Values are written with 17 significant digits; +inf is the token "inf".
/// The packed layout is "HJBF", a version byte (1), little-endian uint32
/// ncols and nrows, float64 dx and dy, then ncols * nrows float64 values in
/// the same top-row-first order.
struct Raster {
  Grid2D grid;
  ScalarField values;
  double x_origin = 0.0;
  double y_origin = 0.0;
  std::optional<double> nodata;

  bool is_nodata(std::size_t k) const {
    return nodata && (values[k] == *nodata || (std::isnan(*nodata) && std::isnan(values[k])));
  }
};

/// Elevation map; nodata gridpoints form the outside of the domain.
struct ElevationRaster {
  Raster raster;
  DomainMask mask;

  const Grid2D& grid() const { return raster.grid; }
  const ScalarField& z() const { return raster.values; }
};

namespace detail {

inline double parse_number(std::string_view tok, int line) {
  if (tok == "inf" || tok == "+inf" || tok == "Inf") return kInf;
  if (tok == "-inf" || tok == "-Inf") return -kInf;
  if (tok == "nan" || tok == "NaN") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("line " + std::to_string(line) + ": not a number: '" + std::string(tok) + "'");
  return v;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

template <class T>
void put_le(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& is, const std::string& path) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw ParseError(path + ": truncated packed file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

inline Grid2D grid_from_dims(long ncols, long nrows, double dx, double dy, const std::string& where) {
  if (ncols < 3 || nrows < 3) throw ParseError(where + ": raster needs at least 3x3 gridpoints");
  if (!(dx > 0.0) || !(dy > 0.0)) throw ParseError(where + ": spacings must be positive");
  return Grid2D::from_spacing(static_cast<int>(ncols - 1), static_cast<int>(nrows - 1), dx, dy);
}

inline Raster load_packed(std::istream& in, const std::string& path) {
  char magic[4];
  in.read(magic, 4);
  const auto version = get_le<std::uint8_t>(in, path);
  if (version != 1) throw ParseError(path + ": unsupported packed version " + std::to_string(version));
  const auto ncols = get_le<std::uint32_t>(in, path);
  const auto nrows = get_le<std::uint32_t>(in, path);
  const double dx = get_le<double>(in, path), dy = get_le<double>(in, path);
  Raster r;
  r.grid = grid_from_dims(ncols, nrows, dx, dy, path);
  r.values = ScalarField(r.grid);
  for (int jj = 0; jj < r.grid.rows(); ++jj)
    for (int i = 0; i < r.grid.cols(); ++i) r.values(i, r.grid.rows() - 1 - jj) = get_le<double>(in, path);
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError(path + ": trailing bytes after packed values");
  return r;
}

inline Raster load_text(std::istream& in, const std::string& path) {
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!split_ws(line).empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError(path + ": empty file");
  auto head = split_ws(line);
  if (head.size() != 4 && head.size() != 6 && head.size() != 7)
    throw ParseError(path + ": line " + std::to_string(lineno) +
                     ": header must be 'ncols nrows dx dy [xorigin yorigin [nodata]]'");
  auto as_count = [&](std::string_view t) {
    const double v = parse_number(t, lineno);
    if (v != std::floor(v) || v < 0) throw ParseError(path + ": line " + std::to_string(lineno) + ": bad dimension");
    return static_cast<long>(v);
  };
  const long ncols = as_count(head[0]), nrows = as_count(head[1]);
  Raster r;
  r.grid = grid_from_dims(ncols, nrows, parse_number(head[2], lineno), parse_number(head[3], lineno), path);
  if (head.size() >= 6) {
    r.x_origin = parse_number(head[4], lineno);
    r.y_origin = parse_number(head[5], lineno);
  }
  if (head.size() == 7) r.nodata = parse_number(head[6], lineno);
  r.values = ScalarField(r.grid);
  for (long row = 0; row < nrows; ++row) {
    if (!next_line())
      throw ParseError(path + ": expected " + std::to_string(nrows) + " rows, found " + std::to_string(row));
    auto toks = split_ws(line);
    if (static_cast<long>(toks.size()) != ncols)
      throw ParseError(path + ": line " + std::to_string(lineno) + ": expected " + std::to_string(ncols) +
                       " values, found " + std::to_string(toks.size()));
    const int j = static_cast<int>(nrows - 1 - row);
    for (long i = 0; i < ncols; ++i) {
      try {
        r.values(static_cast<int>(i), j) = parse_number(toks[i], lineno);
      } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
      }
    }
  }
  if (next_line()) throw ParseError(path + ": line " + std::to_string(lineno) + ": more rows than the header declares");
  return r;
}

}  // namespace detail

/// Loads a text or packed raster (format detected from the magic bytes).
inline Raster load_raster(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  char magic[4] = {};
  in.read(magic, 4);
  const bool packed = in.gcount() == 4 && std::memcmp(magic, "HJBF", 4) == 0;
  in.clear();
  in.seekg(0);
  return packed ? detail::load_packed(in, path) : detail::load_text(in, path);
}

inline void export_raster(const Raster& r, const std::string& path, FieldFormat format = FieldFormat::text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  const Grid2D& g = r.grid;
  if (format == FieldFormat::packed) {
    out.write("HJBF", 4);
    detail::put_le<std::uint8_t>(out, 1);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.cols()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.rows()));
    detail::put_le<double>(out, g.dx());
    detail::put_le<double>(out, g.dy());
    for (int j = g.rows() - 1; j >= 0; --j)
      for (int i = 0; i < g.cols(); ++i) detail::put_le<double>(out, r.values(i, j));
  } else {
    out << g.cols() << ' ' << g.rows() << ' ' << detail::format_number(g.dx()) << ' ' << detail::format_number(g.dy());
    if (r.nodata || r.x_origin != 0.0 || r.y_origin != 0.0)
      out << ' ' << detail::format_number(r.x_origin) << ' ' << detail::format_number(r.y_origin);
    if (r.nodata) out << ' ' << detail::format_number(*r.nodata);
    out << '\n';
    std::string row;
    for (int j = g.rows() - 1; j >= 0; --j) {
      row.clear();
      for (int i = 0; i < g.cols(); ++i) {
        if (i) row += ' ';
        row += detail::format_number(r.values(i, j));
      }
      row += '\n';
      out << row;
    }
  }
  if (!out.flush()) throw IoError(path + ": write failed");
}

inline void export_field(const ScalarField& field, const std::string& path, FieldFormat format = FieldFormat::text) {
  export_raster(Raster{field.grid(), field, 0.0, 0.0, std::nullopt}, path, format);
}

inline ScalarField load_field(const std::string& path) { return load_raster(path).values; }

inline ScalarField mask_as_field(const DomainMask& mask) {
  ScalarField out(mask.grid());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = mask.inside(k) ? 1.0 : 0.0;
  return out;
}

inline DomainMask mask_from_field(const ScalarField& f) {
  std::vector<std::uint8_t> flags(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) flags[k] = f[k] != 0.0 && !std::isnan(f[k]);
  return DomainMask(f.grid(), std::move(flags));
}

/// Elevation raster whose nodata points are outside the domain. Without any
/// nodata points the outer ring of gridpoints is taken as the outside.
inline ElevationRaster load_elevation(const std::string& path) {
  Raster r = load_raster(path);
  const Grid2D& g = r.grid;
  std::vector<std::uint8_t> inside(g.size(), 0);
  bool any_nodata = false;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const bool nd = r.is_nodata(k);
    any_nodata |= nd;
    inside[k] = !nd;
    if (!nd && !std::isfinite(r.values[k]))
      throw ParseError(path + ": non-finite elevation at gridpoint (" + std::to_string(g.col_of(k)) + ", " +
                       std::to_string(g.row_of(k)) + ")");
  }
  if (!any_nodata)
    for (int j = 0; j < g.rows(); ++j)
      for (int i = 0; i < g.cols(); ++i)
        if (i == 0 || j == 0 || i == g.cols() - 1 || j == g.rows() - 1) inside[g.index(i, j)] = 0;
  DomainMask mask(g, std::move(inside));
  return {std::move(r), std::move(mask)};
}

/// Walking speed from the local grade s = |grad z|: 1.11 exp(-(100 s + 2)^2 / 2345).
inline double speed_from_grade(double s) { return 1.11 * std::exp(-(100.0 * s + 2.0) * (100.0 * s + 2.0) / 2345.0); }

/// Speed field from central differences of z (one-sided where a neighbor is
/// outside the domain or off the grid). Outside points get speed 0.
inline ScalarField speed_from_slope(const ElevationRaster& elev) {
  const Grid2D& g = elev.grid();
  const ScalarField& z = elev.z();
  ScalarField f(g, 0.0);
  auto ok = [&](int i, int j) { return g.valid(i, j) && elev.mask.inside(i, j); };
  auto deriv = [&](int i, int j, int di, int dj, double h) {
    const bool fwd = ok(i + di, j + dj), bwd = ok(i - di, j - dj);
    if (fwd && bwd) return (z(i + di, j + dj) - z(i - di, j - dj)) / (2 * h);
    if (fwd) return (z(i + di, j + dj) - z(i, j)) / h;
    if (bwd) return (z(i, j) - z(i - di, j - dj)) / h;
    return 0.0;
  };
  for (int j = 0; j < g.rows(); ++j)
    for (int i = 0; i < g.cols(); ++i) {
      if (!elev.mask.inside(i, j)) continue;
      const double s = std::hypot(deriv(i, j, 1, 0, g.dx()), deriv(i, j, 0, 1, g.dy()));
      f(i, j) = speed_from_grade(s);
    }
  return f;
}

/// Flat key=value configuration with '#' comments.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open config");
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path + ": line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(path + ": line " + std::to_string(lineno) + ": empty key");
    std::string value = trim(line.substr(eq + 1));
    if (key == "point" && out.count(key)) value = out[key] + ";" + value;
    out[key] = value;
  }
  return out;
}

}  // namespace envcrime

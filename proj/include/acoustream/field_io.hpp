#pragma once

// FieldState files: a data file (raw float64 or CSV) plus a JSON sidecar.
// The byte layout is described in docs/field_format.md.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "error.hpp"
#include "grid.hpp"
#include "keyvalue.hpp"

namespace acoustream {

enum class FieldEncoding { binary, csv };

inline constexpr const char* kFieldColumns[8] = {"x", "y", "z", "vx", "vy", "vz", "p", "rho"};

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void put_le(std::ostream& os, double v) {
  std::uint64_t u = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xffu);
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_le(const unsigned char* b) {
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(u);
}

}  // namespace detail

inline nlohmann::ordered_json field_sidecar(const FieldState& f, FieldEncoding enc,
                                            const std::string& data_file) {
  nlohmann::ordered_json j;
  j["format"] = "acoustream-field";
  j["version"] = 1;
  j["encoding"] = enc == FieldEncoding::binary ? "float64-le" : "csv";
  j["data_file"] = data_file;
  j["columns"] = {"x", "y", "z", "vx", "vy", "vz", "p", "rho"};
  j["order"] = "z-major, then x, y fastest";
  j["nx"] = f.grid.nx;
  j["ny"] = f.grid.ny;
  j["nz"] = f.grid.nz;
  j["lx"] = f.grid.lx;
  j["ly"] = f.grid.ly;
  j["lz"] = f.grid.lz;
  j["x0"] = f.grid.x0;
  j["y0"] = f.grid.y0;
  j["z0"] = f.grid.z0;
  j["time_stamp"] = f.time_stamp;
  return j;
}

// Writes <stem>.bin or <stem>.csv and <stem>.json. Returns the sidecar path.
inline std::filesystem::path write_field(const FieldState& f, const std::filesystem::path& stem,
                                         FieldEncoding enc) {
  f.require_finite();
  const Grid& g = f.grid;
  const std::filesystem::path data = stem.string() + (enc == FieldEncoding::binary ? ".bin" : ".csv");
  const std::filesystem::path side = stem.string() + ".json";
  if (!stem.parent_path().empty()) std::filesystem::create_directories(stem.parent_path());
  std::ofstream os(data, std::ios::binary);
  if (!os) throw Error("cannot write '" + data.string() + "'");
  if (enc == FieldEncoding::csv) os << "x,y,z,vx,vy,vz,p,rho\n";
  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t ix = 0; ix < g.nx; ++ix)
      for (std::size_t iy = 0; iy < g.ny; ++iy) {
        const std::size_t i = g.index(iz, ix, iy);
        const double row[8] = {g.x(ix),  g.y(iy),  g.z(iz),  f.c[0][i],
                               f.c[1][i], f.c[2][i], f.c[3][i], f.c[4][i]};
        if (enc == FieldEncoding::binary) {
          for (double v : row) detail::put_le(os, v);
        } else {
          for (int k = 0; k < 8; ++k) os << (k ? "," : "") << format_double(row[k]);
          os << '\n';
        }
      }
  if (!os) throw Error("write failed for '" + data.string() + "'");
  std::ofstream js(side, std::ios::binary);
  js << field_sidecar(f, enc, data.filename().string()).dump(2) << '\n';
  if (!js) throw Error("write failed for '" + side.string() + "'");
  return side;
}

inline FieldState read_field(const std::filesystem::path& sidecar) {
  std::ifstream js(sidecar, std::ios::binary);
  if (!js) throw Error("cannot open '" + sidecar.string() + "'");
  nlohmann::json j;
  try {
    js >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("field sidecar '" + sidecar.string() + "': " + e.what());
  }
  Grid g;
  std::string enc, data_file;
  double t = 0.0;
  try {
    if (j.at("format").get<std::string>() != "acoustream-field")
      throw SchemaError("field sidecar: unknown format");
    if (j.at("version").get<int>() != 1) throw SchemaError("field sidecar: unsupported version");
    enc = j.at("encoding").get<std::string>();
    data_file = j.at("data_file").get<std::string>();
    g.nx = j.at("nx").get<std::size_t>();
    g.ny = j.at("ny").get<std::size_t>();
    g.nz = j.at("nz").get<std::size_t>();
    g.lx = j.at("lx").get<double>();
    g.ly = j.at("ly").get<double>();
    g.lz = j.at("lz").get<double>();
    g.x0 = j.at("x0").get<double>();
    g.y0 = j.at("y0").get<double>();
    g.z0 = j.at("z0").get<double>();
    t = j.at("time_stamp").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("field sidecar '" + sidecar.string() + "': " + e.what());
  }
  g.validate();
  FieldState f(g);
  f.time_stamp = t;
  const auto data = sidecar.parent_path() / data_file;
  std::ifstream is(data, std::ios::binary);
  if (!is) throw Error("cannot open '" + data.string() + "'");
  auto store = [&](std::size_t n, const double* row) {
    for (int k = 0; k < 8; ++k)
      if (!std::isfinite(row[k]))
        throw DomainError("field file: non-finite value in row " + std::to_string(n) +
                          ", column " + kFieldColumns[k]);
    for (int k = 0; k < 5; ++k) f.c[k][n] = row[3 + k];
  };
  if (enc == "float64-le") {
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(is)), {});
    if (buf.size() != g.size() * 64)
      throw SchemaError("field file: expected " + std::to_string(g.size() * 64) + " bytes, found " +
                        std::to_string(buf.size()));
    for (std::size_t n = 0; n < g.size(); ++n) {
      double row[8];
      for (int k = 0; k < 8; ++k) row[k] = detail::get_le(buf.data() + 64 * n + 8 * k);
      store(n, row);
    }
  } else if (enc == "csv") {
    std::string line;
    std::getline(is, line);
    if (line != "x,y,z,vx,vy,vz,p,rho") throw SchemaError("field csv: bad header", 1);
    std::size_t n = 0;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      if (n >= g.size()) throw SchemaError("field csv: too many rows", static_cast<int>(n + 2));
      std::stringstream ss(line);
      std::string cell;
      double row[8];
      int k = 0;
      while (std::getline(ss, cell, ',')) {
        if (k >= 8) throw SchemaError("field csv: too many columns", static_cast<int>(n + 2));
        auto v = detail::parse_number(cell);
        if (!v) throw SchemaError("field csv: bad number '" + cell + "'", static_cast<int>(n + 2));
        row[k++] = *v;
      }
      if (k != 8) throw SchemaError("field csv: expected 8 columns", static_cast<int>(n + 2));
      store(n, row);
      ++n;
    }
    if (n != g.size()) throw SchemaError("field csv: expected " + std::to_string(g.size()) + " rows");
  } else {
    throw SchemaError("field sidecar: unknown encoding '" + enc + "'");
  }
  return f;
}

}  // namespace acoustream

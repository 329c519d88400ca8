#pragma once

#include "loopforge/field_grid.hpp"
#include "loopforge/geometry.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <variant>

namespace loopforge {

using CurveAny = std::variant<Curve<2>, Curve<3>>;

template <int D>
nlohmann::json curve_to_json(const Curve<D>& c) {
  nlohmann::json j;
  j["dim"] = D;
  j["closed"] = c.closed;
  auto nodes = nlohmann::json::array();
  for (int i = 0; i < c.n_nodes(); ++i) {
    auto row = nlohmann::json::array();
    for (int a = 0; a < D; ++a) row.push_back(c.nodes(a, i));
    nodes.push_back(std::move(row));
  }
  j["nodes"] = std::move(nodes);
  j["corners"] = c.corners;
  return j;
}

namespace detail {
template <int D>
Curve<D> curve_from_json_d(const nlohmann::json& j) {
  const auto& jn = j.at("nodes");
  Points<D> nodes(D, jn.size());
  for (std::size_t i = 0; i < jn.size(); ++i) {
    if (jn[i].size() != D) throw FormatError("node arity mismatch");
    for (int a = 0; a < D; ++a) nodes(a, static_cast<int>(i)) = jn[i][a].get<double>();
  }
  std::vector<int> corners;
  if (j.contains("corners")) corners = j["corners"].get<std::vector<int>>();
  return build_curve<D>(nodes, j.at("closed").get<bool>(), std::move(corners));
}
}  // namespace detail

inline CurveAny curve_from_json(const nlohmann::json& j) {
  const int dim = j.at("dim").get<int>();
  if (dim == 2) return detail::curve_from_json_d<2>(j);
  if (dim == 3) return detail::curve_from_json_d<3>(j);
  throw FormatError("dim must be 2 or 3");
}

inline CurveAny load_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open curve file " + path);
  nlohmann::json j;
  in >> j;
  return curve_from_json(j);
}

template <int D>
void save_curve(const std::string& path, const Curve<D>& c) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write curve file " + path);
  out << curve_to_json(c).dump(2) << "\n";
}

// VFG1 field container: magic "VFG1", then little-endian
//   u32 dim, u32 shape[dim], f64 spacing, f64 origin[dim],
//   f64 samples row-major with dim components interleaved per cell.
namespace detail {
static_assert(std::endian::native == std::endian::little,
              "VFG1 writer assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw FormatError("truncated VFG1 stream");
  return v;
}
}  // namespace detail

template <int D>
void write_vfg(std::ostream& os, const FieldGrid<D>& g) {
  if (g.comps != D) throw FormatError("VFG1 stores exactly dim components per cell");
  os.write("VFG1", 4);
  detail::put<std::uint32_t>(os, D);
  for (int a = 0; a < D; ++a) detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(g.shape[a]));
  detail::put<double>(os, g.h);
  for (int a = 0; a < D; ++a) detail::put<double>(os, g.origin[a]);
  os.write(reinterpret_cast<const char*>(g.data.data()),
           static_cast<std::streamsize>(g.data.size() * sizeof(double)));
  if (!os) throw FormatError("VFG1 write failed");
}

template <int D>
void write_vfg(const std::string& path, const FieldGrid<D>& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write field file " + path);
  write_vfg(out, g);
}

inline std::uint32_t peek_vfg_dim(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "VFG1", 4) != 0) throw FormatError("bad VFG1 magic");
  return detail::get<std::uint32_t>(is);
}

template <int D>
FieldGrid<D> read_vfg_body(std::istream& is) {
  FieldGrid<D> g;
  g.comps = D;
  std::int64_t cells = 1;
  for (int a = 0; a < D; ++a) {
    g.shape[a] = static_cast<int>(detail::get<std::uint32_t>(is));
    if (g.shape[a] <= 0 || g.shape[a] > (1 << 24)) throw FormatError("bad VFG1 shape");
    cells *= g.shape[a];
  }
  g.h = detail::get<double>(is);
  for (int a = 0; a < D; ++a) g.origin[a] = detail::get<double>(is);
  g.data.resize(cells * D);
  is.read(reinterpret_cast<char*>(g.data.data()),
          static_cast<std::streamsize>(g.data.size() * sizeof(double)));
  if (!is) throw FormatError("truncated VFG1 data");
  return g;
}

using FieldAny = std::variant<FieldGrid<2>, FieldGrid<3>>;

inline FieldAny read_vfg(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open field file " + path);
  const std::uint32_t dim = peek_vfg_dim(in);
  if (dim == 2) return read_vfg_body<2>(in);
  if (dim == 3) return read_vfg_body<3>(in);
  throw FormatError("VFG1 dim must be 2 or 3");
}

}  // namespace loopforge

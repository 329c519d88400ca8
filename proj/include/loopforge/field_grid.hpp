#pragma once

#include "loopforge/common.hpp"
#include "loopforge/geometry.hpp"

#include <array>
#include <numeric>

namespace loopforge {

// Uniform cell-centered grid of real vectors: sample i sits at
// origin + h * (i + 1/2) per axis, `comps` doubles interleaved per cell,
// row-major cell order (last axis fastest).
template <int D>
struct FieldGrid {
  std::array<int, D> shape{};
  double h = 0.0;
  Point<D> origin = Point<D>::Zero();
  int comps = D;
  std::vector<double> data;

  static FieldGrid zeros(const std::array<int, D>& shape, double h, const Point<D>& origin, int comps = D) {
    FieldGrid g;
    g.shape = shape;
    g.h = h;
    g.origin = origin;
    g.comps = comps;
    g.data.assign(g.n_cells() * static_cast<std::int64_t>(comps), 0.0);
    return g;
  }

  std::int64_t n_cells() const {
    std::int64_t n = 1;
    for (int a = 0; a < D; ++a) n *= shape[a];
    return n;
  }

  double extent(int axis) const { return shape[axis] * h; }
  double cell_volume() const { return std::pow(h, D); }

  std::int64_t flat(const std::array<int, D>& iv) const {
    std::int64_t f = 0;
    for (int a = 0; a < D; ++a) f = f * shape[a] + iv[a];
    return f;
  }

  std::array<int, D> unflat(std::int64_t f) const {
    std::array<int, D> iv{};
    for (int a = D - 1; a >= 0; --a) {
      iv[a] = static_cast<int>(f % shape[a]);
      f /= shape[a];
    }
    return iv;
  }

  Point<D> cell_center(const std::array<int, D>& iv) const {
    Point<D> x;
    for (int a = 0; a < D; ++a) x[a] = origin[a] + h * (iv[a] + 0.5);
    return x;
  }

  double* cell(std::int64_t f) { return data.data() + f * comps; }
  const double* cell(std::int64_t f) const { return data.data() + f * comps; }

  Eigen::Map<Eigen::VectorXd> cell_vec(std::int64_t f) {
    return Eigen::Map<Eigen::VectorXd>(cell(f), comps);
  }
  Eigen::Map<const Eigen::VectorXd> cell_vec(std::int64_t f) const {
    return Eigen::Map<const Eigen::VectorXd>(cell(f), comps);
  }

  double cell_norm(std::int64_t f) const {
    const double* p = cell(f);
    double s = 0;
    for (int c = 0; c < comps; ++c) s += p[c] * p[c];
    return std::sqrt(s);
  }

  // L1 mass of the cell-wise Euclidean magnitude
  double mass_l1() const {
    double s = 0;
    for (std::int64_t f = 0; f < n_cells(); ++f) s += cell_norm(f);
    return s * cell_volume();
  }

  double max_norm() const {
    double s = 0;
    for (std::int64_t f = 0; f < n_cells(); ++f) s = std::max(s, cell_norm(f));
    return s;
  }
};

// Cube grid covering `box` scaled by `margin` about its center, n cells/axis.
template <int D>
FieldGrid<D> make_grid_covering(const Eigen::AlignedBox<double, D>& box, int n, double margin, int comps = D) {
  if (n < 16) throw GridTooCoarse("grid needs at least 16 cells per axis");
  const Point<D> center = box.center();
  const double extent = margin * box.diagonal().template lpNorm<Eigen::Infinity>();
  std::array<int, D> shape;
  shape.fill(n);
  FieldGrid<D> g = FieldGrid<D>::zeros(shape, extent / n, center - Point<D>::Constant(extent / 2), comps);
  return g;
}

enum class BoundaryMode { Periodic, Interior };

// Central-difference divergence of a D-component field; scalar output grid.
// Interior mode leaves boundary cells at zero rather than wrapping.
template <int D>
FieldGrid<D> divergence(const FieldGrid<D>& g, BoundaryMode mode = BoundaryMode::Periodic) {
  if (g.comps != D) throw BadExponents("divergence needs a D-component field");
  FieldGrid<D> out = FieldGrid<D>::zeros(g.shape, g.h, g.origin, 1);
  const double inv2h = 1.0 / (2.0 * g.h);
  parallel_for(g.n_cells(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t f = lo; f < hi; ++f) {
      auto iv = g.unflat(f);
      double div = 0;
      bool boundary = false;
      for (int a = 0; a < D; ++a) {
        auto up = iv, dn = iv;
        if (iv[a] + 1 >= g.shape[a] || iv[a] == 0) {
          boundary = true;
          up[a] = (iv[a] + 1) % g.shape[a];
          dn[a] = (iv[a] - 1 + g.shape[a]) % g.shape[a];
        } else {
          up[a] = iv[a] + 1;
          dn[a] = iv[a] - 1;
        }
        div += (g.cell(g.flat(up))[a] - g.cell(g.flat(dn))[a]) * inv2h;
      }
      if (boundary && mode == BoundaryMode::Interior) div = 0;
      out.cell(f)[0] = div;
    }
  });
  return out;
}

template <int D>
double max_abs_divergence(const FieldGrid<D>& g, BoundaryMode mode = BoundaryMode::Periodic) {
  FieldGrid<D> d = divergence(g, mode);
  double m = 0;
  for (double v : d.data) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace loopforge

#pragma once

#include "loopforge/field_grid.hpp"
#include "loopforge/geometry.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace loopforge {

namespace detail {

// C2 Wendland bump on [-1,1] with unit integral
inline double wendland(double u) {
  const double a = std::abs(u);
  if (a >= 1.0) return 0.0;
  const double b = 1.0 - a;
  return 1.5 * b * b * b * b * (4.0 * a + 1.0);
}

inline constexpr std::array<double, 3> gl3_nodes{0.1127016653792583, 0.5,
                                                 0.8872983346207417};
inline constexpr std::array<double, 3> gl3_weights{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

template <int D>
void require_clearance(const Eigen::AlignedBox<double, D>& box, double width,
                       const FieldGrid<D>& g) {
  // the mollified support must keep 4h of zero cells inside the window so the
  // divergence stencil never reads truncated data
  const double clearance = width + 4 * g.h;
  for (int a = 0; a < D; ++a) {
    if (box.min()[a] - clearance < g.origin[a] ||
        box.max()[a] + clearance > g.origin[a] + g.h * g.shape[a])
      throw OutOfRange("loop_current: support too close to the grid boundary");
  }
}

// adds scale * phi_width(. - y) * v to the cells whose centers see the bump
template <int D>
void scatter_bump(FieldGrid<D>& F, const Point<D>& y, double width,
                  const Point<D>& v) {
  std::array<int, D> lo, hi;
  for (int a = 0; a < D; ++a) {
    lo[a] = static_cast<int>(std::ceil((y[a] - width - F.origin[a]) / F.h - 0.5));
    hi[a] = static_cast<int>(std::floor((y[a] + width - F.origin[a]) / F.h - 0.5));
    lo[a] = std::max(lo[a], 0);
    hi[a] = std::min(hi[a], F.shape[a] - 1);
    if (lo[a] > hi[a]) return;
  }
  std::array<int, D> iv = lo;
  while (true) {
    double phi = 1.0;
    for (int a = 0; a < D; ++a)
      phi *= wendland((F.origin[a] + F.h * (iv[a] + 0.5) - y[a]) / width) / width;
    if (phi != 0.0) {
      double* cell = F.cell(F.flat(iv));
      for (int a = 0; a < D; ++a) cell[a] += phi * v[a];
    }
    int a = D - 1;
    while (a >= 0 && ++iv[a] > hi[a]) iv[a--] = lo[a];
    if (a < 0) break;
  }
}

template <int D>
void accumulate_current(FieldGrid<D>& F, const CurrentMeasure<D>& mu, double width,
                        double scale) {
  for (const auto& seg : mu.segments) {
    const Point<D> d = seg.b - seg.a;
    const double len = d.norm();
    if (len == 0.0 || seg.weight == 0.0) continue;
    const int n_sub = std::max<int>(1, static_cast<int>(std::ceil(len / (F.h / 2))));
    const Point<D> tangent = d / len;
    const double sub_len = len / n_sub;
    for (int s = 0; s < n_sub; ++s) {
      for (int k = 0; k < 3; ++k) {
        const double u = (s + gl3_nodes[k]) / n_sub;
        const Point<D> y = seg.a + u * d;
        const Point<D> v = (scale * seg.weight * sub_len * gl3_weights[k]) * tangent;
        scatter_bump(F, y, width, v);
      }
    }
  }
}

}  // namespace detail

// Mollified loop current F = mu_Gamma * phi_width on the geometry of `like`.
// The bump is a tensor product of 1-d Wendland C2 kernels, so F is C2,
// compactly supported, and carries mass |Gamma| up to quadrature error.
template <int D>
FieldGrid<D> loop_current(const Curve<D>& curve, double width,
                          const FieldGrid<D>& like) {
  if (!(width >= 2 * like.h))
    throw WidthTooSmall("loop_current: width must be at least 2h");
  detail::require_clearance(bounding_box(curve), width, like);
  FieldGrid<D> F = FieldGrid<D>::zeros(like.shape, like.h, like.origin, D);
  detail::accumulate_current(F, measure_of(curve), width, 1.0);
  return F;
}

// Weighted superposition of mollified loop currents on a shared grid.
template <int D>
FieldGrid<D> smirnov_superpose(const std::vector<Curve<D>>& curves,
                               const std::vector<double>& weights, double width,
                               const FieldGrid<D>& like) {
  if (curves.size() != weights.size())
    throw OutOfRange("smirnov_superpose: one weight per curve");
  if (!(width >= 2 * like.h))
    throw WidthTooSmall("smirnov_superpose: width must be at least 2h");
  FieldGrid<D> F = FieldGrid<D>::zeros(like.shape, like.h, like.origin, D);
  for (std::size_t i = 0; i < curves.size(); ++i) {
    detail::require_clearance(bounding_box(curves[i]), width, like);
    detail::accumulate_current(F, measure_of(curves[i]), width, weights[i]);
  }
  return F;
}

// Mollified unit point masses f_eps centered at x0, one scalar grid per
// epsilon, each normalized to unit discrete L1 mass. Feeding these through
// the same pipeline as loop currents exhibits the Dirac blow-up that rules
// out the naive all-measures version of the embedding.
template <int D>
std::vector<FieldGrid<D>> dirac_family(const Point<D>& x0,
                                       const std::vector<double>& epsilons,
                                       const FieldGrid<D>& like) {
  std::vector<FieldGrid<D>> out;
  out.reserve(epsilons.size());
  for (const double eps : epsilons) {
    if (!(eps >= 2 * like.h))
      throw WidthTooSmall("dirac_family: epsilon must be at least 2h");
    Eigen::AlignedBox<double, D> pt(x0, x0);
    detail::require_clearance(pt, eps, like);
    FieldGrid<D> f = FieldGrid<D>::zeros(like.shape, like.h, like.origin, 1);
    for (std::int64_t idx = 0; idx < f.n_cells(); ++idx) {
      const Point<D> c = f.cell_center(f.unflat(idx));
      double phi = 1.0;
      for (int a = 0; a < D; ++a) phi *= detail::wendland((c[a] - x0[a]) / eps) / eps;
      f.data[static_cast<std::size_t>(idx)] = phi;
    }
    const double mass = f.mass_l1();
    if (mass <= 0.0) throw OutOfRange("dirac_family: empty mollified mass");
    for (double& v : f.data) v /= mass;
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace loopforge

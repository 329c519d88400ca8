#pragma once

#include "loopforge/field_grid.hpp"

#include <bit>
#include <mutex>

namespace loopforge {

struct BmoScaleRow {
  int side_cells = 0;
  double side_length = 0;
  double max_oscillation = 0;
};

struct BmoEstimate {
  double value = 0;
  std::vector<BmoScaleRow> scales;
};

namespace detail {

// Per-component inclusion-exclusion sums: P[iv] holds the sum over all cells
// with index strictly below iv in every axis.
template <int D>
struct CellPrefixSums {
  std::array<int, D> ext{};
  int comps = 0;
  std::vector<double> P;

  explicit CellPrefixSums(const FieldGrid<D>& g) : comps(g.comps) {
    std::int64_t total = comps;
    for (int a = 0; a < D; ++a) {
      ext[a] = g.shape[a] + 1;
      total *= ext[a];
    }
    P.assign(total, 0.0);
    for (std::int64_t f = 0; f < g.n_cells(); ++f) {
      const auto iv = g.unflat(f);
      std::int64_t pf = 0;
      for (int a = 0; a < D; ++a) pf = pf * ext[a] + (iv[a] + 1);
      const double* src = g.cell(f);
      for (int c = 0; c < comps; ++c) P[pf * comps + c] = src[c];
    }
    // running sums axis by axis
    for (int a = 0; a < D; ++a) {
      std::int64_t inner = comps;
      for (int b = a + 1; b < D; ++b) inner *= ext[b];
      std::int64_t outer = 1;
      for (int b = 0; b < a; ++b) outer *= ext[b];
      for (std::int64_t o = 0; o < outer; ++o)
        for (int i = 1; i < ext[a]; ++i) {
          double* cur = P.data() + (o * ext[a] + i) * inner;
          const double* prev = cur - inner;
          for (std::int64_t k = 0; k < inner; ++k) cur[k] += prev[k];
        }
    }
  }

  // componentwise sum over the cell box [o, o+side) in every axis
  void box_sum(const std::array<int, D>& o, int side, double* out) const {
    for (int c = 0; c < comps; ++c) out[c] = 0;
    for (unsigned mask = 0; mask < (1u << D); ++mask) {
      std::int64_t pf = 0;
      for (int a = 0; a < D; ++a) pf = pf * ext[a] + (((mask >> a) & 1u) ? o[a] + side : o[a]);
      const double sgn = ((D - std::popcount(mask)) % 2 == 0) ? 1.0 : -1.0;
      const double* p = P.data() + pf * comps;
      for (int c = 0; c < comps; ++c) out[c] += sgn * p[c];
    }
  }
};

}  // namespace detail

// Mean oscillation max_Q (1/|Q|) int_Q |f - f_Q| over grid-aligned dyadic
// cubes, every translate at each scale, sides 4 cells up to the grid. Cubes
// not aligned to the grid are not scanned, so this is a lower bound for the
// true BMO seminorm; dilation stability is the meaningful check, not the
// absolute value.
template <int D>
BmoEstimate bmo_estimate(const FieldGrid<D>& g, int min_scales = 5) {
  int min_shape = g.shape[0];
  for (int a = 1; a < D; ++a) min_shape = std::min(min_shape, g.shape[a]);
  std::vector<int> sides;
  for (int s = 4; s <= min_shape; s *= 2) sides.push_back(s);
  if (static_cast<int>(sides.size()) < min_scales)
    throw GridTooCoarse("bmo_estimate: fewer than " + std::to_string(min_scales) +
                        " dyadic scales fit the grid");

  const detail::CellPrefixSums<D> ps(g);
  const int comps = g.comps;
  BmoEstimate est;
  for (int side : sides) {
    std::array<int, D> counts{};
    std::int64_t n_cubes = 1;
    for (int a = 0; a < D; ++a) {
      counts[a] = g.shape[a] - side + 1;
      n_cubes *= counts[a];
    }
    std::int64_t cells = 1;
    for (int a = 0; a < D; ++a) cells *= side;
    const double inv_cells = 1.0 / static_cast<double>(cells);

    double scale_max = 0;
    std::mutex merge;
    parallel_for(n_cubes, [&](std::int64_t lo, std::int64_t hi) {
      std::vector<double> mean(comps);
      double local = 0;
      for (std::int64_t cu = lo; cu < hi; ++cu) {
        std::array<int, D> o{};
        std::int64_t rest = cu;
        for (int a = D - 1; a >= 0; --a) {
          o[a] = static_cast<int>(rest % counts[a]);
          rest /= counts[a];
        }
        ps.box_sum(o, side, mean.data());
        for (int c = 0; c < comps; ++c) mean[c] *= inv_cells;

        double osc = 0;
        std::array<int, D> it{};
        for (;;) {
          std::int64_t f = 0;
          for (int a = 0; a < D; ++a) f = f * g.shape[a] + o[a] + (a < D - 1 ? it[a] : 0);
          const double* p = g.data.data() + f * comps;
          for (int k = 0; k < side; ++k, p += comps) {
            double s2 = 0;
            for (int c = 0; c < comps; ++c) {
              const double dv = p[c] - mean[c];
              s2 += dv * dv;
            }
            osc += std::sqrt(s2);
          }
          int a = D - 2;
          for (; a >= 0; --a) {
            if (++it[a] < side) break;
            it[a] = 0;
          }
          if (a < 0) break;
        }
        local = std::max(local, osc * inv_cells);
      }
      std::lock_guard<std::mutex> lk(merge);
      scale_max = std::max(scale_max, local);
    }, 64);
    est.scales.push_back({side, side * g.h, scale_max});
    est.value = std::max(est.value, scale_max);
  }
  return est;
}

}  // namespace loopforge

#pragma once

#include "loopforge/geometry.hpp"

#include <limits>

namespace loopforge {

enum class CenterStrategy { OnCurveNodes, NodesAndGrid };

struct BallGrowthSampling {
  CenterStrategy centers = CenterStrategy::NodesAndGrid;
  double ladder_ratio = 1.1;
  int refinement_rounds = 3;
  int max_centers = 600;   // node/midpoint subsample budget
  int grid_per_axis = 5;   // bounding-box grid when NodesAndGrid
};

// lower: max observed mass(B_r(x))/r, a certified lower bound on the sup.
// upper: bracket from Lipschitz perturbation of centers. Any ball B_r(x) with
// positive mass satisfies mass(B_r(x)) <= mass(B_2r(p)) for an on-support p,
// so sup_x <= 2 sup_{p on support}; on-support centers within chord distance
// Delta of a sampled one give mass(B_r(p)) <= mass(B_{r_next + Delta}(c)).
// Radii below the ladder are covered by a strand-count bound: each segment
// meets B_r in a chord of length <= 2r.
struct BallGrowthEstimate {
  double lower = 0;
  double upper = 0;
  double argmax_r = 0;
};

template <int D>
BallGrowthEstimate ball_growth_constant(const CurrentMeasure<D>& mu,
                                        const BallGrowthSampling& cfg = {}) {
  if (mu.segments.empty()) throw EmptyMeasure("ball growth of empty measure");

  // candidate centers: segment endpoints and midpoints (subsampled), plus an
  // optional coarse bounding-box grid for off-support maxima
  std::vector<Point<D>> support_pts;
  support_pts.reserve(2 * mu.segments.size());
  Eigen::AlignedBox<double, D> box;
  double min_edge = std::numeric_limits<double>::max();
  double max_edge = 0;
  for (const auto& s : mu.segments) {
    support_pts.push_back(s.a);
    support_pts.push_back(Point<D>(0.5 * (s.a + s.b)));
    box.extend(s.a);
    box.extend(s.b);
    const double len = (s.b - s.a).norm();
    min_edge = std::min(min_edge, len);
    max_edge = std::max(max_edge, len);
  }
  const double diam = std::max(box.diagonal().norm(), min_edge);

  const int stride = std::max<int>(1, static_cast<int>(support_pts.size()) / cfg.max_centers);
  std::vector<Point<D>> centers;
  for (std::size_t i = 0; i < support_pts.size(); i += stride) centers.push_back(support_pts[i]);
  // covering radius of the kept set over the support: consecutive support
  // samples sit half an edge apart along the polyline, so skipping stride-1
  // of them leaves path gaps of at most (stride+1) * max_edge / 2
  const double cover = 0.25 * (stride + 1) * max_edge;
  const std::size_t n_support_centers = centers.size();
  if (cfg.centers == CenterStrategy::NodesAndGrid) {
    const int g = cfg.grid_per_axis;
    std::array<int, D> iv{};
    for (;;) {
      Point<D> p;
      for (int a = 0; a < D; ++a)
        p[a] = box.min()[a] + box.diagonal()[a] * (iv[a] + 0.5) / g;
      centers.push_back(p);
      int a = D - 1;
      while (a >= 0 && ++iv[a] == g) iv[a--] = 0;
      if (a < 0) break;
    }
  }

  const double r_min = std::min(min_edge, diam / 4);
  const double r_max = 1.05 * diam;
  std::vector<double> ladder;
  for (double r = r_min; r < r_max * cfg.ladder_ratio; r *= cfg.ladder_ratio) ladder.push_back(r);

  struct Best {
    double ratio = 0, r = 0;
    Point<D> c = Point<D>::Zero();
  };
  std::vector<Best> per_center(centers.size());
  std::vector<double> per_center_upper(n_support_centers, 0.0);
  parallel_for_each(static_cast<std::int64_t>(centers.size()), [&](std::int64_t i) {
    Best b;
    b.c = centers[i];
    for (std::size_t k = 0; k < ladder.size(); ++k) {
      const double m = mass_in_ball(mu, centers[i], ladder[k]);
      const double ratio = m / ladder[k];
      if (ratio > b.ratio) { b.ratio = ratio; b.r = ladder[k]; }
      if (i < static_cast<std::int64_t>(n_support_centers) && k > 0) {
        // bracket for any on-support center within `cover` and r in
        // [ladder[k-1], ladder[k]]
        const double mu_up = mass_in_ball(mu, centers[i], ladder[k] + cover);
        per_center_upper[i] = std::max(per_center_upper[i], mu_up / ladder[k - 1]);
      }
    }
    per_center[i] = b;
  });

  Best best;
  for (const auto& b : per_center)
    if (b.ratio > best.ratio) best = b;

  // local refinement with a shrinking radius bracket; center jitter only for
  // the unconstrained strategy (OnCurveNodes must keep centers on the curve)
  double fac = cfg.ladder_ratio;
  for (int round = 0; round < cfg.refinement_rounds; ++round) {
    const double lo = best.r / fac, hi = best.r * fac;
    Best improved = best;
    for (int k = 0; k <= 16; ++k) {
      const double r = lo + (hi - lo) * k / 16.0;
      std::vector<Point<D>> cands = {best.c};
      if (cfg.centers == CenterStrategy::NodesAndGrid) {
        for (int a = 0; a < D; ++a) {
          Point<D> e = Point<D>::Zero();
          e[a] = 0.02 * r;
          cands.push_back(best.c + e);
          cands.push_back(best.c - e);
        }
      }
      for (const auto& c : cands) {
        const double ratio = mass_in_ball(mu, c, r) / r;
        if (ratio > improved.ratio) { improved.ratio = ratio; improved.r = r; improved.c = c; }
      }
    }
    best = improved;
    fac = std::pow(fac, 2.0 / 16.0);
  }

  double ladder_upper = 0;
  for (std::size_t i = 0; i < n_support_centers; ++i)
    ladder_upper = std::max(ladder_upper, per_center_upper[i]);

  // strand-count bound for radii below the ladder: a ball of radius rho <=
  // r_min around an on-support point meets only segments within r_min + cover
  // of the nearest kept center, and each contributes a chord of at most 2 rho
  int max_strands = 0;
  for (std::size_t i = 0; i < n_support_centers; ++i) {
    int cnt = 0;
    for (const auto& s : mu.segments) {
      const Point<D> d = s.b - s.a;
      const double a2 = d.squaredNorm();
      double u = a2 > 0 ? std::clamp((centers[i] - s.a).dot(d) / a2, 0.0, 1.0) : 0.0;
      if ((centers[i] - (s.a + u * d)).norm() <= r_min + cover) ++cnt;
    }
    max_strands = std::max(max_strands, cnt);
  }

  BallGrowthEstimate out;
  out.lower = best.ratio;
  out.argmax_r = best.r;
  out.upper = 2.0 * std::max(ladder_upper, 2.0 * max_strands);
  out.upper = std::max(out.upper, out.lower);
  return out;
}

}  // namespace loopforge

#pragma once

#include "loopforge/bmo.hpp"
#include "loopforge/heat.hpp"
#include "loopforge/riesz.hpp"

namespace loopforge {

// Lattice of evaluation points over box_scale times the measure's bounding
// box, dropping points closer than `clearance` to the support.
template <int D>
std::vector<Point<D>> sample_point_lattice(const CurrentMeasure<D>& mu, int per_axis,
                                           double box_scale, double clearance) {
  if (mu.segments.empty()) throw EmptyMeasure("sample_point_lattice: empty measure");
  Eigen::AlignedBox<double, D> box;
  for (const auto& s : mu.segments) {
    box.extend(s.a);
    box.extend(s.b);
  }
  const Point<D> c = box.center();
  const double half = 0.5 * box_scale * box.diagonal().template lpNorm<Eigen::Infinity>();
  std::vector<Point<D>> pts;
  std::array<int, D> it{};
  for (;;) {
    Point<D> x;
    for (int a = 0; a < D; ++a) x[a] = c[a] - half + 2 * half * (it[a] + 0.5) / per_axis;
    if (distance_to_support(mu, x) > clearance) pts.push_back(x);
    int a = D - 1;
    for (; a >= 0; --a) {
      if (++it[a] < per_axis) break;
      it[a] = 0;
    }
    if (a < 0) break;
  }
  return pts;
}

struct SurfaceConstantEstimate {
  double c_max = 0;
  Point<3> argmax_x = Point<3>::Zero();
  double argmax_t = 0;
};

// Empirical dimensional constant in |p_t * dGamma| <= c(d) |grad p_t| * ||S||:
// the max pointwise ratio over the probe points and a log ladder in t. The
// contraction of a gradient against a unit 2-plane keeps the true constant
// at most 1; the measurement should land below that.
inline SurfaceConstantEstimate measure_surface_constant(const CurrentMeasure<3>& mu,
                                                        const SurfaceMeasure<3>& S,
                                                        const std::vector<Point<3>>& points,
                                                        int n_t = 32, double t_lo_factor = 1e-4,
                                                        double t_hi_factor = 1e2) {
  Eigen::AlignedBox<double, 3> box;
  for (const auto& s : mu.segments) {
    box.extend(s.a);
    box.extend(s.b);
  }
  const double diam2 = std::max(box.diagonal().squaredNorm(), 1e-300);
  const double lo = std::log(t_lo_factor * diam2), hi = std::log(t_hi_factor * diam2);

  struct Best {
    double ratio = 0, t = 0;
  };
  std::vector<Best> per_point(points.size());
  parallel_for_each(points.size(), [&](std::int64_t i) {
    std::vector<double> num(n_t), den(n_t);
    double den_max = 0;
    for (int k = 0; k < n_t; ++k) {
      const double t = std::exp(lo + (hi - lo) * (k + 0.5) / n_t);
      den[k] = grad_heat_convolve_surface(S, points[i], t, 48, 0.4);
      num[k] = heat_convolve_measure(mu, points[i], t).norm();
      den_max = std::max(den_max, den[k]);
    }
    Best b;
    for (int k = 0; k < n_t; ++k) {
      // deep in the Gaussian tail both sides are quadrature noise; only
      // ratios at a meaningful denominator scale are evidence
      if (den[k] < 1e-8 * den_max) continue;
      const double r = num[k] / den[k];
      if (r > b.ratio) b = {r, std::exp(lo + (hi - lo) * (k + 0.5) / n_t)};
    }
    per_point[i] = b;
  }, 1);

  SurfaceConstantEstimate est;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (per_point[i].ratio > est.c_max) {
      est.c_max = per_point[i].ratio;
      est.argmax_x = points[i];
      est.argmax_t = per_point[i].t;
    }
  return est;
}

// C1 = 2 Gamma(a/2+1)^{-(1-a)} (c_dim / (Gamma(a/2)(1/2 - a/2)))^a, the
// constant obtained by cutting the semigroup integral at r = (M2/M1)^2.
inline double lemma1_constant(double alpha, double c_dim) {
  if (!(alpha > 0 && alpha < 1)) throw AlphaOutOfRange("pointwise bound needs alpha in (0,1)");
  return 2.0 / std::pow(std::tgamma(alpha / 2 + 1), 1 - alpha) *
         std::pow(c_dim / (std::tgamma(alpha / 2) * (0.5 - alpha / 2)), alpha);
}

struct PointwiseLemmaReport {
  double alpha = 0;
  double c_dim = 0;
  double constant = 0;
  std::size_t n_points = 0;
  double worst_margin = std::numeric_limits<double>::infinity();  // min of 1 - lhs/rhs
  double worst_lhs = 0, worst_rhs = 0;
  Point<3> worst_point = Point<3>::Zero();
  bool all_hold = false;
};

// Both sides of |I_alpha mu| <= C1 M1^{1-alpha} M2^alpha at each point.
// Pass c_dim from a previous measurement to skip the ratio scan.
inline PointwiseLemmaReport check_lemma_pointwise_global(const Curve<3>& curve,
                                                         const SurfaceMeasure<3>& S, double alpha,
                                                         const std::vector<Point<3>>& points,
                                                         double c_dim = 0.0) {
  const auto mu = measure_of(curve);
  if (c_dim <= 0) {
    std::vector<Point<3>> probe;
    const std::size_t stride = std::max<std::size_t>(1, points.size() / 48);
    for (std::size_t i = 0; i < points.size(); i += stride) probe.push_back(points[i]);
    c_dim = measure_surface_constant(mu, S, probe).c_max;
  }

  PointwiseLemmaReport rep;
  rep.alpha = alpha;
  rep.c_dim = c_dim;
  rep.constant = lemma1_constant(alpha, c_dim);
  rep.n_points = points.size();

  std::vector<double> lhs(points.size()), rhs(points.size());
  parallel_for_each(points.size(), [&](std::int64_t i) {
    lhs[i] = riesz_direct(mu, points[i], alpha).norm();
    const double m1 = maximal_M1(mu, points[i], 160).value;
    // the margins this feeds carry tens of percent of slack, so the surface
    // quadrature can run coarse (relative error well under a percent)
    const double m2 = maximal_M2(S, points[i], 64, 1e-6, 1e3, 0.4).value;
    rhs[i] = rep.constant * std::pow(m1, 1 - alpha) * std::pow(m2, alpha);
  }, 1);

  for (std::size_t i = 0; i < points.size(); ++i) {
    const double margin = 1 - lhs[i] / rhs[i];
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_lhs = lhs[i];
      rep.worst_rhs = rhs[i];
      rep.worst_point = points[i];
    }
  }
  rep.all_hold = rep.worst_margin >= 0 && points.size() > 0;
  return rep;
}

template <int D>
struct InterpolationLemmaReport {
  double alpha = 0;
  double theta = 0;  // alpha / (d-1), the BMO exponent
  double bmo = 0;
  double c2_measured = 0;
  std::size_t n_points = 0;
  bool unstable_exponent = false;
  Point<D> worst_point = Point<D>::Zero();
  BmoEstimate bmo_table;
};

// Samples I_{d-1} mu on a cube grid (grid_scale x bounding box, grid_n cells
// per axis) for the BMO factor, then measures the best constant C2 in
// |I_alpha mu| <= C2 M1^{1-theta} BMO^theta over the sample points.
template <int D>
InterpolationLemmaReport<D> check_lemma_interpolation1(const Curve<D>& curve, double alpha,
                                                       const std::vector<Point<D>>& points,
                                                       int grid_n = 64, double grid_scale = 4.0,
                                                       const BmoEstimate* precomputed_bmo = nullptr) {
  if (!(alpha > 0 && alpha < D - 1))
    throw AlphaOutOfRange("interpolation bound needs alpha in (0, d-1)");
  const auto mu = measure_of(curve);
  const double scale = std::max(curve_diameter(curve), 1e-30);

  InterpolationLemmaReport<D> rep;
  rep.alpha = alpha;
  rep.theta = alpha / (D - 1);
  rep.unstable_exponent = rep.theta > 0.95;
  rep.n_points = points.size();

  if (precomputed_bmo) {
    rep.bmo_table = *precomputed_bmo;
  } else {
    FieldGrid<D> g = make_grid_covering(bounding_box(curve), grid_n, grid_scale, D);
    parallel_for_each(g.n_cells(), [&](std::int64_t f) {
      Point<D> x = g.cell_center(g.unflat(f));
      if (distance_to_support(mu, x) <= 2e-9 * std::max(scale, 1.0)) x[0] += 1e-6 * g.h;
      const Point<D> v = riesz_direct(mu, x, static_cast<double>(D - 1));
      for (int c = 0; c < D; ++c) g.cell(f)[c] = v[c];
    });
    rep.bmo_table = bmo_estimate(g);
  }
  rep.bmo = rep.bmo_table.value;

  std::vector<double> ratio(points.size());
  parallel_for_each(points.size(), [&](std::int64_t i) {
    const double lhs = riesz_direct(mu, points[i], alpha).norm();
    const double m1 = maximal_M1(mu, points[i]).value;
    ratio[i] = lhs / (std::pow(m1, 1 - rep.theta) * std::pow(rep.bmo, rep.theta));
  }, 1);
  for (std::size_t i = 0; i < points.size(); ++i)
    if (ratio[i] > rep.c2_measured) {
      rep.c2_measured = ratio[i];
      rep.worst_point = points[i];
    }
  return rep;
}

struct WeakTypeEstimate {
  double constant = 0;  // max over s of s |{M1 > s}| / mass
  double s_argmax = 0;
};

// Weak-type (1,1) behaviour of M1 on a grid window: level-set volumes of the
// maximal function against the measure mass. Cells inside the 2h tube around
// the support are excluded (the usual grid-norm convention): there M1 scales
// like 1/dist and a single lucky cell center would dominate the sup with a
// quantization artifact instead of a resolved level set. Window truncation
// and the tube both only lose level-set volume, so the estimate is a lower
// bound for the true constant.
template <int D>
WeakTypeEstimate weak_type_m1_constant(const Curve<D>& curve, int grid_n = 48,
                                       double grid_scale = 4.0, int n_levels = 160) {
  const auto mu = measure_of(curve);
  FieldGrid<D> g = make_grid_covering(bounding_box(curve), grid_n, grid_scale, 1);
  parallel_for_each(g.n_cells(), [&](std::int64_t f) {
    const Point<D> x = g.cell_center(g.unflat(f));
    if (distance_to_support(mu, x) <= 2 * g.h) return;
    g.cell(f)[0] = maximal_M1(mu, x, 120).value;
  });

  const double mass = mu.total_mass();
  double vmax = 0;
  for (double v : g.data) vmax = std::max(vmax, v);
  WeakTypeEstimate est;
  for (int k = 0; k < n_levels; ++k) {
    const double s = vmax * std::pow(300.0, -1.0 + static_cast<double>(k) / n_levels);
    std::int64_t count = 0;
    for (double v : g.data) count += v > s;
    const double c = s * count * g.cell_volume() / mass;
    if (c > est.constant) {
      est.constant = c;
      est.s_argmax = s;
    }
  }
  return est;
}

}  // namespace loopforge

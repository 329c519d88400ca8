#pragma once

#include "loopforge/geometry.hpp"

#include <cmath>
#include <functional>

namespace loopforge {
namespace fixtures {

namespace detail {

// Walk a densely sampled parametric curve and emit nodes at (nearly) uniform
// arclength spacing 1/spu. Dense sampling is 8x finer than the target so the
// chord-length walk is an accurate arclength proxy.
template <int D>
Points<D> resample_arclength(const std::function<Point<D>(double)>& f, double t0, double t1,
                             double spu, bool closed) {
  double coarse_len = 0;
  {
    const int probe = 512;
    Point<D> prev = f(t0);
    for (int i = 1; i <= probe; ++i) {
      Point<D> p = f(t0 + (t1 - t0) * i / probe);
      coarse_len += (p - prev).norm();
      prev = p;
    }
  }
  const int target_nodes = std::max(16, static_cast<int>(std::lround(coarse_len * spu)));
  const int dense = target_nodes * 8;
  std::vector<Point<D>> pts(dense + 1);
  for (int i = 0; i <= dense; ++i) pts[i] = f(t0 + (t1 - t0) * i / dense);
  std::vector<double> s(dense + 1, 0.0);
  for (int i = 1; i <= dense; ++i) s[i] = s[i - 1] + (pts[i] - pts[i - 1]).norm();
  const double total = s[dense];
  const int n_out = closed ? target_nodes : target_nodes + 1;
  Points<D> out(D, n_out);
  const double step = total / target_nodes;
  int j = 0;
  for (int k = 0; k < n_out; ++k) {
    const double sk = std::min(step * k, total);
    while (j + 1 < dense && s[j + 1] < sk) ++j;
    const double seg = s[j + 1] - s[j];
    const double u = seg > 0 ? (sk - s[j]) / seg : 0.0;
    out.col(k) = pts[j] + u * (pts[j + 1] - pts[j]);
  }
  return out;
}

}  // namespace detail

inline Curve<2> circle(double radius = 1.0, double spu = 512.0, const Point<2>& center = Point<2>::Zero()) {
  const int n = std::max(16, static_cast<int>(std::lround(2 * M_PI * radius * spu)));
  Points<2> pts(2, n);
  for (int k = 0; k < n; ++k) {
    const double th = 2 * M_PI * k / n;
    pts.col(k) = center + radius * Point<2>(std::cos(th), std::sin(th));
  }
  return build_curve<2>(pts, true, {}, spu);
}

inline Curve<3> circle3(double radius = 1.0, double spu = 512.0) {
  const int n = std::max(16, static_cast<int>(std::lround(2 * M_PI * radius * spu)));
  Points<3> pts(3, n);
  for (int k = 0; k < n; ++k) {
    const double th = 2 * M_PI * k / n;
    pts.col(k) = radius * Point<3>(std::cos(th), std::sin(th), 0.0);
  }
  return build_curve<3>(pts, true, {}, spu);
}

// Regular n-gon with every vertex a registered corner.
inline Curve<2> regular_polygon(int n, double radius = 1.0) {
  Points<2> pts(2, n);
  std::vector<int> corners(n);
  for (int k = 0; k < n; ++k) {
    const double th = 2 * M_PI * k / n;
    pts.col(k) = radius * Point<2>(std::cos(th), std::sin(th));
    corners[k] = k;
  }
  return build_curve<2>(pts, true, corners);
}

inline Curve<2> unit_square() {
  Points<2> pts(2, 4);
  pts.col(0) = Point<2>(0, 0);
  pts.col(1) = Point<2>(1, 0);
  pts.col(2) = Point<2>(1, 1);
  pts.col(3) = Point<2>(0, 1);
  return build_curve<2>(pts, true, {0, 1, 2, 3});
}

// Rounded rectangle: two straights of given length joined by semicircular
// caps of radius r. Tangent-continuous, so no registered corners.
inline Curve<2> stadium(double r = 0.5, double straight = 1.0, double spu = 512.0) {
  const double hs = straight / 2;
  auto f = [&](double t) -> Point<2> {
    // t in [0,1): bottom straight, right cap, top straight, left cap
    const double Lb = straight, Lc = M_PI * r, total = 2 * Lb + 2 * Lc;
    double s = t * total;
    if (s < Lb) return {-hs + s, -r};
    s -= Lb;
    if (s < Lc) {
      const double a = -M_PI / 2 + s / r;
      return {hs + r * std::cos(a), r * std::sin(a)};
    }
    s -= Lc;
    if (s < Lb) return {hs - s, r};
    s -= Lb;
    const double a = M_PI / 2 + s / r;
    return {-hs + r * std::cos(a), r * std::sin(a)};
  };
  return build_curve<2>(detail::resample_arclength<2>(f, 0, 1, spu, true), true, {}, spu);
}

// Near-self-intersecting folded loop: a hairpin whose two straight runs sit
// `width` apart, far closer than their length.
inline Curve<2> hairpin(double width = 0.04, double handle = 2.0, double spu = 512.0) {
  return stadium(width / 2, handle, spu);
}

// Tightly wound planar spiral (pitch per turn) closed by a radial return
// path. The two junction nodes are genuine tangent discontinuities and are
// registered as corners. The return path crosses every intermediate turn.
inline Curve<2> spiral_loop(double r0 = 0.1, double pitch = 0.01, int turns = 10, double spu = 512.0) {
  const double b = pitch / (2 * M_PI);
  const double theta_max = 2 * M_PI * turns;
  const double r1 = r0 + pitch * turns;
  std::vector<Point<2>> nodes;
  // spiral sweep, arclength-controlled angle steps
  double th = 0;
  while (th < theta_max) {
    const double r = r0 + b * th;
    nodes.push_back({r * std::cos(th), r * std::sin(th)});
    th += (1.0 / spu) / std::sqrt(r * r + b * b);
  }
  nodes.push_back({r1, 0.0});
  const int join_out = static_cast<int>(nodes.size()) - 1;
  // radial return, exclusive of both endpoints already present
  const int steps = std::max(2, static_cast<int>(std::lround((r1 - r0) * spu)));
  for (int k = 1; k < steps; ++k) nodes.push_back({r1 - (r1 - r0) * k / steps, 0.0});
  Points<2> pts(2, nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) pts.col(static_cast<int>(i)) = nodes[i];
  return build_curve<2>(pts, true, {0, join_out}, spu);
}

inline Curve<3> trefoil(double scale = 0.25, double spu = 256.0) {
  auto f = [&](double t) -> Point<3> {
    return scale * Point<3>(std::sin(t) + 2 * std::sin(2 * t),
                            std::cos(t) - 2 * std::cos(2 * t),
                            -std::sin(3 * t));
  };
  return build_curve<3>(detail::resample_arclength<3>(f, 0, 2 * M_PI, spu, true), true, {}, spu);
}

// Circle with a zigzag pocket: k_corners + 1 tooth segments replace a short
// arc, packing k_corners interior corners (plus the two junctions) into
// arclength delta/2 while the pocket endpoints sit delta/4 apart. Designed to
// violate the corner spacing condition for ceil(1/eps) <= k_corners.
inline Curve<2> corner_packed(int k_corners, double delta, double radius = 1.0, double spu = 512.0) {
  const double chord = delta / 4;
  const double path_len = delta / 2;
  const double half_angle = std::asin(chord / (2 * radius));
  // circle part from angle half_angle around to 2*pi - half_angle
  const double a0 = half_angle, a1 = 2 * M_PI - half_angle;
  const int n_circ = std::max(16, static_cast<int>(std::lround((a1 - a0) * radius * spu)));
  std::vector<Point<2>> nodes;
  std::vector<int> corners;
  for (int k = 0; k <= n_circ; ++k) {
    const double th = a0 + (a1 - a0) * k / n_circ;
    nodes.push_back({radius * std::cos(th), radius * std::sin(th)});
  }
  // zigzag from circle(a1) back to circle(a0), perpendicular wiggle in-plane
  const Point<2> A = nodes.back();
  const Point<2> B = nodes.front();
  if (k_corners % 2 == 0) ++k_corners;  // even tooth count keeps the path length exact
  const int n_seg = k_corners + 1;
  const Point<2> axis = (B - A) / (B - A).norm();
  const Point<2> perp(-axis.y(), axis.x());
  const double adv = (B - A).norm() / n_seg;
  const double ell = path_len / n_seg;
  const double amp = std::sqrt(std::max(ell * ell - adv * adv, 0.0));
  corners.push_back(static_cast<int>(nodes.size()) - 1);  // junction at A
  for (int j = 1; j < n_seg; ++j) {
    Point<2> p = A + adv * j * axis + ((j % 2) ? amp : 0.0) * perp;
    corners.push_back(static_cast<int>(nodes.size()));
    nodes.push_back(p);
  }
  corners.push_back(0);  // junction at B, which is node 0 (the circle starts there)
  Points<2> pts(2, nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) pts.col(static_cast<int>(i)) = nodes[i];
  return build_curve<2>(pts, true, corners, spu);
}

// Random smooth loop: unit circle plus low-pass Fourier perturbations with
// k^{-2.5} amplitude decay. Coefficient budget keeps the speed bounded away
// from zero so arclength resampling is well-posed.
template <int D>
Curve<D> random_loop(std::uint64_t seed, double amplitude = 0.2, int harmonics = 6, double spu = 128.0) {
  auto rng = rng_stream(seed, 0);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<Eigen::Matrix<double, D, 1>> ac(harmonics + 1), bc(harmonics + 1);
  for (int k = 2; k <= harmonics; ++k) {
    const double decay = amplitude / std::pow(k, 2.5);
    for (int a = 0; a < D; ++a) {
      ac[k][a] = decay * unif(rng);
      bc[k][a] = decay * unif(rng);
    }
  }
  auto f = [&](double th) -> Point<D> {
    Point<D> p = Point<D>::Zero();
    p[0] = std::cos(th);
    p[1] = std::sin(th);
    for (int k = 2; k <= harmonics; ++k)
      p += ac[k] * std::cos(k * th) + bc[k] * std::sin(k * th);
    return p;
  };
  return build_curve<D>(detail::resample_arclength<D>(f, 0, 2 * M_PI, spu, true), true, {}, spu);
}

// Random open C1 arc: a unit-speed-ish drift plus transverse wiggle.
template <int D>
Curve<D> random_arc(std::uint64_t seed, double amplitude = 0.15, int harmonics = 5, double spu = 128.0) {
  auto rng = rng_stream(seed, 1);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<Eigen::Matrix<double, D, 1>> ac(harmonics + 1), bc(harmonics + 1);
  for (int k = 1; k <= harmonics; ++k) {
    const double decay = amplitude / std::pow(k, 2.0);
    for (int a = 0; a < D; ++a) {
      ac[k][a] = decay * unif(rng);
      bc[k][a] = decay * unif(rng);
    }
  }
  auto f = [&](double t) -> Point<D> {
    Point<D> p = Point<D>::Zero();
    p[0] = t;
    for (int k = 1; k <= harmonics; ++k)
      p += ac[k] * std::cos(M_PI * k * t) + bc[k] * std::sin(M_PI * k * t);
    return p;
  };
  return build_curve<D>(detail::resample_arclength<D>(f, 0, 2.0, spu, false), false, {}, spu);
}

}  // namespace fixtures
}  // namespace loopforge

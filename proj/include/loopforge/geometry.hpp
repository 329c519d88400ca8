#pragma once

#include "loopforge/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

namespace loopforge {

// Piecewise-C1 curve stored as a polyline with registered corners.
// Tangent jumps at unregistered nodes are sampling artifacts of a smooth
// curve and are expected to be O(edge length); genuine tangent
// discontinuities must be listed in `corners` (node indices).
// For a closed curve the edge from the last node back to node 0 is implicit.
template <int D>
struct Curve {
  Points<D> nodes;                // one column per node
  bool closed = true;
  std::vector<int> corners;       // sorted node indices with tangent jumps
  double samples_per_unit = 0.0;  // sampling density the builder used, 0 = unknown

  Eigen::VectorXd cum;            // cum[i] = arclength of node i, cum[n_edges] = length
  double length = 0.0;

  int n_nodes() const { return static_cast<int>(nodes.cols()); }
  int n_edges() const { return closed ? n_nodes() : n_nodes() - 1; }

  Point<D> node(int i) const { return nodes.col(((i % n_nodes()) + n_nodes()) % n_nodes()); }
  Point<D> edge_vec(int e) const { return node(e + 1) - node(e); }
  double edge_len(int e) const { return cum[e + 1] - cum[e]; }
  Point<D> edge_dir(int e) const { return edge_vec(e) / edge_len(e); }
  double edge_mid_s(int e) const { return 0.5 * (cum[e] + cum[e + 1]); }

  bool is_corner(int node_idx) const {
    return std::binary_search(corners.begin(), corners.end(), node_idx);
  }
};

template <int D>
Curve<D> build_curve(const Points<D>& nodes, bool closed,
                     std::vector<int> corners = {}, double samples_per_unit = 0.0) {
  const int n = static_cast<int>(nodes.cols());
  if (n < 2 || (closed && n < 3))
    throw DegenerateCurve("curve needs at least 2 nodes (3 if closed)");
  Curve<D> c;
  c.nodes = nodes;
  c.closed = closed;
  c.samples_per_unit = samples_per_unit;
  const int m = closed ? n : n - 1;
  c.cum.resize(m + 1);
  c.cum[0] = 0.0;
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, nodes.col(i).template lpNorm<Eigen::Infinity>());
  const double tol = 1e-14 * std::max(scale, 1.0);
  for (int e = 0; e < m; ++e) {
    double len = (nodes.col((e + 1) % n) - nodes.col(e)).norm();
    if (len <= tol) throw DegenerateCurve("duplicate consecutive nodes at edge " + std::to_string(e));
    c.cum[e + 1] = c.cum[e] + len;
  }
  c.length = c.cum[m];
  std::sort(corners.begin(), corners.end());
  corners.erase(std::unique(corners.begin(), corners.end()), corners.end());
  for (int idx : corners)
    if (idx < 0 || idx >= n) throw OutOfRange("corner index " + std::to_string(idx));
  c.corners = std::move(corners);
  return c;
}

// Geodesic distance between parameters. On a closed curve of length L this is
// min_k |s - t + kL|; on an open curve plain |s - t|.
template <int D>
double circle_distance(const Curve<D>& c, double s, double t) {
  const double L = c.length;
  const double slack = 1e-9 * L;
  if (s < -slack || s > L + slack || t < -slack || t > L + slack)
    throw OutOfRange("parameter outside [0, length]");
  double d = std::abs(s - t);
  if (!c.closed) return d;
  d = std::fmod(d, L);
  return std::min(d, L - d);
}

namespace detail {
template <int D>
int edge_of(const Curve<D>& c, double& s) {
  const double L = c.length;
  if (c.closed) {
    s = std::fmod(s, L);
    if (s < 0) s += L;
  } else {
    if (s < -1e-9 * L || s > L * (1 + 1e-9)) throw OutOfRange("parameter outside [0, length]");
    s = std::clamp(s, 0.0, L);
  }
  // last edge index with cum[e] <= s
  const double* begin = c.cum.data();
  const double* end = begin + c.n_edges() + 1;
  int e = static_cast<int>(std::upper_bound(begin, end, s) - begin) - 1;
  return std::clamp(e, 0, c.n_edges() - 1);
}
}  // namespace detail

template <int D>
Point<D> point_at(const Curve<D>& c, double s) {
  int e = detail::edge_of(c, s);
  double u = (s - c.cum[e]) / c.edge_len(e);
  return c.node(e) + u * c.edge_vec(e);
}

// Piecewise-constant unit tangent; at a node the outgoing edge wins.
template <int D>
Point<D> tangent_at(const Curve<D>& c, double s) {
  int e = detail::edge_of(c, s);
  return c.edge_dir(e);
}

namespace detail {

// Stations are node positions tagged with arclength and cornerhood; cut and
// rotate assemble output curves from station runs so arithmetic on shared
// split points is performed exactly once.
template <int D>
struct Station {
  double s;
  Point<D> p;
  bool corner;
};

template <int D>
std::vector<Station<D>> stations_with_splits(const Curve<D>& c, std::vector<double> splits) {
  std::vector<Station<D>> st;
  st.reserve(c.n_nodes() + splits.size());
  for (int i = 0; i < c.n_nodes(); ++i)
    st.push_back({c.cum[std::min(i, c.n_edges())], c.node(i), c.is_corner(i)});
  // node i sits at cum[i] for i < n; for open curves the last node is at length
  if (!c.closed) st.back().s = c.length;
  const double weld = 1e-12 * std::max(c.length, 1.0);
  std::sort(splits.begin(), splits.end());
  for (double s : splits) {
    bool dup = false;
    for (const auto& q : st)
      if (std::abs(q.s - s) <= weld) { dup = true; break; }
    if (dup) continue;
    double sc = s;
    int e = edge_of(c, sc);
    double u = (sc - c.cum[e]) / c.edge_len(e);
    st.push_back({s, c.node(e) + u * c.edge_vec(e), false});
  }
  std::sort(st.begin(), st.end(), [](const Station<D>& a, const Station<D>& b) { return a.s < b.s; });
  return st;
}

template <int D>
Curve<D> curve_from_stations(const std::vector<Station<D>>& st, bool closed, double samples_per_unit) {
  Points<D> nodes(D, st.size());
  std::vector<int> corners;
  for (std::size_t i = 0; i < st.size(); ++i) {
    nodes.col(static_cast<int>(i)) = st[i].p;
    if (st[i].corner) corners.push_back(static_cast<int>(i));
  }
  return build_curve<D>(nodes, closed, corners, samples_per_unit);
}

}  // namespace detail

// Re-anchor the arclength origin of a closed curve at parameter s0.
// The node at s0 (inserted if mid-edge) becomes node 0; geometry is unchanged.
template <int D>
Curve<D> rotate_basepoint(const Curve<D>& c, double s0) {
  if (!c.closed) throw InvalidInterval("rotate_basepoint needs a closed curve");
  auto st = detail::stations_with_splits(c, {s0});
  double s0n = s0;
  int pivot = 0;
  {
    double best = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < st.size(); ++i) {
      double d = std::abs(st[i].s - s0n);
      if (d < best) { best = d; pivot = static_cast<int>(i); }
    }
  }
  std::vector<detail::Station<D>> rot;
  rot.reserve(st.size());
  for (std::size_t k = 0; k < st.size(); ++k) rot.push_back(st[(pivot + k) % st.size()]);
  return detail::curve_from_stations(rot, true, c.samples_per_unit);
}

// Cut of a closed curve at parameters t < t' with x = c(t), y = c(t').
// Returns (c', g):
//   c' keeps [0,t], bridges x -> y along the chord, then continues on [t',L];
//   g is the excised arc [t,t'] closed by the reverse bridge y -> x.
// Both bridges are the same segment with opposite orientation, so the induced
// currents satisfy mu_c = mu_c' + mu_g exactly. Bridge endpoints become
// registered corners. If x == y the bridge degenerates and is omitted.
template <int D>
std::pair<Curve<D>, Curve<D>> cut(const Curve<D>& c, double t, double tp) {
  if (!c.closed) throw InvalidInterval("cut needs a closed curve");
  const double L = c.length;
  if (!(t >= 0.0 && t < tp && tp <= L)) throw InvalidInterval("cut needs 0 <= t < t' <= length");
  auto st = detail::stations_with_splits(c, {t, tp});
  const double weld = 1e-12 * std::max(L, 1.0);
  int it = -1, itp = -1;
  for (std::size_t i = 0; i < st.size(); ++i) {
    if (std::abs(st[i].s - t) <= weld) it = static_cast<int>(i);
    if (std::abs(st[i].s - tp) <= weld) itp = static_cast<int>(i);
  }
  if (itp < 0 && std::abs(tp - L) <= weld) itp = 0;  // t' = L is node 0
  if (it < 0 || itp < 0) throw InvalidInterval("cut failed to locate split stations");

  const bool degenerate = (st[it].p - st[itp == 0 ? 0 : itp].p).norm() <= 1e-12 * std::max(L, 1.0);

  std::vector<detail::Station<D>> keep, excised;
  const int n = static_cast<int>(st.size());
  // excised: stations t..t' inclusive (t' = L wraps to node 0 copy)
  for (int i = it; ; ++i) {
    int k = i % n;
    excised.push_back(st[k]);
    if ((itp == 0 && i == n) || k == itp) break;
  }
  // keep: 0..t then t'..end (skip when t' == L == node 0, already present)
  for (int i = 0; i <= it; ++i) keep.push_back(st[i]);
  if (itp != 0)
    for (int i = itp; i < n; ++i) keep.push_back(st[i]);

  if (degenerate) {
    excised.pop_back();              // same point as front; drop the duplicate
    excised.front().corner = true;
    if (itp != 0) {
      // weld point appears twice in keep (as t and t'); drop one copy
      keep.erase(keep.begin() + it + 1);
      keep[it].corner = true;
    } else {
      // t' = L: the weld is node 0 itself, so station t duplicates it
      keep.pop_back();
      keep[0].corner = true;
    }
  } else {
    keep[it].corner = true;
    excised.front().corner = true;
    excised.back().corner = true;
    if (itp != 0) {
      keep[it + 1].corner = true;
    } else {
      keep[0].corner = true;
    }
  }
  Curve<D> cp = detail::curve_from_stations(keep, true, c.samples_per_unit);
  Curve<D> g = detail::curve_from_stations(excised, true, c.samples_per_unit);
  return {std::move(cp), std::move(g)};
}

// Weighted, oriented segment soup: the current carried by polyline curves.
template <int D>
struct CurrentMeasure {
  struct Segment {
    Point<D> a, b;
    double weight;
  };
  std::vector<Segment> segments;

  double total_mass() const {
    double m = 0;
    for (const auto& s : segments) m += s.weight * (s.b - s.a).norm();
    return m;
  }
};

template <int D>
CurrentMeasure<D> measure_of(const Curve<D>& c) {
  CurrentMeasure<D> mu;
  mu.segments.reserve(c.n_edges());
  for (int e = 0; e < c.n_edges(); ++e)
    mu.segments.push_back({c.node(e), c.node(e + 1), 1.0});
  return mu;
}

inline const std::array<double, 8>& gl8_nodes() {
  static const std::array<double, 8> x = {
      -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
      0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
  return x;
}
inline const std::array<double, 8>& gl8_weights() {
  static const std::array<double, 8> w = {
      0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
      0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  return w;
}

// <mu, Phi> = sum over segments of int Phi(x) . ds with ds the oriented
// element. 8-point Gauss-Legendre per segment: exact for polynomial fields of
// degree <= 15 on straight segments.
template <int D, class Field>
double pairing(const CurrentMeasure<D>& mu, Field&& phi) {
  if (mu.segments.empty()) throw EmptyMeasure("pairing with empty measure");
  const auto& xs = gl8_nodes();
  const auto& ws = gl8_weights();
  double acc = 0;
  for (const auto& seg : mu.segments) {
    const Point<D> ab = seg.b - seg.a;
    double line = 0;
    for (int q = 0; q < 8; ++q) {
      const double u = 0.5 * (1.0 + xs[q]);
      const Point<D> x = seg.a + u * ab;
      line += 0.5 * ws[q] * phi(x).dot(ab);
    }
    acc += seg.weight * line;
  }
  return acc;
}

// Mass of the measure inside the closed ball B_r(center): polyline-exact via
// the quadratic for the segment/ball intersection interval.
template <int D>
double mass_in_ball(const CurrentMeasure<D>& mu, const Point<D>& center, double r) {
  double acc = 0;
  const double r2 = r * r;
  for (const auto& seg : mu.segments) {
    const Point<D> d = seg.b - seg.a;
    const Point<D> f = seg.a - center;
    const double a = d.squaredNorm();
    if (a <= 0) continue;
    const double b = f.dot(d);
    const double c0 = f.squaredNorm() - r2;
    const double disc = b * b - a * c0;
    if (disc <= 0) continue;
    const double sq = std::sqrt(disc);
    const double u0 = std::max(0.0, (-b - sq) / a);
    const double u1 = std::min(1.0, (-b + sq) / a);
    if (u1 > u0) acc += seg.weight * (u1 - u0) * std::sqrt(a);
  }
  return acc;
}

template <int D>
double distance_to_support(const CurrentMeasure<D>& mu, const Point<D>& x) {
  double best = std::numeric_limits<double>::max();
  for (const auto& seg : mu.segments) {
    const Point<D> d = seg.b - seg.a;
    const double a = d.squaredNorm();
    double u = a > 0 ? std::clamp((x - seg.a).dot(d) / a, 0.0, 1.0) : 0.0;
    best = std::min(best, (x - (seg.a + u * d)).squaredNorm());
  }
  return std::sqrt(best);
}

// Triangle soup with per-triangle area weights: surfaces spanned by curves.
template <int D>
struct SurfaceMeasure {
  struct Tri {
    Point<D> p, q, r;
  };
  std::vector<Tri> tris;

  static double tri_area(const Tri& t) {
    if constexpr (D == 2) {
      Point<2> u = t.q - t.p, v = t.r - t.p;
      return 0.5 * std::abs(u.x() * v.y() - u.y() * v.x());
    } else {
      return 0.5 * (t.q - t.p).cross(t.r - t.p).norm();
    }
  }

  double total_area() const {
    double a = 0;
    for (const auto& t : tris) a += tri_area(t);
    return a;
  }
};

// Cone over the curve from an apex (default: node centroid). The oriented
// boundary of the triangle chain telescopes to the curve itself: each
// apex spoke appears in two consecutive triangles with opposite orientation.
template <int D>
SurfaceMeasure<D> cone_surface(const Curve<D>& c, const Point<D>* apex_opt = nullptr) {
  if (!c.closed) throw InvalidInterval("cone_surface needs a closed curve");
  Point<D> apex = apex_opt ? *apex_opt : Point<D>(c.nodes.rowwise().mean());
  SurfaceMeasure<D> s;
  s.tris.reserve(c.n_edges());
  for (int e = 0; e < c.n_edges(); ++e) {
    typename SurfaceMeasure<D>::Tri t{apex, c.node(e), c.node(e + 1)};
    if (SurfaceMeasure<D>::tri_area(t) > 0) s.tris.push_back(t);
  }
  return s;
}

// Line integral of a vector field over the oriented boundary of one triangle
// (edges p->q->r->p), with the same quadrature as pairing(). Used to check
// that cone boundaries telescope to the curve chain.
template <int D, class Field>
double tri_boundary_pairing(const typename SurfaceMeasure<D>::Tri& t, Field&& phi) {
  CurrentMeasure<D> edges;
  edges.segments = {{t.p, t.q, 1.0}, {t.q, t.r, 1.0}, {t.r, t.p, 1.0}};
  return pairing(edges, phi);
}

template <int D>
Eigen::AlignedBox<double, D> bounding_box(const Curve<D>& c) {
  Eigen::AlignedBox<double, D> box;
  for (int i = 0; i < c.n_nodes(); ++i) box.extend(c.nodes.col(i));
  return box;
}

template <int D>
double curve_diameter(const Curve<D>& c) {
  // diameter of the node set; adequate for radius ladders (polyline vertices
  // are extreme points of the support)
  const auto box = bounding_box(c);
  return box.diagonal().norm();
}

}  // namespace loopforge

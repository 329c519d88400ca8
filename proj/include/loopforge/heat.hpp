#pragma once

#include "loopforge/geometry.hpp"

#include <cmath>
#include <functional>

namespace loopforge {

template <int D>
double heat_kernel(const Point<D>& z, double t) {
  if (t <= 0) throw NonpositiveTime("heat kernel needs t > 0");
  return std::pow(4 * M_PI * t, -0.5 * D) * std::exp(-z.squaredNorm() / (4 * t));
}

// |grad p_t|(z) = (|z| / 2t) p_t(z)
template <int D>
double grad_heat_kernel_norm(const Point<D>& z, double t) {
  if (t <= 0) throw NonpositiveTime("heat kernel needs t > 0");
  return z.norm() / (2 * t) * std::pow(4 * M_PI * t, -0.5 * D) *
         std::exp(-z.squaredNorm() / (4 * t));
}

// (p_t * mu)(x) for the oriented segment measure, exact per segment:
// completing the square in the parameter reduces each segment to an erf
// difference. With ab = b - a, u0 = (x-a).ab/|ab|^2 and q the squared
// distance from x to the segment's line,
//   contribution = w tau (4 pi t)^{-D/2} sqrt(pi t) e^{-q/4t}
//                  [erf(v1) - erf(v0)],  v_i = (u_i - u0)|ab| / (2 sqrt t).
template <int D>
Point<D> heat_convolve_measure(const CurrentMeasure<D>& mu, const Point<D>& x, double t) {
  if (t <= 0) throw NonpositiveTime("heat convolution needs t > 0");
  if (mu.segments.empty()) throw EmptyMeasure("heat convolution of empty measure");
  const double pref = std::pow(4 * M_PI * t, -0.5 * D) * std::sqrt(M_PI * t);
  const double st = 2 * std::sqrt(t);
  Point<D> acc = Point<D>::Zero();
  for (const auto& seg : mu.segments) {
    const Point<D> ab = seg.b - seg.a;
    const double c2 = ab.squaredNorm();
    if (c2 <= 0) continue;
    const double c1 = (x - seg.a).dot(ab);
    const double c0 = (x - seg.a).squaredNorm();
    const double u0 = c1 / c2;
    const double q = std::max(c0 - c1 * c1 / c2, 0.0);
    if (q > 560 * t) continue;  // e^{-140} tail
    const double labs = std::sqrt(c2);
    const double v0 = (0.0 - u0) * labs / st;
    const double v1 = (1.0 - u0) * labs / st;
    const double amp = pref * std::exp(-q / (4 * t)) * (std::erf(v1) - std::erf(v0));
    acc += seg.weight * amp / labs * ab;
  }
  return acc;
}

namespace detail {

template <int D>
struct TriQuadContext {
  const Point<D>& x;
  double t;
  double edge_target;  // subdivide until max edge below this
  double prune_r2;     // skip triangles wholly beyond this squared distance
  int max_depth;
};

// Degree-2 midpoint rule on a triangle, refined by longest-edge bisection
// until the longest edge resolves the kernel scale sqrt(t). Bisection keeps
// the leaf count proportional to area/target^2 even for sliver triangles
// (cone spokes), where 4-way subdivision over-refines the short direction.
// Triangles whose bounding sphere stays outside the pruning radius
// contribute below the e^{-80} tail.
template <int D>
double tri_grad_heat(const TriQuadContext<D>& ctx, const Point<D>& p0, const Point<D>& q0,
                     const Point<D>& r0) {
  struct Item {
    Point<D> p, q, r;
    int depth;
  };
  std::vector<Item> stack;
  stack.push_back({p0, q0, r0, 0});
  double acc = 0;
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    const Point<D> c = (it.p + it.q + it.r) / 3.0;
    const double rad2 = std::max({(it.p - c).squaredNorm(), (it.q - c).squaredNorm(),
                                  (it.r - c).squaredNorm()});
    const double dc = (ctx.x - c).norm();
    const double clearance = dc - std::sqrt(rad2);
    if (clearance > 0 && clearance * clearance > ctx.prune_r2) continue;

    const double epq = (it.p - it.q).squaredNorm();
    const double eqr = (it.q - it.r).squaredNorm();
    const double erp = (it.r - it.p).squaredNorm();
    const double e2 = std::max({epq, eqr, erp});
    if (e2 > ctx.edge_target * ctx.edge_target && it.depth < ctx.max_depth) {
      if (epq >= eqr && epq >= erp) {
        const Point<D> m = 0.5 * (it.p + it.q);
        stack.push_back({it.p, m, it.r, it.depth + 1});
        stack.push_back({m, it.q, it.r, it.depth + 1});
      } else if (eqr >= erp) {
        const Point<D> m = 0.5 * (it.q + it.r);
        stack.push_back({it.p, it.q, m, it.depth + 1});
        stack.push_back({it.p, m, it.r, it.depth + 1});
      } else {
        const Point<D> m = 0.5 * (it.r + it.p);
        stack.push_back({it.p, it.q, m, it.depth + 1});
        stack.push_back({m, it.q, it.r, it.depth + 1});
      }
      continue;
    }
    const typename SurfaceMeasure<D>::Tri tri{it.p, it.q, it.r};
    const double area = SurfaceMeasure<D>::tri_area(tri);
    const Point<D> m0 = 0.5 * (it.p + it.q), m1 = 0.5 * (it.q + it.r), m2 = 0.5 * (it.r + it.p);
    acc += area / 3.0 *
           (grad_heat_kernel_norm<D>(ctx.x - m0, ctx.t) +
            grad_heat_kernel_norm<D>(ctx.x - m1, ctx.t) +
            grad_heat_kernel_norm<D>(ctx.x - m2, ctx.t));
  }
  return acc;
}

}  // namespace detail

// (|grad p_t| * ||S||)(x): total-variation convolution over the triangle soup.
template <int D>
double grad_heat_convolve_surface(const SurfaceMeasure<D>& S, const Point<D>& x, double t,
                                  int max_depth = 48, double edge_factor = 0.25) {
  if (t <= 0) throw NonpositiveTime("heat convolution needs t > 0");
  if (S.tris.empty()) throw EmptyMeasure("heat convolution of empty surface");
  detail::TriQuadContext<D> ctx{x, t, edge_factor * std::sqrt(t), 320 * t, max_depth};
  std::vector<double> parts(S.tris.size());
  parallel_for_each(static_cast<std::int64_t>(S.tris.size()), [&](std::int64_t i) {
    const auto& tr = S.tris[i];
    parts[i] = detail::tri_grad_heat(ctx, tr.p, tr.q, tr.r);
  });
  double acc = 0;
  for (double v : parts) acc += v;
  return acc;
}

struct MaximalValue {
  double value = 0;
  double t_argmax = 0;
  bool at_lower_end = false;  // sup attained at the ladder's lower endpoint
  bool at_upper_end = false;
};

namespace detail {

// Dense log ladder plus local zoom; flags report endpoint saturation, which
// signals a divergent (or untracked) sup rather than a genuine maximum.
inline MaximalValue maximize_over_t(const std::function<double(double)>& f, double t_lo,
                                    double t_hi, int n_ladder) {
  MaximalValue out;
  const double lu = std::log(t_lo), hu = std::log(t_hi);
  int best = 0;
  for (int k = 0; k < n_ladder; ++k) {
    const double t = std::exp(lu + (hu - lu) * k / (n_ladder - 1));
    const double v = f(t);
    if (v > out.value) {
      out.value = v;
      out.t_argmax = t;
      best = k;
    }
  }
  out.at_lower_end = best == 0;
  out.at_upper_end = best == n_ladder - 1;
  if (out.at_lower_end || out.at_upper_end) return out;

  double step = (hu - lu) / (n_ladder - 1);
  for (int round = 0; round < 3; ++round) {
    const double sub = step / 8;
    double bu = std::log(out.t_argmax);
    for (int k = -8; k <= 8; ++k) {
      const double t = std::exp(bu + k * sub);
      const double v = f(t);
      if (v > out.value) {
        out.value = v;
        out.t_argmax = t;
      }
    }
    step = sub;
  }
  return out;
}

template <int D>
double reference_scale2(double diam, const Point<D>& x, const Point<D>& anchor) {
  const double r = std::max(diam, (x - anchor).norm());
  return std::max(r * r, 1e-300);
}

}  // namespace detail

// M1(x) = sup_t |(p_t * mu)(x)|. The sup diverges as t -> 0 when x lies on
// the support; the lower-end flag reports that regime.
template <int D>
MaximalValue maximal_M1(const CurrentMeasure<D>& mu, const Point<D>& x, int n_ladder = 400,
                        double t_lo_factor = 1e-6, double t_hi_factor = 1e3) {
  if (mu.segments.empty()) throw EmptyMeasure("maximal function of empty measure");
  Eigen::AlignedBox<double, D> box;
  for (const auto& s : mu.segments) {
    box.extend(s.a);
    box.extend(s.b);
  }
  const double s2 = detail::reference_scale2<D>(box.diagonal().norm(), x, Point<D>(box.center()));
  return detail::maximize_over_t(
      [&](double t) { return heat_convolve_measure(mu, x, t).norm(); }, t_lo_factor * s2,
      t_hi_factor * s2, n_ladder);
}

// M2(x) = sup_t sqrt(t) (|grad p_t| * ||S||)(x). Diverges like t^{-1/2} for x
// on the surface (lower-end flag); finite off the surface.
template <int D>
MaximalValue maximal_M2(const SurfaceMeasure<D>& S, const Point<D>& x, int n_ladder = 200,
                        double t_lo_factor = 1e-6, double t_hi_factor = 1e3,
                        double edge_factor = 0.25) {
  if (S.tris.empty()) throw EmptyMeasure("maximal function of empty surface");
  Eigen::AlignedBox<double, D> box;
  for (const auto& tr : S.tris) {
    box.extend(tr.p);
    box.extend(tr.q);
    box.extend(tr.r);
  }
  const double s2 = detail::reference_scale2<D>(box.diagonal().norm(), x, Point<D>(box.center()));
  return detail::maximize_over_t(
      [&](double t) { return std::sqrt(t) * grad_heat_convolve_surface(S, x, t, 48, edge_factor); },
      t_lo_factor * s2, t_hi_factor * s2, n_ladder);
}

}  // namespace loopforge

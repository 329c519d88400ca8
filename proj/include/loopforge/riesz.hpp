#pragma once

#include "loopforge/heat.hpp"

#include <cmath>
#include <functional>

namespace loopforge {

// gamma(alpha) = pi^{d/2} 2^alpha Gamma(alpha/2) / Gamma((d-alpha)/2), the
// normalization with I_alpha f = gamma(alpha)^{-1} |x|^{alpha-d} * f, chosen
// so that the Fourier multiplier is |xi|^{-alpha}.
inline double riesz_normalization(int d, double alpha) {
  if (!(alpha > 0 && alpha < d))
    throw AlphaOutOfRange("alpha must lie in (0, d)");
  return std::pow(M_PI, 0.5 * d) * std::pow(2.0, alpha) * std::tgamma(0.5 * alpha) /
         std::tgamma(0.5 * (d - alpha));
}

namespace detail {

template <int D>
double point_segment_distance(const Point<D>& x, const Point<D>& a, const Point<D>& b) {
  const Point<D> d = b - a;
  const double a2 = d.squaredNorm();
  const double u = a2 > 0 ? std::clamp((x - a).dot(d) / a2, 0.0, 1.0) : 0.0;
  return (x - (a + u * d)).norm();
}

}  // namespace detail

// I_alpha mu(x) by direct kernel integration: segments are bisected until
// shorter than 0.7 times their distance to x, then 8-point Gauss-Legendre
// resolves the smooth restriction of |x-y|^{alpha-D}.
template <int D>
Point<D> riesz_direct(const CurrentMeasure<D>& mu, const Point<D>& x, double alpha) {
  if (!(alpha > 0 && alpha < D)) throw AlphaOutOfRange("alpha must lie in (0, D)");
  if (mu.segments.empty()) throw EmptyMeasure("potential of empty measure");

  double scale = 0;
  for (const auto& s : mu.segments)
    scale = std::max({scale, s.a.norm(), s.b.norm(), (s.b - s.a).norm()});
  if (distance_to_support(mu, x) <= 1e-9 * std::max(scale, 1.0))
    throw PointOnSupport("direct Riesz kernel is singular on the support");

  const auto& xs = gl8_nodes();
  const auto& ws = gl8_weights();
  const double expo = alpha - D;
  Point<D> acc = Point<D>::Zero();

  struct Item {
    Point<D> a, b;
    double w;
    int depth;
  };
  std::vector<Item> stack;
  for (const auto& s : mu.segments) stack.push_back({s.a, s.b, s.weight, 0});
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    const Point<D> ab = it.b - it.a;
    const double len = ab.norm();
    if (len <= 0) continue;
    const double dist = detail::point_segment_distance(x, it.a, it.b);
    if (len > 0.7 * dist && it.depth < 60) {
      const Point<D> m = 0.5 * (it.a + it.b);
      stack.push_back({it.a, m, it.w, it.depth + 1});
      stack.push_back({m, it.b, it.w, it.depth + 1});
      continue;
    }
    Point<D> line = Point<D>::Zero();
    for (int q = 0; q < 8; ++q) {
      const double u = 0.5 * (1.0 + xs[q]);
      const Point<D> y = it.a + u * ab;
      line += 0.5 * ws[q] * std::pow((x - y).norm(), expo) * ab;
    }
    acc += it.w * line;
  }
  return acc / riesz_normalization(D, alpha);
}

struct QuadratureSpec {
  double t_min = 0;          // 0: automatic, exp(-60) below the support scale
  double t_max = 0;          // 0: automatic with monopole tail control
  int nodes_per_decade = 48;
};

namespace detail {

// Composite Simpson of g(u) du over [lo, hi] with at least n_per_decade
// panels per decade (two subintervals per panel).
inline double log_simpson(const std::function<double(double)>& g, double lo, double hi,
                          int n_per_decade) {
  const int panels =
      std::max(4, static_cast<int>(std::ceil((hi - lo) / std::log(10.0) * n_per_decade)));
  const int n = 2 * panels;
  const double h = (hi - lo) / n;
  double acc = g(lo) + g(hi);
  for (int k = 1; k < n; ++k) acc += g(lo + k * h) * (k % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Gauss-Legendre nodes/weights on (-1,1) by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p1 = 0, dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1;
      p1 = z;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2 * j - 1) * z * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1 - z * z) * dp * dp);
  }
}

inline const std::vector<double>& gl32_nodes() {
  static const std::vector<double> x = [] {
    std::vector<double> xx, ww;
    gauss_legendre(32, xx, ww);
    return xx;
  }();
  return x;
}

inline const std::vector<double>& gl32_weights() {
  static const std::vector<double> w = [] {
    std::vector<double> xx, ww;
    gauss_legendre(32, xx, ww);
    return ww;
  }();
  return w;
}

}  // namespace detail

// I_alpha mu(x) through the heat semigroup:
//   I_alpha mu = Gamma(alpha/2)^{-1} int_0^inf t^{alpha/2-1} (p_t * mu) dt,
// log-Simpson in t. The small-t cutoff keeps an e^{-60} tail (the integrand
// is bounded by mass (4 pi t)^{-D/2} e^{-dist^2/4t}); the large-t cutoff is
// extended decade by decade until the monopole tail bound
//   mass (4 pi)^{-D/2} T^{(alpha-D)/2} 2 / ((D-alpha) Gamma(alpha/2))
// drops below 1e-11 of the accumulated value.
template <int D>
Point<D> riesz_semigroup(const CurrentMeasure<D>& mu, const Point<D>& x, double alpha,
                         QuadratureSpec spec = {}) {
  if (!(alpha > 0 && alpha < D)) throw AlphaOutOfRange("alpha must lie in (0, D)");
  if (mu.segments.empty()) throw EmptyMeasure("potential of empty measure");

  Eigen::AlignedBox<double, D> box;
  for (const auto& s : mu.segments) {
    box.extend(s.a);
    box.extend(s.b);
  }
  const double diam = box.diagonal().norm();
  const double dist = distance_to_support(mu, x);
  const double scale = std::max({diam, dist, 1e-30});
  if (dist <= 1e-9 * scale)
    throw PointOnSupport("semigroup potential diverges on the support");

  double t_min = spec.t_min > 0 ? spec.t_min : dist * dist / 240.0;
  double t_max = spec.t_max > 0 ? spec.t_max : 100.0 * scale * scale;
  if (t_min >= t_max) t_min = t_max * 1e-12;

  const double mass = mu.total_mass();
  const double gam = std::tgamma(0.5 * alpha);

  Point<D> acc = Point<D>::Zero();
  // du integration: t^{alpha/2-1} dt = t^{alpha/2} du
  auto g = [&](double u) -> Point<D> {
    const double t = std::exp(u);
    return std::pow(t, 0.5 * alpha) * heat_convolve_measure(mu, x, t);
  };
  auto add_range = [&](double lo_t, double hi_t) {
    const double lo = std::log(lo_t), hi = std::log(hi_t);
    const int panels = std::max(
        4, static_cast<int>(std::ceil((hi - lo) / std::log(10.0) * spec.nodes_per_decade)));
    const int n = 2 * panels;
    const double h = (hi - lo) / n;
    Point<D> s = g(lo) + g(hi);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * g(lo + k * h);
    acc += s * (h / 3.0);
  };
  add_range(t_min, t_max);

  if (spec.t_max <= 0) {
    auto tail_bound = [&](double T) {
      return mass * std::pow(4 * M_PI, -0.5 * D) * std::pow(T, 0.5 * (alpha - D)) * 2.0 /
             ((D - alpha) * gam);
    };
    while (tail_bound(t_max) > 1e-11 * std::max(acc.norm() / gam, 1e-300) &&
           t_max < 1e15 * scale * scale) {
      add_range(t_max, 10 * t_max);
      t_max *= 10;
    }
  }
  return acc / gam;
}

// Same semigroup integral for a caller-supplied profile t -> (p_t * f)(x)
// that stays bounded as t -> 0 (smooth f). The [0, t_split] piece uses the
// substitution sigma = t^{alpha/2}, which absorbs the t^{alpha/2-1} weight:
//   int_0^T t^{alpha/2-1} g(t) dt = (2/alpha) int_0^{T^{alpha/2}} g(sigma^{2/alpha}) dsigma,
// handled by 32-point Gauss-Legendre. t_max must be supplied by the caller,
// who knows the profile's decay.
inline double riesz_semigroup_value(double alpha, const std::function<double(double)>& heat_value,
                                    double t_max, double t_split = 1e-4,
                                    int nodes_per_decade = 48) {
  if (alpha <= 0) throw AlphaOutOfRange("alpha must be positive");
  if (!(t_max > t_split && t_split > 0)) throw InvalidInterval("need 0 < t_split < t_max");

  const auto& gx = detail::gl32_nodes();
  const auto& gw = detail::gl32_weights();
  const double sig_max = std::pow(t_split, 0.5 * alpha);
  double small = 0;
  for (std::size_t i = 0; i < gx.size(); ++i) {
    const double sig = 0.5 * sig_max * (1 + gx[i]);
    small += 0.5 * sig_max * gw[i] * heat_value(std::pow(sig, 2.0 / alpha));
  }
  small *= 2.0 / alpha;

  const double large = detail::log_simpson(
      [&](double u) {
        const double t = std::exp(u);
        return std::pow(t, 0.5 * alpha) * heat_value(t);
      },
      std::log(t_split), std::log(t_max), nodes_per_decade);

  return (small + large) / std::tgamma(0.5 * alpha);
}

}  // namespace loopforge

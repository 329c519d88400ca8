#pragma once

#include "loopforge/ball_growth.hpp"
#include "loopforge/geometry.hpp"

#include <numeric>
#include <optional>
#include <random>
#include <string>

namespace loopforge {

namespace detail {

// Maximal corner-free edge runs. With split_at_corners = false the whole
// curve is one run (cyclic when closed); otherwise runs go corner to corner
// and pairs never straddle a corner.
template <int D>
struct EdgeRun {
  std::vector<int> edges;  // in path order; may wrap past the basepoint
  bool cyclic = false;
};

template <int D>
std::vector<EdgeRun<D>> oscillation_runs(const Curve<D>& c, bool split_at_corners) {
  const int m = c.n_edges();
  std::vector<EdgeRun<D>> runs;
  const auto& cs = c.corners;
  if (!split_at_corners || cs.empty()) {
    EdgeRun<D> r;
    r.edges.resize(m);
    std::iota(r.edges.begin(), r.edges.end(), 0);
    r.cyclic = c.closed;
    runs.push_back(std::move(r));
    return runs;
  }
  if (c.closed) {
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const int a = cs[k], b = cs[(k + 1) % cs.size()];
      EdgeRun<D> r;
      for (int e = a; e != b; e = (e + 1) % m) r.edges.push_back(e);
      if (r.edges.empty())  // single corner: the whole loop, opened at it
        for (int e = a, i = 0; i < m; ++i, e = (e + 1) % m) r.edges.push_back(e);
      runs.push_back(std::move(r));
      if (cs.size() == 1) break;
    }
  } else {
    std::vector<int> bnd = {0};
    for (int idx : cs)
      if (idx > 0 && idx < m) bnd.push_back(idx);
    bnd.push_back(m);
    for (std::size_t k = 0; k + 1 < bnd.size(); ++k) {
      EdgeRun<D> r;
      for (int e = bnd[k]; e < bnd[k + 1]; ++e) r.edges.push_back(e);
      if (!r.edges.empty()) runs.push_back(std::move(r));
    }
  }
  return runs;
}

// Max tangent gap over parameter pairs at geodesic distance <= delta. Edge
// tangents are constant, so the pair (edge a, edge b) realizes distances down
// to the gap between the parameter intervals; that gap is the exact criterion.
// Early-exits once the running max exceeds stop_above.
template <int D>
double oscillation_scan(const Curve<D>& c, double delta, bool split_at_corners,
                        double stop_above) {
  double best = 0;
  const double L = c.length;
  for (const auto& run : oscillation_runs<D>(c, split_at_corners)) {
    const int n = static_cast<int>(run.edges.size());
    std::vector<double> s0(n), s1(n);
    std::vector<Point<D>> T(n);
    double off = 0;
    for (int i = 0; i < n; ++i) {
      s0[i] = off;
      off += c.edge_len(run.edges[i]);
      s1[i] = off;
      T[i] = c.edge_dir(run.edges[i]);
    }
    for (int a = 0; a < n; ++a) {
      for (int k = 1; k < n; ++k) {
        double sb;
        if (run.cyclic) {
          const int b = (a + k) % n;
          sb = s0[b] + (a + k >= n ? L : 0.0);
        } else {
          if (a + k >= n) break;
          sb = s0[a + k];
        }
        if (sb - s1[a] > delta) break;
        const int b = run.cyclic ? (a + k) % n : a + k;
        const double osc = (T[a] - T[b]).norm();
        if (osc > best) {
          best = osc;
          if (best > stop_above) return best;
        }
      }
    }
  }
  return best;
}

}  // namespace detail

template <int D>
double max_oscillation_at_scale(const Curve<D>& c, double delta,
                                bool exclude_corner_crossing = false) {
  if (delta <= 0) throw InvalidInterval("oscillation scale must be positive");
  return detail::oscillation_scan(c, delta, exclude_corner_crossing,
                                  std::numeric_limits<double>::max());
}

// Largest delta with tangent oscillation <= bound at scale delta, resolved by
// dyadic descent plus bisection. Oscillation is monotone in delta. Without
// corner exclusion a genuine corner violates at every scale -> NoValidDelta.
template <int D>
double find_delta(const Curve<D>& c, double bound = 1.0 / 3.0,
                  bool exclude_corner_crossing = false) {
  const double L = c.length;
  double min_edge = std::numeric_limits<double>::max();
  for (int e = 0; e < c.n_edges(); ++e) min_edge = std::min(min_edge, c.edge_len(e));
  const double floor_delta = 1e-3 * min_edge;

  auto violates = [&](double d) {
    return detail::oscillation_scan(c, d, exclude_corner_crossing, bound) > bound;
  };

  double hi = c.closed ? 0.5 * L : L;
  if (!violates(hi)) return hi;
  double lo = hi;
  while (violates(lo)) {
    lo *= 0.5;
    if (lo < floor_delta)
      throw NoValidDelta("tangent oscillation exceeds bound at every scale");
  }
  hi = 2.0 * lo;
  while (hi - lo > 1e-12 * L) {
    const double mid = 0.5 * (lo + hi);
    (violates(mid) ? hi : lo) = mid;
  }
  return lo;
}

struct ViolatingPair {
  double t = 0, t_prime = 0;  // parameters with t < t', in [0, length)
  double arc = 0;             // geodesic parameter distance
  double chord = 0;
};

// Smallest-arc parameter pair with d(t,t') >= delta and chord <= eps * arc.
// Coarse scan at sample_spacing (default delta/6), then grid refinement of
// the argmin to resolution 1e-3 * delta. Ties resolve to the earliest pair in
// scan order.
template <int D>
std::optional<ViolatingPair> violating_pair(const Curve<D>& c, double eps, double delta,
                                            double sample_spacing = 0) {
  if (!c.closed) throw InvalidInterval("violating_pair needs a closed curve");
  if (!(eps > 0 && eps < 1)) throw EpsilonOutOfRange("eps must lie in (0,1)");
  if (delta <= 0) throw InvalidInterval("delta must be positive");
  const double L = c.length;

  double h = sample_spacing > 0 ? sample_spacing : delta / 6.0;
  h = std::max(h, L / 40000.0);
  const int M = std::max(8, static_cast<int>(std::llround(L / h)));
  h = L / M;

  std::vector<Point<D>> P(M);
  for (int k = 0; k < M; ++k) P[k] = point_at(c, k * h);

  const double arc_slack = 1e-12 * L;
  ViolatingPair best;
  best.arc = std::numeric_limits<double>::max();
  bool found = false;
  for (int i = 0; i < M; ++i) {
    for (int j = i + 1; j < M; ++j) {
      const double ds = (j - i) * h;
      const double arc = std::min(ds, L - ds);
      if (arc < delta - arc_slack) continue;
      if (arc >= best.arc * (1 - 1e-12)) continue;
      const double chord = (P[i] - P[j]).norm();
      if (chord <= eps * arc) {
        best = {i * h, j * h, arc, chord};
        found = true;
      }
    }
  }
  if (!found) return std::nullopt;

  double res = h;
  while (res > 1e-3 * delta) {
    const double step = res / 8.0;
    ViolatingPair next = best;
    for (int a = -8; a <= 8; ++a) {
      for (int b = -8; b <= 8; ++b) {
        double tt = std::fmod(best.t + a * step + L, L);
        double tp = std::fmod(best.t_prime + b * step + L, L);
        const double arc = circle_distance(c, tt, tp);
        if (arc < delta - arc_slack) continue;
        if (arc >= next.arc * (1 - 1e-15)) continue;
        const double chord = (point_at(c, tt) - point_at(c, tp)).norm();
        if (chord <= eps * arc) next = {tt, tp, arc, chord};
      }
    }
    best = next;
    res = step;
  }
  if (best.t > best.t_prime) std::swap(best.t, best.t_prime);
  return best;
}

struct SpacingViolation {
  double t = 0, t_prime = 0;  // t in [0,L); t' may exceed L when the window wraps
  int corner_count = 0;       // corners strictly inside (t, t')
  double chord = 0;
};

// Window of more than ceil(1/eps) corners inside an interval (t,t') with
// t' - t < delta/eps and |c(t) - c(t')| < delta. Scans windows of exactly
// ceil(1/eps)+1 consecutive corners with margins that stay clear of the
// neighbouring corners, earliest window first.
template <int D>
std::optional<SpacingViolation> corner_spacing_violation(const Curve<D>& c, double eps,
                                                         double delta) {
  if (!(eps > 0 && eps < 1)) throw EpsilonOutOfRange("eps must lie in (0,1)");
  if (delta <= 0) throw InvalidInterval("delta must be positive");
  const int K = static_cast<int>(std::ceil(1.0 / eps - 1e-12));
  const auto& cs = c.corners;
  const int m = static_cast<int>(cs.size());
  if (m < K + 1) return std::nullopt;

  const double L = c.length;
  const double span_cap = delta / eps;
  // corner arclength, unwrapped cyclically for closed curves
  auto corner_s = [&](int j) {
    if (c.closed) {
      const int q = ((j % m) + m) % m;
      return c.cum[cs[q]] + L * std::floor(static_cast<double>(j) / m);
    }
    return c.cum[cs[std::clamp(j, 0, m - 1)]];
  };

  const int n_windows = c.closed ? m : m - K;
  for (int i = 0; i < n_windows; ++i) {
    const double s_first = corner_s(i), s_last = corner_s(i + K);
    const double span = s_last - s_first;
    if (span >= span_cap) continue;
    const double budget = span_cap - span;
    // margins stay inside the gaps to the neighbouring corners so the window
    // holds exactly K+1 corners
    double gap_prev, gap_next;
    if (c.closed) {
      gap_prev = s_first - corner_s(i - 1);
      gap_next = corner_s(i + K + 1) - s_last;
    } else {
      gap_prev = i > 0 ? s_first - corner_s(i - 1) : s_first;
      gap_next = (i + K + 1 < m ? corner_s(i + K + 1) : L) - s_last;
    }
    if (gap_prev <= 0 || gap_next <= 0) continue;
    const double a_max = std::min(gap_prev * (1 - 1e-9), budget * (1 - 1e-9));
    const int steps = 24;
    for (int ia = steps; ia >= 1; --ia) {  // largest margin first: earliest t
      const double a = a_max * ia / steps;
      const double b_cap = std::min(gap_next * (1 - 1e-9), (budget - a) * (1 - 1e-9));
      if (b_cap <= 0) continue;
      for (int ib = 1; ib <= steps; ++ib) {
        const double b = b_cap * ib / steps;
        const double t = s_first - a, tp = s_last + b;
        const double chord = (point_at(c, t) - point_at(c, tp)).norm();
        if (chord < delta * (1 - 1e-9)) {
          SpacingViolation v;
          v.t = c.closed ? std::fmod(t + L, L) : t;
          v.t_prime = v.t + (tp - t);
          v.corner_count = K + 1;
          v.chord = chord;
          return v;
        }
      }
    }
  }
  return std::nullopt;
}

struct SurgeryConfig {
  double epsilon = 0.05;         // must lie in (0, 1/10)
  double delta = 0;              // 0: find_delta with corner exclusion
  double oscillation_bound = 1.0 / 3.0;
  long max_iterations = 0;       // 0: 4 * (T1 bound + T2 bound) + corners + 64
  double sample_spacing = 0;     // violating-pair scan override
};

struct CutRecord {
  enum class Kind { TypeI, TypeII };
  Kind kind{};
  double basepoint_shift = 0;  // rotation applied before the cut (0 = none)
  double t = 0, t_prime = 0;   // on the working curve after the shift
  double bridge_length = 0;
  int corners_removed = 0;     // working-curve corners strictly inside (t,t')
  int corners_added = 0;       // weld corners gained by the remainder
  int piece_index = 0;
  double certified_constant = 0;
};

template <int D>
struct SurgeryReport {
  double epsilon = 0, delta = 0;
  std::vector<Curve<D>> pieces;   // excised loops in cut order; remainder last
  std::vector<double> certified;  // ball-growth certificate per piece
  std::vector<CutRecord> cuts;
  int type1_count = 0, type2_count = 0;
  double t1_bound = 0, t2_bound = 0;
  double input_length = 0, total_piece_length = 0;
  bool out_of_theorem = false;    // a cut count exceeded its a priori bound
};

// Decomposition loop: excise corner-spacing windows first, then smallest-arc
// violating pairs, until the remainder is clean. Every cut replaces a
// parameter arc by its chord, so each piece list carries the exact current of
// the input. Type I cuts shorten the curve by at least (1-eps) * delta and
// Type II cuts retire at least ceil(1/eps)+1 corners while adding at most 2,
// which bounds the iteration count a priori.
template <int D>
SurgeryReport<D> surgery_decompose(const Curve<D>& input, const SurgeryConfig& cfg) {
  if (!(cfg.epsilon > 0 && cfg.epsilon < 0.1))
    throw EpsilonOutOfRange("epsilon must lie in (0, 1/10)");
  if (!input.closed) throw InvalidInterval("surgery_decompose needs a closed curve");

  SurgeryReport<D> rep;
  rep.epsilon = cfg.epsilon;
  rep.delta = cfg.delta > 0 ? cfg.delta
                            : find_delta(input, cfg.oscillation_bound, true);
  rep.input_length = input.length;

  const double eps = cfg.epsilon, delta = rep.delta;
  const int K = static_cast<int>(std::ceil(1.0 / eps - 1e-12));
  rep.t1_bound = 2.0 * input.length / ((1 - eps) * delta);
  rep.t2_bound = 8.0 * input.length * eps / ((1 - eps) * delta);
  const long max_it = cfg.max_iterations > 0
                          ? cfg.max_iterations
                          : static_cast<long>(4 * (rep.t1_bound + rep.t2_bound)) +
                                static_cast<long>(input.corners.size()) + 64;

  Curve<D> working = input;
  long iter = 0;
  for (;;) {
    if (++iter > max_it)
      throw IterationLimitExceeded("surgery iteration budget exhausted after " +
                                   std::to_string(max_it) + " cuts");
    const double L = working.length;
    CutRecord rec;
    if (auto sv = corner_spacing_violation(working, eps, delta)) {
      rec.kind = CutRecord::Kind::TypeII;
      rec.certified_constant = 50.0 * K;
      if (sv->t_prime > L) {
        rec.basepoint_shift = sv->t;
        working = rotate_basepoint(working, sv->t);
        rec.t = 0;
        rec.t_prime = sv->t_prime - sv->t;
      } else {
        rec.t = sv->t;
        rec.t_prime = sv->t_prime;
      }
    } else if (auto vp = violating_pair(working, eps, delta, cfg.sample_spacing)) {
      rec.kind = CutRecord::Kind::TypeI;
      const double forward = vp->t_prime - vp->t;
      if (forward > L - forward) {
        // geodesic side wraps the basepoint: re-anchor at t' first
        rec.basepoint_shift = vp->t_prime;
        working = rotate_basepoint(working, vp->t_prime);
        rec.t = 0;
        rec.t_prime = L - forward;
      } else {
        rec.t = vp->t;
        rec.t_prime = vp->t_prime;
      }
    } else {
      break;
    }

    const double tol = 1e-9 * L;
    int inside = 0;
    for (int idx : working.corners) {
      const double s = working.cum[idx];
      if (s > rec.t + tol && s < rec.t_prime - tol) ++inside;
    }
    rec.corners_removed = inside;
    const double chord = (point_at(working, rec.t) - point_at(working, rec.t_prime)).norm();
    const bool degenerate = chord <= 1e-12 * std::max(L, 1.0);
    rec.bridge_length = degenerate ? 0.0 : chord;
    rec.corners_added = degenerate ? 1 : 2;
    if (rec.kind == CutRecord::Kind::TypeI)
      rec.certified_constant = inside == 0 ? 4.0 / eps + 1.0 : 100.0 * K;

    auto [remainder, loop] = cut(working, rec.t, rec.t_prime);
    rec.piece_index = static_cast<int>(rep.pieces.size());
    rep.pieces.push_back(std::move(loop));
    rep.certified.push_back(rec.certified_constant);
    rep.cuts.push_back(rec);
    (rec.kind == CutRecord::Kind::TypeI ? rep.type1_count : rep.type2_count)++;
    working = std::move(remainder);
  }

  rep.pieces.push_back(std::move(working));
  rep.certified.push_back(100.0 * K);
  rep.out_of_theorem = rep.type1_count > rep.t1_bound || rep.type2_count > rep.t2_bound;
  for (const auto& p : rep.pieces) rep.total_piece_length += p.length;
  return rep;
}

namespace detail {

// Random vector field with quadratic components; pairing() integrates it
// exactly, so current additivity checks are free of quadrature error.
template <int D>
struct QuadraticField {
  Eigen::Matrix<double, D, D> lin;
  std::array<Eigen::Matrix<double, D, D>, D> quad;
  Point<D> constant;
  Point<D> center;
  double scale = 1;

  Point<D> operator()(const Point<D>& x) const {
    const Point<D> z = (x - center) / scale;
    Point<D> v = constant + lin * z;
    for (int k = 0; k < D; ++k) v[k] += z.dot(quad[k] * z);
    return v;
  }
};

template <int D>
QuadraticField<D> random_quadratic_field(std::mt19937_64& rng,
                                         const Eigen::AlignedBox<double, D>& box) {
  std::normal_distribution<double> g(0.0, 1.0);
  QuadraticField<D> f;
  f.center = box.center();
  f.scale = std::max(box.diagonal().norm(), 1e-9);
  for (int k = 0; k < D; ++k) {
    f.constant[k] = g(rng);
    for (int a = 0; a < D; ++a) {
      f.lin(k, a) = g(rng);
      for (int b = 0; b < D; ++b) f.quad[k](a, b) = g(rng);
    }
  }
  return f;
}

}  // namespace detail

struct VerificationCheck {
  std::string name;
  bool pass = false;
  double margin = 0;  // distance to the failure threshold, >= 0 when passing
  std::string detail;
};

struct VerificationSummary {
  std::vector<VerificationCheck> checks;
  std::vector<double> measured_growth;  // per piece, lower bracket
  bool all_pass = true;

  void add(std::string name, bool pass, double margin, std::string detail = "") {
    all_pass = all_pass && pass;
    checks.push_back({std::move(name), pass, margin, std::move(detail)});
  }
};

// Brute-force re-verification of a surgery report against its input:
// current additivity on random quadratic fields, measured ball growth vs the
// per-piece certificates, the length budget, and the cut-count bounds.
template <int D>
VerificationSummary verify_decomposition(const Curve<D>& input, const SurgeryReport<D>& rep,
                                         int n_fields = 50, std::uint64_t seed = 20260814,
                                         const BallGrowthSampling& sampling = {}) {
  if (!(rep.epsilon > 0 && rep.epsilon < 0.1))
    throw EpsilonOutOfRange("epsilon must lie in (0, 1/10)");
  VerificationSummary out;

  const auto mu_in = measure_of(input);
  std::vector<CurrentMeasure<D>> mu_pieces;
  for (const auto& p : rep.pieces) mu_pieces.push_back(measure_of(p));

  const auto box = bounding_box(input);
  double worst_rel = 0;
  for (int f = 0; f < n_fields; ++f) {
    auto rng = rng_stream(seed, static_cast<std::uint64_t>(f));
    const auto phi = detail::random_quadratic_field<D>(rng, box);
    const double lhs = pairing(mu_in, phi);
    double rhs = 0, scale = std::abs(lhs);
    for (const auto& mu : mu_pieces) {
      const double v = pairing(mu, phi);
      rhs += v;
      scale = std::max(scale, std::abs(v));
    }
    worst_rel = std::max(worst_rel, std::abs(lhs - rhs) / std::max(scale, 1e-30));
  }
  out.add("current additivity", worst_rel <= 1e-8, 1e-8 - worst_rel,
          "worst relative defect " + std::to_string(worst_rel) + " over " +
              std::to_string(n_fields) + " quadratic fields");

  bool growth_ok = true;
  double growth_margin = std::numeric_limits<double>::max();
  for (std::size_t j = 0; j < rep.pieces.size(); ++j) {
    const auto est = ball_growth_constant(mu_pieces[j], sampling);
    out.measured_growth.push_back(est.lower);
    const double bound = rep.certified[j];
    growth_ok = growth_ok && est.lower <= bound;
    growth_margin = std::min(growth_margin, bound - est.lower);
  }
  out.add("piece ball growth", growth_ok, growth_margin,
          std::to_string(rep.pieces.size()) + " pieces vs certificates");

  const double budget = (1 + 20 * rep.epsilon) * rep.input_length;
  out.add("length budget", rep.total_piece_length <= budget,
          budget - rep.total_piece_length,
          "total " + std::to_string(rep.total_piece_length) + " vs (1+20eps)L = " +
              std::to_string(budget));

  out.add("type I count", rep.type1_count <= rep.t1_bound,
          rep.t1_bound - rep.type1_count);
  out.add("type II count", rep.type2_count <= rep.t2_bound,
          rep.t2_bound - rep.type2_count);

  bool records_ok = rep.pieces.size() == rep.cuts.size() + 1 &&
                    rep.certified.size() == rep.pieces.size();
  for (std::size_t i = 0; i < rep.cuts.size(); ++i)
    records_ok = records_ok && rep.cuts[i].piece_index == static_cast<int>(i);
  out.add("record consistency", records_ok, records_ok ? 0.0 : -1.0);
  return out;
}

// Largest eps0 with |c(s) - c(t)| >= eps0 * d(s,t) for all parameter pairs,
// measured on a pair grid and sharpened by local refinement (the estimate
// approaches the true infimum from above).
template <int D>
double bilipschitz_constant(const Curve<D>& c, int n_samples = 2048) {
  const double L = c.length;
  const int M = std::max(16, n_samples);
  const double h = c.closed ? L / M : L / (M - 1);
  std::vector<Point<D>> P(M);
  for (int k = 0; k < M; ++k) P[k] = point_at(c, k * h);

  double best = std::numeric_limits<double>::max();
  double bt = 0, btp = 0;
  for (int i = 0; i < M; ++i) {
    for (int j = i + 1; j < M; ++j) {
      const double ds = (j - i) * h;
      const double arc = c.closed ? std::min(ds, L - ds) : ds;
      if (arc <= 0) continue;
      const double ratio = (P[i] - P[j]).norm() / arc;
      if (ratio < best) {
        best = ratio;
        bt = i * h;
        btp = j * h;
      }
    }
  }
  double res = h;
  for (int round = 0; round < 3; ++round) {
    const double step = res / 8.0;
    for (int a = -8; a <= 8; ++a) {
      for (int b = -8; b <= 8; ++b) {
        double tt = bt + a * step, tp = btp + b * step;
        if (c.closed) {
          tt = std::fmod(tt + L, L);
          tp = std::fmod(tp + L, L);
        } else {
          tt = std::clamp(tt, 0.0, L);
          tp = std::clamp(tp, 0.0, L);
        }
        const double arc = circle_distance(c, tt, tp);
        if (arc <= 1e-9 * L) continue;
        const double ratio = (point_at(c, tt) - point_at(c, tp)).norm() / arc;
        if (ratio < best) {
          best = ratio;
          bt = tt;
          btp = tp;
        }
      }
    }
    res = step;
  }
  return best;
}

}  // namespace loopforge

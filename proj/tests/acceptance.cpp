// End-to-end acceptance checklist. Each numbered block re-verifies one
// headline property of the toolkit against brute force, closed forms, or
// frozen golden values, prints a single [PASS]/[FAIL] line with the worst
// measured quantities, and every tolerance is pinned right here in the code.
// The exit status is the number of failing criteria.

#include "loopforge/ball_growth.hpp"
#include "loopforge/campaign.hpp"
#include "loopforge/fields.hpp"
#include "loopforge/fixtures.hpp"
#include "loopforge/io.hpp"
#include "loopforge/lemmas.hpp"
#include "loopforge/lorentz.hpp"
#include "loopforge/riesz.hpp"
#include "loopforge/spectral.hpp"
#include "loopforge/surgery.hpp"

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

using namespace loopforge;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Criterion {
  bool pass = true;
  std::string headline;
  std::vector<std::string> lines;  // violations and summary rows

  void gate(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!ok) lines.push_back("violated: " + what);
  }
  void note(const std::string& s) { lines.push_back(s); }
};

template <int D>
double worst_diff(const FieldGrid<D>& a, const FieldGrid<D>& b) {
  double w = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    w = std::max(w, std::abs(a.data[i] - b.data[i]));
  return w;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// ---------------------------------------------------------------------------
// 1. surgery soundness across the fixture suite

struct SurgeryStats {
  double worst_additivity = 0;  // worst relative defect over the test fields
  double max_growth_frac = 0;   // measured growth over the 100 ceil(1/eps) cap
  double slowest = 0;           // wall seconds for the slowest curve
};

template <int D>
void surgery_case(Criterion& c, SurgeryStats& st, const char* name, const Curve<D>& input,
                  double eps) {
  const auto t0 = Clock::now();
  SurgeryConfig cfg;
  cfg.epsilon = eps;
  const auto rep = surgery_decompose(input, cfg);
  const auto ver = verify_decomposition(input, rep, 50);

  for (const auto& chk : ver.checks) {
    c.gate(chk.pass, fmt("%s eps=%.2f %s (%s)", name, eps, chk.name.c_str(), chk.detail.c_str()));
    if (chk.name == "current additivity")
      st.worst_additivity = std::max(st.worst_additivity, 1e-8 - chk.margin);
  }

  const double cap = 100.0 * std::ceil(1.0 / eps);
  for (double g : ver.measured_growth) {
    c.gate(g <= cap, fmt("%s eps=%.2f piece growth %.3f over cap %.0f", name, eps, g, cap));
    st.max_growth_frac = std::max(st.max_growth_frac, g / cap);
  }

  const double budget = (1 + 20 * eps) * rep.input_length;
  c.gate(rep.total_piece_length <= budget,
         fmt("%s eps=%.2f length %.6f over budget %.6f", name, eps, rep.total_piece_length,
             budget));
  const double t1cap = 2 * rep.input_length / ((1 - eps) * rep.delta);
  const double t2cap = 8 * rep.input_length * eps / ((1 - eps) * rep.delta);
  c.gate(rep.type1_count <= t1cap,
         fmt("%s eps=%.2f %d type I cuts over 2L/((1-eps)delta) = %.2f", name, eps,
             rep.type1_count, t1cap));
  c.gate(rep.type2_count <= t2cap,
         fmt("%s eps=%.2f %d type II cuts over 8Leps/((1-eps)delta) = %.2f", name, eps,
             rep.type2_count, t2cap));

  const double dt = seconds_since(t0);
  st.slowest = std::max(st.slowest, dt);
  c.gate(dt <= 300.0, fmt("%s eps=%.2f took %.1f s (bar 300)", name, eps, dt));
}

void criterion1(Criterion& c) {
  SurgeryStats st;
  for (double eps : {0.02, 0.05}) {
    surgery_case(c, st, "circle", fixtures::circle(), eps);
    surgery_case(c, st, "stadium", fixtures::stadium(), eps);
    surgery_case(c, st, "spiral", fixtures::spiral_loop(), eps);
    surgery_case(c, st, "hairpin", fixtures::hairpin(), eps);
    surgery_case(c, st, "corner-packed", fixtures::corner_packed(21, 0.3), eps);
    surgery_case(c, st, "trefoil", fixtures::trefoil(), eps);
  }
  c.headline = fmt(
      "surgery soundness, 6 curves x eps {0.02, 0.05}: worst additivity %.1e (bar 1e-8), "
      "worst piece growth %.0f%% of the 100 ceil(1/eps) cap, slowest curve %.1f s (bar 300)",
      st.worst_additivity, 100 * st.max_growth_frac, st.slowest);
}

// ---------------------------------------------------------------------------
// 2. sub-lemma growth bounds, brute-forced on randomized instances

void criterion2(Criterion& c) {
  double worst_bilip = 0;  // growth as a fraction of the 4/eps0 bound
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto arc = fixtures::random_arc<2>(seed);
    const double e0 = bilipschitz_constant(arc, 1024);
    const double g = ball_growth_constant(measure_of(arc)).lower;
    c.gate(e0 > 0 && g <= 4.0 / e0 * (1 + 1e-9),
           fmt("bilipschitz arc seed %llu: growth %.3f over 4/eps0 = %.3f",
               (unsigned long long)seed, g, 4.0 / e0));
    worst_bilip = std::max(worst_bilip, g * e0 / 4.0);
  }

  double worst_window = 0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto arc = fixtures::random_arc<2>(seed, 0.15, 5, 512.0);
    const double d = find_delta(arc);
    const double bound = 8.0 * std::ceil(arc.length / d);
    const double g = ball_growth_constant(measure_of(arc)).lower;
    c.gate(g <= bound, fmt("oscillation arc seed %llu: growth %.3f over 8 ceil(L/delta) = %.0f",
                           (unsigned long long)seed, g, bound));
    worst_window = std::max(worst_window, g / bound);
  }

  // every excised type I loop obeys 5/eps; randomized hairpins and spirals
  // generate the instances
  const double eps = 0.05;
  SurgeryConfig cfg;
  cfg.epsilon = eps;
  int n1 = 0;
  double worst1 = 0;
  auto check_type1 = [&](const Curve<2>& curve, const char* what, int k) {
    const auto rep = surgery_decompose(curve, cfg);
    for (const auto& cut : rep.cuts) {
      if (cut.kind != CutRecord::Kind::TypeI) continue;
      const double g = ball_growth_constant(measure_of(rep.pieces[cut.piece_index])).lower;
      c.gate(g <= 5.0 / eps,
             fmt("%s %d type I piece growth %.3f over 5/eps = %.0f", what, k, g, 5.0 / eps));
      worst1 = std::max(worst1, g * eps / 5.0);
      ++n1;
    }
  };
  for (int k = 0; k < 10; ++k)
    check_type1(fixtures::hairpin(0.028 + 0.0035 * k, 1.5 + 0.11 * ((k * 7) % 9)), "hairpin", k);
  for (int k = 0; k < 6; ++k)
    check_type1(fixtures::spiral_loop(0.1, 0.006 + 0.0012 * k, 6 + (k % 4)), "spiral", k);
  c.gate(n1 >= 20, fmt("only %d type I instances (need 20)", n1));

  // every excised type II pocket obeys 50 ceil(1/eps); randomized packed
  // corner pockets with the window width matched to the corner spacing
  int n2 = 0;
  double worst2 = 0;
  for (int k = 0; k < 20; ++k) {
    const int corners = 15 + (k % 8);
    const double spacing = 0.24 + 0.008 * (k % 6);
    const auto cp = fixtures::corner_packed(corners, spacing);
    SurgeryConfig c2 = cfg;
    c2.delta = spacing;
    const auto rep = surgery_decompose(cp, c2);
    for (const auto& cut : rep.cuts) {
      if (cut.kind != CutRecord::Kind::TypeII) continue;
      const double bound = 50.0 * std::ceil(1.0 / eps);
      const double g = ball_growth_constant(measure_of(rep.pieces[cut.piece_index])).lower;
      c.gate(g <= bound, fmt("pocket %d type II piece growth %.3f over 50 ceil(1/eps) = %.0f", k,
                             g, bound));
      worst2 = std::max(worst2, g / bound);
      ++n2;
    }
  }
  c.gate(n2 >= 20, fmt("only %d type II instances (need 20)", n2));

  c.headline = fmt(
      "sub-lemma oracles, zero violations: 4/eps0 worst %.0f%%, 8 ceil(L/delta) worst %.0f%%, "
      "%d type I pieces worst %.0f%% of 5/eps, %d type II pockets worst %.0f%% of 50 ceil(1/eps)",
      100 * worst_bilip, 100 * worst_window, n1, 100 * worst1, n2, 100 * worst2);
}

// ---------------------------------------------------------------------------
// 3. Riesz potential oracles

void criterion3(Criterion& c) {
  // I_alpha p_1(0) = (4 pi)^{-d/2} Gamma((d-alpha)/2) / Gamma(d/2)
  double worst_gauss = 0;
  for (int d : {2, 3}) {
    std::vector<double> alphas{0.25, 0.5, 0.75};
    if (d == 3) alphas.push_back(1.5);
    for (double alpha : alphas) {
      auto profile = [d](double t) { return std::pow(4 * M_PI * (1 + t), -0.5 * d); };
      const double got = riesz_semigroup_value(alpha, profile, 1e14);
      const double want =
          std::pow(4 * M_PI, -0.5 * d) * std::tgamma(0.5 * (d - alpha)) / std::tgamma(0.5 * d);
      const double rel = std::abs(got - want) / want;
      c.gate(rel <= 1e-8, fmt("gaussian d=%d alpha=%.2f rel %.2e (bar 1e-8)", d, alpha, rel));
      worst_gauss = std::max(worst_gauss, rel);
    }
  }

  // direct kernel vs semigroup quadrature on curve measures
  double worst_pair = 0;
  {
    const auto mu = measure_of(fixtures::circle(1.0, 64.0));
    const Point<2> x(1.7, 0.4);
    for (double alpha : {0.25, 0.5, 0.75}) {
      const Point<2> a = riesz_direct(mu, x, alpha);
      const Point<2> b = riesz_semigroup(mu, x, alpha);
      const double rel = (a - b).norm() / a.norm();
      c.gate(rel <= 1e-5, fmt("circle alpha=%.2f direct/semigroup rel %.2e (bar 1e-5)", alpha, rel));
      worst_pair = std::max(worst_pair, rel);
    }
  }
  {
    const auto mu = measure_of(fixtures::trefoil(0.25, 64.0));
    const Point<3> x(0.6, -0.3, 0.5);
    for (double alpha : {0.25, 0.5, 0.75, 1.5}) {
      const Point<3> a = riesz_direct(mu, x, alpha);
      const Point<3> b = riesz_semigroup(mu, x, alpha);
      const double rel = (a - b).norm() / a.norm();
      c.gate(rel <= 1e-5, fmt("trefoil alpha=%.2f direct/semigroup rel %.2e (bar 1e-5)", alpha, rel));
      worst_pair = std::max(worst_pair, rel);
    }
  }

  // I_alpha mu_lambda(lambda x) = lambda^{1+alpha-d} I_alpha mu(x)
  double worst_dil = 0;
  {
    const auto base2 = fixtures::circle(1.0, 64.0);
    const auto mu2 = measure_of(base2);
    const Point<2> x2(1.7, 0.4);
    const auto base3 = fixtures::trefoil(0.25, 64.0);
    const auto mu3 = measure_of(base3);
    const Point<3> x3(0.6, -0.3, 0.5);
    for (double lambda : {0.5, 2.0, 4.0}) {
      const double alpha = 0.5;
      const Point<2> a = riesz_direct(measure_of(dilate<2>(base2, lambda)),
                                      Point<2>(lambda * x2), alpha);
      const Point<2> b = std::pow(lambda, 1 + alpha - 2) * riesz_direct(mu2, x2, alpha);
      const double rel2 = (a - b).norm() / b.norm();
      const double beta = 0.75;
      const Point<3> a3 = riesz_direct(measure_of(dilate<3>(base3, lambda)),
                                       Point<3>(lambda * x3), beta);
      const Point<3> b3 = std::pow(lambda, 1 + beta - 3) * riesz_direct(mu3, x3, beta);
      const double rel3 = (a3 - b3).norm() / b3.norm();
      c.gate(rel2 <= 1e-8, fmt("dilation d=2 lambda=%.1f rel %.2e (bar 1e-8)", lambda, rel2));
      c.gate(rel3 <= 1e-8, fmt("dilation d=3 lambda=%.1f rel %.2e (bar 1e-8)", lambda, rel3));
      worst_dil = std::max({worst_dil, rel2, rel3});
    }
  }

  c.headline = fmt(
      "riesz oracles: gaussian closed form worst %.1e (bar 1e-8), both paths on curves worst "
      "%.1e (bar 1e-5), dilation identity worst %.1e (bar 1e-8)",
      worst_gauss, worst_pair, worst_dil);
}

// ---------------------------------------------------------------------------
// 4. pointwise lemmas with measured constants across the suite and dilations

void criterion4(Criterion& c) {
  struct Inst {
    std::string name;
    Curve<3> curve;
    double clearance;  // lattice exclusion radius, scaled with the curve
  };
  const auto circle = fixtures::circle3(1.0, 20.0);
  const std::vector<Inst> suite = {
      {"circle", circle, 0.08},
      {"circle x0.5", dilate<3>(circle, 0.5), 0.04},
      {"circle x2", dilate<3>(circle, 2.0), 0.16},
      {"trefoil", fixtures::trefoil(0.25, 48.0), 0.04},
  };
  const std::vector<double> global_alphas{0.3, 0.5, 0.7};
  const std::vector<double> interp_alphas{0.5, 1.0, 1.5};

  std::map<double, std::vector<double>> c1_by_alpha, c2_by_alpha;
  std::size_t min_points = SIZE_MAX;
  double worst_margin = std::numeric_limits<double>::infinity();

  for (const auto& inst : suite) {
    const auto mu = measure_of(inst.curve);
    const auto pts = sample_point_lattice(mu, 6, 1.6, inst.clearance);
    c.gate(pts.size() >= 200,
           fmt("%s has only %zu sample points (need 200)", inst.name.c_str(), pts.size()));
    min_points = std::min(min_points, pts.size());

    const auto S = cone_surface(inst.curve);
    for (double alpha : global_alphas) {
      const auto rep = check_lemma_pointwise_global(inst.curve, S, alpha, pts);
      c.gate(rep.all_hold, fmt("%s alpha=%.1f global bound fails, worst margin %.3f",
                               inst.name.c_str(), alpha, rep.worst_margin));
      worst_margin = std::min(worst_margin, rep.worst_margin);
      c1_by_alpha[alpha].push_back(rep.constant);
    }

    BmoEstimate table;
    bool have_table = false;
    for (double alpha : interp_alphas) {
      const auto rep = check_lemma_interpolation1(inst.curve, alpha, pts, 48, 4.0,
                                                  have_table ? &table : nullptr);
      if (!have_table) {
        table = rep.bmo_table;
        have_table = true;
      }
      c.gate(!rep.unstable_exponent && rep.c2_measured > 0,
             fmt("%s alpha=%.1f interpolation constant degenerate", inst.name.c_str(), alpha));
      c2_by_alpha[alpha].push_back(rep.c2_measured);
    }
  }

  // stability: every measured constant within 20% of its alpha-bucket mean
  double worst_spread = 0;
  auto stability = [&](const char* what, const std::map<double, std::vector<double>>& buckets) {
    for (const auto& [alpha, vals] : buckets) {
      double mean = 0;
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      for (std::size_t i = 0; i < vals.size(); ++i) {
        const double dev = std::abs(vals[i] - mean) / mean;
        c.gate(dev <= 0.20, fmt("%s alpha=%.1f instance %zu constant %.4f vs mean %.4f (%.0f%%)",
                                what, alpha, i, vals[i], mean, 100 * dev));
        worst_spread = std::max(worst_spread, dev);
      }
    }
  };
  stability("C1", c1_by_alpha);
  stability("C2", c2_by_alpha);

  c.headline = fmt(
      "pointwise lemmas on 4 curve instances: >=%zu points each, worst margin %.3f (must stay "
      "nonnegative), constant spread %.1f%% (bar 20%%)",
      min_points, worst_margin, 100 * worst_spread);
}

// ---------------------------------------------------------------------------
// 5. main embedding at desk scale

// || |I_alpha F| ||_{L^{p,1}} / ||F||_1 for the mollified loop current of a
// curve, evaluated on its own margin-3 grid
double loop_ratio(const Curve<3>& curve, int n, double width_cells, double alpha) {
  const auto like = make_grid_covering(bounding_box(curve), n, 3.0, 3);
  const auto F = loop_current(curve, width_cells * like.h, like);
  const double mass = F.mass_l1();
  auto mag = FieldGrid<3>::zeros(F.shape, F.h, F.origin, 1);
  for (int comp = 0; comp < 3; ++comp) {
    auto s = FieldGrid<3>::zeros(F.shape, F.h, F.origin, 1);
    for (std::int64_t f = 0; f < F.n_cells(); ++f)
      s.data[static_cast<std::size_t>(f)] = F.data[static_cast<std::size_t>(f) * 3 + comp];
    const auto I = riesz_potential_fft(s, alpha);
    for (std::size_t i = 0; i < mag.data.size(); ++i) mag.data[i] += I.data[i] * I.data[i];
  }
  for (double& v : mag.data) v = std::sqrt(v);
  return lorentz_norm(rearrange(mag), 3.0 / (3.0 - alpha), 1.0) / mass;
}

void criterion5(Criterion& c) {
  const auto t0 = Clock::now();
  const double alpha = 1.0;
  const auto base = fixtures::circle3(1.0, 24.0);

  std::vector<double> rung;
  for (double wc : {8.0, 4.0, 2.0}) rung.push_back(loop_ratio(base, 128, wc, alpha));
  c.note(fmt("loop ladder {8h,4h,2h}: %.4f %.4f %.4f", rung[0], rung[1], rung[2]));
  for (double r : rung)
    c.gate(std::abs(r - rung[1]) <= 0.15 * rung[1],
           fmt("loop ratio %.4f departs from the middle rung %.4f by over 15%%", r, rung[1]));

  double worst_dil = 0;
  for (double lambda : {0.5, 2.0, 4.0}) {
    const double r = loop_ratio(dilate<3>(base, lambda), 128, 4.0, alpha);
    const double dev = std::abs(r - rung[1]) / rung[1];
    worst_dil = std::max(worst_dil, dev);
    c.gate(dev <= 0.05,
           fmt("dilation lambda=%.1f ratio %.6f vs %.6f (%.2f%%, bar 5%%)", lambda, r, rung[1],
               100 * dev));
  }

  // control family: mollified unit point masses through the same pipeline
  const auto like = make_grid_covering(bounding_box(base), 128, 3.0, 3);
  const Point<3> origin = Point<3>::Zero();
  const auto fam =
      dirac_family(origin, {8 * like.h, 4 * like.h, 2 * like.h}, like);
  std::vector<double> ctl;
  for (const auto& f : fam) {
    const auto I = riesz_potential_fft(f, alpha);
    ctl.push_back(lorentz_norm(rearrange(I), 3.0 / (3.0 - alpha), 1.0) / f.mass_l1());
  }
  c.note(fmt("dirac control ladder: %.4f %.4f %.4f", ctl[0], ctl[1], ctl[2]));
  c.gate(ctl[0] < ctl[1] && ctl[1] < ctl[2],
         fmt("control ratio must climb strictly: %.4f %.4f %.4f", ctl[0], ctl[1], ctl[2]));

  // The control norm gains one log-shell per width halving while its base
  // value carries the whole box, so the three-rung climb at this grid size
  // measures near 1.33 however the potential is evaluated (periodic grid,
  // free-space grid, exact radial profile; the increment per halving matches
  // p (4pi/3)^{1/p} (d-alpha) log 2 / gamma to three digits). Reaching 1.5
  // on this ladder needs a box under ~36 cells or more rungs, so this gate
  // fails at the pinned 128-cell resolution and stays as the honest record.
  const double climb = ctl[2] / ctl[0];
  c.gate(climb >= 1.5, fmt("control climb %.4f below 1.5", climb));

  const double dt = seconds_since(t0);
  c.gate(dt <= 1200.0, fmt("runtime %.0f s over the 20 min budget", dt));
  c.headline = fmt(
      "desk-scale embedding, 128^3, alpha=1: loop ladder flat within %.1f%% (bar 15%%), dilation "
      "drift %.2f%% (bar 5%%), control climb %.3fx (bar 1.5x), %.0f s",
      100 * std::max(std::abs(rung[0] - rung[1]), std::abs(rung[2] - rung[1])) / rung[1],
      100 * worst_dil, climb, dt);
}

// ---------------------------------------------------------------------------
// 6. layer-cake and Lorentz identities

void criterion6(Criterion& c) {
  // indicator closed forms; cell volume an exact binary so the only error is
  // the accumulation itself
  const double v = 1.0 / 512.0;
  double worst_id = 0;
  for (int k : {1, 7, 64, 311}) {
    RearrangedField r;
    r.cell_volume = v;
    r.values.assign(400, 0.0);
    std::fill_n(r.values.begin(), k, 1.0);
    const double V = k * v;
    for (double p : {1.5, 3.0}) {
      const double rel = std::abs(lorentz_norm(r, p, 1.0) - p * std::pow(V, 1 / p)) /
                         (p * std::pow(V, 1 / p));
      c.gate(rel <= 1e-12, fmt("indicator V=%.6f p=%.1f lorentz rel %.2e", V, p, rel));
      worst_id = std::max(worst_id, rel);
    }
    for (double e : {2.0 / 3.0, 5.0 / 6.0}) {  // (d-alpha)/d at alpha 1 and 0.5, d=3
      const double rel =
          std::abs(layercake_norm(r, e) - std::pow(V, e)) / std::pow(V, e);
      c.gate(rel <= 1e-12, fmt("indicator V=%.6f e=%.3f layer cake rel %.2e", V, e, rel));
      worst_id = std::max(worst_id, rel);
    }
  }

  // equivalence between the layer-cake functional and the Lorentz norm: the
  // constant is exactly p, measured across random step fields
  const double alpha = 0.5, p = 2.0 / (2.0 - alpha);
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (std::uint64_t idx = 0; idx < 100; ++idx) {
    auto g = FieldGrid<2>::zeros({16, 16}, 0.25, Point<2>::Zero(), 1);
    auto rng = rng_stream(0x6ca7, idx);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> n_levels(2, 6);
    std::vector<double> levels(static_cast<std::size_t>(n_levels(rng)));
    for (double& w : levels) w = std::exp(3.0 * u(rng) - 1.0);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(levels.size()) - 1);
    for (double& w : g.data) w = u(rng) < 0.35 ? levels[static_cast<std::size_t>(pick(rng))] : 0.0;

    const auto r = rearrange(g);
    const double ratio = lorentz_norm(r, p, 1.0) / (p * layercake_norm(r, 1.0 / p));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    c.gate(std::abs(ratio - 1.0) <= 1e-12,
           fmt("step field %llu equivalence ratio %.15f", (unsigned long long)idx, ratio));
  }

  c.headline = fmt(
      "lorentz identities: indicator closed forms worst %.1e (bar 1e-12), equivalence constant "
      "p across 100 step fields within [%.15f, %.15f]",
      worst_id, lo, hi);
}

// ---------------------------------------------------------------------------
// 7. spectral solvers

void criterion7(Criterion& c) {
  const auto c3 = fixtures::circle3(1.0, 16.0);
  const auto like = make_grid_covering(bounding_box(c3), 64, 3.0, 3);
  const auto F = leray_project(loop_current(c3, 4 * like.h, like));
  const auto Z = solve_divcurl(F);
  const double curl_res = worst_diff(curl_fft(Z), F) / F.max_norm();
  const double div_res = solenoidal_defect(Z);
  const double paths = worst_diff(Z, solve_divcurl_via_riesz(F)) / Z.max_norm();
  c.gate(curl_res <= 1e-8, fmt("curl residual %.2e (bar 1e-8)", curl_res));
  c.gate(div_res <= 1e-8, fmt("div residual %.2e (bar 1e-8)", div_res));
  c.gate(paths <= 1e-8, fmt("assembly paths differ by %.2e (bar 1e-8)", paths));

  // axial closed form 0.5 / (1+z^2)^{3/2}; box 8x the support diameter so the
  // mean-free periodic solution sits within 1% of free space
  double worst_axis = 0;
  {
    const auto big = make_grid_covering(bounding_box(c3), 128, 8.0, 3);
    const auto Zb = solve_divcurl(loop_current(c3, 4 * big.h, big));
    for (int j : {63, 66, 69, 70}) {
      const double z = big.origin[2] + big.h * (j + 0.5);
      double got = 0;
      for (int i0 : {63, 64})
        for (int i1 : {63, 64}) got += Zb.cell(Zb.flat({i0, i1, j}))[2] / 4.0;
      const double want = 0.5 / std::pow(1 + z * z, 1.5);
      const double rel = std::abs(got - want) / want;
      c.gate(rel <= 0.01, fmt("axis z=%.3f rel %.4f (bar 1%%)", z, rel));
      worst_axis = std::max(worst_axis, rel);
    }
  }

  // mollification flatness of the three Lorentz ratios
  std::vector<double> rz, ru, rg;
  for (double wf : {4.0, 6.0, 8.0}) {
    const auto Fw = loop_current(c3, wf * like.h, like);
    const double m = Fw.mass_l1();
    const auto Zw = solve_divcurl(Fw);
    const auto sol = solve_poisson_vec(Fw);
    rz.push_back(lorentz_norm(rearrange(Zw), 1.5, 1.0) / m);
    ru.push_back(lorentz_norm(rearrange(sol.potential), 3.0, 1.0) / m);
    rg.push_back(lorentz_norm(rearrange(sol.gradient), 1.5, 1.0) / m);
  }
  double worst_flat = 0;
  for (int i = 0; i < 3; ++i) {
    for (const auto* v : {&rz, &ru, &rg}) {
      const double dev = std::abs((*v)[i] - (*v)[1]) / (*v)[1];
      worst_flat = std::max(worst_flat, dev);
      c.gate(dev <= 0.15, fmt("ladder ratio %.4f vs %.4f (%.0f%%, bar 15%%)", (*v)[i], (*v)[1],
                              100 * dev));
    }
  }

  // doubling the box, same h and same physical width
  double worst_box = 0;
  {
    const auto s = fixtures::circle3(0.375, 40.0);
    const auto g6 = make_grid_covering(bounding_box(s), 64, 8.0, 3);
    const auto g12 = make_grid_covering(bounding_box(s), 128, 16.0, 3);
    const auto Z6 = solve_divcurl(loop_current(s, 4 * g6.h, g6));
    const auto Z12 = solve_divcurl(loop_current(s, 4 * g12.h, g12));
    for (int j : {31, 36, 42}) {
      double a = 0, b = 0;
      for (int i0 : {31, 32})
        for (int i1 : {31, 32}) {
          a += Z6.cell(Z6.flat({i0, i1, j}))[2] / 4.0;
          b += Z12.cell(Z12.flat({i0 + 32, i1 + 32, j + 32}))[2] / 4.0;
        }
      const double rel = std::abs(a - b) / std::abs(b);
      c.gate(rel <= 0.02, fmt("box doubling station %d rel %.4f (bar 2%%)", j, rel));
      worst_box = std::max(worst_box, rel);
    }
  }

  c.headline = fmt(
      "spectral solvers: residuals %.1e / %.1e, paths %.1e (bars 1e-8), worst axis %.2f%% "
      "(bar 1%%), ladder flat within %.1f%% (bar 15%%), box doubling %.2f%% (bar 2%%)",
      curl_res, div_res, paths, 100 * worst_axis, 100 * worst_flat, 100 * worst_box);
}

// ---------------------------------------------------------------------------
// 8. formats and reproducibility

void criterion8(Criterion& c) {
  const fs::path dir = "acceptance_scratch";
  fs::remove_all(dir);
  fs::create_directories(dir);

  // VFG1 bit-exact round trip
  {
    auto g = FieldGrid<3>::zeros({9, 7, 5}, 0.1875, Point<3>(-0.4, 0.25, -1.5), 3);
    auto rng = rng_stream(0xf00d, 1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& w : g.data) w = u(rng);
    const auto pa = dir / "a.vfg";
    const auto pb = dir / "b.vfg";
    write_vfg(pa.string(), g);
    const auto back = std::get<FieldGrid<3>>(read_vfg(pa.string()));
    const bool meta = back.shape == g.shape && back.h == g.h && back.origin == g.origin &&
                      back.comps == g.comps;
    const bool bits = back.data.size() == g.data.size() &&
                      std::memcmp(back.data.data(), g.data.data(),
                                  g.data.size() * sizeof(double)) == 0;
    c.gate(meta && bits, "VFG1 round trip is not bit-exact");
    write_vfg(pb.string(), back);
    c.gate(slurp(pa) == slurp(pb), "VFG1 rewrite changed bytes");
  }

  // curve JSON bit-exact round trip
  {
    const auto tr = fixtures::trefoil();
    const auto j = curve_to_json(tr);
    const auto back = std::get<Curve<3>>(curve_from_json(j));
    bool bits = back.nodes.rows() == tr.nodes.rows() && back.closed == tr.closed &&
                back.corners == tr.corners;
    if (bits)
      bits = std::memcmp(back.nodes.data(), tr.nodes.data(),
                         sizeof(double) * static_cast<std::size_t>(tr.nodes.size())) == 0;
    c.gate(bits, "curve JSON round trip is not bit-exact");
    c.gate(curve_to_json(back).dump() == j.dump(), "curve JSON reserialization changed");
  }

  // campaign reports are byte-reproducible under a fixed seed
  {
    nlohmann::json cfg = {{"campaign_version", 1},
                          {"out_dir", (dir / "reports").string()},
                          {"grid2", 32},
                          {"alphas", {0.5}},
                          {"dirac_control", false},
                          {"curves", {{{"fixture", "circle"}}}}};
    const auto cc = campaign_from_json(cfg);
    const auto r1 = run_campaign(cc);
    c.gate(r1.pass, "campaign checks failed");
    std::map<std::string, std::string> snap;
    for (const auto& e : fs::directory_iterator(dir / "reports"))
      snap[e.path().filename().string()] = slurp(e.path());
    c.gate(snap.size() >= 3, fmt("campaign wrote only %zu reports", snap.size()));
    const auto r2 = run_campaign(cc);
    c.gate(r2.pass, "campaign rerun checks failed");
    std::size_t matched = 0;
    for (const auto& e : fs::directory_iterator(dir / "reports")) {
      const auto it = snap.find(e.path().filename().string());
      const bool same = it != snap.end() && it->second == slurp(e.path());
      c.gate(same, "report " + e.path().filename().string() + " is not byte-identical");
      matched += same;
    }
    c.note(fmt("%zu report files byte-identical across reruns", matched));
  }

  fs::remove_all(dir);
  c.headline = "formats: VFG1 and curve JSON round-trip bit-exact, campaign reports "
               "byte-reproducible under the fixed seed";
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  struct Row {
    int id;
    const char* title;
    void (*fn)(Criterion&);
  };
  const Row rows[] = {
      {1, "surgery soundness", criterion1},
      {2, "sub-lemma oracles", criterion2},
      {3, "riesz potential oracles", criterion3},
      {4, "pointwise lemmas", criterion4},
      {5, "desk-scale embedding", criterion5},
      {6, "lorentz identities", criterion6},
      {7, "spectral solvers", criterion7},
      {8, "formats", criterion8},
  };

  int failed = 0;
  for (const auto& row : rows) {
    if (!only.empty() && only.count(row.id) == 0) continue;
    Criterion c;
    const auto t0 = Clock::now();
    try {
      row.fn(c);
    } catch (const std::exception& e) {
      c.gate(false, std::string("exception: ") + e.what());
    }
    if (c.headline.empty()) c.headline = row.title;
    std::printf("[%s] %d. %s (%.1f s)\n", c.pass ? "PASS" : "FAIL", row.id, c.headline.c_str(),
                seconds_since(t0));
    for (const auto& line : c.lines) std::printf("        %s\n", line.c_str());
    std::fflush(stdout);
    failed += c.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

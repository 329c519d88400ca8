#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "loopforge/ball_growth.hpp"
#include "loopforge/fixtures.hpp"
#include "loopforge/surgery.hpp"

using namespace loopforge;

namespace {

Curve<2> scaled(const Curve<2>& c, double lambda) {
  Points<2> pts = lambda * c.nodes;
  return build_curve<2>(pts, c.closed, c.corners, c.samples_per_unit / lambda);
}

}  // namespace

TEST_CASE("ball growth: unit circle saturates at pi on-curve, 2pi unrestricted") {
  const auto mu = measure_of(fixtures::circle());

  BallGrowthSampling on;
  on.centers = CenterStrategy::OnCurveNodes;
  const auto e1 = ball_growth_constant(mu, on);
  // on-curve optimum: the full mass 2*pi inside the diametral ball of radius 2
  CHECK(e1.lower == doctest::Approx(M_PI).epsilon(2e-3));
  CHECK(e1.lower <= M_PI * (1 + 1e-9));
  CHECK(e1.argmax_r == doctest::Approx(2.0).epsilon(0.05));

  const auto e2 = ball_growth_constant(mu);
  // unrestricted optimum: the closed unit ball at the center captures 2*pi
  CHECK(e2.lower == doctest::Approx(2 * M_PI).epsilon(2e-3));
  CHECK(e2.lower <= 2 * M_PI * (1 + 1e-9));
  // the bracket must contain the true sup without being vacuous
  CHECK(e2.upper >= 2 * M_PI * (1 - 1e-9));
  CHECK(e2.upper <= 8 * e2.lower);
}

TEST_CASE("ball growth: segment oracles") {
  CurrentMeasure<2> seg;
  seg.segments = {{Point<2>(0, 0), Point<2>(1, 0), 1.0}};
  const auto e = ball_growth_constant(seg);
  CHECK(e.lower == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(e.upper >= e.lower);
  CHECK(e.upper <= 10 * e.lower);

  CurrentMeasure<2> par;
  par.segments = {{Point<2>(0, 0), Point<2>(1, 0), 1.0},
                  {Point<2>(0, 1e-3), Point<2>(1, 1e-3), 1.0}};
  const auto e2 = ball_growth_constant(par);
  CHECK(e2.lower == doctest::Approx(4.0).epsilon(0.03));
  CHECK(e2.lower <= 4.0 * (1 + 1e-9));

  CurrentMeasure<2> empty;
  CHECK_THROWS_AS(ball_growth_constant(empty), EmptyMeasure);
}

TEST_CASE("oscillation scale: circle oracle and monotonicity") {
  const auto c = fixtures::circle();
  for (double delta : {0.5, 1.0}) {
    const double osc = max_oscillation_at_scale(c, delta);
    CHECK(osc == doctest::Approx(2 * std::sin(delta / 2)).epsilon(0.01));
  }
  CHECK(max_oscillation_at_scale(c, 0.3) <= max_oscillation_at_scale(c, 0.6));
  CHECK(max_oscillation_at_scale(c, 0.6) <= max_oscillation_at_scale(c, 1.2));
}

TEST_CASE("find_delta: circle hits 2R asin(1/6)") {
  const double target = 2 * std::asin(1.0 / 6.0);
  const auto c = fixtures::circle();
  const double d = find_delta(c);
  CHECK(std::abs(d - target) <= 0.004);
  CHECK(max_oscillation_at_scale(c, d) <= 1.0 / 3.0);

  const auto c3 = fixtures::circle(3.0);
  CHECK(find_delta(c3) == doctest::Approx(3 * d).epsilon(1e-3));

  // stadium: the caps of radius r dominate, delta ~ r * 2 asin(1/6)
  const auto st = fixtures::stadium();
  CHECK(find_delta(st) == doctest::Approx(0.5 * target).epsilon(0.03));
}

TEST_CASE("find_delta: corners") {
  const auto sq = fixtures::unit_square();
  CHECK_THROWS_AS(find_delta(sq), NoValidDelta);
  // corner-aware variant sees four straight stretches with zero oscillation
  CHECK(find_delta(sq, 1.0 / 3.0, true) == doctest::Approx(2.0));
}

TEST_CASE("violating_pair: circle is clean, hairpin folds back") {
  const auto c = fixtures::circle();
  CHECK_FALSE(violating_pair(c, 0.05, 0.33).has_value());

  const auto h = fixtures::hairpin();  // strands 0.04 apart
  const double d = find_delta(h);
  CHECK(d == doctest::Approx(0.02 * 2 * std::asin(1.0 / 6.0)).epsilon(0.05));
  const auto vp = violating_pair(h, 0.05, d);
  REQUIRE(vp.has_value());
  // chord >= strand gap 0.04 forces arc >= 0.04/eps = 0.8 around the near cap
  CHECK(vp->arc == doctest::Approx(0.8).epsilon(0.02));
  CHECK(vp->chord >= 0.04 * (1 - 1e-9));
  CHECK(vp->chord <= 0.05 * vp->arc * (1 + 1e-9));
  CHECK(vp->t < vp->t_prime);
  CHECK(vp->arc == doctest::Approx(circle_distance(h, vp->t, vp->t_prime)));

  CHECK_THROWS_AS(violating_pair(h, 1.5, d), EpsilonOutOfRange);
}

TEST_CASE("corner spacing windows") {
  const double eps = 0.05, delta = 0.3;  // K = 20

  const auto cp = fixtures::corner_packed(21, delta);  // 21 interior + 2 junctions
  const auto sv = corner_spacing_violation(cp, eps, delta);
  REQUIRE(sv.has_value());
  CHECK(sv->corner_count == 21);
  CHECK(sv->chord < delta);
  CHECK(sv->t_prime - sv->t < delta / eps);
  // recount interior corners independently
  int inside = 0;
  for (int idx : cp.corners) {
    double s = cp.cum[idx];
    if (s < sv->t) s += cp.length;
    if (s > sv->t && s < sv->t_prime) ++inside;
  }
  CHECK(inside == sv->corner_count);

  // 19 packed corners stay below the K+1 = 21 threshold
  CHECK_FALSE(corner_spacing_violation(fixtures::corner_packed(17, delta), eps, delta).has_value());
  // exactly K corners in total can never fill a window
  CHECK_FALSE(corner_spacing_violation(fixtures::regular_polygon(20), eps, delta).has_value());
  // plenty of corners but spread out: window span or chord fails
  CHECK_FALSE(corner_spacing_violation(fixtures::regular_polygon(40), eps, delta).has_value());
}

TEST_CASE("surgery: clean circle is a single certified piece") {
  const auto c = fixtures::circle();
  SurgeryConfig cfg;
  cfg.epsilon = 0.05;
  const auto rep = surgery_decompose(c, cfg);
  CHECK(rep.pieces.size() == 1);
  CHECK(rep.cuts.empty());
  CHECK(rep.type1_count == 0);
  CHECK(rep.type2_count == 0);
  CHECK(rep.certified[0] == doctest::Approx(2000.0));
  CHECK(rep.total_piece_length == doctest::Approx(c.length));

  const auto ver = verify_decomposition(c, rep, 20);
  for (const auto& chk : ver.checks) {
    INFO(chk.name, ": ", chk.detail);
    CHECK(chk.pass);
  }
  CHECK(ver.all_pass);
  CHECK(ver.measured_growth[0] == doctest::Approx(2 * M_PI).epsilon(5e-3));
}

TEST_CASE("surgery: hairpin sheds cap loops via Type I cuts") {
  const auto h = fixtures::hairpin();
  SurgeryConfig cfg;
  cfg.epsilon = 0.05;
  const auto rep = surgery_decompose(h, cfg);

  // each cut peels one cap loop of arc ~0.8 until the strands are too short
  CHECK(rep.pieces.size() == 5);
  CHECK(rep.type1_count == 4);
  CHECK(rep.type2_count == 0);
  for (const auto& cut : rep.cuts) {
    CHECK(cut.kind == CutRecord::Kind::TypeI);
    // bridge no longer than eps times the excised geodesic arc
    CHECK(cut.bridge_length <= cfg.epsilon * (cut.t_prime - cut.t) * (1 + 1e-9));
    CHECK(cut.t_prime - cut.t >= rep.delta * (1 - 1e-9));
    const auto& piece = rep.pieces[cut.piece_index];
    CHECK(piece.length ==
          doctest::Approx((cut.t_prime - cut.t) + cut.bridge_length).epsilon(1e-9));
  }

  const auto ver = verify_decomposition(h, rep, 20);
  for (const auto& chk : ver.checks) {
    INFO(chk.name, ": ", chk.detail);
    CHECK(chk.pass);
  }
  // cap loops are two close strands plus the turn: growth sits near 4.5
  for (double g : ver.measured_growth) CHECK(g == doctest::Approx(4.5).epsilon(0.05));
}

TEST_CASE("surgery: spiral sheds one loop per turn") {
  const auto sp = fixtures::spiral_loop();
  SurgeryConfig cfg;
  cfg.epsilon = 0.05;
  const auto rep = surgery_decompose(sp, cfg);

  // ten turns with adjacent-turn chords ~pitch shed roughly two half-turn
  // loops per turn before the remainder opens up
  CHECK(rep.pieces.size() == 19);
  CHECK(rep.type1_count == 18);
  CHECK(rep.type2_count == 0);
  CHECK(rep.total_piece_length <= (1 + 20 * cfg.epsilon) * sp.length);

  const auto ver = verify_decomposition(sp, rep, 20);
  for (const auto& chk : ver.checks) {
    INFO(chk.name, ": ", chk.detail);
    CHECK(chk.pass);
  }
  for (double g : ver.measured_growth) CHECK(g < 7.0);
}

TEST_CASE("surgery: packed corners trigger a Type II cut first") {
  const auto cp = fixtures::corner_packed(21, 0.3);
  SurgeryConfig cfg;
  cfg.epsilon = 0.05;
  cfg.delta = 0.3;
  const auto rep = surgery_decompose(cp, cfg);

  CHECK(rep.pieces.size() == 2);
  CHECK(rep.type1_count == 0);
  REQUIRE(!rep.cuts.empty());
  CHECK(rep.cuts[0].kind == CutRecord::Kind::TypeII);
  CHECK(rep.cuts[0].corners_removed >= 21);
  CHECK(rep.cuts[0].corners_added <= 2);
  CHECK(rep.cuts[0].certified_constant == doctest::Approx(1000.0));
  CHECK(rep.type2_count == 1);

  const auto ver = verify_decomposition(cp, rep, 20);
  for (const auto& chk : ver.checks) {
    INFO(chk.name, ": ", chk.detail);
    CHECK(chk.pass);
  }

  // same fixture with the packed pocket straddling the basepoint: the window
  // wraps and the cut must re-anchor first
  const auto wrapped = rotate_basepoint(cp, cp.length - 0.05);
  const auto sv = corner_spacing_violation(wrapped, cfg.epsilon, cfg.delta);
  REQUIRE(sv.has_value());
  CHECK(sv->t_prime > wrapped.length);
  const auto rep2 = surgery_decompose(wrapped, cfg);
  REQUIRE(!rep2.cuts.empty());
  CHECK(rep2.cuts[0].kind == CutRecord::Kind::TypeII);
  CHECK(rep2.cuts[0].basepoint_shift > 0);
  CHECK(rep2.cuts[0].corners_removed >= 21);
  CHECK(verify_decomposition(wrapped, rep2, 10).all_pass);
}

TEST_CASE("surgery: dilation equivariance") {
  const auto h = fixtures::hairpin();
  const double lambda = 3.7;
  const auto hs = scaled(h, lambda);

  const double d = find_delta(h, 1.0 / 3.0, true);
  CHECK(find_delta(hs, 1.0 / 3.0, true) == doctest::Approx(lambda * d).epsilon(1e-6));

  SurgeryConfig cfg;
  cfg.epsilon = 0.05;
  cfg.delta = d;
  const auto rep = surgery_decompose(h, cfg);
  SurgeryConfig cfgs = cfg;
  cfgs.delta = lambda * d;
  const auto reps = surgery_decompose(hs, cfgs);

  REQUIRE(rep.pieces.size() == reps.pieces.size());
  CHECK(rep.type1_count == reps.type1_count);
  CHECK(rep.type2_count == reps.type2_count);
  // cut parameters are resolved to 1e-3 * delta, so lengths agree to that
  // resolution rather than to floating-point accuracy
  for (std::size_t j = 0; j < rep.pieces.size(); ++j)
    CHECK(reps.pieces[j].length == doctest::Approx(lambda * rep.pieces[j].length).epsilon(1e-4));
  for (std::size_t j = 0; j < rep.cuts.size(); ++j)
    CHECK(rep.cuts[j].certified_constant == reps.cuts[j].certified_constant);
}

TEST_CASE("surgery: epsilon domain") {
  const auto c = fixtures::circle(1.0, 64.0);
  SurgeryConfig cfg;
  cfg.epsilon = 0.2;
  CHECK_THROWS_AS(surgery_decompose(c, cfg), EpsilonOutOfRange);
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(surgery_decompose(c, cfg), EpsilonOutOfRange);

  cfg.epsilon = 0.05;
  auto rep = surgery_decompose(c, cfg);
  rep.epsilon = 0.5;  // doctored report must be rejected
  CHECK_THROWS_AS(verify_decomposition(c, rep, 1), EpsilonOutOfRange);
}

TEST_CASE("bilipschitz curves obey the 4/eps0 growth bound") {
  // the unit circle saturates: eps0 = 2/pi and sup mass/r = 2pi = 4/eps0
  const auto c = fixtures::circle();
  const double eps0 = bilipschitz_constant(c);
  CHECK(eps0 == doctest::Approx(2.0 / M_PI).epsilon(1e-3));
  const auto est = ball_growth_constant(measure_of(c));
  CHECK(est.lower <= 4.0 / eps0 * (1 + 1e-9));
  CHECK(est.lower >= 4.0 / eps0 * 0.99);  // sharp within sampling error

  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto arc = fixtures::random_arc<2>(seed);
    const double e0 = bilipschitz_constant(arc, 1024);
    REQUIRE(e0 > 0);
    CHECK(e0 <= 1.0 + 1e-12);
    const auto g = ball_growth_constant(measure_of(arc));
    INFO("seed ", seed, " eps0 ", e0, " growth ", g.lower);
    CHECK(g.lower <= 4.0 / e0 * (1 + 1e-9));
  }
}

TEST_CASE("small tangent oscillation bounds growth by 8 ceil(L/delta)") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    // dense sampling: adjacent-edge tangent jumps must stay below the bound
    const auto arc = fixtures::random_arc<2>(seed + 100, 0.15, 5, 512.0);
    const double d = find_delta(arc);
    const double bound = 8.0 * std::ceil(arc.length / d);
    const auto g = ball_growth_constant(measure_of(arc));
    INFO("seed ", seed, " delta ", d, " bound ", bound, " growth ", g.lower);
    CHECK(g.lower <= bound);
  }
}

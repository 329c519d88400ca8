#pragma once

#include "loopforge/ball_growth.hpp"
#include "loopforge/fields.hpp"
#include "loopforge/fixtures.hpp"
#include "loopforge/io.hpp"
#include "loopforge/lorentz.hpp"
#include "loopforge/riesz.hpp"
#include "loopforge/spectral.hpp"
#include "loopforge/surgery.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace loopforge {

template <int D>
Curve<D> dilate(const Curve<D>& c, double lambda) {
  if (!(lambda > 0)) throw OutOfRange("dilation factor must be positive");
  Points<D> nodes = c.nodes * lambda;
  return build_curve<D>(nodes, c.closed, c.corners);
}

inline CurveAny fixture_curve(const std::string& name, double scale = 1.0) {
  CurveAny c;
  if (name == "circle")
    c = fixtures::circle(1.0, 64.0);
  else if (name == "circle3")
    c = fixtures::circle3(1.0, 24.0);
  else if (name == "stadium")
    c = fixtures::stadium(0.5, 1.0, 64.0);
  else if (name == "spiral")
    c = fixtures::spiral_loop(0.1, 0.01, 10, 256.0);
  else if (name == "hairpin")
    c = fixtures::hairpin();
  else if (name == "trefoil")
    c = fixtures::trefoil();
  else if (name == "corner_packed")
    c = fixtures::corner_packed(21, 0.3);
  else if (name == "square")
    c = fixtures::unit_square();
  else
    throw FormatError("unknown fixture '" + name +
                      "' (known: circle, circle3, stadium, spiral, hairpin, "
                      "trefoil, corner_packed, square)");
  if (scale != 1.0)
    std::visit([&](auto& cv) { cv = dilate(cv, scale); }, c);
  return c;
}

// I_alpha of a curve measure sampled at cell centers, except inside the tube
// dist <= 2h where the kernel is unresolved: those cells are zeroed and carry
// an analytic ceiling instead. With ball growth mu(B_r) <= B r the dyadic
// shell sum gives |I_alpha mu(x)| <= 2B dist^{1+alpha-D} / ((1-2^{1+alpha-D})
// gamma), so norms of the field bracket the continuum value from both sides.
template <int D>
struct BandedPotential {
  FieldGrid<D> field;                              // comps = D, tube cells zeroed
  std::vector<std::pair<std::int64_t, double>> tube;  // flat cell -> ceiling
  double tube_radius = 0;
  double growth = 0;
};

template <int D>
BandedPotential<D> riesz_grid(const CurrentMeasure<D>& mu, double alpha,
                              const FieldGrid<D>& like, double growth = 0) {
  if (!(alpha > 0 && alpha < D - 1))
    throw AlphaOutOfRange("banded potential needs alpha in (0, d-1)");
  BandedPotential<D> out;
  out.field = FieldGrid<D>::zeros(like.shape, like.h, like.origin, D);
  out.tube_radius = 2.0 * like.h;
  // measured growth, not the certified covering bracket: the ceiling is an
  // error bar at the right scale, and the loose certificate would inflate it
  // by the covering factor
  out.growth = growth > 0 ? growth : ball_growth_constant(mu).lower;
  const double geom = 2.0 / (1.0 - std::pow(2.0, 1.0 + alpha - D));
  const double gamma = riesz_normalization(D, alpha);

  auto& F = out.field;
  std::vector<double> dist(static_cast<std::size_t>(F.n_cells()), 0.0);
  parallel_for_each(F.n_cells(), [&](std::int64_t f) {
    const Point<D> x = F.cell_center(F.unflat(f));
    const double d0 = distance_to_support(mu, x);
    dist[static_cast<std::size_t>(f)] = d0;
    if (d0 > out.tube_radius) {
      const Point<D> v = riesz_direct(mu, x, alpha);
      for (int a = 0; a < D; ++a) F.data[static_cast<std::size_t>(f * D + a)] = v[a];
    }
  });
  for (std::int64_t f = 0; f < F.n_cells(); ++f) {
    const double d0 = dist[static_cast<std::size_t>(f)];
    if (d0 > out.tube_radius) continue;
    // a cell whose center sits on the support still holds the cell average of
    // an integrable singularity; a quarter cell is its scale
    const double r = std::max(d0, 0.25 * like.h);
    out.tube.emplace_back(f, out.growth * geom * std::pow(r, 1.0 + alpha - D) / gamma);
  }
  return out;
}

// Decreasing rearrangement of the banded field; the upper variant swaps the
// zeroed tube cells for their analytic ceilings.
template <int D>
RearrangedField rearranged_banded(const BandedPotential<D>& bp, bool upper) {
  RearrangedField r;
  r.cell_volume = bp.field.cell_volume();
  r.values.reserve(static_cast<std::size_t>(bp.field.n_cells()));
  std::size_t k = 0;
  for (std::int64_t f = 0; f < bp.field.n_cells(); ++f) {
    if (k < bp.tube.size() && bp.tube[k].first == f) {
      r.values.push_back(upper ? bp.tube[k].second : 0.0);
      ++k;
    } else {
      r.values.push_back(bp.field.cell_norm(f));
    }
  }
  std::sort(r.values.begin(), r.values.end(), std::greater<>());
  return r;
}

struct NormBundle {
  double layercake_lo = 0, layercake_hi = 0;  // |||.||| bracketed by the tube bar
  double lorentz_lo = 0;                      // L^{p,1} of the lower field
  double split_lo = 0, split_hi = 0;          // layer-cake parts below/above s = 1
};

template <int D>
NormBundle banded_norms(const BandedPotential<D>& bp, double alpha) {
  const double e = (D - alpha) / D;
  const double p = D / (D - alpha);
  NormBundle nb;
  const auto lo = rearranged_banded(bp, false);
  const auto hi = rearranged_banded(bp, true);
  nb.layercake_lo = layercake_norm(lo, e);
  nb.layercake_hi = layercake_norm(hi, e);
  nb.lorentz_lo = lorentz_norm(lo, p, 1.0);
  std::tie(nb.split_lo, nb.split_hi) = split_layercake(lo, e, 1.0);
  return nb;
}

struct CampaignCurve {
  std::string fixture;  // registry name; empty when file is set
  std::string file;
  double scale = 1.0;
  bool dilate = false;  // run the dilation ladder on this curve
};

struct Campaign {
  std::uint64_t seed = 20260814;
  std::string out_dir = "reports";
  int grid2 = 64, grid3 = 24;
  double margin = 3.0;
  double epsilon = 0.01;
  std::vector<double> alphas{0.5};
  std::vector<double> dilations{0.5, 1.0, 2.0, 4.0};
  std::vector<CampaignCurve> curves;
  bool dirac_control = true;
  nlohmann::json raw;  // normalized config, hashed into every report
};

inline nlohmann::json campaign_to_json(const Campaign& cc) {
  nlohmann::json j;
  j["campaign_version"] = 1;
  j["seed"] = cc.seed;
  j["out_dir"] = cc.out_dir;
  j["grid2"] = cc.grid2;
  j["grid3"] = cc.grid3;
  j["margin"] = cc.margin;
  j["epsilon"] = cc.epsilon;
  j["alphas"] = cc.alphas;
  j["dilations"] = cc.dilations;
  j["dirac_control"] = cc.dirac_control;
  auto arr = nlohmann::json::array();
  for (const auto& e : cc.curves) {
    nlohmann::json c;
    if (!e.fixture.empty()) c["fixture"] = e.fixture;
    if (!e.file.empty()) c["file"] = e.file;
    if (e.scale != 1.0) c["scale"] = e.scale;
    if (e.dilate) c["dilate"] = true;
    arr.push_back(std::move(c));
  }
  j["curves"] = std::move(arr);
  return j;
}

inline Campaign campaign_from_json(const nlohmann::json& j) {
  if (!j.contains("campaign_version") || j["campaign_version"].get<int>() != 1)
    throw FormatError("campaign_version must be 1");
  Campaign cc;
  if (j.contains("seed")) cc.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("out_dir")) cc.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("grid2")) cc.grid2 = j["grid2"].get<int>();
  if (j.contains("grid3")) cc.grid3 = j["grid3"].get<int>();
  if (j.contains("margin")) cc.margin = j["margin"].get<double>();
  if (j.contains("epsilon")) cc.epsilon = j["epsilon"].get<double>();
  if (j.contains("alphas")) cc.alphas = j["alphas"].get<std::vector<double>>();
  if (j.contains("dilations")) cc.dilations = j["dilations"].get<std::vector<double>>();
  if (j.contains("dirac_control")) cc.dirac_control = j["dirac_control"].get<bool>();
  if (j.contains("curves")) {
    cc.curves.clear();
    for (const auto& c : j["curves"]) {
      CampaignCurve e;
      if (c.contains("fixture")) e.fixture = c["fixture"].get<std::string>();
      if (c.contains("file")) e.file = c["file"].get<std::string>();
      if (e.fixture.empty() == e.file.empty())
        throw FormatError("each campaign curve needs exactly one of fixture/file");
      if (c.contains("scale")) e.scale = c["scale"].get<double>();
      if (c.contains("dilate")) e.dilate = c["dilate"].get<bool>();
      cc.curves.push_back(std::move(e));
    }
  }
  cc.raw = campaign_to_json(cc);
  return cc;
}

inline Campaign default_campaign() {
  Campaign cc;
  cc.curves = {{"circle", "", 1.0, false},
               {"stadium", "", 1.0, false},
               {"circle3", "", 1.0, true}};
  cc.raw = campaign_to_json(cc);
  return cc;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct CheckList {
  nlohmann::json rows = nlohmann::json::array();
  bool all_pass = true;

  void add(const std::string& name, bool pass, double value, const std::string& detail) {
    all_pass = all_pass && pass;
    rows.push_back({{"name", name}, {"pass", pass}, {"value", value}, {"detail", detail}});
  }
};

// One curve at one alpha: whole-curve banded norms, surgery pieces with their
// own grids and ratio table, potential additivity of the pieces on the whole
// grid, the I/II split at s = 1, and (optionally) the dilation ladder whose
// ratio |||I_alpha mu|||/|Gamma| is scale-invariant in exact arithmetic.
template <int D>
nlohmann::json verify_curve(const Curve<D>& input, const std::string& name, double alpha,
                            bool dilate_ladder, const Campaign& cc, CheckList& checks,
                            std::string& csv) {
  const int grid_n = D == 2 ? cc.grid2 : cc.grid3;
  const std::string tag = name + " a=" + format_double(alpha);
  nlohmann::json j;
  j["curve"] = name;
  j["dim"] = D;
  j["alpha"] = alpha;
  j["length"] = input.length;

  const auto mu = measure_of(input);
  const auto like = make_grid_covering(bounding_box(input), grid_n, cc.margin, D);
  const auto whole = riesz_grid(mu, alpha, like);
  const auto nb = banded_norms(whole, alpha);
  const double ratio_whole = nb.layercake_lo / input.length;
  j["whole"] = {{"layercake_lo", nb.layercake_lo}, {"layercake_hi", nb.layercake_hi},
                {"lorentz", nb.lorentz_lo},        {"ratio", ratio_whole},
                {"split_lo", nb.split_lo},         {"split_hi", nb.split_hi},
                {"tube_cells", whole.tube.size()}, {"growth", whole.growth}};
  checks.add(tag + ": ratio finite", std::isfinite(ratio_whole) && ratio_whole > 0,
             ratio_whole, "layercake_lo / length on the whole curve");
  const double split_defect = std::abs(nb.split_lo + nb.split_hi - nb.layercake_lo) /
                              std::max(nb.layercake_lo, 1e-300);
  checks.add(tag + ": split identity", split_defect <= 1e-12, split_defect,
             "I + II at s=1 vs whole layer-cake, relative");
  csv += name + "," + format_double(alpha) + ",whole," + format_double(input.length) + "," +
         format_double(nb.layercake_lo) + "," + format_double(nb.layercake_hi) + "," +
         format_double(nb.lorentz_lo) + "," + format_double(ratio_whole) + "\n";

  const auto rep = surgery_decompose(input, {cc.epsilon});
  j["surgery"] = {{"epsilon", rep.epsilon},
                  {"delta", rep.delta},
                  {"pieces", rep.pieces.size()},
                  {"type1", rep.type1_count},
                  {"type2", rep.type2_count},
                  {"total_piece_length", rep.total_piece_length}};

  double sum_lo = 0, sum_hi = 0, rmin = std::numeric_limits<double>::max(), rmax = 0;
  auto parts = nlohmann::json::array();
  std::vector<CurrentMeasure<D>> mu_pieces;
  std::vector<double> growths;
  for (std::size_t i = 0; i < rep.pieces.size(); ++i) {
    const auto& piece = rep.pieces[i];
    mu_pieces.push_back(measure_of(piece));
    const auto plike = make_grid_covering(bounding_box(piece), grid_n, cc.margin, D);
    const auto bp = riesz_grid(mu_pieces.back(), alpha, plike);
    growths.push_back(bp.growth);
    const auto pn = banded_norms(bp, alpha);
    const double ratio = pn.layercake_lo / piece.length;
    sum_lo += pn.layercake_lo;
    sum_hi += pn.layercake_hi;
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
    parts.push_back({{"piece", i},
                     {"length", piece.length},
                     {"layercake_lo", pn.layercake_lo},
                     {"layercake_hi", pn.layercake_hi},
                     {"ratio", ratio}});
    csv += name + "," + format_double(alpha) + "," + std::to_string(i) + "," +
           format_double(piece.length) + "," + format_double(pn.layercake_lo) + "," +
           format_double(pn.layercake_hi) + "," + format_double(pn.lorentz_lo) + "," +
           format_double(ratio) + "\n";
  }
  j["pieces"] = std::move(parts);
  j["piece_sum_lo"] = sum_lo;
  j["piece_sum_hi"] = sum_hi;
  j["piece_ratio_spread"] = rmax / rmin;
  checks.add(tag + ": piece ratios finite", std::isfinite(sum_lo / rep.total_piece_length),
             sum_lo / rep.total_piece_length, std::to_string(rep.pieces.size()) + " pieces");

  // I_alpha is linear and the piece currents sum to the input current, so on
  // a common grid the piece potentials must reproduce the whole-curve field
  // wherever every tube is cleared; quadrature is the only slack.
  if (rep.pieces.size() > 1) {
    std::vector<BandedPotential<D>> on_whole;
    for (std::size_t i = 0; i < mu_pieces.size(); ++i)
      on_whole.push_back(riesz_grid(mu_pieces[i], alpha, like, growths[i]));
    const auto in_tube = [](const BandedPotential<D>& bp, std::int64_t f) {
      return std::binary_search(bp.tube.begin(), bp.tube.end(), std::make_pair(f, 0.0),
                                [](const auto& a, const auto& b) { return a.first < b.first; });
    };
    double worst = 0;
    for (std::int64_t f = 0; f < like.n_cells(); ++f) {
      bool masked = in_tube(whole, f);
      for (const auto& bp : on_whole) masked = masked || in_tube(bp, f);
      if (masked) continue;
      for (int a = 0; a < D; ++a) {
        double s = 0;
        for (const auto& bp : on_whole) s += bp.field.data[static_cast<std::size_t>(f * D + a)];
        worst = std::max(worst,
                         std::abs(s - whole.field.data[static_cast<std::size_t>(f * D + a)]));
      }
    }
    const double rel = worst / std::max(whole.field.max_norm(), 1e-300);
    j["potential_additivity"] = rel;
    checks.add(tag + ": potential additivity", rel <= 1e-6, rel,
               "piece potentials vs whole on the common grid, outside all tubes");
    j["whole_vs_piece_sum"] = nb.layercake_lo / sum_lo;
  }

  if (dilate_ladder) {
    auto ladder = nlohmann::json::array();
    double base = 0;
    bool flat = true;
    double worst_dev = 0;
    for (const double lam : cc.dilations) {
      const auto scaled = dilate(input, lam);
      const auto slike = make_grid_covering(bounding_box(scaled), grid_n, cc.margin, D);
      const auto sbp = riesz_grid(measure_of(scaled), alpha, slike);
      const auto sn = banded_norms(sbp, alpha);
      const double ratio = sn.layercake_lo / scaled.length;
      if (lam == 1.0) base = ratio;
      ladder.push_back({{"lambda", lam}, {"ratio", ratio}});
      csv += name + "," + format_double(alpha) + ",dilation " + format_double(lam) + "," +
             format_double(scaled.length) + "," + format_double(sn.layercake_lo) + "," +
             format_double(sn.layercake_hi) + ",," + format_double(ratio) + "\n";
    }
    for (auto& row : ladder) {
      const double dev = std::abs(row["ratio"].get<double>() / base - 1.0);
      row["deviation"] = dev;
      worst_dev = std::max(worst_dev, dev);
      flat = flat && dev <= 0.05;
    }
    j["dilation"] = std::move(ladder);
    checks.add(tag + ": dilation flat", flat, worst_dev,
               "|||I_alpha mu_lambda||| / |lambda Gamma| vs lambda=1, max deviation");
  }
  return j;
}

// Control family: mollified point masses at shrinking width. The critical
// layer-cake functional of |x|^{alpha-d} diverges logarithmically, so the
// ratio must climb along the ladder instead of settling like a curve's.
inline nlohmann::json dirac_control_report(double alpha, int grid_n, CheckList& checks,
                                           std::string& csv) {
  FieldGrid<2> like = FieldGrid<2>::zeros({grid_n, grid_n}, 2.0 / grid_n,
                                          Point<2>(-1.0, -1.0), 1);
  const std::vector<double> widths{16.0 / grid_n, 8.0 / grid_n, 4.0 / grid_n};
  const Point<2> origin = Point<2>::Zero();
  const auto family = dirac_family(origin, widths, like);
  nlohmann::json ladder = nlohmann::json::array();
  std::vector<double> ratios;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto pot = riesz_potential_fft(family[i], alpha);
    const double r = layercake_norm(rearrange(pot), (2.0 - alpha) / 2.0) / family[i].mass_l1();
    ratios.push_back(r);
    ladder.push_back({{"width", widths[i]}, {"ratio", r}});
    csv += "dirac," + format_double(alpha) + ",width " + format_double(widths[i]) +
           ",,,,," + format_double(r) + "\n";
  }
  bool increasing = true;
  for (std::size_t i = 1; i < ratios.size(); ++i)
    increasing = increasing && ratios[i] > ratios[i - 1];
  checks.add("dirac control: ratio climbs", increasing,
             ratios.back() / ratios.front(),
             "mollified point masses, widths " + format_double(widths.front()) + " down to " +
                 format_double(widths.back()));
  nlohmann::json j;
  j["alpha"] = alpha;
  j["ladder"] = std::move(ladder);
  j["end_to_end"] = ratios.back() / ratios.front();
  return j;
}

struct CampaignResult {
  nlohmann::json summary;
  bool pass = true;
};

inline CampaignResult run_campaign(const Campaign& cc) {
  namespace fs = std::filesystem;
  const std::string hash = hex64(fnv1a64(cc.raw.dump()));
  fs::create_directories(cc.out_dir);

  CheckList checks;
  std::string csv = "curve,alpha,item,length,layercake_lo,layercake_hi,lorentz,ratio\n";

  for (const auto& entry : cc.curves) {
    const std::string name = entry.fixture.empty() ? fs::path(entry.file).stem().string()
                                                   : entry.fixture;
    CurveAny curve = entry.fixture.empty() ? load_curve(entry.file)
                                           : fixture_curve(entry.fixture, entry.scale);
    if (entry.fixture.empty() && entry.scale != 1.0)
      std::visit([&](auto& cv) { cv = dilate(cv, entry.scale); }, curve);
    for (const double alpha : cc.alphas) {
      nlohmann::json rj = std::visit(
          [&](const auto& cv) {
            return verify_curve(cv, name, alpha, entry.dilate, cc, checks, csv);
          },
          curve);
      rj["campaign_version"] = 1;
      rj["config_hash"] = hash;
      rj["seed"] = cc.seed;
      char suffix[32];
      std::snprintf(suffix, sizeof(suffix), "_a%.4g", alpha);
      std::ofstream out(fs::path(cc.out_dir) / (name + suffix + ".json"));
      out << rj.dump(2) << "\n";
    }
  }

  if (cc.dirac_control) {
    nlohmann::json dj = dirac_control_report(cc.alphas.front(), std::max(cc.grid2, 64),
                                             checks, csv);
    dj["campaign_version"] = 1;
    dj["config_hash"] = hash;
    std::ofstream out(fs::path(cc.out_dir) / "dirac_control.json");
    out << dj.dump(2) << "\n";
  }

  {
    std::ofstream out(fs::path(cc.out_dir) / "ratios.csv");
    out << csv;
  }

  CampaignResult res;
  res.summary["campaign_version"] = 1;
  res.summary["config_hash"] = hash;
  res.summary["seed"] = cc.seed;
  res.summary["config"] = cc.raw;
  res.summary["checks"] = checks.rows;
  res.summary["all_pass"] = checks.all_pass;
  res.pass = checks.all_pass;
  std::ofstream out(fs::path(cc.out_dir) / "summary.json");
  out << res.summary.dump(2) << "\n";
  return res;
}

}  // namespace loopforge

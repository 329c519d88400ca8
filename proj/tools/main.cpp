#include "loopforge/campaign.hpp"
#include "loopforge/spectral.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <memory>

namespace {

using namespace loopforge;

// exit codes: 0 pass, 2 a computed verification check failed, 1 everything else
struct VerificationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json base_report(const nlohmann::json& config) {
  nlohmann::json j;
  j["campaign_version"] = 1;
  j["config"] = config;
  j["config_hash"] = hex64(fnv1a64(config.dump()));
  return j;
}

std::uint64_t file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a64(bytes);
}

void emit(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

struct SurgeryOpts {
  std::string curve, out;
  double epsilon = 0.05, delta = 0;
};

void cmd_surgery(const SurgeryOpts& o) {
  const CurveAny any = load_curve(o.curve);
  std::visit(
      [&](const auto& cv) {
        SurgeryConfig cfg;
        cfg.epsilon = o.epsilon;
        cfg.delta = o.delta;
        const auto rep = surgery_decompose(cv, cfg);
        const auto ver = verify_decomposition(cv, rep);

        auto j = base_report({{"cmd", "surgery"},
                              {"epsilon", o.epsilon},
                              {"delta", o.delta},
                              {"curve", hex64(fnv1a64(curve_to_json(cv).dump()))}});
        j["epsilon"] = rep.epsilon;
        j["delta"] = rep.delta;
        j["type1"] = rep.type1_count;
        j["type2"] = rep.type2_count;
        j["t1_bound"] = rep.t1_bound;
        j["t2_bound"] = rep.t2_bound;
        j["input_length"] = rep.input_length;
        j["total_piece_length"] = rep.total_piece_length;
        j["out_of_theorem"] = rep.out_of_theorem;
        auto pieces = nlohmann::json::array();
        for (std::size_t i = 0; i < rep.pieces.size(); ++i) {
          auto pj = curve_to_json(rep.pieces[i]);
          pj["length"] = rep.pieces[i].length;
          pj["certified_growth"] = rep.certified[i];
          pieces.push_back(std::move(pj));
        }
        j["pieces"] = std::move(pieces);
        auto cuts = nlohmann::json::array();
        for (const auto& c : rep.cuts)
          cuts.push_back({{"kind", c.kind == CutRecord::Kind::TypeI ? "I" : "II"},
                          {"t", c.t},
                          {"t_prime", c.t_prime},
                          {"basepoint_shift", c.basepoint_shift},
                          {"bridge_length", c.bridge_length},
                          {"corners_removed", c.corners_removed},
                          {"corners_added", c.corners_added},
                          {"piece_index", c.piece_index}});
        j["cuts"] = std::move(cuts);
        auto checks = nlohmann::json::array();
        for (const auto& c : ver.checks) {
          std::printf("[%s] %s  (margin %.3g)%s%s\n", c.pass ? " ok " : "FAIL",
                      c.name.c_str(), c.margin, c.detail.empty() ? "" : ": ",
                      c.detail.c_str());
          checks.push_back({{"name", c.name},
                            {"pass", c.pass},
                            {"margin", c.margin},
                            {"detail", c.detail}});
        }
        j["verification"] = std::move(checks);
        j["all_pass"] = ver.all_pass;
        std::printf("pieces: %zu (type I %d, type II %d), length %.6g -> %.6g\n",
                    rep.pieces.size(), rep.type1_count, rep.type2_count,
                    rep.input_length, rep.total_piece_length);
        if (!o.out.empty()) {
          std::ofstream os(o.out);
          if (!os) throw FormatError("cannot write " + o.out);
          os << j.dump(2) << "\n";
        }
        if (!ver.all_pass) throw VerificationFailed("surgery re-verification failed");
      },
      any);
}

struct PotentialOpts {
  std::string curve, out;
  double alpha = 0.5, margin = 3.0;
  int grid = 64;
};

void cmd_potential(const PotentialOpts& o) {
  const CurveAny any = load_curve(o.curve);
  std::visit(
      [&](const auto& cv) {
        constexpr int D = std::is_same_v<std::decay_t<decltype(cv)>, Curve<2>> ? 2 : 3;
        const auto like = make_grid_covering(bounding_box(cv), o.grid, o.margin, D);
        const auto bp = riesz_grid(measure_of(cv), o.alpha, like);
        write_vfg(o.out, bp.field);
        const auto nb = banded_norms(bp, o.alpha);
        auto j = base_report({{"cmd", "potential"},
                              {"alpha", o.alpha},
                              {"grid", o.grid},
                              {"margin", o.margin},
                              {"curve", hex64(fnv1a64(curve_to_json(cv).dump()))}});
        j["cells"] = bp.field.n_cells();
        j["h"] = bp.field.h;
        j["tube_cells"] = bp.tube.size();
        j["tube_radius"] = bp.tube_radius;
        j["growth"] = bp.growth;
        j["layercake_lo"] = nb.layercake_lo;
        j["layercake_hi"] = nb.layercake_hi;
        j["lorentz"] = nb.lorentz_lo;
        emit(j);
      },
      any);
}

struct NormsOpts {
  std::string field;
  double p = 1.5, q = 1.0, s_cut = 1.0;
};

void cmd_norms(const NormsOpts& o) {
  if (!(o.p > 1.0)) throw BadExponents("p must exceed 1");
  const FieldAny any = read_vfg(o.field);
  std::visit(
      [&](const auto& g) {
        const auto r = rearrange(g);
        auto j = base_report({{"cmd", "norms"},
                              {"p", o.p},
                              {"q", o.q},
                              {"s_cut", o.s_cut},
                              {"field_hash", hex64(file_hash(o.field))}});
        j["cells"] = g.n_cells();
        j["lorentz"] = lorentz_norm(r, o.p, o.q);
        j["layercake_exponent"] = 1.0 / o.p;
        j["layercake"] = layercake_norm(r, 1.0 / o.p);
        const auto [lo, hi] = split_layercake(r, 1.0 / o.p, o.s_cut);
        j["split_lo"] = lo;
        j["split_hi"] = hi;
        emit(j);
      },
      any);
}

struct DivCurlOpts {
  std::string field, out;
  double tol = 1e-2;
};

void cmd_divcurl(const DivCurlOpts& o) {
  const FieldAny any = read_vfg(o.field);
  if (std::holds_alternative<FieldGrid<2>>(any))
    throw DimensionTooSmall("divcurl needs a 3-d field");
  const auto& F = std::get<FieldGrid<3>>(any);
  FieldGrid<3> Z;
  try {
    Z = solve_divcurl(F, o.tol);
  } catch (const NotSolenoidal& e) {
    // a failed input diagnostic is a verification failure, not a usage error
    throw VerificationFailed(e.what());
  }
  write_vfg(o.out, Z);

  // curl Z recovers the solenoidal part of F exactly; the compressible
  // remainder is what the tolerance gate already bounded
  const auto back = curl_fft(Z);
  const auto target = leray_project(F);
  double residual = 0;
  for (std::size_t i = 0; i < F.data.size(); ++i)
    residual = std::max(residual, std::abs(back.data[i] - target.data[i]));
  residual /= std::max(target.max_norm(), 1e-300);
  const auto Z2 = solve_divcurl_via_riesz(F, o.tol);
  double agree = 0;
  for (std::size_t i = 0; i < Z.data.size(); ++i)
    agree = std::max(agree, std::abs(Z2.data[i] - Z.data[i]));
  agree /= std::max(Z.max_norm(), 1e-300);

  auto j = base_report({{"cmd", "divcurl"},
                        {"tol", o.tol},
                        {"field_hash", hex64(file_hash(o.field))}});
  j["solenoidal_defect"] = solenoidal_defect(F);
  j["curl_residual"] = residual;
  j["path_agreement"] = agree;
  emit(j);
  if (residual > 1e-8 || agree > 1e-8)
    throw VerificationFailed("curl residual " + std::to_string(residual) +
                             ", path agreement " + std::to_string(agree));
}

struct PoissonOpts {
  std::string field, out, grad;
};

void cmd_poisson(const PoissonOpts& o) {
  const FieldAny any = read_vfg(o.field);
  if (std::holds_alternative<FieldGrid<2>>(any))
    throw DimensionTooSmall("solve_poisson_vec needs d >= 3");
  const auto& F = std::get<FieldGrid<3>>(any);
  const auto vp = solve_poisson_vec(F);
  write_vfg(o.out, vp.potential);
  if (!o.grad.empty()) {
    // the container holds exactly dim components per cell, so the gradient
    // goes out as three concatenated streams, one per potential component
    std::ofstream os(o.grad, std::ios::binary);
    if (!os) throw FormatError("cannot write field file " + o.grad);
    for (int jcomp = 0; jcomp < 3; ++jcomp) {
      FieldGrid<3> gj = FieldGrid<3>::zeros(F.shape, F.h, F.origin, 3);
      for (std::int64_t c = 0; c < F.n_cells(); ++c)
        for (int a = 0; a < 3; ++a)
          gj.data[static_cast<std::size_t>(c * 3 + a)] =
              vp.gradient.data[static_cast<std::size_t>(c * 9 + jcomp * 3 + a)];
      write_vfg(os, gj);
    }
  }
  double mean = 0;
  for (int c = 0; c < 3; ++c) {
    double s = 0;
    for (std::int64_t f = 0; f < vp.potential.n_cells(); ++f)
      s += vp.potential.data[static_cast<std::size_t>(f * 3 + c)];
    mean = std::max(mean, std::abs(s) / static_cast<double>(vp.potential.n_cells()));
  }
  auto j = base_report({{"cmd", "poisson"}, {"field_hash", hex64(file_hash(o.field))}});
  j["potential_mean_abs"] = mean;
  j["potential_max"] = vp.potential.max_norm();
  j["gradient_max"] = vp.gradient.max_norm();
  emit(j);
}

struct CurrentOpts {
  std::string curve, out;
  double width_cells = 4.0, margin = 3.0;
  int grid = 48;
};

void cmd_current(const CurrentOpts& o) {
  const CurveAny any = load_curve(o.curve);
  std::visit(
      [&](const auto& cv) {
        constexpr int D = std::is_same_v<std::decay_t<decltype(cv)>, Curve<2>> ? 2 : 3;
        const auto like = make_grid_covering(bounding_box(cv), o.grid, o.margin, D);
        const auto F = loop_current(cv, o.width_cells * like.h, like);
        write_vfg(o.out, F);
        auto j = base_report({{"cmd", "current"},
                              {"width_cells", o.width_cells},
                              {"grid", o.grid},
                              {"margin", o.margin},
                              {"curve", hex64(fnv1a64(curve_to_json(cv).dump()))}});
        j["mass"] = F.mass_l1();
        j["h"] = F.h;
        if constexpr (D == 3) j["solenoidal_defect"] = solenoidal_defect(F);
        emit(j);
      },
      any);
}

struct FixtureOpts {
  std::string name, out;
  double scale = 1.0;
};

void cmd_fixture(const FixtureOpts& o) {
  const CurveAny any = fixture_curve(o.name, o.scale);
  std::visit([&](const auto& cv) { save_curve(o.out, cv); }, any);
}

void cmd_campaign_init(const std::string& out) {
  std::ofstream os(out);
  if (!os) throw FormatError("cannot write " + out);
  os << campaign_to_json(default_campaign()).dump(2) << "\n";
}

void cmd_verify(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open campaign file " + path);
  nlohmann::json j;
  in >> j;
  const Campaign cc = campaign_from_json(j);
  const auto res = run_campaign(cc);
  for (const auto& row : res.summary["checks"])
    std::printf("[%s] %s  (%.6g)%s%s\n", row["pass"].get<bool>() ? " ok " : "FAIL",
                row["name"].get<std::string>().c_str(), row["value"].get<double>(),
                row["detail"].get<std::string>().empty() ? "" : ": ",
                row["detail"].get<std::string>().c_str());
  std::printf("reports: %s (config %s)\n", cc.out_dir.c_str(),
              res.summary["config_hash"].get<std::string>().c_str());
  if (!res.pass) throw VerificationFailed("campaign checks failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curve surgery, Riesz potentials, Lorentz norms, spectral div-curl and Poisson"};
  app.require_subcommand(1);

  auto sopt = std::make_shared<SurgeryOpts>();
  auto* s = app.add_subcommand("surgery", "decompose a closed curve and re-verify the cuts");
  s->add_option("--curve", sopt->curve, "curve JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--epsilon", sopt->epsilon, "corner budget, in (0, 1/10)")->required();
  s->add_option("--delta", sopt->delta, "oscillation scale (0: calibrated)");
  s->add_option("--out", sopt->out, "report JSON path");
  s->callback([sopt] { cmd_surgery(*sopt); });

  auto popt = std::make_shared<PotentialOpts>();
  auto* p = app.add_subcommand("potential", "sample I_alpha of a curve measure on a grid");
  p->add_option("--curve", popt->curve, "curve JSON")->required()->check(CLI::ExistingFile);
  p->add_option("--alpha", popt->alpha, "order, in (0, d-1)")->required();
  p->add_option("--grid", popt->grid, "cells per axis");
  p->add_option("--margin", popt->margin, "window size over curve extent");
  p->add_option("--out", popt->out, "VFG1 output")->required();
  p->callback([popt] { cmd_potential(*popt); });

  auto nopt = std::make_shared<NormsOpts>();
  auto* n = app.add_subcommand("norms", "Lorentz and layer-cake norms of a sampled field");
  n->add_option("--field", nopt->field, "VFG1 input")->required()->check(CLI::ExistingFile);
  n->add_option("--p", nopt->p, "primary exponent, > 1")->required();
  n->add_option("--q", nopt->q, "secondary exponent");
  n->add_option("--split", nopt->s_cut, "layer-cake split level");
  n->callback([nopt] { cmd_norms(*nopt); });

  auto dopt = std::make_shared<DivCurlOpts>();
  auto* d = app.add_subcommand("divcurl", "solve curl Z = F, div Z = 0 spectrally");
  d->add_option("--field", dopt->field, "VFG1 input")->required()->check(CLI::ExistingFile);
  d->add_option("--out", dopt->out, "VFG1 output for Z")->required();
  d->add_option("--tol", dopt->tol, "compressible-defect gate");
  d->callback([dopt] { cmd_divcurl(*dopt); });

  auto qopt = std::make_shared<PoissonOpts>();
  auto* q = app.add_subcommand("poisson", "solve -lap U = F spectrally, with gradient");
  q->add_option("--field", qopt->field, "VFG1 input")->required()->check(CLI::ExistingFile);
  q->add_option("--out", qopt->out, "VFG1 output for U")->required();
  q->add_option("--grad", qopt->grad, "output for grad U, three concatenated VFG1 streams");
  q->callback([qopt] { cmd_poisson(*qopt); });

  auto copt = std::make_shared<CurrentOpts>();
  auto* cu = app.add_subcommand("current", "mollify a curve into a loop-current field");
  cu->add_option("--curve", copt->curve, "curve JSON")->required()->check(CLI::ExistingFile);
  cu->add_option("--width-cells", copt->width_cells, "mollifier width in cells, >= 2");
  cu->add_option("--grid", copt->grid, "cells per axis");
  cu->add_option("--margin", copt->margin, "window size over curve extent");
  cu->add_option("--out", copt->out, "VFG1 output")->required();
  cu->callback([copt] { cmd_current(*copt); });

  auto fopt = std::make_shared<FixtureOpts>();
  auto* f = app.add_subcommand("fixture", "write a named fixture curve as JSON");
  f->add_option("--name", fopt->name, "circle, circle3, stadium, spiral, hairpin, trefoil, corner_packed, square")
      ->required();
  f->add_option("--out", fopt->out, "curve JSON path")->required();
  f->add_option("--scale", fopt->scale, "dilation factor");
  f->callback([fopt] { cmd_fixture(*fopt); });

  auto iopt = std::make_shared<std::string>();
  auto* ci = app.add_subcommand("campaign-init", "write the default campaign config");
  ci->add_option("--out", *iopt, "campaign JSON path")->required();
  ci->callback([iopt] { cmd_campaign_init(*iopt); });

  auto vopt = std::make_shared<std::string>();
  auto* v = app.add_subcommand("verify", "run an inequality-verification campaign");
  v->add_option("--campaign", *vopt, "campaign JSON")->required()->check(CLI::ExistingFile);
  v->callback([vopt] { cmd_verify(*vopt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const VerificationFailed& e) {
    std::fprintf(stderr, "verification failed: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

#pragma once

#include "loopforge/field_grid.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <vector>

namespace loopforge {

namespace detail {

// Repeated complex-to-complex passes over every line of the array, one axis at
// a time. Element stride along the slowest axis is comps * prod(inner shapes),
// so walking axes from fastest to slowest lets the stride accumulate.
template <int D>
inline void fft_all_axes(std::vector<std::complex<double>>& a, const std::array<int, D>& shape,
                         int comps, bool inverse) {
  Eigen::FFT<double> fft;
  std::int64_t stride = comps;
  for (int axis = D - 1; axis >= 0; --axis) {
    const int n = shape[axis];
    std::vector<std::complex<double>> line(n), out(n);
    const std::int64_t block = stride * n;
    for (std::int64_t base = 0; base < static_cast<std::int64_t>(a.size()); base += block) {
      for (std::int64_t s = 0; s < stride; ++s) {
        std::complex<double>* p = a.data() + base + s;
        for (int k = 0; k < n; ++k) line[k] = p[k * stride];
        if (inverse)
          fft.inv(out, line);
        else
          fft.fwd(out, line);
        for (int k = 0; k < n; ++k) p[k * stride] = out[k];
      }
    }
    stride *= n;
  }
}

}  // namespace detail

// Complex mode coefficients of a FieldGrid on its periodic box, same cell
// order and component interleaving as the spatial grid. Frequencies are
// xi = 2 pi k / extent with k signed. Zero-mode policy: every inverse
// multiplier sends the mean to zero. For even shapes the +-n/2 mode is its
// own conjugate partner, so any sign-carrying (odd) multiplier would break
// realness there; those operators annihilate the Nyquist shell instead.
template <int D>
struct SpectralGrid {
  std::array<int, D> shape{};
  double h = 0.0;
  Point<D> origin = Point<D>::Zero();
  int comps = 1;
  std::vector<std::complex<double>> data;

  static SpectralGrid analyze(const FieldGrid<D>& g) {
    SpectralGrid s;
    s.shape = g.shape;
    s.h = g.h;
    s.origin = g.origin;
    s.comps = g.comps;
    s.data.assign(g.data.begin(), g.data.end());
    detail::fft_all_axes<D>(s.data, s.shape, s.comps, false);
    return s;
  }

  FieldGrid<D> synthesize() const {
    std::vector<std::complex<double>> a = data;
    detail::fft_all_axes<D>(a, shape, comps, true);
    FieldGrid<D> g = FieldGrid<D>::zeros(shape, h, origin, comps);
    for (std::size_t i = 0; i < a.size(); ++i) g.data[i] = a[i].real();
    return g;
  }

  std::int64_t n_cells() const {
    std::int64_t n = 1;
    for (int a = 0; a < D; ++a) n *= shape[a];
    return n;
  }

  std::complex<double>* cell(std::int64_t f) { return data.data() + f * comps; }
  const std::complex<double>* cell(std::int64_t f) const { return data.data() + f * comps; }

  double xi(int axis, int k) const {
    const int n = shape[axis];
    const int s = (2 * k <= n) ? k : k - n;
    return 2.0 * M_PI * s / (n * h);
  }
};

namespace detail {

// Per-axis frequency table plus the index of the Nyquist mode (-1 when odd).
template <int D>
struct ModeLattice {
  std::array<std::vector<double>, D> xi;
  std::array<int, D> nyq;

  explicit ModeLattice(const SpectralGrid<D>& s) {
    for (int a = 0; a < D; ++a) {
      xi[a].resize(s.shape[a]);
      for (int k = 0; k < s.shape[a]; ++k) xi[a][k] = s.xi(a, k);
      nyq[a] = (s.shape[a] % 2 == 0) ? s.shape[a] / 2 : -1;
    }
  }
};

// Visits every mode with its index vector, frequency vector, squared
// frequency, and a flag for membership in the Nyquist shell.
template <int D, class Op>
inline void for_each_mode(SpectralGrid<D>& s, Op&& op) {
  const ModeLattice<D> lat(s);
  std::array<int, D> iv{};
  Eigen::Matrix<double, D, 1> x;
  const std::int64_t n = s.n_cells();
  for (std::int64_t f = 0; f < n; ++f) {
    bool ny = false;
    double q = 0.0;
    for (int a = 0; a < D; ++a) {
      x[a] = lat.xi[a][iv[a]];
      q += x[a] * x[a];
      ny = ny || iv[a] == lat.nyq[a];
    }
    op(s.cell(f), x, q, ny);
    for (int a = D - 1; a >= 0; --a) {
      if (++iv[a] < s.shape[a]) break;
      iv[a] = 0;
    }
  }
}

// Dimensionless size of the compressible part of already-analyzed spectra:
// ||xi . F|| / || |xi| |F| || over all nonzero non-Nyquist modes.
template <int D>
inline double spectral_defect(SpectralGrid<D>& s) {
  double num = 0.0, den = 0.0;
  for_each_mode<D>(s, [&](std::complex<double>* v, const auto& x, double q, bool ny) {
    if (q == 0.0 || ny) return;
    std::complex<double> dot = 0.0;
    double mag2 = 0.0;
    for (int c = 0; c < D; ++c) {
      dot += x[c] * v[c];
      mag2 += std::norm(v[c]);
    }
    num += std::norm(dot);
    den += q * mag2;
  });
  return den == 0.0 ? 0.0 : std::sqrt(num / den);
}

}  // namespace detail

// i xi_axis / |xi| applied per component; mean and Nyquist shell go to zero.
template <int D>
FieldGrid<D> riesz_transform(const FieldGrid<D>& f, int axis) {
  if (axis < 0 || axis >= D) throw OutOfRange("riesz_transform: axis out of range");
  SpectralGrid<D> s = SpectralGrid<D>::analyze(f);
  detail::for_each_mode<D>(s, [&](std::complex<double>* v, const auto& x, double q, bool ny) {
    if (q == 0.0 || ny) {
      for (int c = 0; c < s.comps; ++c) v[c] = 0.0;
      return;
    }
    const std::complex<double> m(0.0, x[axis] / std::sqrt(q));
    for (int c = 0; c < s.comps; ++c) v[c] *= m;
  });
  return s.synthesize();
}

// |xi|^{-alpha} per component, mean to zero. The symbol is real and even, so
// the Nyquist shell is kept.
template <int D>
FieldGrid<D> riesz_potential_fft(const FieldGrid<D>& f, double alpha) {
  if (!(alpha > 0.0 && alpha < static_cast<double>(D)))
    throw AlphaOutOfRange("riesz_potential_fft: alpha must lie in (0, d)");
  SpectralGrid<D> s = SpectralGrid<D>::analyze(f);
  const double e = -alpha / 2.0;
  detail::for_each_mode<D>(s, [&](std::complex<double>* v, const auto&, double q, bool) {
    const double m = (q == 0.0) ? 0.0 : std::pow(q, e);
    for (int c = 0; c < s.comps; ++c) v[c] *= m;
  });
  return s.synthesize();
}

// Dimensionless size of the compressible part: ||xi . F|| / || |xi| |F| ||
// over all nonzero non-Nyquist modes. Zero for an exactly solenoidal field.
template <int D>
double solenoidal_defect(const FieldGrid<D>& f) {
  if (f.comps != D) throw BadExponents("solenoidal_defect needs a D-component field");
  SpectralGrid<D> s = SpectralGrid<D>::analyze(f);
  return detail::spectral_defect(s);
}

// i xi x F-hat: the exact spectral curl, Nyquist shell annihilated.
inline FieldGrid<3> curl_fft(const FieldGrid<3>& f) {
  if (f.comps != 3) throw BadExponents("curl_fft needs a 3-component field");
  SpectralGrid<3> s = SpectralGrid<3>::analyze(f);
  detail::for_each_mode<3>(s, [&](std::complex<double>* v, const auto& x, double, bool ny) {
    if (ny) {
      v[0] = v[1] = v[2] = 0.0;
      return;
    }
    const std::complex<double> i_unit(0.0, 1.0);
    const std::complex<double> c0 = (x[1] * v[2] - x[2] * v[1]) * i_unit;
    const std::complex<double> c1 = (x[2] * v[0] - x[0] * v[2]) * i_unit;
    const std::complex<double> c2 = (x[0] * v[1] - x[1] * v[0]) * i_unit;
    v[0] = c0;
    v[1] = c1;
    v[2] = c2;
  });
  return s.synthesize();
}

// v - xi (xi . v) / |xi|^2 per mode. The mean passes through unchanged (a
// constant field is solenoidal); the Nyquist shell is annihilated because the
// projector's cross terms carry single factors of the sign-ambiguous xi.
template <int D>
FieldGrid<D> leray_project(const FieldGrid<D>& f) {
  if (f.comps != D) throw BadExponents("leray_project needs a D-component field");
  SpectralGrid<D> s = SpectralGrid<D>::analyze(f);
  detail::for_each_mode<D>(s, [&](std::complex<double>* v, const auto& x, double q, bool ny) {
    if (q == 0.0) return;
    if (ny) {
      for (int c = 0; c < D; ++c) v[c] = 0.0;
      return;
    }
    std::complex<double> dot = 0.0;
    for (int c = 0; c < D; ++c) dot += x[c] * v[c];
    dot /= q;
    for (int c = 0; c < D; ++c) v[c] -= x[c] * dot;
  });
  return s.synthesize();
}

// Z with curl Z = F and div Z = 0, via Z-hat = i xi x F-hat / |xi|^2.
// Refuses input whose compressible part exceeds `tol`: the result would then
// satisfy curl Z = (solenoidal part of F) only. The default admits mollified
// loop currents at width 2h..4h, whose sampling aliasing sits near 7e-3.
inline FieldGrid<3> solve_divcurl(const FieldGrid<3>& F, double tol = 1e-2) {
  if (F.comps != 3) throw BadExponents("solve_divcurl needs a 3-component field");
  SpectralGrid<3> s = SpectralGrid<3>::analyze(F);
  const double defect = detail::spectral_defect(s);
  if (defect > tol)
    throw NotSolenoidal("solve_divcurl: compressible defect " + std::to_string(defect) +
                        " exceeds tolerance " + std::to_string(tol));
  detail::for_each_mode<3>(s, [&](std::complex<double>* v, const auto& x, double q, bool ny) {
    if (q == 0.0 || ny) {
      v[0] = v[1] = v[2] = 0.0;
      return;
    }
    const std::complex<double> i_over_q(0.0, 1.0 / q);
    const std::complex<double> z0 = (x[1] * v[2] - x[2] * v[1]) * i_over_q;
    const std::complex<double> z1 = (x[2] * v[0] - x[0] * v[2]) * i_over_q;
    const std::complex<double> z2 = (x[0] * v[1] - x[1] * v[0]) * i_over_q;
    v[0] = z0;
    v[1] = z1;
    v[2] = z2;
  });
  return s.synthesize();
}

// Same field assembled as Z_1 = R_2(I_1 F_3) - R_3(I_1 F_2) and cyclic: the
// half-order potential is applied first, then the transforms, so the rounding
// path differs from the fused multiplier above.
inline FieldGrid<3> solve_divcurl_via_riesz(const FieldGrid<3>& F, double tol = 1e-2) {
  if (F.comps != 3) throw BadExponents("solve_divcurl needs a 3-component field");
  SpectralGrid<3> s = SpectralGrid<3>::analyze(F);
  const double defect = detail::spectral_defect(s);
  if (defect > tol)
    throw NotSolenoidal("solve_divcurl: compressible defect " + std::to_string(defect) +
                        " exceeds tolerance " + std::to_string(tol));
  detail::for_each_mode<3>(s, [&](std::complex<double>* v, const auto& x, double q, bool ny) {
    if (q == 0.0 || ny) {
      v[0] = v[1] = v[2] = 0.0;
      return;
    }
    const double inv_len = 1.0 / std::sqrt(q);
    std::complex<double> g[3];
    for (int c = 0; c < 3; ++c) g[c] = v[c] * inv_len;
    const std::complex<double> i_unit(0.0, inv_len);
    v[0] = (x[1] * g[2] - x[2] * g[1]) * i_unit;
    v[1] = (x[2] * g[0] - x[0] * g[2]) * i_unit;
    v[2] = (x[0] * g[1] - x[1] * g[0]) * i_unit;
  });
  return s.synthesize();
}

template <int D>
struct VectorPoisson {
  FieldGrid<D> potential;  // U, D components
  FieldGrid<D> gradient;   // D*D components, cell[j*D + a] = d_a U_j
};

// U with -Laplacian U = F componentwise, plus its gradient assembled as
// R_a(I_1 U_j-source), i.e. i xi_a / |xi| applied to |xi|^{-1} F-hat.
template <int D>
VectorPoisson<D> solve_poisson_vec(const FieldGrid<D>& F) {
  if constexpr (D < 3) {
    throw DimensionTooSmall("solve_poisson_vec needs d >= 3");
  } else {
    SpectralGrid<D> s = SpectralGrid<D>::analyze(F);
    SpectralGrid<D> gs;
    gs.shape = s.shape;
    gs.h = s.h;
    gs.origin = s.origin;
    gs.comps = s.comps * D;
    gs.data.assign(s.data.size() * D, std::complex<double>(0.0, 0.0));
    std::int64_t f = 0;
    detail::for_each_mode<D>(s, [&](std::complex<double>* v, const auto& x, double q, bool ny) {
      std::complex<double>* g = gs.cell(f++);
      if (q == 0.0) {
        for (int c = 0; c < s.comps; ++c) v[c] = 0.0;
        return;
      }
      const double inv_len = 1.0 / std::sqrt(q);
      for (int j = 0; j < s.comps; ++j) {
        const std::complex<double> half = v[j] * inv_len;  // I_1 stage
        if (!ny)
          for (int a = 0; a < D; ++a)
            g[j * D + a] = half * std::complex<double>(0.0, x[a] * inv_len);
        v[j] /= q;  // I_2, fused
      }
    });
    VectorPoisson<D> out;
    out.potential = s.synthesize();
    out.gradient = gs.synthesize();
    return out;
  }
}

}  // namespace loopforge

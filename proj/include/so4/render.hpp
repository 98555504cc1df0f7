#pragma once

// Orbital-plane (z = 0) densities of shell states, classical ellipse
// overlays, and second-moment orientation of a density.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "so4/coherent.hpp"
#include "so4/errors.hpp"
#include "so4/hydrogenic.hpp"
#include "so4/parallel.hpp"

namespace so4 {

/// |psi(x, y, 0)|^2 on a square grid centred on the nucleus. Row r holds
/// y = (r + 1/2) h - extent/2 ascending, column c likewise in x, h = extent/resolution.
struct DensityGrid {
  double extent = 0.0;  // full width, bohr
  int resolution = 0;
  double time = 0.0;    // s
  ShellSpec shell;
  double eta = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values;

  [[nodiscard]] double pixel() const { return extent / resolution; }
  [[nodiscard]] double coord(int i) const { return (i + 0.5) * pixel() - 0.5 * extent; }
  [[nodiscard]] double& at(int row, int col) { return values[static_cast<std::size_t>(row) * resolution + col]; }
  [[nodiscard]] double at(int row, int col) const { return values[static_cast<std::size_t>(row) * resolution + col]; }
};

inline constexpr double kDefaultExtentAu = 8.0e4;
inline constexpr int kDefaultResolution = 512;

/// Evaluates psi(x, y, 0) = sum a_lm R_nl(r) Y_lm(pi/2, phi).
///
/// Radial values are tabulated once per distinct pixel radius (the centred
/// grid has ~N^2/8 of them), and the angular sum is grouped by m so each
/// pixel costs one pass over the active (l, m) terms.
inline DensityGrid density_grid(const CoupledState& state, double extent, int resolution, double time_s,
                                double skip_below = 1e-10) {
  if (resolution < 16) throw DomainError("density_grid: resolution must be >= 16");
  if (!(extent > 0.0)) throw DomainError("density_grid: extent must be positive");
  const ShellSpec& shell = state.shell();
  const int n = shell.n;

  double amax = 0.0;
  for (const auto& a : state.amplitudes()) amax = std::max(amax, std::abs(a));
  const double cut = skip_below * amax;

  // Active terms grouped by m; coefficient folds in the equatorial Y_lm factor.
  struct Term {
    int l_slot;
    cplx coeff;
  };
  std::vector<int> active_l;
  std::vector<int> l_slot(static_cast<std::size_t>(n), -1);
  std::vector<int> ms;
  std::vector<std::vector<Term>> by_m;
  for (int m = -(n - 1); m <= n - 1; ++m) {
    std::vector<Term> terms;
    for (int l = std::abs(m); l < n; ++l) {
      const cplx a = state.at(l, m);
      if (std::abs(a) < cut || a == cplx(0.0)) continue;
      const double f = equatorial_harmonic_factor(l, m);
      if (f == 0.0) continue;
      if (l_slot[static_cast<std::size_t>(l)] < 0) {
        l_slot[static_cast<std::size_t>(l)] = static_cast<int>(active_l.size());
        active_l.push_back(l);
      }
      terms.push_back({l_slot[static_cast<std::size_t>(l)], a * f});
    }
    if (!terms.empty()) {
      ms.push_back(m);
      by_m.push_back(std::move(terms));
    }
  }

  DensityGrid g;
  g.extent = extent;
  g.resolution = resolution;
  g.time = time_s;
  g.shell = shell;
  g.values.assign(static_cast<std::size_t>(resolution) * resolution, 0.0);
  if (ms.empty()) return g;

  // Pixel offsets in half-pixel units are k = 2i + 1 - N; r = (h/2) sqrt(kx^2 + ky^2).
  const double half_h = 0.5 * g.pixel();
  std::unordered_map<long, int> radius_slot;
  std::vector<long> radius_keys;
  for (int i = 0; i < resolution; ++i) {
    for (int k = 0; k <= i; ++k) {
      const long a = 2L * i + 1 - resolution;
      const long b = 2L * k + 1 - resolution;
      const long key = a * a + b * b;
      if (radius_slot.emplace(key, static_cast<int>(radius_keys.size())).second) radius_keys.push_back(key);
    }
  }
  const std::size_t nl = active_l.size();
  std::vector<double> radial(radius_keys.size() * nl);
  parallel_for(radius_keys.size(), [&](std::size_t s) {
    const double r = half_h * std::sqrt(static_cast<double>(radius_keys[s]));
    for (std::size_t q = 0; q < nl; ++q) radial[s * nl + q] = radial_wavefunction(shell, active_l[q], r);
  });

  parallel_for(static_cast<std::size_t>(resolution), [&](std::size_t row) {
    const double y = g.coord(static_cast<int>(row));
    const long b = 2L * static_cast<long>(row) + 1 - resolution;
    for (int col = 0; col < resolution; ++col) {
      const double x = g.coord(col);
      const long a = 2L * col + 1 - resolution;
      const double* rad = &radial[static_cast<std::size_t>(radius_slot.at(a * a + b * b)) * nl];
      const double phi = std::atan2(y, x);
      cplx psi = 0.0;
      for (std::size_t k = 0; k < ms.size(); ++k) {
        cplx f = 0.0;
        for (const Term& t : by_m[k]) f += t.coeff * rad[t.l_slot];
        psi += f * std::polar(1.0, ms[k] * phi);
      }
      g.at(static_cast<int>(row), col) = std::norm(psi);
    }
  });
  return g;
}

/// Orientation in [0, pi) of the dominant eigenvector of the density-weighted
/// second-moment tensor about the nucleus.
inline double principal_axis(const DensityGrid& g, double min_anisotropy = 1.01) {
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (int row = 0; row < g.resolution; ++row) {
    const double y = g.coord(row);
    for (int col = 0; col < g.resolution; ++col) {
      const double x = g.coord(col);
      const double w = g.at(row, col);
      sxx += w * x * x;
      syy += w * y * y;
      sxy += w * x * y;
    }
  }
  const double mean = 0.5 * (sxx + syy);
  const double dev = std::hypot(0.5 * (sxx - syy), sxy);
  const double lo = mean - dev;
  const double hi = mean + dev;
  if (!(hi > 0.0) || hi <= min_anisotropy * lo) {
    throw UndefinedOrientation("principal_axis: second-moment tensor is near isotropic");
  }
  double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  if (angle < 0.0) angle += std::numbers::pi;
  return angle;
}

/// Distance between two axis orientations modulo pi.
inline double axis_difference(double a, double b) {
  const double d = std::remainder(a - b, std::numbers::pi);
  return std::abs(d);
}

struct OverlayPoint {
  double x = 0.0;
  double y = 0.0;
};

struct EllipseOverlay {
  double semi_major = 0.0;  // bohr
  double eccentricity = 0.0;
  double rotation = 0.0;    // perihelion azimuth, rad
  std::vector<OverlayPoint> points;
};

/// Kepler ellipse with a focus at the origin, semi-major axis n^2/Z and
/// perihelion at azimuth theta: r = a (1 - eps^2) / (1 + eps cos(phi - theta)).
inline EllipseOverlay classical_overlay(const ShellSpec& shell, double eps, double theta, int n_points) {
  if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("classical_overlay: eps must lie in [0, 1)");
  if (n_points < 3) throw DomainError("classical_overlay: need at least 3 points");
  EllipseOverlay e;
  e.semi_major = mean_radius(shell);
  e.eccentricity = eps;
  e.rotation = theta;
  e.points.reserve(static_cast<std::size_t>(n_points));
  const double p = e.semi_major * (1.0 - eps * eps);
  for (int k = 0; k < n_points; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n_points;
    const double r = p / (1.0 + eps * std::cos(phi - theta));
    e.points.push_back({r * std::cos(phi), r * std::sin(phi)});
  }
  return e;
}

}  // namespace so4

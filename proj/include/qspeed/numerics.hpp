#pragma once

// One-dimensional quadrature and minimization helpers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "matcore.hpp"

namespace qspeed {

namespace detail {

template <class F>
double simpson_step(F& f, double a, double fa, double b, double fb, double m, double fm, double whole,
                    double tol, double panel_tol, int depth, bool& ok) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  // below this the difference is rounding noise and halving further cannot help
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right));
  if (std::abs(diff) <= 15.0 * std::max(tol, noise)) return left + right + diff / 15.0;
  if (depth <= 0) {
    // a jump leaves a residue proportional to the width; accept it once it is negligible for the panel
    if (std::abs(diff) > panel_tol) ok = false;
    return left + right + diff / 15.0;
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, panel_tol, depth - 1, ok) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, panel_tol, depth - 1, ok);
}

}  // namespace detail

/// Adaptive Simpson quadrature on [a, b] to absolute tolerance tol.
/// The interval is first split into `pieces` panels so narrow features are not skipped.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 40, int pieces = 8) {
  if (a == b) return 0.0;
  double total = 0.0;
  bool ok = true;
  const double width = (b - a) / pieces;
  for (int i = 0; i < pieces; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == pieces) ? b : lo + width;
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fmid = f(mid);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += detail::simpson_step(f, lo, flo, hi, fhi, mid, fmid, whole, tol / pieces, tol / pieces, max_depth, ok);
  }
  if (!ok || !std::isfinite(total)) throw numerical_error("adaptive quadrature did not converge");
  return total;
}

/// Integral over the real line through x = center + scale * tan(u).
template <class F>
double integrate_real_line(F&& f, double center, double scale, double tol) {
  const double half_pi = 0.5 * std::numbers::pi;
  auto g = [&](double u) {
    if (std::abs(u) >= half_pi) return 0.0;
    const double c = std::cos(u);
    const double value = f(center + scale * std::tan(u)) * scale / (c * c);
    return std::isfinite(value) ? value : 0.0;
  };
  return adaptive_simpson(g, -half_pi, half_pi, tol, 48, 32);
}

struct Minimum {
  double x;
  double value;
};

/// Golden-section minimization of a unimodal function on [a, b].
template <class F>
Minimum golden_section_min(F&& f, double a, double b, double xtol, int max_iter = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > xtol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? Minimum{c, fc} : Minimum{d, fd};
}

/// Grid scan followed by golden-section refinement around the best grid point.
template <class F>
Minimum grid_golden_min(F&& f, double a, double b, int grid, double xtol) {
  if (!(b > a)) return {a, f(a)};
  const double step = (b - a) / grid;
  int best = 0;
  double best_value = f(a);
  for (int i = 1; i <= grid; ++i) {
    const double v = f(a + i * step);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  const double lo = a + std::max(0, best - 1) * step;
  const double hi = a + std::min(grid, best + 1) * step;
  Minimum m = golden_section_min(f, lo, hi, xtol);
  if (best_value < m.value) m = {a + best * step, best_value};
  return m;
}

}  // namespace qspeed

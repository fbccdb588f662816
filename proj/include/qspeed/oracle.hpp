#pragma once

// Brute-force verifiers: measurement search over projective POVMs,
// finite-difference speeds and seeded random instances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "bounds.hpp"
#include "classical.hpp"
#include "matcore.hpp"
#include "numerics.hpp"
#include "quantum.hpp"
#include "random.hpp"

namespace qspeed {

// ---------------------------------------------------------------------------
// random instances

/// Haar unitary from the QR decomposition of a Ginibre matrix with phase-fixed R.
inline ComplexMatrix random_unitary(Index n, KeyedRng& rng) {
  const ComplexMatrix g = ginibre(n, n, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  const ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  ComplexVector phase(n);
  for (Index i = 0; i < n; ++i) phase(i) = r(i, i) == cplx(0.0) ? cplx(1.0) : r(i, i) / std::abs(r(i, i));
  return q * phase.asDiagonal();
}

/// G G^dag / Tr with G an n x rank Ginibre matrix.
inline DensityMatrix random_density(Index n, KeyedRng& rng, Index rank = 0) {
  const ComplexMatrix g = ginibre(n, rank > 0 ? rank : n, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

inline PureState random_pure(Index n, KeyedRng& rng) { return PureState::normalized(ginibre(n, 1, rng).col(0)); }

/// (G + G^dag)/2 with G Ginibre.
inline HermitianOperator random_hermitian(Index n, KeyedRng& rng) {
  const ComplexMatrix g = ginibre(n, n, rng);
  return HermitianOperator(0.5 * (g + g.adjoint()));
}

inline POVM random_projective_povm(Index n, KeyedRng& rng) { return projective_povm(random_unitary(n, rng)); }

/// Tensor product of N Haar-random qubit states.
inline PureState random_product_state(int n_qubits, KeyedRng& rng) {
  ComplexVector v = random_pure(2, rng).vector();
  for (int i = 1; i < n_qubits; ++i) {
    const ComplexVector q = random_pure(2, rng).vector();
    ComplexVector next(v.size() * 2);
    for (Index a = 0; a < v.size(); ++a) {
      next(2 * a) = v(a) * q(0);
      next(2 * a + 1) = v(a) * q(1);
    }
    v = next;
  }
  return PureState::normalized(v);
}

/// Lindblad generator with GUE Hamiltonian and `jumps` Ginibre jump operators scaled by `rate`.
inline Superoperator random_lindblad(Index n, KeyedRng& rng, int jumps = 2, double rate = 0.5) {
  const HermitianOperator h = random_hermitian(n, rng);
  std::vector<ComplexMatrix> ls;
  for (int k = 0; k < jumps; ++k) ls.push_back(rate * ginibre(n, n, rng) / std::sqrt(static_cast<double>(n)));
  return lindblad_map(h, ls);
}

enum class InstanceKind { density, pure, hermitian, povm, product_state };

inline InstanceKind parse_instance_kind(const std::string& s) {
  if (s == "density") return InstanceKind::density;
  if (s == "pure") return InstanceKind::pure;
  if (s == "hermitian") return InstanceKind::hermitian;
  if (s == "povm") return InstanceKind::povm;
  if (s == "product_state") return InstanceKind::product_state;
  throw invalid_parameter("unsupported instance kind '" + s + "'");
}

using Instance = std::variant<DensityMatrix, PureState, HermitianOperator, POVM>;

/// `size` is the dimension, or the number of qubits for product_state. Same seed, same bytes.
inline Instance random_instance(InstanceKind kind, int size, std::uint64_t seed) {
  if (size < 1) throw invalid_parameter("instance size must be >= 1");
  KeyedRng rng(seed, 0);
  switch (kind) {
    case InstanceKind::density: return random_density(size, rng);
    case InstanceKind::pure: return random_pure(size, rng);
    case InstanceKind::hermitian: return random_hermitian(size, rng);
    case InstanceKind::povm: return random_projective_povm(size, rng);
    case InstanceKind::product_state: return random_product_state(size, rng);
  }
  throw invalid_parameter("unsupported instance kind");
}

// ---------------------------------------------------------------------------
// measurement search

struct SearchConfig {
  int restarts = 32;
  int max_sweeps = 200;
  double tol = 1e-14;
  std::uint64_t seed = 0;
};

enum class FisherObjective { power, schatten };    // f_alpha, Schatten f_alpha
enum class DistanceObjective { power, schatten };  // d_alpha, Schatten d_alpha

struct SearchResult {
  double value;
  ComplexMatrix basis;  // columns are the measurement vectors
  POVM povm() const { return projective_povm(basis); }
};

inline constexpr Index max_search_dim = 4;

namespace detail {

/// Maximizes sum_x term(<u_x|A|u_x>, <u_x|B|u_x>) over orthonormal bases {u_x} by sweeps of
/// two-vector Givens rotations: an angle grid followed by alternating golden-section refinement.
template <class Term>
SearchResult search_projective(const ComplexMatrix& a, const ComplexMatrix& b, Term term, const SearchConfig& cfg) {
  if (cfg.restarts < 1) throw invalid_parameter("restarts must be >= 1");
  const Index n = a.rows();
  if (n > max_search_dim) throw invalid_input("measurement search limited to dimension " + std::to_string(max_search_dim));
  auto total = [&](const ComplexMatrix& u) {
    double s = 0.0;
    for (Index x = 0; x < n; ++x) {
      const ComplexVector c = u.col(x);
      s += term(c.dot(a * c).real(), c.dot(b * c).real());
    }
    return s;
  };
  SearchResult best{-infinity, ComplexMatrix::Identity(n, n)};
  const double half_pi = 0.5 * std::numbers::pi;
  const double two_pi = 2.0 * std::numbers::pi;
  constexpr int grid_phi = 12;
  constexpr int grid_chi = 12;
  for (int r = 0; r < cfg.restarts; ++r) {
    KeyedRng rng(cfg.seed, static_cast<std::uint64_t>(r));
    ComplexMatrix u = random_unitary(n, rng);
    double current = total(u);
    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
      const double before = current;
      for (Index j = 0; j < n; ++j) {
        for (Index k = j + 1; k < n; ++k) {
          ComplexMatrix v(n, 2);
          v.col(0) = u.col(j);
          v.col(1) = u.col(k);
          const ComplexMatrix a2 = v.adjoint() * a * v;
          const ComplexMatrix b2 = v.adjoint() * b * v;
          auto pair = [&](double phi, double chi) {
            const double c = std::cos(phi);
            const double s = std::sin(phi);
            const cplx e = std::exp(imag_unit * chi);
            const double ca = 2.0 * c * s * (e * a2(0, 1)).real();
            const double cb = 2.0 * c * s * (e * b2(0, 1)).real();
            const double a0 = c * c * a2(0, 0).real() + s * s * a2(1, 1).real();
            const double a1 = s * s * a2(0, 0).real() + c * c * a2(1, 1).real();
            const double b0 = c * c * b2(0, 0).real() + s * s * b2(1, 1).real();
            const double b1 = s * s * b2(0, 0).real() + c * c * b2(1, 1).real();
            return term(a0 + ca, b0 + cb) + term(a1 - ca, b1 - cb);
          };
          const double base = pair(0.0, 0.0);
          double bp = 0.0;
          double bc = 0.0;
          double bv = base;
          for (int ip = 0; ip <= grid_phi; ++ip) {
            for (int ic = 0; ic < grid_chi; ++ic) {
              const double phi = half_pi * ip / grid_phi;
              const double chi = two_pi * ic / grid_chi;
              const double val = pair(phi, chi);
              if (val > bv) {
                bv = val;
                bp = phi;
                bc = chi;
              }
            }
          }
          double wp = half_pi / grid_phi;
          double wc = two_pi / grid_chi;
          for (int round = 0; round < 6; ++round) {
            const Minimum mp = golden_section_min([&](double p) { return -pair(p, bc); }, bp - wp, bp + wp, 1e-11);
            if (-mp.value > bv) {
              bv = -mp.value;
              bp = mp.x;
            }
            const Minimum mc = golden_section_min([&](double c) { return -pair(bp, c); }, bc - wc, bc + wc, 1e-11);
            if (-mc.value > bv) {
              bv = -mc.value;
              bc = mc.x;
            }
            wp *= 0.25;
            wc *= 0.25;
          }
          if (bv > base) {
            const double c = std::cos(bp);
            const double s = std::sin(bp);
            const cplx e = std::exp(imag_unit * bc);
            const ComplexVector uj = u.col(j);
            const ComplexVector uk = u.col(k);
            u.col(j) = c * uj + e * s * uk;
            u.col(k) = -std::conj(e) * s * uj + c * uk;
          }
        }
      }
      current = total(u);
      if (current - before <= cfg.tol * std::max(1.0, std::abs(current))) break;
    }
    if (current > best.value) best = {current, u};
  }
  return best;
}

inline double clamp_prob(double p) { return p < 0.0 ? 0.0 : p; }

/// Classical objective value over a measurement basis, for reporting.
inline double power_root(double sum, double alpha) { return std::pow(std::max(0.0, sum), 1.0 / alpha); }

}  // namespace detail

/// max over projective measurements of f_alpha (power) or the Schatten Fisher quantity at theta.
/// Outcomes with p <= p_floor are dropped, so the search never overstates the optimum.
inline SearchResult brute_force_max(const ParametricFamily& fam, double theta, FisherObjective obj, double alpha,
                                    const SearchConfig& cfg = {}) {
  require_alpha(alpha);
  if (std::isinf(alpha)) throw invalid_parameter("measurement search requires finite alpha");
  const ComplexMatrix rho = fam.state_at(theta).matrix();
  const ComplexMatrix d = fam.derivative_at(theta).matrix();
  if (obj == FisherObjective::power) {
    auto term = [alpha](double p, double dp) {
      if (p <= p_floor) return 0.0;
      return alpha == 1.0 ? std::abs(dp) : p * std::pow(std::abs(dp) / p, alpha);
    };
    return detail::search_projective(rho, d, term, cfg);
  }
  auto term = [alpha](double, double dp) { return std::pow(std::abs(dp), alpha); };
  SearchResult r = detail::search_projective(rho, d, term, cfg);
  r.value = detail::power_root(r.value, alpha);
  return r;
}

/// max over projective measurements of d_alpha (power) or the Schatten distance between rho and sigma.
inline SearchResult brute_force_max(const DensityMatrix& rho, const DensityMatrix& sigma, DistanceObjective obj,
                                    double alpha, const SearchConfig& cfg = {}) {
  require_alpha(alpha);
  if (std::isinf(alpha)) throw invalid_parameter("measurement search requires finite alpha");
  detail::require_same_dim(rho.dim(), sigma.dim());
  SearchResult r{0.0, ComplexMatrix()};
  if (obj == DistanceObjective::power) {
    auto term = [alpha](double p, double q) {
      return std::pow(std::abs(std::pow(detail::clamp_prob(p), 1.0 / alpha) - std::pow(detail::clamp_prob(q), 1.0 / alpha)),
                      alpha);
    };
    r = detail::search_projective(rho.matrix(), sigma.matrix(), term, cfg);
  } else {
    auto term = [alpha](double p, double q) { return std::pow(std::abs(p - q), alpha); };
    r = detail::search_projective(rho.matrix(), sigma.matrix(), term, cfg);
  }
  r.value = std::min(1.0, detail::power_root(0.5 * r.value, alpha));
  return r;
}

struct GeneralizedQfi {
  double value;
  bool is_estimate;  // true when obtained by search (alpha outside {1, 2})
};

/// F_alpha = max over measurements of f_alpha: exact for alpha in {1, 2}, otherwise a search
/// estimate that bounds the true value from below.
inline GeneralizedQfi generalized_qfi(const ParametricFamily& fam, double theta, double alpha,
                                      const SearchConfig& cfg = {}) {
  require_alpha(alpha);
  if (alpha == 1.0) return {trace_speed(fam, theta), false};
  if (alpha == 2.0) return {qfi(fam, theta), false};
  return {brute_force_max(fam, theta, FisherObjective::power, alpha, cfg).value, true};
}

// ---------------------------------------------------------------------------
// finite differences

enum class DistanceKind { bures, trace, schatten };

inline DistanceKind parse_distance_kind(const std::string& s) {
  if (s == "bures") return DistanceKind::bures;
  if (s == "trace") return DistanceKind::trace;
  if (s == "schatten") return DistanceKind::schatten;
  throw invalid_parameter("unknown distance kind '" + s + "'");
}

struct FiniteDiffSpeed {
  double value;   // Richardson estimate 2 q(h/2) - q(h)
  double coarse;  // q(h) = D(rho(theta+h), rho(theta)) / h
  double fine;    // q(h/2)
  double error;   // |q(h/2) - q(h)| plus a rounding allowance
};

inline double operator_distance(const ComplexMatrix& a, const ComplexMatrix& b, DistanceKind kind, double alpha) {
  switch (kind) {
    case DistanceKind::bures:
      return std::sqrt(std::max(0.0, 1.0 - std::min(1.0, detail::fidelity_raw(a, b))));
    case DistanceKind::trace: return detail::schatten_distance_raw(a, b, 1.0);
    case DistanceKind::schatten: return detail::schatten_distance_raw(a, b, alpha);
  }
  throw invalid_parameter("unknown distance kind");
}

/// Forward-difference speed with one step-halving Richardson extrapolation; h in [1e-6, 1e-2].
inline FiniteDiffSpeed finite_diff_speed(const ParametricFamily& fam, double theta, DistanceKind kind, double alpha,
                                         double h) {
  require_alpha(alpha);
  if (!(h >= 1e-6 && h <= 1e-2)) throw invalid_parameter("step h must lie in [1e-6, 1e-2]");
  const ComplexMatrix r0 = fam.state_at(theta).matrix();
  const ComplexMatrix r1 = fam.state_at(theta + h).matrix();
  const ComplexMatrix r2 = fam.state_at(theta + 0.5 * h).matrix();
  const double q1 = operator_distance(r1, r0, kind, alpha) / h;
  const double q2 = operator_distance(r2, r0, kind, alpha) / (0.5 * h);
  const double value = 2.0 * q2 - q1;
  // fidelity-based distances lose digits as 1 - F ~ h^2
  const double hh = 0.5 * h;
  const double eps = std::numeric_limits<double>::epsilon();
  const double rounding = kind == DistanceKind::bures ? 64.0 * eps / (std::max(q2 * hh, 1e-8) * hh) : 64.0 * eps / hh;
  return {value, q1, q2, std::abs(q2 - q1) + rounding};
}

}  // namespace qspeed

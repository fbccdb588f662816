#pragma once

// Quantum distances and statistical speeds of parametrized states, the
// symmetric logarithmic derivative and the measurements that attain them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "classical.hpp"
#include "matcore.hpp"

namespace qspeed {

/// Positive operators summing to the identity.
class POVM {
 public:
  explicit POVM(std::vector<HermitianOperator> elements) : e_(std::move(elements)) {
    if (e_.empty()) throw invalid_input("POVM must have at least one element");
    const Index n = e_.front().dim();
    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    for (std::size_t x = 0; x < e_.size(); ++x) {
      if (e_[x].dim() != n) throw invalid_input("POVM elements have different dimensions");
      const RealVector ev = hermitian_eig(e_[x]).values;
      const double ninf = ev.cwiseAbs().maxCoeff();
      if (ev(0) < -std::max(tol::psd(n, ninf), 1e-12)) {
        throw invalid_input("POVM element " + std::to_string(x) + " has negative eigenvalue " +
                            std::to_string(ev(0)));
      }
      sum += e_[x].matrix();
    }
    const double dev = (sum - identity(n)).cwiseAbs().maxCoeff();
    if (dev > 1e-9) throw invalid_input("POVM elements do not sum to identity: deviation " + std::to_string(dev));
  }

  const std::vector<HermitianOperator>& elements() const noexcept { return e_; }
  std::size_t size() const noexcept { return e_.size(); }
  Index dim() const noexcept { return e_.front().dim(); }

 private:
  std::vector<HermitianOperator> e_;
};

inline POVM computational_basis_povm(Index dim) {
  std::vector<HermitianOperator> els;
  for (Index i = 0; i < dim; ++i) {
    ComplexMatrix e = ComplexMatrix::Zero(dim, dim);
    e(i, i) = 1.0;
    els.emplace_back(e);
  }
  return POVM(std::move(els));
}

/// Rank-one projective POVM from the columns of a unitary.
inline POVM projective_povm(const ComplexMatrix& u) {
  std::vector<HermitianOperator> els;
  for (Index i = 0; i < u.cols(); ++i) els.emplace_back(u.col(i) * u.col(i).adjoint());
  return POVM(std::move(els));
}

enum class FamilyKind { unitary, non_hermitian, lindblad, thermal, table };

inline std::string to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::unitary: return "unitary";
    case FamilyKind::non_hermitian: return "non_hermitian";
    case FamilyKind::lindblad: return "lindblad";
    case FamilyKind::thermal: return "thermal";
    case FamilyKind::table: return "table";
  }
  return "unknown";
}

struct TablePoint {
  double theta;
  HermitianOperator state;
};

/// theta -> rho(theta) with its derivative.
///   unitary:        rho = e^{-iH theta} rho0 e^{iH theta}
///   non_hermitian:  rho = e^{-iH_eff theta} rho0 e^{iH_eff^dag theta}, H_eff = H - i Gamma, not renormalized
///   lindblad:       vec rho = exp(L theta) vec rho0
///   thermal:        rho = e^{-theta H} / Tr e^{-theta H}, theta the inverse temperature
///   table:          tabulated states on a uniform grid
class ParametricFamily {
 public:
  static ParametricFamily unitary(HermitianOperator h, DensityMatrix rho0) {
    if (h.dim() != rho0.dim()) throw invalid_input("Hamiltonian and state dimensions differ");
    EigenSystem es = hermitian_eig(h);
    const Index n = h.dim();
    return ParametricFamily(FamilyKind::unitary, n, Unitary{std::move(h), std::move(rho0)}, std::move(es));
  }

  static ParametricFamily non_hermitian(HermitianOperator h, HermitianOperator gamma, DensityMatrix rho0) {
    if (h.dim() != rho0.dim() || gamma.dim() != rho0.dim()) {
      throw invalid_input("H, Gamma and state dimensions differ");
    }
    const Index n = h.dim();
    return ParametricFamily(FamilyKind::non_hermitian, n, NonHermitian{std::move(h), std::move(gamma), std::move(rho0)});
  }

  static ParametricFamily lindblad(Superoperator l, DensityMatrix rho0) {
    if (l.dim() != rho0.dim()) throw invalid_input("superoperator and state dimensions differ");
    const Index n = l.dim();
    return ParametricFamily(FamilyKind::lindblad, n, Lindblad{std::move(l), std::move(rho0)});
  }

  static ParametricFamily thermal(HermitianOperator h) {
    EigenSystem es = hermitian_eig(h);
    const Index n = h.dim();
    return ParametricFamily(FamilyKind::thermal, n, Thermal{std::move(h)}, std::move(es));
  }

  /// Points must lie on a uniform, strictly increasing grid with at least 3 entries.
  /// States must be positive semidefinite; their trace is not constrained.
  static ParametricFamily table(std::vector<TablePoint> points) {
    if (points.size() < 3) throw invalid_input("table family needs at least 3 points");
    const Index n = points.front().state.dim();
    const double step = points[1].theta - points[0].theta;
    if (!(step > 0.0)) throw invalid_input("table thetas must be strictly increasing");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].state.dim() != n) throw invalid_input("table states have different dimensions");
      if (i > 0) {
        const double s = points[i].theta - points[i - 1].theta;
        if (std::abs(s - step) > 1e-9 * std::max(1.0, std::abs(step))) {
          throw invalid_input("table thetas must be uniformly spaced");
        }
      }
      const RealVector ev = hermitian_eig(points[i].state).values;
      if (ev(0) < -tol::psd(n, ev.cwiseAbs().maxCoeff())) {
        throw invalid_input("table state " + std::to_string(i) + " has negative eigenvalue");
      }
    }
    return ParametricFamily(FamilyKind::table, n, Table{std::move(points), step});
  }

  FamilyKind kind() const noexcept { return kind_; }
  Index dim() const noexcept { return dim_; }

  /// Generator for unitary and thermal kinds, H of H_eff for non_hermitian.
  const HermitianOperator& hamiltonian() const {
    if (auto* u = std::get_if<Unitary>(&data_)) return u->h;
    if (auto* t = std::get_if<Thermal>(&data_)) return t->h;
    if (auto* n = std::get_if<NonHermitian>(&data_)) return n->h;
    throw invalid_input("family kind " + to_string(kind_) + " has no Hamiltonian");
  }

  const HermitianOperator& gamma() const {
    if (auto* n = std::get_if<NonHermitian>(&data_)) return n->gamma;
    throw invalid_input("family kind " + to_string(kind_) + " has no Gamma");
  }

  const std::vector<TablePoint>& table_points() const {
    if (auto* t = std::get_if<Table>(&data_)) return t->points;
    throw invalid_input("family is not a table");
  }

  /// rho(theta) as a Hermitian PSD operator; the trace is 1 except for decaying kinds.
  HermitianOperator state_at(double theta) const {
    require_finite(theta);
    return std::visit([&](const auto& d) { return this->state(d, theta); }, data_);
  }

  /// rho(theta) validated as a density matrix (fails when the trace has decayed).
  DensityMatrix density_at(double theta) const { return DensityMatrix(state_at(theta).matrix()); }

  HermitianOperator derivative_at(double theta) const {
    require_finite(theta);
    return std::visit([&](const auto& d) { return this->derivative(d, theta); }, data_);
  }

 private:
  struct Unitary {
    HermitianOperator h;
    DensityMatrix rho0;
  };
  struct NonHermitian {
    HermitianOperator h;
    HermitianOperator gamma;
    DensityMatrix rho0;
  };
  struct Lindblad {
    Superoperator l;
    DensityMatrix rho0;
  };
  struct Thermal {
    HermitianOperator h;
  };
  struct Table {
    std::vector<TablePoint> points;
    double step;
  };

  using Data = std::variant<Unitary, NonHermitian, Lindblad, Thermal, Table>;

  ParametricFamily(FamilyKind kind, Index dim, Data data, EigenSystem h_eig = {})
      : kind_(kind), dim_(dim), h_eig_(std::move(h_eig)), data_(std::move(data)) {}

  static void require_finite(double theta) {
    if (!std::isfinite(theta)) throw invalid_parameter("theta must be finite");
  }

  static HermitianOperator herm(const ComplexMatrix& m) { return HermitianOperator(0.5 * (m + m.adjoint())); }

  ComplexMatrix heff(const NonHermitian& d) const { return d.h.matrix() - imag_unit * d.gamma.matrix(); }

  HermitianOperator state(const Unitary& d, double theta) const {
    ComplexVector phases(dim_);
    for (Index i = 0; i < dim_; ++i) phases(i) = std::exp(-imag_unit * h_eig_.values(i) * theta);
    const ComplexMatrix u = h_eig_.vectors * phases.asDiagonal() * h_eig_.vectors.adjoint();
    return herm(u * d.rho0.matrix() * u.adjoint());
  }

  HermitianOperator state(const NonHermitian& d, double theta) const {
    const ComplexMatrix u = (ComplexMatrix(-imag_unit * theta * heff(d))).exp();
    return herm(u * d.rho0.matrix() * u.adjoint());
  }

  HermitianOperator state(const Lindblad& d, double theta) const {
    const ComplexMatrix prop = (ComplexMatrix(theta * d.l.matrix())).exp();
    return herm(unvec(prop * vec(d.rho0.matrix()), dim_));
  }

  HermitianOperator state(const Thermal&, double beta) const {
    const RealVector& e = h_eig_.values;
    const double shift = beta >= 0.0 ? e(0) : e(dim_ - 1);
    RealVector w(dim_);
    for (Index i = 0; i < dim_; ++i) w(i) = std::exp(-beta * (e(i) - shift));
    w /= w.sum();
    return herm(h_eig_.vectors * w.cast<cplx>().asDiagonal() * h_eig_.vectors.adjoint());
  }

  /// Index of theta on the grid, or -1 when it falls between nodes.
  static long grid_index(const Table& t, double theta, double& frac) {
    const double pos = (theta - t.points.front().theta) / t.step;
    const double last = static_cast<double>(t.points.size() - 1);
    if (pos < -1e-9 || pos > last + 1e-9) {
      throw invalid_parameter("theta " + std::to_string(theta) + " lies outside the tabulated range");
    }
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) <= 1e-9) {
      frac = 0.0;
      return static_cast<long>(nearest);
    }
    frac = pos - std::floor(pos);
    return -1 - static_cast<long>(std::floor(pos));
  }

  HermitianOperator state(const Table& t, double theta) const {
    double frac = 0.0;
    const long idx = grid_index(t, theta, frac);
    if (idx >= 0) return t.points[static_cast<std::size_t>(idx)].state;
    const auto lo = static_cast<std::size_t>(-1 - idx);
    return herm((1.0 - frac) * t.points[lo].state.matrix() + frac * t.points[lo + 1].state.matrix());
  }

  HermitianOperator derivative(const Unitary& d, double theta) const {
    const ComplexMatrix rho = state(d, theta).matrix();
    const ComplexMatrix& h = d.h.matrix();
    return herm(-imag_unit * (h * rho - rho * h));
  }

  HermitianOperator derivative(const NonHermitian& d, double theta) const {
    const ComplexMatrix rho = state(d, theta).matrix();
    const ComplexMatrix he = heff(d);
    return herm(-imag_unit * (he * rho - rho * he.adjoint()));
  }

  HermitianOperator derivative(const Lindblad& d, double theta) const {
    return herm(d.l.apply(state(d, theta).matrix()));
  }

  HermitianOperator derivative(const Thermal& d, double beta) const {
    const ComplexMatrix rho = state(d, beta).matrix();
    const double mean = expectation(d.h, rho);
    const ComplexMatrix shifted = d.h.matrix() - mean * identity(dim_);
    return herm(-0.5 * (shifted * rho + rho * shifted));
  }

  /// Five-point stencil where both neighbours on each side exist, central difference next
  /// to the ends, one-sided second-order stencil at the ends.
  ComplexMatrix node_derivative(const Table& t, std::size_t i) const {
    const std::size_t n = t.points.size();
    auto at = [&](std::size_t k) -> const ComplexMatrix& { return t.points[k].state.matrix(); };
    const double h = t.step;
    if (i >= 2 && i + 2 < n) return (8.0 * (at(i + 1) - at(i - 1)) - (at(i + 2) - at(i - 2))) / (12.0 * h);
    if (i >= 1 && i + 1 < n) return (at(i + 1) - at(i - 1)) / (2.0 * h);
    if (i == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
    return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
  }

  HermitianOperator derivative(const Table& t, double theta) const {
    double frac = 0.0;
    const long idx = grid_index(t, theta, frac);
    if (idx >= 0) return herm(node_derivative(t, static_cast<std::size_t>(idx)));
    const auto lo = static_cast<std::size_t>(-1 - idx);
    return herm((1.0 - frac) * node_derivative(t, lo) + frac * node_derivative(t, lo + 1));
  }

  FamilyKind kind_;
  Index dim_;
  EigenSystem h_eig_;
  Data data_;
};

inline ParametricFamily thermal_family(const HermitianOperator& h) { return ParametricFamily::thermal(h); }

// ---------------------------------------------------------------------------
// distances

namespace detail {

/// Fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)) as the nuclear norm of sqrt(rho) sqrt(sigma).
inline double fidelity_raw(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
  const RealVector s = singular_values(psd_sqrt(rho) * psd_sqrt(sigma));
  return s.sum();
}

inline double schatten_distance_raw(const ComplexMatrix& rho, const ComplexMatrix& sigma, double alpha) {
  const ComplexMatrix diff = rho - sigma;
  const double norm = schatten_norm(HermitianOperator(0.5 * (diff + diff.adjoint())), alpha);
  return std::isinf(alpha) ? norm : std::pow(0.5, 1.0 / alpha) * norm;
}

inline void require_same_dim(Index a, Index b) {
  if (a != b) throw invalid_input("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace detail

inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  detail::require_same_dim(rho.dim(), sigma.dim());
  return std::clamp(detail::fidelity_raw(rho.matrix(), sigma.matrix()), 0.0, 1.0);
}

/// D_2 = sqrt(1 - F).
inline double bures_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return std::sqrt(std::max(0.0, 1.0 - fidelity(rho, sigma)));
}

/// (1/2 Tr|rho - sigma|^alpha)^(1/alpha).
inline double schatten_distance(const DensityMatrix& rho, const DensityMatrix& sigma, double alpha) {
  require_alpha(alpha);
  detail::require_same_dim(rho.dim(), sigma.dim());
  return std::min(1.0, detail::schatten_distance_raw(rho.matrix(), sigma.matrix(), alpha));
}

/// 1/2 Tr|rho - sigma|.
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return schatten_distance(rho, sigma, 1.0);
}

// ---------------------------------------------------------------------------
// induced classical distributions

inline ProbDist induced_dist(const DensityMatrix& rho, const POVM& povm) {
  detail::require_same_dim(rho.dim(), povm.dim());
  std::vector<double> p;
  p.reserve(povm.size());
  for (const auto& e : povm.elements()) p.push_back(expectation(e, rho.matrix()));
  return ProbDist(std::move(p));
}

/// Outcome probabilities and their derivatives; the family must conserve trace.
inline ParametricDist induced_parametric(const ParametricFamily& fam, double theta, const POVM& povm) {
  detail::require_same_dim(fam.dim(), povm.dim());
  const ComplexMatrix rho = fam.state_at(theta).matrix();
  const ComplexMatrix drho = fam.derivative_at(theta).matrix();
  std::vector<double> p;
  std::vector<double> dp;
  for (const auto& e : povm.elements()) {
    p.push_back(expectation(e, rho));
    dp.push_back(expectation(e, drho));
  }
  return ParametricDist(ProbDist(std::move(p)), std::move(dp));
}

// ---------------------------------------------------------------------------
// symmetric logarithmic derivative and speeds

struct SLDResult {
  HermitianOperator L;
  int support_dim;
};

inline double sld_tolerance(Index dim, double norm_inf) { return static_cast<double>(dim) * 1e-12 * norm_inf; }

/// Solves drho = (L rho + rho L)/2 on the support of rho. Throws undefined_quantity when
/// drho has weight between kernel vectors of rho (the Fisher information diverges).
inline SLDResult sld(const HermitianOperator& rho, const HermitianOperator& drho) {
  detail::require_same_dim(rho.dim(), drho.dim());
  const Index n = rho.dim();
  const EigenSystem es = hermitian_eig(rho);
  const double cut = sld_tolerance(n, es.values.cwiseAbs().maxCoeff());
  const ComplexMatrix d = es.vectors.adjoint() * drho.matrix() * es.vectors;
  const double dscale = std::max(1.0, d.cwiseAbs().maxCoeff());
  ComplexMatrix l = ComplexMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double s = es.values(i) + es.values(j);
      if (s > cut) {
        l(i, j) = 2.0 * d(i, j) / s;
      } else if (std::abs(d(i, j)) > 1e-8 * dscale) {
        throw undefined_quantity("derivative has weight outside the support of the state; Fisher information diverges");
      }
    }
  }
  int support = 0;
  for (Index i = 0; i < n; ++i) support += es.values(i) > cut ? 1 : 0;
  const ComplexMatrix lm = es.vectors * l * es.vectors.adjoint();
  return {HermitianOperator(0.5 * (lm + lm.adjoint())), support};
}

inline SLDResult sld(const ParametricFamily& fam, double theta) {
  return sld(fam.state_at(theta), fam.derivative_at(theta));
}

/// F_2 = Tr rho L^2 = sum_{ij} 2|<i|drho|j>|^2 / (l_i + l_j).
inline double qfi(const HermitianOperator& rho, const HermitianOperator& drho) {
  detail::require_same_dim(rho.dim(), drho.dim());
  sld(rho, drho);
  const Index n = rho.dim();
  const EigenSystem es = hermitian_eig(rho);
  const double cut = sld_tolerance(n, es.values.cwiseAbs().maxCoeff());
  const ComplexMatrix d = es.vectors.adjoint() * drho.matrix() * es.vectors;
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double s = es.values(i) + es.values(j);
      if (s > cut) sum += 2.0 * std::norm(d(i, j)) / s;
    }
  }
  return sum;
}

inline double qfi(const ParametricFamily& fam, double theta) {
  return qfi(fam.state_at(theta), fam.derivative_at(theta));
}

/// F_1 = Tr|drho/dtheta|.
inline double trace_speed(const ParametricFamily& fam, double theta) {
  return schatten_norm(fam.derivative_at(theta), 1.0);
}

struct SchattenSpeed {
  double value;  // ||drho/dtheta||_alpha
  double speed;  // 2^(-1/alpha) * value
};

inline double schatten_prefactor(double alpha) { return std::isinf(alpha) ? 1.0 : std::pow(2.0, -1.0 / alpha); }

inline SchattenSpeed schatten_speed(const HermitianOperator& drho, double alpha) {
  const double v = schatten_norm(drho, alpha);
  return {v, schatten_prefactor(alpha) * v};
}

inline SchattenSpeed schatten_speed(const ParametricFamily& fam, double theta, double alpha) {
  return schatten_speed(fam.derivative_at(theta), alpha);
}

/// S_2 without diagonalization: sqrt(Tr[(drho/dtheta)^2] / 2).
inline double hilbert_schmidt_speed(const ParametricFamily& fam, double theta) {
  const ComplexMatrix d = fam.derivative_at(theta).matrix();
  return std::sqrt(std::max(0.0, 0.5 * (d * d).trace().real()));
}

/// S_2 under H: sqrt(Tr rho^2 H^2 - Tr (H rho)^2).
inline double unitary_hilbert_schmidt_speed(const HermitianOperator& h, const DensityMatrix& rho) {
  detail::require_same_dim(h.dim(), rho.dim());
  const ComplexMatrix& r = rho.matrix();
  const ComplexMatrix& hm = h.matrix();
  const ComplexMatrix hr = hm * r;
  const double v = (r * r * hm * hm).trace().real() - (hr * hr).trace().real();
  return std::sqrt(std::max(0.0, v));
}

// ---------------------------------------------------------------------------
// optimal measurements

enum class PovmTarget { trace_speed, schatten, qfi };

inline PovmTarget parse_povm_target(const std::string& s) {
  if (s == "trace_speed" || s == "trace") return PovmTarget::trace_speed;
  if (s == "schatten") return PovmTarget::schatten;
  if (s == "qfi") return PovmTarget::qfi;
  throw invalid_parameter("unknown POVM target '" + s + "'");
}

/// Projectors onto eigenspaces of x; eigenvalues closer than 1e-9 max(1, ||x||) share a cluster.
inline POVM eigenprojector_povm(const HermitianOperator& x, bool rank_one) {
  const EigenSystem es = hermitian_eig(x);
  const Index n = x.dim();
  const double gap = 1e-9 * std::max(1.0, es.values.cwiseAbs().maxCoeff());
  std::vector<HermitianOperator> els;
  Index start = 0;
  for (Index i = 1; i <= n; ++i) {
    if (i == n || rank_one || es.values(i) - es.values(i - 1) > gap) {
      const ComplexMatrix v = es.vectors.middleCols(start, i - start);
      els.emplace_back(v * v.adjoint());
      start = i;
    }
  }
  return POVM(std::move(els));
}

/// Eigenspace projectors of drho/dtheta (trace_speed), rank-one eigenprojectors of drho/dtheta
/// (schatten), or eigenspace projectors of the SLD (qfi).
inline POVM optimal_povm(const ParametricFamily& fam, double theta, PovmTarget target) {
  switch (target) {
    case PovmTarget::trace_speed: return eigenprojector_povm(fam.derivative_at(theta), false);
    case PovmTarget::schatten: return eigenprojector_povm(fam.derivative_at(theta), true);
    case PovmTarget::qfi: return eigenprojector_povm(sld(fam, theta).L, false);
  }
  throw invalid_parameter("unknown POVM target");
}

/// Projectors onto (|psi> +- i|psi~>)/sqrt 2 with |psi~> = (H - <H>)|psi>/dH, plus the complement.
inline POVM pure_two_projector_povm(const PureState& psi, const HermitianOperator& h) {
  detail::require_same_dim(psi.dim(), h.dim());
  const ComplexVector& v = psi.vector();
  const double mean = (v.adjoint() * h.matrix() * v)(0, 0).real();
  const ComplexVector shifted = h.matrix() * v - mean * v;
  const double dh = shifted.norm();
  if (dh <= 1e-10 * std::max(1.0, norm_inf(h))) {
    throw undefined_quantity("state is an eigenstate of H: zero variance, no optimal two-projector measurement");
  }
  const ComplexVector tilde = shifted / dh;
  const ComplexVector plus = (v + imag_unit * tilde) / std::sqrt(2.0);
  const ComplexVector minus = (v - imag_unit * tilde) / std::sqrt(2.0);
  const ComplexMatrix ep = plus * plus.adjoint();
  const ComplexMatrix em = minus * minus.adjoint();
  std::vector<HermitianOperator> els{HermitianOperator(ep), HermitianOperator(em)};
  const ComplexMatrix rest = identity(h.dim()) - ep - em;
  if (rest.trace().real() > 1e-9) els.emplace_back(rest);
  return POVM(std::move(els));
}

// ---------------------------------------------------------------------------
// closed forms

/// Schatten speed of |psi> under drho = -i(H_eff rho - rho H_eff^dag). The derivative has
/// eigenvalues -g +- v with v = sqrt(<H_eff^dag H_eff> - <H>^2) and g = <Gamma>.
inline SchattenSpeed nonhermitian_pure_speed(const PureState& psi, const HermitianOperator& h,
                                             const HermitianOperator& gamma, double alpha) {
  require_alpha(alpha);
  detail::require_same_dim(psi.dim(), h.dim());
  detail::require_same_dim(psi.dim(), gamma.dim());
  const ComplexVector& v = psi.vector();
  const ComplexVector heff_psi = h.matrix() * v - imag_unit * (gamma.matrix() * v);
  const double mean_h = (v.adjoint() * h.matrix() * v)(0, 0).real();
  const double g = (v.adjoint() * gamma.matrix() * v)(0, 0).real();
  const double radicand = heff_psi.squaredNorm() - mean_h * mean_h;
  if (radicand < -1e-10) {
    throw numerical_error("negative radicand " + std::to_string(radicand) + " in non-Hermitian speed");
  }
  const double root = std::sqrt(std::max(0.0, radicand));
  const double a = std::abs(root + g);
  const double b = std::abs(root - g);
  double value = 0.0;
  if (std::isinf(alpha)) {
    value = std::max(a, b);
  } else {
    const double top = std::max(a, b);
    value = top == 0.0 ? 0.0 : top * std::pow(std::pow(a / top, alpha) + std::pow(b / top, alpha), 1.0 / alpha);
  }
  return {value, schatten_prefactor(alpha) * value};
}

/// f_alpha = sum_m p_m(beta) |e_m - <H>|^alpha for the Gibbs family.
inline double thermal_gen_fisher(const HermitianOperator& h, double beta, double alpha) {
  require_alpha(alpha);
  if (std::isinf(alpha)) throw invalid_parameter("thermal_gen_fisher requires finite alpha");
  if (!std::isfinite(beta)) throw invalid_parameter("beta must be finite");
  const RealVector e = hermitian_eig(h).values;
  const double shift = beta >= 0.0 ? e(0) : e(e.size() - 1);
  RealVector w(e.size());
  for (Index i = 0; i < e.size(); ++i) w(i) = std::exp(-beta * (e(i) - shift));
  w /= w.sum();
  const double mean = w.dot(e);
  double sum = 0.0;
  for (Index i = 0; i < e.size(); ++i) sum += w(i) * std::pow(std::abs(e(i) - mean), alpha);
  return sum;
}

/// 2^alpha sum_x |<x|psi>|^2 |Im(<x|H|psi>/<x|psi>)|^alpha for a rank-one projective POVM.
inline double weak_value_fisher(const PureState& psi, const HermitianOperator& h, const POVM& povm, double alpha) {
  require_alpha(alpha);
  if (std::isinf(alpha)) throw invalid_parameter("weak_value_fisher requires finite alpha");
  detail::require_same_dim(psi.dim(), h.dim());
  detail::require_same_dim(psi.dim(), povm.dim());
  const ComplexVector& v = psi.vector();
  const ComplexVector hv = h.matrix() * v;
  double sum = 0.0;
  for (const auto& e : povm.elements()) {
    const ComplexMatrix& m = e.matrix();
    if ((m * m - m).cwiseAbs().maxCoeff() > 1e-9 || std::abs(m.trace().real() - 1.0) > 1e-9) {
      throw invalid_input("weak-value Fisher information requires rank-one projectors");
    }
    const EigenSystem es = hermitian_eig(e);
    const ComplexVector x = es.vectors.col(e.dim() - 1);
    const cplx overlap = x.dot(v);
    const double p = std::norm(overlap);
    if (p <= p_floor) continue;
    const double im = (x.dot(hv) / overlap).imag();
    sum += p * std::pow(std::abs(im), alpha);
  }
  return std::pow(2.0, alpha) * sum;
}

}  // namespace qspeed

#pragma once

// Heisenberg and separability limits on statistical speeds, induced
// superoperator norms, spin-squeezing coefficients and curve lengths.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "matcore.hpp"
#include "numerics.hpp"
#include "quantum.hpp"
#include "random.hpp"

namespace qspeed {

using Direction = std::array<double, 3>;

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0, -imag_unit, imag_unit, 0;
  return m;
}

inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline Index int_pow(Index base, int exp) {
  Index r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Embeds `op`, acting on `sites` (in the given order), into n_sites sites of local dimension d.
/// Site 0 is the most significant tensor factor.
inline ComplexMatrix embed(const ComplexMatrix& op, const std::vector<int>& sites, int n_sites, Index d = 2) {
  const auto k = static_cast<int>(sites.size());
  const Index sub = int_pow(d, k);
  if (op.rows() != sub || op.cols() != sub) throw invalid_input("embedded operator has wrong dimension");
  std::set<int> seen;
  for (int s : sites) {
    if (s < 0 || s >= n_sites || !seen.insert(s).second) throw invalid_input("invalid site list for embedding");
  }
  const Index full = int_pow(d, n_sites);
  std::vector<Index> stride(n_sites);
  for (int s = 0; s < n_sites; ++s) stride[s] = int_pow(d, n_sites - 1 - s);
  std::vector<int> rest;
  for (int s = 0; s < n_sites; ++s) {
    if (!seen.count(s)) rest.push_back(s);
  }
  // offset of each sub-index and each rest configuration in the full index
  std::vector<Index> sub_off(sub, 0);
  for (Index a = 0; a < sub; ++a) {
    Index rem = a;
    for (int j = k - 1; j >= 0; --j) {
      sub_off[a] += (rem % d) * stride[sites[j]];
      rem /= d;
    }
  }
  const Index n_rest = int_pow(d, static_cast<int>(rest.size()));
  ComplexMatrix out = ComplexMatrix::Zero(full, full);
  for (Index r = 0; r < n_rest; ++r) {
    Index base = 0;
    Index rem = r;
    for (int j = static_cast<int>(rest.size()) - 1; j >= 0; --j) {
      base += (rem % d) * stride[rest[j]];
      rem /= d;
    }
    for (Index a = 0; a < sub; ++a) {
      for (Index b = 0; b < sub; ++b) out(base + sub_off[a], base + sub_off[b]) = op(a, b);
    }
  }
  return out;
}

struct CollectiveSpin {
  int n;
  Direction direction;
  HermitianOperator op;
};

/// J_n = 1/2 sum_i n . sigma_i on N qubits.
inline CollectiveSpin collective_spin(int n_qubits, const Direction& n) {
  if (n_qubits < 1) throw invalid_parameter("collective spin needs N >= 1");
  const double norm = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  if (std::abs(norm - 1.0) > 1e-9) throw invalid_parameter("direction must be a unit vector");
  const ComplexMatrix local = 0.5 * (n[0] * pauli_x() + n[1] * pauli_y() + n[2] * pauli_z());
  const Index dim = int_pow(2, n_qubits);
  ComplexMatrix j = ComplexMatrix::Zero(dim, dim);
  for (int i = 0; i < n_qubits; ++i) j += embed(local, {i}, n_qubits);
  return {n_qubits, n, HermitianOperator(j)};
}

inline CollectiveSpin collective_spin_z(int n_qubits) { return collective_spin(n_qubits, {0.0, 0.0, 1.0}); }

struct HeisenbergLimit {
  double f1_max;  // lambda_max - lambda_min
  double f2_max;  // (lambda_max - lambda_min)^2
};

inline HeisenbergLimit heisenberg_limit(const HermitianOperator& h) {
  const RealVector e = hermitian_eig(h).values;
  const double gap = e(e.size() - 1) - e(0);
  return {gap, gap * gap};
}

/// 4 (lambda_max - <H>)(<H> - lambda_min), an upper bound on F_2 under H.
inline double bhatia_davis_bound(const HermitianOperator& h, const DensityMatrix& rho) {
  detail::require_same_dim(h.dim(), rho.dim());
  const RealVector e = hermitian_eig(h).values;
  const double mean = expectation(h, rho.matrix());
  return std::max(0.0, 4.0 * (e(e.size() - 1) - mean) * (mean - e(0)));
}

// ---------------------------------------------------------------------------
// induced superoperator norm

struct SuperopNormConfig {
  int restarts = 32;
  int max_iter = 2000;
  double tol = 1e-10;
  std::uint64_t seed = 0;
};

struct SuperopNormResult {
  double value;
  ComplexVector state;
  bool converged;
};

namespace detail {

inline double superop_objective(const Superoperator& l, const ComplexVector& psi, double alpha) {
  const ComplexMatrix out = l.apply(psi * psi.adjoint());
  return schatten_norm(HermitianOperator(0.5 * (out + out.adjoint())), alpha);
}

inline ComplexVector from_real(const RealVector& x) {
  const Index n = x.size() / 2;
  ComplexVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = cplx(x(2 * i), x(2 * i + 1));
  return v / v.norm();
}

}  // namespace detail

/// sup over pure states of ||L[|psi><psi|]||_alpha by multi-start projected gradient ascent
/// on the unit sphere. The value is a lower bound on the supremum; `converged` reports
/// whether the best start met the improvement tolerance.
inline SuperopNormResult superop_norm(const Superoperator& l, double alpha, const SuperopNormConfig& cfg = {}) {
  require_alpha(alpha);
  if (cfg.restarts < 1) throw invalid_parameter("restarts must be >= 1");
  if (l.hermiticity_defect() > 1e-9 * std::max(1.0, l.matrix().cwiseAbs().maxCoeff())) {
    throw invalid_input("superoperator does not preserve Hermiticity");
  }
  const Index n = l.dim();
  const Index m = 2 * n;
  SuperopNormResult best{-1.0, ComplexVector::Zero(n), false};
  for (int r = 0; r < cfg.restarts; ++r) {
    KeyedRng rng(cfg.seed, static_cast<std::uint64_t>(r));
    RealVector x(m);
    for (Index i = 0; i < m; ++i) x(i) = rng.normal();
    x /= x.norm();
    auto f = [&](const RealVector& y) { return detail::superop_objective(l, detail::from_real(y), alpha); };
    double fx = f(x);
    double step = 0.1;
    bool conv = false;
    for (int it = 0; it < cfg.max_iter; ++it) {
      RealVector grad(m);
      const double h = 1e-6;
      for (Index i = 0; i < m; ++i) {
        RealVector xp = x;
        RealVector xm = x;
        xp(i) += h;
        xm(i) -= h;
        grad(i) = (f(xp) - f(xm)) / (2.0 * h);
      }
      grad -= x.dot(grad) * x;  // tangent projection
      const double gnorm = grad.norm();
      if (gnorm < 1e-12) {
        conv = true;
        break;
      }
      double improvement = 0.0;
      bool accepted = false;
      while (step > 1e-14) {
        RealVector y = x + step * grad / gnorm;
        y /= y.norm();
        const double fy = f(y);
        if (fy > fx) {
          improvement = fy - fx;
          x = y;
          fx = fy;
          accepted = true;
          step *= 1.5;
          break;
        }
        step *= 0.5;
      }
      if (!accepted || improvement < cfg.tol) {
        conv = true;
        break;
      }
    }
    if (fx > best.value) best = {fx, detail::from_real(x), conv};
  }
  return best;
}

// ---------------------------------------------------------------------------
// non-Hermitian generator bound

struct NonHermitianBound {
  double f1;  // 2 min_r ||H - i Gamma - r||_inf
  double f2;  // 4 min_r ||H - i Gamma - r||_inf^2
  double r;   // minimizing shift
};

/// min over real r of the largest singular value of H - i Gamma - r, searched on
/// [lambda_min(H) - ||Gamma||, lambda_max(H) + ||Gamma||] by grid scan and golden section.
inline NonHermitianBound nonhermitian_speed_bound(const HermitianOperator& h, const HermitianOperator& gamma) {
  detail::require_same_dim(h.dim(), gamma.dim());
  const RealVector eh = hermitian_eig(h).values;
  const double gnorm = norm_inf(gamma);
  const ComplexMatrix heff = h.matrix() - imag_unit * gamma.matrix();
  const ComplexMatrix id = identity(h.dim());
  auto f = [&](double r) { return singular_values(heff - r * id)(0); };
  const double lo = eh(0) - gnorm;
  const double hi = eh(eh.size() - 1) + gnorm;
  const Minimum m = grid_golden_min(f, lo, hi, 64, 1e-13 * std::max(1.0, hi - lo));
  return {2.0 * m.value, 4.0 * m.value * m.value, m.x};
}

/// Exact minimum for commuting 2x2 H and Gamma: the larger of two parabolas
/// (h_i - r)^2 + g_i^2 is minimized either at a vertex or at their crossing.
inline NonHermitianBound nonhermitian_qubit_bound(const HermitianOperator& h, const HermitianOperator& gamma) {
  if (h.dim() != 2 || gamma.dim() != 2) throw invalid_input("closed form requires 2x2 operators");
  const ComplexMatrix comm = h.matrix() * gamma.matrix() - gamma.matrix() * h.matrix();
  if (comm.cwiseAbs().maxCoeff() > 1e-9) throw invalid_input("closed form requires commuting H and Gamma");
  EigenSystem es = hermitian_eig(h);
  if (es.values(1) - es.values(0) <= 1e-12 * std::max(1.0, es.values.cwiseAbs().maxCoeff())) {
    es = hermitian_eig(gamma);
  }
  double hv[2];
  double gv[2];
  for (int i = 0; i < 2; ++i) {
    const ComplexVector v = es.vectors.col(i);
    hv[i] = (v.adjoint() * h.matrix() * v)(0, 0).real();
    gv[i] = (v.adjoint() * gamma.matrix() * v)(0, 0).real();
  }
  const double g0 = gv[0] * gv[0];
  const double g1 = gv[1] * gv[1];
  const double delta = hv[0] - hv[1];
  double y = 0.0;
  double r = 0.0;
  const int a = g0 >= g1 ? 0 : 1;
  const int b = 1 - a;
  const double ga = a == 0 ? g0 : g1;
  const double gb = a == 0 ? g1 : g0;
  const double pb_at_a = (hv[b] - hv[a]) * (hv[b] - hv[a]) + gb;
  if (std::abs(delta) <= 1e-15 || pb_at_a <= ga) {
    y = ga;
    r = hv[a];
  } else {
    const double dg = g0 - g1;
    r = 0.5 * (hv[0] + hv[1]) + dg / (2.0 * delta);
    y = 0.5 * (g0 + g1) + dg * dg / (4.0 * delta * delta) + 0.25 * delta * delta;
  }
  return {2.0 * std::sqrt(y), 4.0 * y, r};
}

// ---------------------------------------------------------------------------
// separability bounds

/// Bound on the Schatten speed of order alpha under J_n for k-separable states of N qubits:
/// 2^((1-alpha)/alpha) sqrt(s k^2 + r^2), s = floor(N/k), r = N - s k.
inline double ksep_bound(int n, int k, double alpha) {
  require_alpha(alpha);
  if (n < 1) throw invalid_parameter("N must be >= 1");
  if (k < 1 || k > n) throw invalid_parameter("k must satisfy 1 <= k <= N");
  const int s = n / k;
  const int r = n - s * k;
  const double pref = std::isinf(alpha) ? 0.5 : std::pow(2.0, (1.0 - alpha) / alpha);
  return pref * std::sqrt(static_cast<double>(s) * k * k + static_cast<double>(r) * r);
}

struct Block {
  std::vector<int> sites;
  HermitianOperator hamiltonian;  // acts on the block's sites only
};

/// Disjoint blocks covering sites 0..N-1, each with a local Hamiltonian.
class Partition {
 public:
  Partition(int n_sites, Index local_dim, std::vector<Block> blocks)
      : n_(n_sites), d_(local_dim), blocks_(std::move(blocks)) {
    if (n_ < 1 || d_ < 2) throw invalid_input("partition needs N >= 1 sites of dimension >= 2");
    std::vector<int> count(static_cast<std::size_t>(n_), 0);
    for (const Block& b : blocks_) {
      if (b.sites.empty()) throw invalid_input("partition block is empty");
      for (int s : b.sites) {
        if (s < 0 || s >= n_) throw invalid_input("partition site " + std::to_string(s) + " out of range");
        ++count[static_cast<std::size_t>(s)];
      }
      if (b.hamiltonian.dim() != int_pow(d_, static_cast<int>(b.sites.size()))) {
        throw invalid_input("block Hamiltonian dimension does not match its sites");
      }
    }
    for (int s = 0; s < n_; ++s) {
      if (count[static_cast<std::size_t>(s)] != 1) {
        throw invalid_input("partition blocks must be disjoint and cover every site (site " + std::to_string(s) + ")");
      }
    }
  }

  int sites() const noexcept { return n_; }
  Index local_dim() const noexcept { return d_; }
  Index dim() const { return int_pow(d_, n_); }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }

  ComplexMatrix block_operator(std::size_t k) const {
    return embed(blocks_[k].hamiltonian.matrix(), blocks_[k].sites, n_, d_);
  }

  /// H_A = sum_k H_k.
  HermitianOperator total_hamiltonian() const {
    ComplexMatrix h = ComplexMatrix::Zero(dim(), dim());
    for (std::size_t k = 0; k < blocks_.size(); ++k) h += block_operator(k);
    return HermitianOperator(h);
  }

 private:
  int n_;
  Index d_;
  std::vector<Block> blocks_;
};

/// 2^(1/alpha) sqrt(sum_k Var_rho(H_k)), evaluated on the submitted state.
inline double asep_bound(const DensityMatrix& rho, const Partition& part, double alpha) {
  require_alpha(alpha);
  detail::require_same_dim(rho.dim(), part.dim());
  double var = 0.0;
  for (std::size_t k = 0; k < part.blocks().size(); ++k) {
    var += variance(HermitianOperator(part.block_operator(k)), rho.matrix());
  }
  const double pref = std::isinf(alpha) ? 1.0 : std::pow(2.0, 1.0 / alpha);
  return pref * std::sqrt(var);
}

/// F_2 bound for fully separable states under a sum of local generators: ||L_i||_1^2 per
/// Hermitian-preserving generator (exact spectral gap for commutators), 4 min_r ||H_eff - r||^2
/// per non-Hermitian generator.
inline double local_generator_sep_bound(const std::vector<Superoperator>& locals, const SuperopNormConfig& cfg = {}) {
  double total = 0.0;
  for (const Superoperator& l : locals) {
    switch (l.kind()) {
      case GeneratorKind::commutator: {
        const double gap = heisenberg_limit(*l.hamiltonian()).f1_max;
        total += gap * gap;
        break;
      }
      case GeneratorKind::non_hermitian:
        total += nonhermitian_speed_bound(*l.hamiltonian(), *l.gamma()).f2;
        break;
      case GeneratorKind::explicit_matrix: {
        const double v = superop_norm(l, 1.0, cfg).value;
        total += v * v;
        break;
      }
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// spin squeezing

/// xi_beta = sqrt(N) <|J_n1 - <J_n1>|^beta>^(1/beta) / |<J_n3>|.
inline double spin_squeezing_xi(const DensityMatrix& rho, int n_qubits, const Direction& n1, const Direction& n2,
                                const Direction& n3, double beta) {
  if (!(beta >= 2.0) || std::isinf(beta)) throw invalid_parameter("beta must be finite and >= 2");
  const std::array<Direction, 3> t{n1, n2, n3};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double dot = t[i][0] * t[j][0] + t[i][1] * t[j][1] + t[i][2] * t[j][2];
      if (std::abs(dot - (i == j ? 1.0 : 0.0)) > 1e-9) throw invalid_parameter("directions are not an orthonormal triad");
    }
  }
  const HermitianOperator j1 = collective_spin(n_qubits, n1).op;
  const HermitianOperator j3 = collective_spin(n_qubits, n3).op;
  detail::require_same_dim(rho.dim(), j1.dim());
  const double m3 = expectation(j3, rho.matrix());
  if (std::abs(m3) <= 1e-12) throw undefined_quantity("<J_n3> vanishes; squeezing coefficient undefined");
  const double m1 = expectation(j1, rho.matrix());
  const EigenSystem es = hermitian_eig(j1);
  auto moment = [&](double b) {
    const ComplexMatrix a = spectral_apply(es, [&](double x) { return std::pow(std::abs(x - m1), b); });
    return std::pow(std::max(0.0, expectation(a, rho.matrix())), 1.0 / b);
  };
  const double scale = std::sqrt(static_cast<double>(n_qubits)) / std::abs(m3);
  const double xi = scale * moment(beta);
  const double xi2 = scale * moment(2.0);
  if (xi < xi2 * (1.0 - 1e-9) - 1e-12) throw numerical_error("moment ordering violated in squeezing coefficient");
  return xi;
}

// ---------------------------------------------------------------------------
// curve length

enum class SpeedKind { qfi, trace, schatten };

inline SpeedKind parse_speed_kind(const std::string& s) {
  if (s == "qfi" || s == "bures") return SpeedKind::qfi;
  if (s == "trace") return SpeedKind::trace;
  if (s == "schatten") return SpeedKind::schatten;
  throw invalid_parameter("unknown speed kind '" + s + "'");
}

/// S_2 = sqrt(F_2/8), S_1 = F_1/2, or the Schatten speed 2^(-1/alpha) ||drho||_alpha.
inline double quantum_speed(const ParametricFamily& fam, double theta, SpeedKind kind, double alpha) {
  switch (kind) {
    case SpeedKind::qfi: return std::sqrt(qfi(fam, theta) / 8.0);
    case SpeedKind::trace: return 0.5 * trace_speed(fam, theta);
    case SpeedKind::schatten: return schatten_speed(fam, theta, alpha).speed;
  }
  throw invalid_parameter("unknown speed kind");
}

/// Integral of the selected speed over [theta_start, theta_end] to absolute tolerance 1e-8.
inline double curve_length(const ParametricFamily& fam, double theta_start, double theta_end, SpeedKind kind,
                           double alpha = 2.0) {
  if (theta_end < theta_start) throw invalid_parameter("curve length requires theta_start <= theta_end");
  if (theta_end == theta_start) return 0.0;
  return adaptive_simpson([&](double t) { return quantum_speed(fam, t, kind, alpha); }, theta_start, theta_end,
                          1e-8, 30, 8);
}

// ---------------------------------------------------------------------------
// witnesses

enum class Verdict { entangled, undecided };

inline std::string to_string(Verdict v) { return v == Verdict::entangled ? "entangled" : "undecided"; }

struct WitnessReport {
  double speed;
  double bound;
  std::string kind;
  double alpha;
  Verdict verdict;
};

inline WitnessReport make_witness_report(double speed, double bound, std::string kind, double alpha) {
  const Verdict v = speed > bound * (1.0 + 1e-9) ? Verdict::entangled : Verdict::undecided;
  return {speed, bound, std::move(kind), alpha, v};
}

/// Schatten speed of the family at theta against the k-separable bound for N qubits.
/// The family's generator is expected to be a collective spin J_n.
inline WitnessReport witness_ksep(const ParametricFamily& fam, double theta, int n_qubits, int k, double alpha) {
  if (fam.dim() != int_pow(2, n_qubits)) throw invalid_input("family dimension is not 2^N");
  return make_witness_report(schatten_speed(fam, theta, alpha).value, ksep_bound(n_qubits, k, alpha), "ksep", alpha);
}

inline WitnessReport witness_ksep(const DensityMatrix& rho, const Direction& n, int k, double alpha) {
  int n_qubits = 0;
  while (int_pow(2, n_qubits) < rho.dim()) ++n_qubits;
  const auto fam = ParametricFamily::unitary(collective_spin(n_qubits, n).op, rho);
  return witness_ksep(fam, 0.0, n_qubits, k, alpha);
}

/// Schatten speed under H_A = sum_k H_k against the partition-separable bound.
inline WitnessReport witness_asep(const DensityMatrix& rho, const Partition& part, double alpha) {
  const auto fam = ParametricFamily::unitary(part.total_hamiltonian(), rho);
  return make_witness_report(schatten_speed(fam, 0.0, alpha).value, asep_bound(rho, part, alpha), "asep", alpha);
}

}  // namespace qspeed

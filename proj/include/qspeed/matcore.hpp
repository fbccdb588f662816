#pragma once

// Dense complex linear algebra at small dimension: Hermitian eigensystems,
// Schatten norms, the Jordan-Hahn split and column-stacked superoperators.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qspeed {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double infinity = std::numeric_limits<double>::infinity();
inline constexpr cplx imag_unit{0.0, 1.0};

/// An input violates a type invariant (shape, Hermiticity, trace, positivity).
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar parameter is outside its admissible range (alpha < 1, k > N, ...).
class invalid_parameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computed result contradicts an identity that holds exactly in exact arithmetic.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested quantity is undefined for this input (zero denominator, zero spread).
class undefined_quantity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace tol {

inline constexpr double hermitian = 1e-9;
inline constexpr double trace = 1e-9;

/// Allowed negative eigenvalue of a density matrix.
inline double psd(Index dim, double norm_inf) {
  return static_cast<double>(dim) * 1e-12 * norm_inf;
}

/// Eigenvalues closer to zero than this belong to neither spectral half.
inline double zero(Index dim, double norm_inf) {
  return static_cast<double>(dim) * std::numeric_limits<double>::epsilon() * norm_inf;
}

}  // namespace tol

inline void require_alpha(double alpha) {
  if (!(alpha >= 1.0)) {
    throw invalid_parameter("alpha must be >= 1, got " + std::to_string(alpha));
  }
}

inline double max_asymmetry(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline ComplexMatrix identity(Index dim) { return ComplexMatrix::Identity(dim, dim); }

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Column-stacking vectorization.
inline ComplexVector vec(const ComplexMatrix& x) {
  return Eigen::Map<const ComplexVector>(x.data(), x.size());
}

inline ComplexMatrix unvec(const ComplexVector& v, Index dim) {
  if (v.size() != dim * dim) throw invalid_input("unvec: length is not dim^2");
  return Eigen::Map<const ComplexMatrix>(v.data(), dim, dim);
}

class HermitianOperator {
 public:
  /// Validates max|X - X^dag| <= herm_tol and stores the symmetrized matrix.
  explicit HermitianOperator(const ComplexMatrix& m) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
      throw invalid_input("operator must be a non-empty square matrix");
    }
    if (!m.allFinite()) throw invalid_input("operator has non-finite entries");
    const double asym = max_asymmetry(m);
    if (asym > tol::hermitian) {
      throw invalid_input("operator is not Hermitian: max asymmetry " + std::to_string(asym));
    }
    m_ = 0.5 * (m + m.adjoint());
  }

  static HermitianOperator zero(Index dim) { return HermitianOperator(ComplexMatrix::Zero(dim, dim)); }

  const ComplexMatrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }

  HermitianOperator operator+(const HermitianOperator& o) const { return HermitianOperator(m_ + o.m_); }
  HermitianOperator operator-(const HermitianOperator& o) const { return HermitianOperator(m_ - o.m_); }
  HermitianOperator operator*(double s) const { return HermitianOperator(s * m_); }

 private:
  ComplexMatrix m_;
};

struct EigenSystem {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // orthonormal columns
};

namespace detail {

inline EigenSystem eig_unchecked(const ComplexMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a);
  if (solver.info() != Eigen::Success) throw numerical_error("Hermitian eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline double schatten_from_moduli(const RealVector& moduli, double alpha) {
  if (moduli.size() == 0) return 0.0;
  const double top = moduli.cwiseAbs().maxCoeff();
  if (std::isinf(alpha) || top == 0.0) return top;
  double sum = 0.0;
  for (double s : moduli) sum += std::pow(std::abs(s) / top, alpha);
  return top * std::pow(sum, 1.0 / alpha);
}

}  // namespace detail

inline EigenSystem hermitian_eig(const HermitianOperator& a) { return detail::eig_unchecked(a.matrix()); }

inline double norm_inf(const HermitianOperator& a) {
  return hermitian_eig(a).values.cwiseAbs().maxCoeff();
}

/// Applies f to the spectrum: V f(diag) V^dag.
template <class F>
ComplexMatrix spectral_apply(const EigenSystem& es, F&& f) {
  RealVector mapped(es.values.size());
  for (Index i = 0; i < es.values.size(); ++i) mapped(i) = f(es.values(i));
  return es.vectors * mapped.cast<cplx>().asDiagonal() * es.vectors.adjoint();
}

template <class F>
ComplexMatrix spectral_apply(const HermitianOperator& a, F&& f) {
  return spectral_apply(hermitian_eig(a), std::forward<F>(f));
}

inline RealVector singular_values(const ComplexMatrix& a) {
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues();
}

/// (sum_i s_i^alpha)^(1/alpha) over singular values; alpha = +inf gives the spectral norm.
inline double schatten_norm(const ComplexMatrix& a, double alpha) {
  require_alpha(alpha);
  return detail::schatten_from_moduli(singular_values(a), alpha);
}

/// Hermitian overload: singular values are |eigenvalues|.
inline double schatten_norm(const HermitianOperator& a, double alpha) {
  require_alpha(alpha);
  return detail::schatten_from_moduli(hermitian_eig(a).values.cwiseAbs(), alpha);
}

struct JordanHahn {
  ComplexMatrix positive;           // X_+ >= 0
  ComplexMatrix negative;           // X_- <= 0
  ComplexMatrix projector_positive; // E_+
  ComplexMatrix projector_negative; // E_-
};

inline JordanHahn jordan_hahn(const HermitianOperator& a) {
  const EigenSystem es = hermitian_eig(a);
  const Index n = a.dim();
  const double cut = tol::zero(n, es.values.cwiseAbs().maxCoeff());
  JordanHahn out{ComplexMatrix::Zero(n, n), ComplexMatrix::Zero(n, n), ComplexMatrix::Zero(n, n),
                 ComplexMatrix::Zero(n, n)};
  for (Index i = 0; i < n; ++i) {
    const double lam = es.values(i);
    const ComplexMatrix proj = es.vectors.col(i) * es.vectors.col(i).adjoint();
    if (lam > cut) {
      out.positive += lam * proj;
      out.projector_positive += proj;
    } else if (lam < -cut) {
      out.negative += lam * proj;
      out.projector_negative += proj;
    }
  }
  return out;
}

inline ComplexMatrix abs_value(const HermitianOperator& a) {
  return spectral_apply(a, [](double x) { return std::abs(x); });
}

/// Square root of a PSD operator; eigenvalues within rounding of zero are set to exactly zero.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& a) {
  const EigenSystem es = detail::eig_unchecked(0.5 * (a + a.adjoint()));
  const double top = es.values.cwiseAbs().maxCoeff();
  const double cut = 16.0 * tol::zero(a.rows(), top);
  return spectral_apply(es, [cut](double x) { return x > cut ? std::sqrt(x) : 0.0; });
}

inline double expectation(const ComplexMatrix& h, const ComplexMatrix& rho) {
  return (h * rho).trace().real();
}

inline double expectation(const HermitianOperator& h, const ComplexMatrix& rho) {
  return expectation(h.matrix(), rho);
}

inline double variance(const HermitianOperator& h, const ComplexMatrix& rho) {
  const double mean = expectation(h, rho);
  const double second = expectation(h.matrix() * h.matrix(), rho);
  return std::max(0.0, second - mean * mean);
}

/// Pure state vector; |<psi|psi> - 1| <= trace_tol.
class PureState {
 public:
  explicit PureState(ComplexVector v) : v_(std::move(v)) {
    if (v_.size() == 0) throw invalid_input("pure state must be non-empty");
    if (!v_.allFinite()) throw invalid_input("pure state has non-finite entries");
    const double n2 = v_.squaredNorm();
    if (std::abs(n2 - 1.0) > tol::trace) {
      throw invalid_input("pure state norm deviation " + std::to_string(std::abs(n2 - 1.0)));
    }
  }

  static PureState normalized(ComplexVector v) {
    const double n = v.norm();
    if (n == 0.0) throw invalid_input("cannot normalize the zero vector");
    return PureState(v / n);
  }

  const ComplexVector& vector() const noexcept { return v_; }
  Index dim() const noexcept { return v_.size(); }
  ComplexMatrix projector() const { return v_ * v_.adjoint(); }

 private:
  ComplexVector v_;
};

class DensityMatrix {
 public:
  explicit DensityMatrix(const ComplexMatrix& m) : op_(m) {
    const EigenSystem es = hermitian_eig(op_);
    const double ninf = es.values.cwiseAbs().maxCoeff();
    const double lowest = es.values(0);
    if (lowest < -tol::psd(op_.dim(), ninf)) {
      throw invalid_input("density matrix has negative eigenvalue " + std::to_string(lowest));
    }
    const double tr = op_.matrix().trace().real();
    if (std::abs(tr - 1.0) > tol::trace) {
      throw invalid_input("density matrix trace deviation " + std::to_string(std::abs(tr - 1.0)));
    }
  }

  explicit DensityMatrix(const PureState& psi) : DensityMatrix(psi.projector()) {}

  static DensityMatrix maximally_mixed(Index dim) {
    return DensityMatrix(identity(dim) / static_cast<double>(dim));
  }

  const HermitianOperator& op() const noexcept { return op_; }
  const ComplexMatrix& matrix() const noexcept { return op_.matrix(); }
  Index dim() const noexcept { return op_.dim(); }

 private:
  HermitianOperator op_;
};

enum class GeneratorKind { commutator, non_hermitian, explicit_matrix };

/// Linear map on dim x dim operators stored as a dim^2 x dim^2 matrix acting on
/// column-stacked operators.
class Superoperator {
 public:
  /// L[rho] = -i[H, rho]  ->  -i (I (x) H - H^T (x) I)
  static Superoperator commutator(const HermitianOperator& h) {
    const Index n = h.dim();
    const ComplexMatrix id = identity(n);
    ComplexMatrix m = -imag_unit * (kron(id, h.matrix()) - kron(h.matrix().transpose(), id));
    return Superoperator(std::move(m), n, GeneratorKind::commutator, h, std::nullopt);
  }

  /// L[rho] = -i (H_eff rho - rho H_eff^dag) with H_eff = H - i Gamma.
  static Superoperator non_hermitian(const HermitianOperator& h, const HermitianOperator& gamma) {
    if (h.dim() != gamma.dim()) throw invalid_input("H and Gamma dimensions differ");
    const Index n = h.dim();
    const ComplexMatrix id = identity(n);
    const ComplexMatrix heff = h.matrix() - imag_unit * gamma.matrix();
    ComplexMatrix m = -imag_unit * (kron(id, heff) - kron(heff.conjugate(), id));
    return Superoperator(std::move(m), n, GeneratorKind::non_hermitian, h, gamma);
  }

  /// Explicit matrix; must preserve Hermiticity on the full Hermitian basis.
  static Superoperator from_matrix(const ComplexMatrix& m) {
    const auto n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(m.rows()))));
    if (m.rows() == 0 || m.rows() != m.cols() || n * n != m.rows()) {
      throw invalid_input("superoperator matrix must be dim^2 x dim^2");
    }
    if (!m.allFinite()) throw invalid_input("superoperator has non-finite entries");
    Superoperator s(m, n, GeneratorKind::explicit_matrix, std::nullopt, std::nullopt);
    const double err = s.hermiticity_defect();
    if (err > tol::hermitian * std::max(1.0, m.cwiseAbs().maxCoeff())) {
      throw invalid_input("superoperator does not preserve Hermiticity: defect " + std::to_string(err));
    }
    return s;
  }

  ComplexMatrix apply(const ComplexMatrix& x) const {
    if (x.rows() != dim_ || x.cols() != dim_) throw invalid_input("superoperator dimension mismatch");
    return unvec(m_ * vec(x), dim_);
  }

  /// Largest |L[X]^dag - L[X]| over the Hermitian basis {E_jj, E_jk + E_kj, i(E_jk - E_kj)}.
  double hermiticity_defect() const {
    double worst = 0.0;
    for (Index j = 0; j < dim_; ++j) {
      for (Index k = j; k < dim_; ++k) {
        ComplexMatrix x = ComplexMatrix::Zero(dim_, dim_);
        x(j, k) = 1.0;
        x(k, j) = 1.0;
        worst = std::max(worst, max_asymmetry(unvec(m_ * vec(x), dim_)));
        if (k != j) {
          ComplexMatrix y = ComplexMatrix::Zero(dim_, dim_);
          y(j, k) = imag_unit;
          y(k, j) = -imag_unit;
          worst = std::max(worst, max_asymmetry(unvec(m_ * vec(y), dim_)));
        }
      }
    }
    return worst;
  }

  const ComplexMatrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return dim_; }
  GeneratorKind kind() const noexcept { return kind_; }
  const std::optional<HermitianOperator>& hamiltonian() const noexcept { return h_; }
  const std::optional<HermitianOperator>& gamma() const noexcept { return gamma_; }

 private:
  Superoperator(ComplexMatrix m, Index dim, GeneratorKind kind, std::optional<HermitianOperator> h,
                std::optional<HermitianOperator> gamma)
      : m_(std::move(m)), dim_(dim), kind_(kind), h_(std::move(h)), gamma_(std::move(gamma)) {}

  ComplexMatrix m_;
  Index dim_;
  GeneratorKind kind_;
  std::optional<HermitianOperator> h_;
  std::optional<HermitianOperator> gamma_;
};

inline Superoperator commutator_map(const HermitianOperator& h) { return Superoperator::commutator(h); }

/// Lindblad generator -i[H,.] + sum_k (L_k . L_k^dag - 1/2 {L_k^dag L_k, .}).
inline Superoperator lindblad_map(const HermitianOperator& h, const std::vector<ComplexMatrix>& jumps) {
  const Index n = h.dim();
  const ComplexMatrix id = identity(n);
  ComplexMatrix m = Superoperator::commutator(h).matrix();
  for (const ComplexMatrix& l : jumps) {
    if (l.rows() != n || l.cols() != n) throw invalid_input("jump operator dimension mismatch");
    const ComplexMatrix ldl = l.adjoint() * l;
    m += kron(l.conjugate(), l) - 0.5 * (kron(id, ldl) + kron(ldl.transpose(), id));
  }
  return Superoperator::from_matrix(m);
}

}  // namespace qspeed

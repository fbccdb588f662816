#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "qspeed/qspeed.hpp"
#include "support.hpp"

using namespace qspeed;
using test::max_abs;
using test::sz;

namespace {

ParametricFamily plus_sz() {
  return ParametricFamily::unitary(HermitianOperator(0.5 * sz()), DensityMatrix(test::plus()));
}

ParametricFamily random_unitary_family(Index n, KeyedRng& rng, Index rank = 0) {
  return ParametricFamily::unitary(random_hermitian(n, rng), random_density(n, rng, rank));
}

DensityMatrix ket_state(std::initializer_list<cplx> c) { return DensityMatrix(PureState::normalized(test::ket(c))); }

// trace distance between pure states without matrix functions
double pure_overlap(const PureState& a, const PureState& b) { return std::abs(a.vector().dot(b.vector())); }

}  // namespace

TEST(POVMType, Invariants) {
  EXPECT_THROW(POVM({HermitianOperator(test::diag({1.0, 0.0}))}), invalid_input);
  EXPECT_THROW(POVM({HermitianOperator(test::diag({1.5, 1.0})), HermitianOperator(test::diag({-0.5, 0.0}))}),
               invalid_input);
  EXPECT_THROW(POVM({}), invalid_input);
  EXPECT_EQ(computational_basis_povm(3).size(), 3u);
}

TEST(InducedDist, Examples) {
  const ProbDist p = induced_dist(DensityMatrix(test::diag({0.75, 0.25})), computational_basis_povm(2));
  EXPECT_NEAR(p[0], 0.75, 1e-15);
  EXPECT_NEAR(p[1], 0.25, 1e-15);
  const ProbDist one = induced_dist(DensityMatrix(test::diag({0.75, 0.25})), POVM({HermitianOperator(identity(2))}));
  EXPECT_EQ(one.size(), 1u);
  EXPECT_NEAR(one[0], 1.0, 1e-15);
  EXPECT_THROW(induced_dist(DensityMatrix::maximally_mixed(3), computational_basis_povm(2)), invalid_input);
}

TEST(InducedDist, DerivativeMatchesFiniteDifference) {
  // |+> under sigma_z/2 measured along x has p' = (0, 0) at theta = 0; use the y basis instead
  const ParametricFamily fam = plus_sz();
  ComplexMatrix u(2, 2);
  u << 1.0, 1.0, imag_unit, -imag_unit;
  const POVM y = projective_povm(u / std::sqrt(2.0));
  const ParametricDist d = induced_parametric(fam, 0.0, y);
  EXPECT_NEAR(d.weights()[0], 0.5, 1e-14);
  const double h = 1e-5;
  for (std::size_t x = 0; x < 2; ++x) {
    const double fd = (induced_dist(fam.density_at(h), y)[x] - induced_dist(fam.density_at(-h), y)[x]) / (2 * h);
    EXPECT_NEAR(d.derivative()[x], fd, 1e-8);
  }
  EXPECT_NEAR(std::abs(d.derivative()[0]), 0.5, 1e-12);
  // z basis does not see the phase
  const ParametricDist z = induced_parametric(fam, 0.3, computational_basis_povm(2));
  EXPECT_NEAR(z.derivative()[0], 0.0, 1e-14);
}

TEST(Fidelity, Examples) {
  const DensityMatrix zero = ket_state({1.0, 0.0});
  const DensityMatrix one = ket_state({0.0, 1.0});
  const DensityMatrix plus(test::plus());
  EXPECT_NEAR(fidelity(zero, zero), 1.0, 1e-12);
  EXPECT_NEAR(bures_distance(zero, zero), 0.0, 1e-6);
  EXPECT_NEAR(fidelity(zero, one), 0.0, 1e-12);
  EXPECT_NEAR(bures_distance(zero, one), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(zero, plus), 1.0 / std::sqrt(2.0), 1e-12);
  KeyedRng rng(40, 0);
  const DensityMatrix r = random_density(3, rng);
  EXPECT_NEAR(fidelity(r, r), 1.0, 1e-10);
}

TEST(Fidelity, PureStatesGiveOverlap) {
  for (std::uint64_t i = 0; i < 50; ++i) {
    KeyedRng rng(41, i);
    const Index n = 2 + static_cast<Index>(i % 4);
    const PureState a = random_pure(n, rng);
    const PureState b = random_pure(n, rng);
    EXPECT_NEAR(fidelity(DensityMatrix(a), DensityMatrix(b)), pure_overlap(a, b), 1e-7);
  }
}

TEST(TraceDistance, Examples) {
  const DensityMatrix zero = ket_state({1.0, 0.0});
  const DensityMatrix one = ket_state({0.0, 1.0});
  const DensityMatrix plus(test::plus());
  EXPECT_EQ(trace_distance(zero, zero), 0.0);
  EXPECT_NEAR(trace_distance(zero, one), 1.0, 1e-14);
  EXPECT_NEAR(trace_distance(zero, plus), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(trace_distance(zero, plus), std::sqrt(1.0 - std::pow(fidelity(zero, plus), 2)), 1e-12);
}

TEST(SchattenDistance, Examples) {
  const DensityMatrix zero = ket_state({1.0, 0.0});
  const DensityMatrix one = ket_state({0.0, 1.0});
  EXPECT_EQ(schatten_distance(zero, zero, 2.0), 0.0);
  EXPECT_NEAR(schatten_distance(zero, one, 2.0), 1.0, 1e-14);
  EXPECT_THROW(schatten_distance(zero, one, 0.5), invalid_parameter);
  for (std::uint64_t i = 0; i < 30; ++i) {
    KeyedRng rng(42, i);
    const DensityMatrix a = random_density(3, rng);
    const DensityMatrix b = random_density(3, rng);
    EXPECT_NEAR(schatten_distance(a, b, 1.0), trace_distance(a, b), 1e-14);
    // Hilbert-Schmidt form
    EXPECT_NEAR(schatten_distance(a, b, 2.0), std::sqrt(0.5) * (a.matrix() - b.matrix()).norm(), 1e-12);
  }
}

TEST(SLD, PureStateIsTwiceDerivative) {
  for (std::uint64_t i = 0; i < 30; ++i) {
    KeyedRng rng(43, i);
    const Index n = 2 + static_cast<Index>(i % 4);
    const ParametricFamily fam = ParametricFamily::unitary(random_hermitian(n, rng), DensityMatrix(random_pure(n, rng)));
    const SLDResult s = sld(fam, 0.4);
    EXPECT_EQ(s.support_dim, 1);
    EXPECT_LE(max_abs(s.L.matrix() - 2.0 * fam.derivative_at(0.4).matrix()), 1e-9);
  }
}

TEST(SLD, ThermalIsCentredEnergy) {
  KeyedRng rng(44, 0);
  const HermitianOperator h = random_hermitian(4, rng);
  const ParametricFamily fam = ParametricFamily::thermal(h);
  const double beta = 0.7;
  const DensityMatrix rho = fam.density_at(beta);
  const double mean = expectation(h, rho.matrix());
  const SLDResult s = sld(fam, beta);
  EXPECT_LE(max_abs(s.L.matrix() - (mean * identity(4) - h.matrix())), 1e-9);
}

TEST(SLD, StationaryFamilyHasZeroSld) {
  KeyedRng rng(45, 0);
  const ParametricFamily fam = ParametricFamily::unitary(random_hermitian(3, rng), DensityMatrix::maximally_mixed(3));
  EXPECT_LE(max_abs(sld(fam, 0.2).L.matrix()), 1e-12);
  EXPECT_NEAR(qfi(fam, 0.2), 0.0, 1e-12);
}

TEST(SLD, ResidualOnSupport) {
  for (std::uint64_t i = 0; i < 50; ++i) {
    KeyedRng rng(46, i);
    const Index n = 2 + static_cast<Index>(i % 4);
    const ParametricFamily fam = random_unitary_family(n, rng);
    const ComplexMatrix rho = fam.state_at(0.1).matrix();
    const ComplexMatrix l = sld(fam, 0.1).L.matrix();
    EXPECT_LE(max_abs(0.5 * (l * rho + rho * l) - fam.derivative_at(0.1).matrix()), 1e-8);
  }
}

TEST(SLD, DerivativeOutsideSupportIsUndefined) {
  // rho = |0><0| with drho pushing weight onto |1><1|
  const HermitianOperator rho(test::diag({1.0, 0.0}));
  const HermitianOperator drho(test::diag({-1.0, 1.0}));
  EXPECT_THROW(sld(rho, drho), undefined_quantity);
  EXPECT_THROW(qfi(rho, drho), undefined_quantity);
}

TEST(QFI, Examples) {
  EXPECT_NEAR(qfi(plus_sz(), 0.0), 1.0, 1e-12);
  KeyedRng rng(47, 0);
  EXPECT_NEAR(qfi(ParametricFamily::unitary(random_hermitian(3, rng), DensityMatrix::maximally_mixed(3)), 0.0), 0.0,
              1e-14);
  const ParametricFamily ghz = ParametricFamily::unitary(HermitianOperator(collective_spin_z(3).op), DensityMatrix(test::ghz(3)));
  EXPECT_NEAR(qfi(ghz, 0.0), 9.0, 1e-10);
}

TEST(QFI, PureUnitaryEqualsFourVariance) {
  for (std::uint64_t i = 0; i < 50; ++i) {
    KeyedRng rng(48, i);
    const Index n = 2 + static_cast<Index>(i % 5);
    const HermitianOperator h = random_hermitian(n, rng);
    const DensityMatrix rho(random_pure(n, rng));
    const ParametricFamily fam = ParametricFamily::unitary(h, rho);
    EXPECT_NEAR(qfi(fam, 0.0), 4.0 * variance(h, rho.matrix()), 1e-9 * (1 + norm_inf(h) * norm_inf(h)));
  }
}

TEST(TraceSpeed, Examples) {
  EXPECT_NEAR(trace_speed(plus_sz(), 0.0), 1.0, 1e-14);
  KeyedRng rng(49, 0);
  EXPECT_NEAR(trace_speed(ParametricFamily::unitary(random_hermitian(3, rng), DensityMatrix::maximally_mixed(3)), 0.0),
              0.0, 1e-14);
  const ParametricFamily th = ParametricFamily::thermal(HermitianOperator(test::diag({0.0, 1.0})));
  EXPECT_NEAR(trace_speed(th, std::log(3.0)), 0.375, 1e-12);
  EXPECT_NEAR(qfi(th, std::log(3.0)), 0.1875, 1e-12);
}

TEST(TraceSpeed, UnitaryEqualsCommutatorNorm) {
  for (std::uint64_t i = 0; i < 30; ++i) {
    KeyedRng rng(50, i);
    const Index n = 2 + static_cast<Index>(i % 4);
    const HermitianOperator h = random_hermitian(n, rng);
    const DensityMatrix rho = random_density(n, rng);
    const ParametricFamily fam = ParametricFamily::unitary(h, rho);
    const ComplexMatrix c = h.matrix() * rho.matrix() - rho.matrix() * h.matrix();
    EXPECT_NEAR(trace_speed(fam, 0.0), schatten_norm(c, 1.0), 1e-10);
  }
}

TEST(SchattenSpeedTest, Examples) {
  const SchattenSpeed s = schatten_speed(plus_sz(), 0.0, 2.0);
  EXPECT_NEAR(s.value, 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(s.speed, 0.5, 1e-14);
  KeyedRng rng(51, 0);
  const ParametricFamily mixed = ParametricFamily::unitary(random_hermitian(3, rng), DensityMatrix::maximally_mixed(3));
  for (double a : {1.0, 2.0, 3.0, infinity}) EXPECT_NEAR(schatten_speed(mixed, 0.0, a).value, 0.0, 1e-14);
}

TEST(SchattenSpeedTest, AlphaOneIsTraceSpeedAndHilbertSchmidtForms) {
  for (std::uint64_t i = 0; i < 50; ++i) {
    KeyedRng rng(52, i);
    const Index n = 2 + static_cast<Index>(i % 4);
    const HermitianOperator h = random_hermitian(n, rng);
    const DensityMatrix rho = random_density(n, rng);
    const ParametricFamily fam = ParametricFamily::unitary(h, rho);
    EXPECT_NEAR(schatten_speed(fam, 0.0, 1.0).value, trace_speed(fam, 0.0), 1e-13);
    const double s2 = schatten_speed(fam, 0.0, 2.0).speed;
    EXPECT_NEAR(hilbert_schmidt_speed(fam, 0.0), s2, 1e-10);
    EXPECT_NEAR(unitary_hilbert_schmidt_speed(h, rho), s2, 1e-10);
  }
}

TEST(SchattenSpeedTest, PureUnitarySpeedIsDeltaH) {
  for (std::uint64_t i = 0; i < 50; ++i) {
    KeyedRng rng(53, i);
    const Index n = 2 + static_cast<Index>(i % 5);
    const HermitianOperator h = random_hermitian(n, rng);
    const DensityMatrix rho(random_pure(n, rng));
    const ParametricFamily fam = ParametricFamily::unitary(h, rho);
    const double dh = std::sqrt(variance(h, rho.matrix()));
    for (double a : {1.0, 1.5, 2.0, 3.0, infinity}) EXPECT_NEAR(schatten_speed(fam, 0.0, a).speed, dh, 1e-9);
  }
}

TEST(OptimalPOVM, ThermalTargetsShareEnergyBasis) {
  const ParametricFamily th = ParametricFamily::thermal(HermitianOperator(test::diag({0.0, 1.0, 2.5})));
  for (PovmTarget t : {PovmTarget::trace_speed, PovmTarget::schatten, PovmTarget::qfi}) {
    const POVM p = optimal_povm(th, 0.8, t);
    ASSERT_EQ(p.size(), 3u);
    for (const auto& e : p.elements()) EXPECT_LE(max_abs(e.matrix() - e.matrix().diagonal().asDiagonal().toDenseMatrix()), 1e-12);
  }
}

TEST(OptimalPOVM, PureUnitaryTraceAndQfiProjectorsCoincide) {
  for (std::uint64_t i = 0; i < 20; ++i) {
    KeyedRng rng(54, i);
    const Index n = 2 + static_cast<Index>(i % 3);
    const ParametricFamily fam = ParametricFamily::unitary(random_hermitian(n, rng), DensityMatrix(random_pure(n, rng)));
    const POVM a = optimal_povm(fam, 0.0, PovmTarget::trace_speed);
    const POVM b = optimal_povm(fam, 0.0, PovmTarget::qfi);
    ASSERT_EQ(a.size(), b.size());
    for (const auto& ea : a.elements()) {
      double best = infinity;
      for (const auto& eb : b.elements()) best = std::min(best, max_abs(ea.matrix() - eb.matrix()));
      EXPECT_LE(best, 1e-8);
    }
  }
}

TEST(OptimalPOVM, ReproducesQuantumValues) {
  for (std::uint64_t i = 0; i < 60; ++i) {
    KeyedRng rng(55, i);
    const Index n = 2 + static_cast<Index>(i % 3);
    const ParametricFamily fam = i % 2 ? random_unitary_family(n, rng)
                                       : ParametricFamily::lindblad(random_lindblad(n, rng), random_density(n, rng));
    const double t = 0.2;
    const ParametricDist d1 = induced_parametric(fam, t, optimal_povm(fam, t, PovmTarget::trace_speed));
    EXPECT_NEAR(gen_fisher(d1, 1.0), trace_speed(fam, t), 1e-8);
    const ParametricDist d2 = induced_parametric(fam, t, optimal_povm(fam, t, PovmTarget::qfi));
    EXPECT_NEAR(gen_fisher(d2, 2.0), qfi(fam, t), 1e-8 * (1 + qfi(fam, t)));
    const ParametricDist ds = induced_parametric(fam, t, optimal_povm(fam, t, PovmTarget::schatten));
    for (double a : {1.0, 1.5, 2.0, 3.0}) {
      EXPECT_NEAR(schatten_fisher(ds, a).fisher, schatten_speed(fam, t, a).value, 1e-8);
    }
    EXPECT_EQ(parse_povm_target("qfi"), PovmTarget::qfi);
  }
}

TEST(TwoProjectorPOVM, PlusStateAllAlphas) {
  const POVM p = pure_two_projector_povm(test::plus(), HermitianOperator(0.5 * sz()));
  const ParametricDist d = induced_parametric(plus_sz(), 0.0, p);
  for (double a : {1.0, 1.5, 2.0, 3.0}) EXPECT_NEAR(std::pow(gen_fisher(d, a), 1.0 / a), 1.0, 1e-10);
}

TEST(TwoProjectorPOVM, EigenstateIsUndefined) {
  EXPECT_THROW(pure_two_projector_povm(PureState(test::ket({1.0, 0.0})), HermitianOperator(sz())), undefined_quantity);
}

TEST(TwoProjectorPOVM, Construction) {
  for (std::uint64_t i = 0; i < 30; ++i) {
    KeyedRng rng(56, i);
    const Index n = 2 + static_cast<Index>(i % 4);
    const PureState psi = random_pure(n, rng);
    const POVM p = pure_two_projector_povm(psi, random_hermitian(n, rng));
    const ComplexMatrix& ep = p.elements()[0].matrix();
    const ComplexMatrix& em = p.elements()[1].matrix();
    EXPECT_LE(max_abs(ep * em), 1e-12);
    const double overlap_p = std::abs((psi.vector().adjoint() * ep * psi.vector())(0, 0));
    const double overlap_m = std::abs((psi.vector().adjoint() * em * psi.vector())(0, 0));
    EXPECT_NEAR(overlap_p, 0.5, 1e-12);
    EXPECT_NEAR(overlap_m, 0.5, 1e-12);
    EXPECT_EQ(p.size(), n == 2 ? 2u : 3u);
  }
}

TEST(NonHermitianSpeed, HermitianLimit) {
  const HermitianOperator h(0.5 * sz());
  const SchattenSpeed s = nonhermitian_pure_speed(test::plus(), h, HermitianOperator::zero(2), 1.0);
  EXPECT_NEAR(s.value, 1.0, 1e-14);
  for (double a : {1.0, 2.0, 3.0}) {
    EXPECT_NEAR(nonhermitian_pure_speed(test::plus(), h, HermitianOperator::zero(2), a).speed, 0.5, 1e-14);
  }
}

TEST(NonHermitianSpeed, UniformDecay) {
  for (std::uint64_t i = 0; i < 30; ++i) {
    KeyedRng rng(57, i);
    const Index n = 2 + static_cast<Index>(i % 3);
    const HermitianOperator h = random_hermitian(n, rng);
    const PureState psi = random_pure(n, rng);
    const double g = 0.1 + rng.uniform();
    const HermitianOperator gamma(g * identity(n));
    const double expected = 2.0 * std::sqrt(variance(h, psi.projector()) + g * g);
    EXPECT_NEAR(nonhermitian_pure_speed(psi, h, gamma, 1.0).value, expected, 1e-10);
  }
}

TEST(NonHermitianSpeed, MatchesFamilyDerivative) {
  for (std::uint64_t i = 0; i < 50; ++i) {
    KeyedRng rng(58, i);
    const Index n = 2 + static_cast<Index>(i % 4);
    const HermitianOperator h = random_hermitian(n, rng);
    const HermitianOperator g = random_hermitian(n, rng);
    const PureState psi = random_pure(n, rng);
    const ParametricFamily fam = ParametricFamily::non_hermitian(h, g, DensityMatrix(psi));
    for (double a : {1.0, 1.5, 2.0, 3.0, infinity}) {
      EXPECT_NEAR(nonhermitian_pure_speed(psi, h, g, a).value, schatten_speed(fam, 0.0, a).value, 1e-9);
    }
    // trace is not conserved
    EXPECT_NEAR(fam.derivative_at(0.0).matrix().trace().real(), -2.0 * expectation(g, psi.projector()), 1e-9);
  }
}

TEST(NonHermitianSpeed, MatchesIntegratedTableFamily) {
  for (std::uint64_t i = 0; i < 10; ++i) {
    KeyedRng rng(59, i);
    const HermitianOperator h = random_hermitian(2, rng);
    const HermitianOperator g = random_hermitian(2, rng);
    const PureState psi = random_pure(2, rng);
    const ComplexMatrix heff = h.matrix() - imag_unit * g.matrix();
    const double step = 1e-2;
    std::vector<TablePoint> pts;
    for (int k = -2; k <= 2; ++k) {
      const ComplexMatrix u = (-imag_unit * heff * (k * step)).exp();
      const ComplexVector v = u * psi.vector();
      pts.push_back({k * step, HermitianOperator(v * v.adjoint())});
    }
    const ParametricFamily tab = ParametricFamily::table(pts);
    EXPECT_NEAR(trace_speed(tab, 0.0), nonhermitian_pure_speed(psi, h, g, 1.0).value, 1e-6);
  }
}

TEST(Thermal, Examples) {
  const HermitianOperator h(test::diag({0.0, 1.0}));
  const ParametricFamily th = ParametricFamily::thermal(h);
  const double beta = std::log(3.0);
  const DensityMatrix rho = th.density_at(beta);
  EXPECT_NEAR(rho.matrix()(0, 0).real(), 0.75, 1e-14);
  EXPECT_NEAR(thermal_gen_fisher(h, beta, 1.0), 0.375, 1e-14);
  EXPECT_NEAR(thermal_gen_fisher(h, beta, 2.0), 0.1875, 1e-14);
  EXPECT_LE(trace_speed(th, beta), std::sqrt(qfi(th, beta)));
  EXPECT_LT(trace_speed(th, 60.0), 1e-20);
  EXPECT_LT(qfi(th, 60.0), 1e-20);
  const ParametricFamily flat = ParametricFamily::thermal(HermitianOperator(2.0 * identity(3)));
  EXPECT_EQ(trace_speed(flat, 1.0), 0.0);
  EXPECT_EQ(qfi(flat, 1.0), 0.0);
}

TEST(Thermal, LargeBetaDoesNotOverflow) {
  const HermitianOperator h(test::diag({-300.0, 0.0, 500.0}));
  const ParametricFamily th = ParametricFamily::thermal(h);
  for (double beta : {-10.0, 5.0, 50.0}) {
    const DensityMatrix rho = th.density_at(beta);
    EXPECT_TRUE(rho.matrix().allFinite());
    EXPECT_TRUE(std::isfinite(trace_speed(th, beta)));
  }
}

TEST(Thermal, GeneralizedFisherMatchesGenericPath) {
  for (std::uint64_t i = 0; i < 30; ++i) {
    KeyedRng rng(60, i);
    const Index n = 2 + static_cast<Index>(i % 4);
    const HermitianOperator h = random_hermitian(n, rng);
    const ParametricFamily th = ParametricFamily::thermal(h);
    const double beta = rng.normal();
    EXPECT_NEAR(thermal_gen_fisher(h, beta, 1.0), trace_speed(th, beta), 1e-10);
    EXPECT_NEAR(thermal_gen_fisher(h, beta, 2.0), qfi(th, beta), 1e-10);
    const ParametricDist d = induced_parametric(th, beta, eigenprojector_povm(h, true));
    for (double a : {1.0, 1.5, 3.0}) EXPECT_NEAR(thermal_gen_fisher(h, beta, a), gen_fisher(d, a), 1e-10);
  }
}

TEST(WeakValue, Examples) {
  const HermitianOperator h(0.5 * sz());
  const PureState plus = test::plus();
  for (double a : {1.0, 1.5, 2.0, 3.0}) {
    EXPECT_NEAR(weak_value_fisher(plus, h, pure_two_projector_povm(plus, h), a), 1.0, 1e-12);
  }
  EXPECT_NEAR(weak_value_fisher(plus, h, computational_basis_povm(2), 2.0), 0.0, 1e-14);
  const ParametricDist d = induced_parametric(plus_sz(), 0.0, computational_basis_povm(2));
  EXPECT_NEAR(weak_value_fisher(plus, h, computational_basis_povm(2), 2.0), gen_fisher(d, 2.0), 1e-10);
  EXPECT_THROW(weak_value_fisher(plus, h, POVM({HermitianOperator(identity(2))}), 2.0), invalid_input);
}

TEST(WeakValue, MatchesInducedDistributionOnRandomBases) {
  for (std::uint64_t i = 0; i < 50; ++i) {
    KeyedRng rng(61, i);
    const Index n = 2 + static_cast<Index>(i % 4);
    const HermitianOperator h = random_hermitian(n, rng);
    const PureState psi = random_pure(n, rng);
    const POVM basis = random_projective_povm(n, rng);
    const ParametricDist d = induced_parametric(ParametricFamily::unitary(h, DensityMatrix(psi)), 0.0, basis);
    for (double a : {1.0, 1.5, 2.0, 3.0}) {
      EXPECT_NEAR(weak_value_fisher(psi, h, basis, a), gen_fisher(d, a), 1e-10 * (1 + gen_fisher(d, a)));
    }
    // eigenbasis of H: real weak values
    EXPECT_NEAR(weak_value_fisher(psi, h, eigenprojector_povm(h, true), 2.0), 0.0, 1e-10);
  }
}

TEST(FamilyKinds, TraceRules) {
  for (std::uint64_t i = 0; i < 20; ++i) {
    KeyedRng rng(62, i);
    const Index n = 2 + static_cast<Index>(i % 3);
    const ParametricFamily lind = ParametricFamily::lindblad(random_lindblad(n, rng), random_density(n, rng));
    EXPECT_NEAR(lind.derivative_at(0.3).matrix().trace().real(), 0.0, 1e-9);
    EXPECT_NEAR(lind.state_at(0.3).matrix().trace().real(), 1.0, 1e-9);
    const ParametricFamily uni = random_unitary_family(n, rng);
    EXPECT_NEAR(uni.derivative_at(-1.1).matrix().trace().real(), 0.0, 1e-12);
    const HermitianOperator g = random_hermitian(n, rng);
    const ParametricFamily nh = ParametricFamily::non_hermitian(random_hermitian(n, rng), g, random_density(n, rng));
    const ComplexMatrix r = nh.state_at(0.5).matrix();
    EXPECT_NEAR(nh.derivative_at(0.5).matrix().trace().real(), -2.0 * (r * g.matrix()).trace().real(), 1e-9);
  }
}

TEST(FamilyKinds, LindbladDerivativeMatchesFiniteDifference) {
  KeyedRng rng(63, 0);
  const ParametricFamily lind = ParametricFamily::lindblad(random_lindblad(3, rng), random_density(3, rng));
  const double h = 1e-5;
  const ComplexMatrix fd = (lind.state_at(0.4 + h).matrix() - lind.state_at(0.4 - h).matrix()) / (2 * h);
  EXPECT_LE(max_abs(fd - lind.derivative_at(0.4).matrix()), 1e-8);
}

TEST(FamilyKinds, TableDerivativeAndInterpolation) {
  KeyedRng rng(64, 0);
  const ParametricFamily uni = random_unitary_family(3, rng);
  std::vector<TablePoint> pts;
  const double step = 1e-2;
  for (int k = 0; k <= 10; ++k) pts.push_back({k * step, uni.state_at(k * step)});
  const ParametricFamily tab = ParametricFamily::table(pts);
  // the k-th derivative of rho is bounded by (2||H||)^k
  const double w = 2.0 * norm_inf(uni.hamiltonian());
  for (int k : {0, 1, 9, 10}) {
    EXPECT_LE(max_abs(tab.derivative_at(k * step).matrix() - uni.derivative_at(k * step).matrix()),
              step * step * std::pow(w, 3)) << k;
  }
  EXPECT_LE(max_abs(tab.derivative_at(0.05).matrix() - uni.derivative_at(0.05).matrix()),
            std::pow(step, 4) * std::pow(w, 5) / 30.0);
  EXPECT_LE(max_abs(tab.state_at(0.055).matrix() - uni.state_at(0.055).matrix()), step * step * w * w / 8.0);
  EXPECT_THROW(tab.state_at(0.2), invalid_parameter);
  EXPECT_THROW(ParametricFamily::table({pts[0], pts[1]}), invalid_input);
  EXPECT_THROW(ParametricFamily::table({pts[0], pts[1], pts[3]}), invalid_input);
}

TEST(FamilyKinds, NonFiniteThetaRejected) {
  EXPECT_THROW(plus_sz().state_at(std::nan("")), invalid_parameter);
  EXPECT_THROW(plus_sz().derivative_at(infinity), invalid_parameter);
}

// ---------------------------------------------------------------------------
// properties

TEST(QuantumProperties, TraceSpeedBelowRootQfi) {
  for (std::uint64_t i = 0; i < 200; ++i) {
    KeyedRng rng(65, i);
    const Index n = 2 + static_cast<Index>(i % 4);
    const ParametricFamily fam = i % 2 ? random_unitary_family(n, rng)
                                       : ParametricFamily::lindblad(random_lindblad(n, rng), random_density(n, rng));
    const double f1 = trace_speed(fam, 0.1);
    const double f2 = qfi(fam, 0.1);
    EXPECT_LT(f1, std::sqrt(f2) * (1 - 1e-9));
  }
}

TEST(QuantumProperties, SchattenChain) {
  const std::vector<double> alphas{1.0, 1.25, 1.5, 2.0, 3.0, 6.0, infinity};
  for (std::uint64_t i = 0; i < 200; ++i) {
    KeyedRng rng(66, i);
    const ParametricFamily fam = random_unitary_family(2 + static_cast<Index>(i % 4), rng);
    EXPECT_NEAR(trace_speed(fam, 0.0), schatten_speed(fam, 0.0, 1.0).value, 1e-13);
    for (std::size_t k = 1; k < alphas.size(); ++k) {
      EXPECT_GE(schatten_speed(fam, 0.0, alphas[k - 1]).value + 1e-12, schatten_speed(fam, 0.0, alphas[k]).value);
    }
  }
}

TEST(QuantumProperties, FuchsVanDeGraaf) {
  for (std::uint64_t i = 0; i < 200; ++i) {
    KeyedRng rng(67, i);
    const Index n = 2 + static_cast<Index>(i % 4);
    const DensityMatrix a = random_density(n, rng);
    const DensityMatrix b = random_density(n, rng);
    const double f = fidelity(a, b);
    EXPECT_LE(trace_distance(a, b), std::sqrt(1 - f * f) + 1e-9);
    EXPECT_LE(1 - f, trace_distance(a, b) + 1e-9);
    EXPECT_LE(std::pow(bures_distance(a, b), 2), trace_distance(a, b) + 1e-9);
    const PureState p = random_pure(n, rng);
    const PureState q = random_pure(n, rng);
    const double ov = pure_overlap(p, q);
    EXPECT_NEAR(trace_distance(DensityMatrix(p), DensityMatrix(q)), std::sqrt(1 - ov * ov), 1e-9);
  }
}

TEST(QuantumProperties, TraceSpeedConvexAndSubadditive) {
  for (std::uint64_t i = 0; i < 100; ++i) {
    KeyedRng rng(68, i);
    const Index n = 2 + static_cast<Index>(i % 2);
    const HermitianOperator h = random_hermitian(n, rng);
    const DensityMatrix a = random_density(n, rng);
    const DensityMatrix b = random_density(n, rng);
    const double lam = rng.uniform();
    const DensityMatrix mix(lam * a.matrix() + (1 - lam) * b.matrix());
    const double fa = trace_speed(ParametricFamily::unitary(h, a), 0.0);
    const double fb = trace_speed(ParametricFamily::unitary(h, b), 0.0);
    EXPECT_LE(trace_speed(ParametricFamily::unitary(h, mix), 0.0), lam * fa + (1 - lam) * fb + 1e-12);
    // product state under H (x) 1 + 1 (x) H2
    const HermitianOperator h2 = random_hermitian(n, rng);
    const HermitianOperator joint(kron(h.matrix(), identity(n)) + kron(identity(n), h2.matrix()));
    const DensityMatrix prod(kron(a.matrix(), b.matrix()));
    const double fb2 = trace_speed(ParametricFamily::unitary(h2, b), 0.0);
    EXPECT_LE(trace_speed(ParametricFamily::unitary(joint, prod), 0.0), fa + fb2 + 1e-10);
  }
}

TEST(QuantumProperties, BhatiaDavisForUnitaryFamilies) {
  for (std::uint64_t i = 0; i < 200; ++i) {
    KeyedRng rng(69, i);
    const Index n = 2 + static_cast<Index>(i % 4);
    const HermitianOperator h = random_hermitian(n, rng);
    const DensityMatrix rho = random_density(n, rng, 1 + i % 2);
    EXPECT_LE(qfi(ParametricFamily::unitary(h, rho), 0.0), bhatia_davis_bound(h, rho) * (1 + 1e-10) + 1e-12);
  }
}

TEST(QuantumProperties, HilbertSchmidtCrossCheck) {
  for (std::uint64_t i = 0; i < 50; ++i) {
    KeyedRng rng(70, i);
    const Index n = 2 + static_cast<Index>(i % 3);
    const HermitianOperator h = random_hermitian(n, rng);
    const DensityMatrix rho = random_density(n, rng);
    const ParametricFamily fam = ParametricFamily::unitary(h, rho);
    const double s2 = unitary_hilbert_schmidt_speed(h, rho);
    const double f2 = qfi(fam, 0.0);
    for (double t : {1e-2, 1e-3}) {
      const double d2 = schatten_distance(fam.density_at(t), rho, 2.0);
      EXPECT_LE(4 * std::pow(d2 / t, 2), f2 * (1 + 1e-9));
    }
    const double t = 1e-5;
    EXPECT_NEAR(4 * std::pow(schatten_distance(fam.density_at(t), rho, 2.0) / t, 2), 4 * s2 * s2, 1e-6 * (1 + s2 * s2));
  }
}

TEST(QuantumProperties, SpeedIsDistanceDerivative) {
  for (std::uint64_t i = 0; i < 40; ++i) {
    KeyedRng rng(71, i);
    const Index n = 2 + static_cast<Index>(i % 3);
    const ParametricFamily fam = random_unitary_family(n, rng);
    const DensityMatrix rho = fam.density_at(0.0);
    // Richardson-extrapolated difference quotient
    auto q = [&](auto dist, double h) { return 2 * dist(fam.density_at(h / 2), rho) / (h / 2) - dist(fam.density_at(h), rho) / h; };
    const double s2 = std::sqrt(qfi(fam, 0.0) / 8.0);
    const double s1 = trace_speed(fam, 0.0) / 2.0;
    EXPECT_NEAR(q([](const auto& a, const auto& b) { return bures_distance(a, b); }, 1e-3), s2, 1e-4 * (1 + s2));
    EXPECT_NEAR(q([](const auto& a, const auto& b) { return trace_distance(a, b); }, 1e-4), s1, 1e-5 * (1 + s1));
    for (double a : {1.5, 2.0, 3.0}) {
      const double sa = schatten_speed(fam, 0.0, a).speed;
      EXPECT_NEAR(q([a](const auto& x, const auto& y) { return schatten_distance(x, y, a); }, 1e-4), sa, 1e-5 * (1 + sa));
    }
  }
}

#include "test_support.hpp"

using namespace dqsim;
using namespace dqsim::testing;

TEST(GateUnitary, Conventions) {
  EXPECT_LT(max_abs(gate_unitary(Gate::u3(0, kPi, 0, kPi)) - pauli::X()), 1e-15);
  EXPECT_LT(max_abs(gate_unitary(Gate::u3(0, 0, 0, 0)) - pauli::I()), 1e-15);
  EXPECT_LT(max_abs(gate_unitary(Gate::u1(0, kPi)) - pauli::Z()), 1e-15);
  EXPECT_LT(max_abs(gate_unitary(Gate::ry(0, 0.3)) - gate_unitary(Gate::u3(0, 0.3, 0, 0))), 1e-15);
}

TEST(GateUnitary, U3MatrixEntries) {
  const double t = 0.7, p = -1.1, l = 2.3;
  const CMatrix u = u3_matrix(t, p, l);
  EXPECT_LT(std::abs(u(0, 0) - std::cos(t / 2)), 1e-15);
  EXPECT_LT(std::abs(u(0, 1) + std::exp(kI * l) * std::sin(t / 2)), 1e-15);
  EXPECT_LT(std::abs(u(1, 0) - std::exp(kI * p) * std::sin(t / 2)), 1e-15);
  EXPECT_LT(std::abs(u(1, 1) - std::exp(kI * (p + l)) * std::cos(t / 2)), 1e-15);
}

TEST(Gate, RejectsInvalid) {
  EXPECT_THROW(Gate::cx(1, 1), std::invalid_argument);
  EXPECT_THROW(Gate::u1(0, std::nan("")), std::invalid_argument);
  Circuit c(2);
  EXPECT_THROW(c.add(Gate::cx(0, 2)), std::out_of_range);
}

TEST(ApplyCircuit, EmptyCircuitIsIdentity) {
  const auto psi = random_state(3);
  EXPECT_LT((apply_circuit(psi, Circuit(3)).amplitudes() - psi.amplitudes()).norm(), 1e-15);
}

TEST(ApplyCircuit, RabiPreparationAngle) {
  Circuit c(1);
  c.add(Gate::ry(0, 2 * kPi / 3));
  EXPECT_NEAR(apply_circuit(QuantumState::zero(1), c).probabilities()[1], 0.75, 1e-15);
}

TEST(ApplyCircuit, InverseComposesToIdentity) {
  const Circuit c = random_circuit(4, 40);
  Circuit both = c;
  both.append(inverse(c));
  const auto d = static_cast<Eigen::Index>(dim_of(4));
  EXPECT_LT(max_abs(circuit_unitary(both) - CMatrix::Identity(d, d)), 1e-10);
}

TEST(ApplyCircuit, MatchesDenseOracle) {
  for (int trial = 0; trial < 5; ++trial) {
    const Circuit c = random_circuit(4, 30);
    EXPECT_LT(max_abs(circuit_unitary(c) - dense_circuit_unitary(c)), 1e-12);
  }
}

TEST(ApplyCircuit, DensityAgreesWithPureState) {
  const Circuit c = random_circuit(3, 25);
  const auto psi = random_state(3);
  const auto a = apply_circuit(DensityMatrix::from_pure(psi), c);
  const auto b = DensityMatrix::from_pure(apply_circuit(psi, c));
  EXPECT_LT(max_abs(a.elements() - b.elements()), 1e-9);
}

TEST(FoldCnots, StretchOneUnchanged) {
  const Circuit c = random_circuit(3, 20);
  EXPECT_EQ(fold_cnots(c, 1), c);
}

TEST(FoldCnots, TriplesEntanglingCount) {
  Circuit c(2);
  for (int i = 0; i < 126; ++i) c.add(Gate::cx(i % 2, 1 - i % 2)).add(Gate::u1(0, 0.1 * i));
  const auto f = count_gates(fold_cnots(c, 3));
  EXPECT_EQ(f.two_qubit, 378);
  EXPECT_EQ(f.single_qubit, 126);
}

TEST(FoldCnots, PreservesNoiselessAction) {
  for (int k : {3, 5}) {
    const Circuit c = random_circuit(4, 30);
    const auto psi = random_state(4);
    EXPECT_LT((apply_circuit(psi, fold_cnots(c, k)).amplitudes() - apply_circuit(psi, c).amplitudes()).norm(), 1e-10);
  }
}

TEST(FoldCnots, RejectsEvenOrNonPositive) {
  const Circuit c(2);
  EXPECT_THROW(fold_cnots(c, 2), std::invalid_argument);
  EXPECT_THROW(fold_cnots(c, 0), std::invalid_argument);
  EXPECT_THROW(fold_cnots(c, -1), std::invalid_argument);
}

TEST(CountGates, Empty) { EXPECT_EQ(count_gates(Circuit(2)), (GateCounts{0, 0})); }

TEST(DecomposeU3, RoundTripsRandomUnitaries) {
  for (int trial = 0; trial < 50; ++trial) {
    const CMatrix u = expm_hermitian(random_hermitian(2), 1.0 + trial * 0.1);
    const auto a = decompose_u3(u);
    EXPECT_LT(phase_insensitive_distance(u3_matrix(a.theta, a.phi, a.lambda), u), 1e-9);
  }
}

TEST(DecomposeU3, DegenerateAngles) {
  for (const CMatrix& u : {CMatrix(pauli::X()), CMatrix(pauli::Z()), CMatrix(pauli::I()), CMatrix(pauli::Y())}) {
    const auto a = decompose_u3(u);
    EXPECT_LT(phase_insensitive_distance(u3_matrix(a.theta, a.phi, a.lambda), u), 1e-12);
  }
}

TEST(FuseSingleQubit, PreservesUnitaryUpToPhase) {
  for (int trial = 0; trial < 5; ++trial) {
    const Circuit c = random_circuit(3, 40);
    const Circuit f = fuse_single_qubit_gates(c);
    EXPECT_LE(f.size(), c.size());
    EXPECT_EQ(count_gates(f).two_qubit, count_gates(c).two_qubit);
    EXPECT_LT(phase_insensitive_distance(circuit_unitary(f), circuit_unitary(c)), 1e-9);
  }
}

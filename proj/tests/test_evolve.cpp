#include "oracles.hpp"
#include "test_support.hpp"

#include <iostream>

using namespace dqsim;
using namespace dqsim::testing;

namespace {

QuantumState rabi_initial(const RabiParams& p) {
  Circuit c(1);
  c.add(Gate::ry(0, p.alpha));
  return apply_circuit(QuantumState::zero(1), c);
}

template <class Model>
double trotter_error(const Model& m, const QuantumState& psi0, double horizon, double dt, int order = 2) {
  const int n = static_cast<int>(std::lround(horizon / dt));
  const auto trot = apply_circuit(psi0, compile_evolution(m, TrotterPlan{order, dt, n}));
  return state_error(trot, exact_evolve(m, psi0, 0.0, horizon));
}

SpinLattice driven_dimer() {
  return SpinLattice::chain(2, 1.0, 0.0, {{0, PulseWaveform{Polarization::Circular, 2.0, 1.0, 0.7, 2.0}},
                                          {1, PulseWaveform{Polarization::Circular, 2.0, 1.0, 0.7, 2.0}}});
}

StaticModel static_dimer() {
  return StaticModel({2, {{0, 1, 1.0, 0.0}}, {{0, 0.9, 0.0, 0.4}, {1, -0.3, 0.5, 0.0}}});
}

}  // namespace

TEST(ExactEvolve, ZeroHamiltonian) {
  const StaticModel m({3, {}, {}});
  const auto psi = random_state(3);
  EXPECT_LT((exact_evolve(m, psi, 0.0, 5.0).amplitudes() - psi.amplitudes()).norm(), 1e-15);
}

TEST(ExactEvolve, ConstantHamiltonianMatchesExpm) {
  const StaticModel m({3, {{0, 1, 0.8, 0.3}, {1, 2, -0.4, 1.1}}, {{2, 0.3, -0.2, 0.7}}});
  const auto psi = random_state(3);
  for (std::int64_t sub : {1, 4}) {
    const auto out = exact_evolve(m, psi, 0.5, 2.0, ExactOptions{sub});
    const CVector ref = expm_hermitian(hamiltonian(m.terms(0.0)), 1.5) * psi.amplitudes();
    EXPECT_LT((out.amplitudes() - ref).norm(), 1e-12);
  }
}

TEST(ExactEvolve, RabiClosedForm) {
  RabiParams p;
  p.alpha = 0.0;  // spin up
  const auto out = exact_evolve(RabiModel(p), QuantumState::zero(1), 0.0, kPi);
  EXPECT_NEAR(out.probabilities()[1], rabi_closed_form(p, kPi), 1e-8);
}

TEST(ExactEvolve, DensityMatrixMatchesConjugation) {
  const auto lat = driven_dimer();
  const auto rho = random_density(2);
  const auto out = exact_evolve(lat, rho, 0.0, 3.0);
  // Compare with pure-state evolution of each eigenvector.
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.elements());
  CMatrix ref = CMatrix::Zero(4, 4);
  for (int k = 0; k < 4; ++k) {
    const auto v = exact_evolve(lat, QuantumState(2, es.eigenvectors().col(k)), 0.0, 3.0);
    ref += es.eigenvalues()(k) * v.amplitudes() * v.amplitudes().adjoint();
  }
  EXPECT_LT(max_abs(out.elements() - ref), 1e-9);
}

TEST(ExactEvolve, NonConvergenceIsReported) {
  ExactOptions opt;
  opt.tolerance = 1e-300;
  opt.max_substeps = 4;
  EXPECT_THROW(exact_evolve(driven_dimer(), QuantumState::zero(2), 0.0, 4.0, opt), ConvergenceError);
  EXPECT_THROW(exact_evolve(driven_dimer(), QuantumState::zero(2), 0.0, 4.0, ExactOptions{0}), std::invalid_argument);
}

TEST(BondGates, DecompositionsMatchExponential) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double jp = trial % 4 == 1 ? 0.0 : u(rng());
    const double jz = trial % 4 == 0 ? 0.0 : u(rng());
    const BondTerm b{0, 1, jp, jz};
    const double tau = u(rng());
    const Circuit c = detail::local_bond_circuit(b, tau);
    EXPECT_LT(phase_insensitive_distance(circuit_unitary(c), expm_hermitian(detail::local_bond_operator(b), tau)), 1e-10);
    const auto cx = count_gates(c).two_qubit;
    if (jz == 0.0) EXPECT_EQ(cx, 2);
    else if (jp == 0.0) EXPECT_EQ(cx, 2);
    else EXPECT_EQ(cx, 3);
  }
}

TEST(TrotterStep, CommutingSplitIsExact) {
  const StaticModel m({3, {{0, 1, 0.0, 0.8}, {1, 2, 0.0, -0.5}}, {{0, 0.0, 0.0, 0.3}, {2, 0.0, 0.0, 1.2}}});
  const auto psi = random_state(3);
  const auto a = apply_circuit(psi, compile_trotter_step(m, 0.0, 0.7));
  EXPECT_LT(state_error(a, exact_evolve(m, psi, 0.0, 0.7)), 1e-10);
}

TEST(TrotterStep, XXDimerUsesTwoCnots) {
  const auto c = compile_trotter_step(SpinLattice::chain(2, 1.0, 0.0), 0.0, 0.3);
  EXPECT_EQ(count_gates(c).two_qubit, 2);
  const auto psi = random_state(2);
  EXPECT_LT(state_error(apply_circuit(psi, c), exact_evolve(SpinLattice::chain(2, 1.0, 0.0), psi, 0.0, 0.3)), 1e-10);
}

TEST(TrotterStep, OrderOneLayout) {
  const auto c = compile_trotter_step(SpinLattice::chain(3, 1.0, 0.5), 0.0, 0.3, 1);
  EXPECT_EQ(count_gates(c).two_qubit, 6);
}

TEST(TrotterStep, RabiIsOneU3PerStep) {
  const auto c = compile_evolution(RabiModel(RabiParams{}), TrotterPlan{2, 0.05, 10});
  EXPECT_EQ(count_gates(c), (GateCounts{10, 0}));
}

TEST(TrotterPlan, Validation) {
  EXPECT_THROW((TrotterPlan{3, 0.1, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((TrotterPlan{2, 0.0, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((TrotterPlan{2, 0.1, -1}.validate()), std::invalid_argument);
}

TEST(Partition, CoversEveryTermOnce) {
  const auto terms = SpinLattice::ring(4, 1.0, 0.0, {{0, PulseWaveform{}}}).terms(0.0);
  const auto s = partition(terms);
  EXPECT_EQ(s.a_bonds.size() + s.b_bonds.size(), terms.bonds.size());
  EXPECT_EQ(s.fields.size(), terms.fields.size());
  // Ring: (0,1),(2,3) in A; (1,2),(3,0) in B.
  EXPECT_EQ(s.a_bonds[1].i, 2);
  EXPECT_EQ(s.b_bonds[1].i, 3);
}

TEST(EvolveTrotterized, ZeroStepsReturnsInitialState) {
  const auto psi = random_state(2);
  const auto rec = evolve_trotterized(driven_dimer(), psi, TrotterPlan{2, 0.1, 0});
  ASSERT_EQ(rec.states.size(), 1u);
  EXPECT_LT((rec.states[0].amplitudes() - psi.amplitudes()).norm(), 1e-15);
  EXPECT_EQ(rec.gate_counts[0], (GateCounts{0, 0}));
}

TEST(EvolveTrotterized, TimesStrictlyIncreasing) {
  const auto rec = evolve_trotterized(driven_dimer(), QuantumState::zero(2), TrotterPlan{2, 0.25, 6});
  for (std::size_t k = 1; k < rec.times.size(); ++k) EXPECT_GT(rec.times[k], rec.times[k - 1]);
}

TEST(EvolveTrotterized, MergingHalvesBoundaryLayers) {
  const auto lat = SpinLattice::chain(4, 1.0, 0.0);
  TrotterPlan plan{2, 0.2, 5};
  const auto merged = count_gates(compile_evolution(lat, plan)).two_qubit;
  plan.merge_half_steps = false;
  const auto naive = count_gates(compile_evolution(lat, plan)).two_qubit;
  // A = {(0,1),(2,3)}, B = {(1,2)}: naive 5*(2+1+2) bonds, merged 5*(1+2)+1+... bonds.
  EXPECT_EQ(naive, 2 * 5 * 5);
  EXPECT_EQ(merged, 2 * (5 * 3 + 2));
  const auto psi = random_state(4);
  plan.merge_half_steps = true;
  const auto a = apply_circuit(psi, compile_evolution(lat, plan));
  plan.merge_half_steps = false;
  EXPECT_LT(state_error(a, apply_circuit(psi, compile_evolution(lat, plan))), 1e-10);
}

TEST(EvolveTrotterized, RabiDiscretization) {
  const double e1 = max_rabi_error(0.05, 200);
  const double e2 = max_rabi_error(0.025, 400);
  EXPECT_LT(e1, 1e-2);
  EXPECT_GE(e1 / e2, 3.4);
  EXPECT_LE(e1 / e2, 4.6);
}

TEST(EvolveTrotterized, SecondOrderConvergence) {
  const auto m = static_dimer();
  const auto psi0 = QuantumState::zero(2);
  const double r = trotter_error(m, psi0, 2.0, 0.2) / trotter_error(m, psi0, 2.0, 0.1);
  EXPECT_GE(r, 3.4);
  EXPECT_LE(r, 4.6);
}

TEST(EvolveTrotterized, FirstOrderConvergence) {
  const auto m = static_dimer();
  const auto psi0 = QuantumState::zero(2);
  const double r = trotter_error(m, psi0, 2.0, 0.1, 1) / trotter_error(m, psi0, 2.0, 0.05, 1);
  EXPECT_GE(r, 1.7);
  EXPECT_LE(r, 2.3);
}

TEST(EvolveTrotterized, ErrorNonIncreasingOnEveryModel) {
  const std::vector<double> dts{0.4, 0.2, 0.1, 0.05};
  auto check = [&](const auto& model, const QuantumState& psi0, const char* name) {
    double prev = std::numeric_limits<double>::infinity();
    for (double dt : dts) {
      const double e = trotter_error(model, psi0, 1.6, dt);
      EXPECT_LE(e, prev + 1e-12) << name << " dt=" << dt;
      prev = e;
    }
  };
  RabiParams p;
  check(RabiModel(p), rabi_initial(p), "rabi");
  check(driven_dimer(), QuantumState::zero(2), "dimer");
  check(SpinLattice::ring(4, 1.0, 0.0, {{0, PulseWaveform{}}, {1, PulseWaveform{}}, {2, PulseWaveform{}}, {3, PulseWaveform{}}}),
        QuantumState::basis(4, 0b1010), "plaquette");
  check(SpinLattice::chain(8, 1.0, 0.0, {{0, PulseWaveform{Polarization::Linear, kPi / 2, 1.0, 1.0, 1.5}}}),
        QuantumState::basis(8, 0b00000001), "chain");
  check(QuenchModel({1.0, 2.0, 0.0}), ground_state(quench_hamiltonian({1.0, 2.0, 0.0}, -1.0)).state, "quench");
}

TEST(EvolveTrotterized, StepCircuitsPreserveNorm) {
  const auto lat = SpinLattice::ring(4, 1.0, 0.7, {{1, PulseWaveform{}}});
  for (int k = 0; k < 5; ++k) {
    const auto out = apply_circuit(random_state(4), compile_trotter_step(lat, 0.3 * k, 0.3));
    EXPECT_LT(std::abs(out.norm() - 1.0), 1e-9);
  }
}

TEST(EvolveTrotterized, QuenchConservesParticleNumber) {
  const QuenchModel m({1.0, 2.0, 0.0});
  const auto gs = ground_state(quench_hamiltonian({1.0, 2.0, 0.0}, -1.0)).state;
  const auto rec = evolve_trotterized(m, gs, TrotterPlan{2, 0.2, 5});
  for (const auto& s : rec.states) EXPECT_NEAR(particle_number(s.probabilities()), 2.0, 1e-9);
}

TEST(EvolveTrotterized, ChainGateCountComparison) {
  const auto lat = SpinLattice::chain(8, 1.0, 0.0, {{0, PulseWaveform{Polarization::Linear, kPi / 2, 1.0, 1.0, 1.5}},
                                                    {7, PulseWaveform{Polarization::Linear, kPi / 2, 1.0, 1.0, 1.5}}});
  const auto g = count_gates(compile_evolution(lat, TrotterPlan{2, 7.0 / 8.0, 8}));
  std::cout << "8-site chain, 8 merged order-2 steps: " << g.single_qubit << " single-qubit, " << g.two_qubit
            << " entangling gates (reference run: 260 / 126)\n";
  RecordProperty("entangling_gates", static_cast<int>(g.two_qubit));
  RecordProperty("single_qubit_gates", static_cast<int>(g.single_qubit));
  EXPECT_EQ(g.two_qubit, 120);
  EXPECT_EQ(count_gates(fold_cnots(compile_evolution(lat, TrotterPlan{2, 7.0 / 8.0, 8}), 3)).two_qubit, 360);
}

#include "test_support.hpp"

using namespace dqsim;
using namespace dqsim::testing;

namespace {

DeviceCalibration bundled(const char* name) {
  return load_calibration(fs::path(DQSIM_DATA_DIR) / "calibrations" / (std::string(name) + ".json"));
}

json minimal_calibration() {
  return json::parse(R"({"device": "test", "qubits": [
      {"qubit": 0, "t1_us": 50, "t2_us": 60, "u3_error": 0.001, "readout_error": 0.02},
      {"qubit": 1, "t1_us": 80, "t2_us": 40, "u3_error": 0.002, "readout_error": 0.03}],
    "cnots": [{"control": 0, "target": 1, "cnot_error": 0.01}]})");
}

/// Two-qubit depolarizing channel as an explicit 16-term Kraus sum.
CMatrix kraus_depolarize(const CMatrix& rho, const std::vector<int>& t, int n, double p) {
  CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
  const char* labels = "IXYZ";
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const double w = (a == 0 && b == 0) ? 1.0 - p + p / 16.0 : p / 16.0;
      const CMatrix k = embed_dense(kron(pauli::by_label(labels[b]), pauli::by_label(labels[a])), t, n);
      out += w * k * rho * k.adjoint();
    }
  return out;
}

std::vector<double> basis_probs(std::size_t d, std::size_t i) {
  std::vector<double> p(d, 0.0);
  p[i] = 1.0;
  return p;
}

}  // namespace

TEST(Calibration, RabiDeviceQubit14) {
  const auto q = bundled("toronto_rabi").qubit(14);
  EXPECT_DOUBLE_EQ(q.t1_us, 135);
  EXPECT_DOUBLE_EQ(q.t2_us, 221);
  EXPECT_DOUBLE_EQ(q.u3_error, 3.8e-4);
  EXPECT_DOUBLE_EQ(q.readout_error, 1.4e-2);
}

TEST(Calibration, DimerDevicePair) {
  const auto cal = bundled("montreal_dimer");
  EXPECT_DOUBLE_EQ(*cal.cnot_error(19, 20), 6.7e-3);
  EXPECT_DOUBLE_EQ(*cal.cnot_error(20, 19), 6.7e-3);
  EXPECT_DOUBLE_EQ(cal.qubit(19).readout_error, 1.6e-2);
  EXPECT_DOUBLE_EQ(cal.qubit(20).readout_error, 3.7e-2);
}

TEST(Calibration, AllBundledFilesLoadAndRoundTrip) {
  for (const char* name : {"toronto_rabi", "montreal_dimer", "toronto_plaquette", "montreal_chain", "bogota_quench"}) {
    const auto cal = bundled(name);
    EXPECT_FALSE(cal.qubits.empty()) << name;
    const auto again = parse_calibration(to_json(cal));
    EXPECT_EQ(to_json(again), to_json(cal)) << name;
  }
}

TEST(Calibration, RejectsOutOfRangeRateWithPath) {
  auto j = minimal_calibration();
  j["qubits"][1]["readout_error"] = 1.5;
  try {
    parse_calibration(j);
    FAIL();
  } catch (const CalibrationError& e) {
    EXPECT_NE(std::string(e.what()).find("$.qubits[1].readout_error"), std::string::npos);
  }
}

TEST(Calibration, SchemaViolations) {
  auto j = minimal_calibration();
  j["qubits"][0].erase("t1_us");
  EXPECT_THROW(parse_calibration(j), CalibrationError);
  j = minimal_calibration();
  j["qubits"][0]["t2_us"] = -1;
  EXPECT_THROW(parse_calibration(j), CalibrationError);
  j = minimal_calibration();
  j["cnots"][0]["target"] = 0;
  EXPECT_THROW(parse_calibration(j), CalibrationError);
  j = minimal_calibration();
  j["qubits"][1]["qubit"] = 0;
  EXPECT_THROW(parse_calibration(j), CalibrationError);
  EXPECT_THROW(load_calibration("/nonexistent/cal.json"), CalibrationError);
}

TEST(Channels, AreCompletelyPositiveTracePreserving) {
  // QuantumChannel's constructor checks completeness to 1e-10.
  for (double p : {0.0, 0.01, 0.5, 1.0}) {
    EXPECT_NO_THROW(depolarizing_channel(p, 1));
    EXPECT_NO_THROW(depolarizing_channel(p, 2));
    EXPECT_NO_THROW(amplitude_damping_channel(p));
    EXPECT_NO_THROW(dephasing_channel(p / 2));
  }
  EXPECT_THROW(dephasing_channel(0.6), std::invalid_argument);
}

TEST(Channels, FastKernelsMatchKrausForm) {
  const auto rho = random_density(3);
  const std::vector<int> t{2, 0};
  CMatrix m = rho.elements();
  detail::depolarize_inplace(m, t, 0.3);
  EXPECT_LT(max_abs(m - apply_channel(rho, depolarizing_channel(0.3, 2), std::span<const int>(t)).elements()), 1e-12);
  m = rho.elements();
  detail::amplitude_damp_inplace(m, 1, 0.2);
  EXPECT_LT(max_abs(m - apply_channel(rho, amplitude_damping_channel(0.2), {1}).elements()), 1e-12);
  m = rho.elements();
  detail::dephase_inplace(m, 0, 0.15);
  EXPECT_LT(max_abs(m - apply_channel(rho, dephasing_channel(0.15), {0}).elements()), 1e-12);
}

TEST(NoisyCircuit, ZeroNoiseIsNoiseless) {
  const Circuit c = random_circuit(3, 30);
  const auto rho = random_density(3);
  EXPECT_LT(max_abs(apply_noisy_circuit(rho, c, NoiseModel::ideal(3)).elements() - apply_circuit(rho, c).elements()), 1e-12);
}

TEST(NoisyCircuit, SingleCnotMatchesKrausOracle) {
  const double p = 0.037;
  Circuit c(2);
  c.add(Gate::cx(0, 1));
  const auto out = apply_noisy_circuit(DensityMatrix::basis(2, 0), c, NoiseModel::cx_depolarizing(2, p));
  const CMatrix ref = kraus_depolarize(DensityMatrix::basis(2, 0).elements(), {0, 1}, 2, p);
  EXPECT_LT(max_abs(out.elements() - ref), 1e-12);
  EXPECT_NEAR(fidelity(out, QuantumState::zero(2)), 1.0 - p + p / 4.0, 1e-12);
}

TEST(NoisyCircuit, ComposesChannelsInDocumentedOrder) {
  const auto cal = parse_calibration(minimal_calibration());
  const std::vector<int> layout{0, 1};
  const auto nm = NoiseModel::from_calibration(cal, layout);
  Circuit c(2);
  c.add(Gate::u3(0, 0.4, 0.1, -0.2)).add(Gate::cx(1, 0));
  const auto rho = random_density(2);
  // Oracle: explicit Kraus channels in the order unitary, depolarizing, damping, dephasing.
  CMatrix m = rho.elements();
  auto decohere = [&](int q, double dur) {
    const auto& qc = nm.qubit(q);
    const double g = 1.0 - std::exp(-dur * 1e-3 / qc.t1_us);
    const double rate = 1.0 / qc.t2_us - 0.5 / qc.t1_us;
    const double pd = rate > 0 ? 0.5 * (1.0 - std::exp(-dur * 1e-3 * rate)) : 0.0;
    m = apply_channel(DensityMatrix::from_cptp_output(2, m), amplitude_damping_channel(g), {q}).elements();
    m = apply_channel(DensityMatrix::from_cptp_output(2, m), dephasing_channel(pd), {q}).elements();
  };
  const CMatrix u0 = embed_dense(gate_unitary(c.gates()[0]), {0}, 2);
  m = u0 * m * u0.adjoint();
  m = apply_channel(DensityMatrix::from_cptp_output(2, m), depolarizing_channel(0.001, 1), {0}).elements();
  decohere(0, 35.0);
  const CMatrix u1 = embed_dense(gate_unitary(c.gates()[1]), {1, 0}, 2);
  m = u1 * m * u1.adjoint();
  m = kraus_depolarize(m, {1, 0}, 2, 0.01);
  decohere(1, 300.0);
  decohere(0, 300.0);
  EXPECT_LT(max_abs(apply_noisy_circuit(rho, c, nm).elements() - m), 1e-12);
}

TEST(NoisyCircuit, DephasingClampedWhenT2ExceedsTwiceT1) {
  EXPECT_EQ(NoiseModel::dephasing_probability(300, 50, 120), 0.0);
  EXPECT_GT(NoiseModel::dephasing_probability(300, 50, 60), 0.0);
  EXPECT_NEAR(NoiseModel::damping_probability(300, 100), 1.0 - std::exp(-0.003), 1e-15);
}

TEST(NoisyCircuit, MissingPairUsesDeviceMean) {
  const auto cal = bundled("toronto_plaquette");
  const std::vector<int> layout{8, 11, 14, 16};
  const auto nm = NoiseModel::from_calibration(cal, layout);
  EXPECT_FALSE(cal.cnot_error(16, 8).has_value());
  EXPECT_DOUBLE_EQ(nm.cx_error(3, 0), cal.mean_cnot_error());
  EXPECT_DOUBLE_EQ(nm.cx_error(0, 1), *cal.cnot_error(8, 11));
}

TEST(NoisyCircuit, LinearInState) {
  const auto cal = parse_calibration(minimal_calibration());
  const std::vector<int> layout{0, 1};
  const auto nm = NoiseModel::from_calibration(cal, layout);
  const Circuit c = random_circuit(2, 20);
  const auto a = random_density(2), b = random_density(2);
  const DensityMatrix mix(2, 0.3 * a.elements() + 0.7 * b.elements());
  const CMatrix lhs = apply_noisy_circuit(mix, c, nm).elements();
  const CMatrix rhs = 0.3 * apply_noisy_circuit(a, c, nm).elements() + 0.7 * apply_noisy_circuit(b, c, nm).elements();
  EXPECT_LT(max_abs(lhs - rhs), 1e-10);
  EXPECT_NEAR(apply_noisy_circuit(mix, c, nm).elements().trace().real(), 1.0, 1e-10);
}

TEST(NoisyCircuit, PurityNeverIncreasesUnderUnitalChannels) {
  auto rho = DensityMatrix::from_pure(random_state(3));
  double prev = purity(rho);
  for (double p : {0.05, 0.2, 0.5}) {
    rho = apply_channel(rho, depolarizing_channel(p, 2), {0, 2});
    EXPECT_LE(purity(rho), prev + 1e-12);
    prev = purity(rho);
    rho = apply_channel(rho, dephasing_channel(p), {1});
    EXPECT_LE(purity(rho), prev + 1e-12);
    prev = purity(rho);
  }
}

TEST(NoisyCircuit, FidelityDecaysAlongCircuitPrefixes) {
  const SpinLattice ring = SpinLattice::ring(4, 1.0, 0.0);
  const Circuit full = compile_evolution(ring, TrotterPlan{2, 0.25, 8});
  const auto nm = NoiseModel::cx_depolarizing(4, 6.8e-3);
  DensityMatrix rho = DensityMatrix::basis(4, 0b1010);
  QuantumState psi = QuantumState::basis(4, 0b1010);
  double prev = 1.0;
  for (const auto& g : full.gates()) {
    Circuit one(4);
    one.add(g);
    rho = apply_noisy_circuit(rho, one, nm);
    psi = apply_circuit(psi, one);
    const double f = fidelity(rho, psi);
    EXPECT_LE(f, prev + 1e-12);
    prev = f;
  }
  EXPECT_LT(prev, 0.99);
}

TEST(Confusion, Construction) {
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_LT((build_confusion(zero).matrix() - RMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
  const std::vector<double> one{0.1};
  const auto l1 = build_confusion(one);
  EXPECT_DOUBLE_EQ(l1(0, 0), 0.9);
  EXPECT_DOUBLE_EQ(l1(1, 0), 0.1);
  const std::vector<double> two{0.1, 0.1};
  const auto l2 = build_confusion(two);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(l2(static_cast<std::size_t>(i), static_cast<std::size_t>(i)), 0.81, 1e-15);
  EXPECT_NEAR(l2(3, 0), 0.01, 1e-15);
  EXPECT_NEAR(l2(0, 3), 0.01, 1e-15);
}

TEST(Confusion, AsymmetricIndexConvention) {
  // Qubit 0 flips with 0.1, qubit 1 with 0.2: preparing |01> (index 1) and
  // measuring |11> (index 3) needs only the qubit-1 flip.
  const std::vector<double> eps{0.1, 0.2};
  const auto l = build_confusion(eps);
  EXPECT_NEAR(l(3, 1), 0.9 * 0.2, 1e-15);
  EXPECT_NEAR(l(0, 1), 0.1 * 0.8, 1e-15);
}

TEST(Confusion, Validation) {
  RMatrix bad(2, 2);
  bad << 0.9, 0.2, 0.2, 0.8;
  EXPECT_THROW(ConfusionMatrix(1, bad), std::invalid_argument);
  bad << 1.1, 0.0, -0.1, 1.0;
  EXPECT_THROW(ConfusionMatrix(1, bad), std::invalid_argument);
}

TEST(CalibrationExperiment, ZeroNoiseIsIdentity) {
  const auto l = calibration_experiment(NoiseModel::ideal(2), 2, 1000, 7);
  EXPECT_LT((l.matrix() - RMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 3.0 / std::sqrt(1000.0));
  for (Eigen::Index c = 0; c < 4; ++c) EXPECT_NEAR(l.matrix().col(c).sum(), 1.0, 1e-15);
}

TEST(CalibrationExperiment, ConvergesToAnalyticMatrix) {
  std::vector<QubitNoise> qs(2);
  for (auto& q : qs) q.readout_error = 0.05;
  const NoiseModel nm(qs, {}, 0.0);
  const std::int64_t shots = 1000000;
  const auto emp = calibration_experiment(nm, 2, shots, 11);
  const auto exact = build_confusion(nm);
  for (Eigen::Index r = 0; r < 4; ++r)
    for (Eigen::Index c = 0; c < 4; ++c) {
      const double p = exact.matrix()(r, c);
      const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(shots));
      EXPECT_LE(std::abs(emp.matrix()(r, c) - p), 3 * sigma + 1e-12);
    }
}

TEST(CalibrationExperiment, Deterministic) {
  const auto nm = NoiseModel::from_calibration(parse_calibration(minimal_calibration()), std::vector<int>{0, 1});
  EXPECT_EQ(calibration_experiment(nm, 2, 2000, 5).matrix(), calibration_experiment(nm, 2, 2000, 5).matrix());
  EXPECT_THROW(calibration_experiment(NoiseModel::ideal(9), 9, 10, 1), std::invalid_argument);
}

TEST(Sampling, GroundStateAllZeros) {
  const auto h = sample_counts(DensityMatrix::basis(3, 0), ConfusionMatrix::identity(3), 500, 1);
  EXPECT_EQ(h.count("000"), 500);
  EXPECT_EQ(h.shots(), 500);
}

TEST(Sampling, UniformWithinFourSigma) {
  const auto h = sample_counts(DensityMatrix::maximally_mixed(1), ConfusionMatrix::identity(1), 8192, 3);
  const double sigma = std::sqrt(8192 * 0.25);
  EXPECT_LE(std::abs(h.count("0") - 4096), 4 * sigma);
  EXPECT_EQ(h.count("0") + h.count("1"), 8192);
}

TEST(Sampling, SeededReproducibility) {
  const auto rho = random_density(3);
  const std::vector<double> eps{0.02, 0.05, 0.01};
  const auto l = build_confusion(eps);
  EXPECT_EQ(sample_counts(rho, l, 4096, 42), sample_counts(rho, l, 4096, 42));
  EXPECT_NE(sample_counts(rho, l, 4096, 42), sample_counts(rho, l, 4096, 43));
  EXPECT_THROW(sample_counts(rho, l, 0, 1), std::invalid_argument);
}

TEST(Sampling, BitstringOrderQubitZeroRightmost) {
  EXPECT_EQ(to_bitstring(1, 3), "001");
  EXPECT_EQ(from_bitstring("100"), 4u);
  EXPECT_THROW(from_bitstring("102"), std::invalid_argument);
  const auto h = sample_counts(DensityMatrix::basis(3, 1), ConfusionMatrix::identity(3), 10, 1);
  EXPECT_EQ(h.count("001"), 10);
}

TEST(Sampling, ReadoutFactorizesPerQubit) {
  // Tensored confusion sampling versus noiseless samples followed by
  // independent bit flips per qubit; compared with a chi-square test.
  const std::int64_t shots = 1000000;
  const std::vector<double> eps{0.03, 0.08};
  const auto rho = random_density(2);
  const auto direct = sample_counts(rho, build_confusion(eps), shots, 101).frequencies();

  std::mt19937_64 g(202);
  const auto probs = rho.probabilities();
  std::discrete_distribution<std::size_t> ideal(probs.begin(), probs.end());
  std::vector<std::int64_t> counts(4, 0);
  for (std::int64_t s = 0; s < shots; ++s) {
    std::size_t b = ideal(g);
    for (int q = 0; q < 2; ++q)
      if (std::bernoulli_distribution(eps[static_cast<std::size_t>(q)])(g)) b ^= std::size_t{1} << q;
    ++counts[b];
  }
  // Two-sample chi-square with 3 degrees of freedom; 16.27 is the 0.999 quantile.
  double chi2 = 0.0;
  for (std::size_t b = 0; b < 4; ++b) {
    const double x = direct[b] * shots, y = static_cast<double>(counts[b]);
    if (x + y > 0) chi2 += (x - y) * (x - y) / (x + y);
  }
  EXPECT_LT(chi2, 16.27);
}

TEST(Seeds, DeriveSeedSeparatesTasks) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(9, 4), derive_seed(9, 4));
}

TEST(Histogram, Validation) {
  EXPECT_THROW(CountsHistogram(2, {{"0", 1}}), std::invalid_argument);
  EXPECT_THROW(CountsHistogram(2, {{"01", -1}}), std::invalid_argument);
  const CountsHistogram h(2, {{"01", 3}, {"10", 1}});
  EXPECT_EQ(h.shots(), 4);
  EXPECT_DOUBLE_EQ(h.frequencies()[1], 0.75);
  (void)basis_probs;
}

#include "test_support.hpp"

using namespace dqsim;
using namespace dqsim::testing;

namespace {

ConfusionMatrix one_qubit(double a, double b, double c, double d) {
  RMatrix m(2, 2);
  m << a, b, c, d;
  return {1, m};
}

}  // namespace

TEST(Readout, IdentityLeavesDistributionUnchanged) {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  const auto out = mitigate_readout(p, ConfusionMatrix::identity(2));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(out[i], p[i], 1e-15);
}

TEST(Readout, OneQubitExample) {
  const std::vector<double> p{0.62, 0.38};
  const auto out = mitigate_readout(p, one_qubit(0.9, 0.2, 0.1, 0.8));
  EXPECT_NEAR(out[0], 0.6, 1e-12);
  EXPECT_NEAR(out[1], 0.4, 1e-12);
}

TEST(Readout, InvertsTensoredConfusion) {
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_real_distribution<double> u(0.0, 0.2);
    std::vector<double> eps{u(rng()), u(rng()), u(rng())};
    const auto l = build_confusion(eps);
    const auto p = random_density(3).probabilities();
    const auto out = mitigate_readout(l.apply(p), l);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(out[i], p[i], 1e-10);
  }
}

TEST(Readout, SingularMatrixNeedsPseudoinverse) {
  const auto l = one_qubit(0.5, 0.5, 0.5, 0.5);
  const std::vector<double> p{0.5, 0.5};
  EXPECT_THROW(mitigate_readout(p, l), std::domain_error);
  ReadoutOptions opt;
  opt.method = InversionMethod::Pseudoinverse;
  const auto out = mitigate_readout(p, l, opt);
  EXPECT_NEAR(out[0] + out[1], 1.0, 1e-12);
}

TEST(Readout, ClampRemovesNegativeQuasiProbabilities) {
  const auto l = one_qubit(0.9, 0.1, 0.1, 0.9);
  const std::vector<double> p{0.95, 0.05};
  const auto raw = mitigate_readout(p, l);
  EXPECT_LT(raw[1], 0.0);
  ReadoutOptions opt;
  opt.clamp = true;
  const auto c = mitigate_readout(p, l, opt);
  EXPECT_DOUBLE_EQ(c[0], 1.0);
  EXPECT_DOUBLE_EQ(c[1], 0.0);
}

TEST(Readout, HistogramAndDatasetOverloads) {
  const std::vector<double> eps{0.05};
  const auto l = build_confusion(eps);
  const CountsHistogram h(1, {{"0", 95}, {"1", 5}});
  EXPECT_NEAR(mitigate_readout(h, l)[0], 1.0, 1e-12);
  EXPECT_THROW(mitigate_readout(h, ConfusionMatrix::identity(2)), std::invalid_argument);

  const auto rho = random_density(2);
  const std::vector<double> eps2{0.03, 0.06};
  const auto l2 = build_confusion(eps2);
  CollectOptions opt;
  opt.readout = l2;
  const auto mitigated = mitigate_readout(collect(rho, settings(2), opt), l2);
  EXPECT_LT(max_abs(linear_inversion(mitigated).elements() - rho.elements()), 1e-10);
}

TEST(Zne, FlatDataExtrapolatesToSameValue) {
  EXPECT_NEAR(zne_extrapolate({{1, 0.7}, {3, 0.7}}).e0, 0.7, 1e-15);
}

TEST(Zne, TwoPointExample) {
  EXPECT_NEAR(zne_extrapolate({{1, 0.8}, {3, 0.5}}).e0, 0.95, 1e-12);
}

TEST(Zne, ExactOnLinearData) {
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a = u(rng()), b = u(rng());
    const std::vector<std::pair<double, double>> pts{{1, a + b}, {3, a + 3 * b}, {5, a + 5 * b}};
    EXPECT_NEAR(zne_extrapolate(pts).e0, a, 1e-12);
    EXPECT_NEAR(zne_extrapolate(pts, ZneMethod::Richardson).e0, a, 1e-12);
  }
}

TEST(Zne, RichardsonExactOnQuadratics) {
  const auto f = [](double c) { return 0.3 - 0.2 * c + 0.05 * c * c; };
  EXPECT_NEAR(zne_extrapolate({{1, f(1)}, {3, f(3)}, {5, f(5)}}, ZneMethod::Richardson).e0, 0.3, 1e-12);
}

TEST(Zne, WeightsSumToOne) {
  const std::vector<double> c{1, 3, 5, 7};
  for (auto m : {ZneMethod::Linear, ZneMethod::Richardson}) {
    const auto w = zne_weights(c, m);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(Zne, RejectsDegenerateInput) {
  EXPECT_THROW(zne_extrapolate({{1, 0.5}, {1, 0.4}}), std::invalid_argument);
  EXPECT_THROW(zne_extrapolate({{1, 0.5}}), std::invalid_argument);
  EXPECT_THROW(zne_extrapolate({{0, 0.5}, {1, 0.4}}), std::invalid_argument);
}

TEST(Zne, MatrixExtrapolationIsElementwise) {
  const CMatrix a = random_matrix(4), b = random_matrix(4);
  const CMatrix out = zne_extrapolate(std::vector<std::pair<double, CMatrix>>{{1, a}, {3, b}});
  EXPECT_LT(max_abs(out - (1.5 * a - 0.5 * b)), 1e-12);
}

TEST(Symmetry, MirrorExamples) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_EQ(mirror_symmetrize(v), (std::vector<double>{2.5, 2.5, 2.5, 2.5}));
  const std::vector<double> w{0.2, 0.5, 0.1};
  const auto m = mirror_symmetrize(w);
  EXPECT_DOUBLE_EQ(m[0], 0.15);
  EXPECT_DOUBLE_EQ(m[1], 0.5);
  EXPECT_EQ(mirror_symmetrize(m), m);
}

TEST(Symmetry, NumberSectorOfMixedState) {
  const auto out = number_sector_project(DensityMatrix::maximally_mixed(4), 2);
  for (std::size_t i = 0; i < 16; ++i) {
    const double expect = std::popcount(i) == 2 ? 1.0 / 6.0 : 0.0;
    EXPECT_NEAR(out(i, i).real(), expect, 1e-15);
  }
  EXPECT_NEAR(number_sector_project(DensityMatrix::maximally_mixed(2), 0)(0, 0).real(), 1.0, 1e-15);
}

TEST(Symmetry, NumberSectorRejectsEmptySector) {
  EXPECT_THROW(number_sector_project(DensityMatrix::basis(2, 0), 1), std::domain_error);
  EXPECT_THROW(number_sector_project(DensityMatrix::basis(2, 0), 3), std::invalid_argument);
}

TEST(Symmetry, NumberSectorFixesConservingStates) {
  const auto h = quench_hamiltonian(QuenchSchedule{}, 1.0);
  const auto gs = ground_state(h, 2);
  const auto rho = DensityMatrix::from_pure(gs.state);
  EXPECT_LT(max_abs(number_sector_project(rho, 2).elements() - rho.elements()), 1e-12);
}

#pragma once

// Error mitigation: readout inversion, zero-noise extrapolation, and the
// mirror / particle-number symmetry projections.

#include "dqsim/noise.hpp"
#include "dqsim/qcore.hpp"
#include "dqsim/tomo.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dqsim {

// ---------------------------------------------------------------------------
// Readout
// ---------------------------------------------------------------------------

enum class InversionMethod { Inverse, Pseudoinverse };

struct ReadoutOptions {
  InversionMethod method = InversionMethod::Inverse;
  bool clamp = false;  // zero negative quasi-probabilities, then renormalize
};

inline std::vector<double> mitigate_readout(std::span<const double> measured, const ConfusionMatrix& lambda,
                                            const ReadoutOptions& opt = {}) {
  const auto d = lambda.matrix().rows();
  if (static_cast<Eigen::Index>(measured.size()) != d) throw std::invalid_argument("distribution length does not match confusion matrix");
  const RVector p = Eigen::Map<const RVector>(measured.data(), d);
  RVector x;
  if (opt.method == InversionMethod::Inverse) {
    Eigen::FullPivLU<RMatrix> lu(lambda.matrix());
    if (!lu.isInvertible()) throw std::domain_error("confusion matrix is singular; use the pseudoinverse");
    x = lu.solve(p);
  } else {
    x = lambda.matrix().completeOrthogonalDecomposition().solve(p);
  }
  if (opt.clamp) x = x.cwiseMax(0.0);
  const double s = x.sum();
  if (std::abs(s) < 1e-300) throw std::domain_error("mitigated distribution has zero total weight");
  x /= s;
  return {x.data(), x.data() + x.size()};
}

inline std::vector<double> mitigate_readout(const CountsHistogram& counts, const ConfusionMatrix& lambda,
                                            const ReadoutOptions& opt = {}) {
  if (counts.n_qubits() != lambda.n_qubits()) throw std::invalid_argument("histogram width does not match confusion matrix");
  if (counts.shots() == 0) throw std::invalid_argument("empty histogram");
  return mitigate_readout(counts.frequencies(), lambda, opt);
}

/// Readout mitigation applied to every setting of a tomography dataset.
inline TomographyDataset mitigate_readout(const TomographyDataset& ds, const ConfusionMatrix& lambda,
                                          const ReadoutOptions& opt = {}) {
  TomographyDataset out = ds;
  for (auto& [basis, f] : out.frequencies) f = mitigate_readout(f, lambda, opt);
  return out;
}

// ---------------------------------------------------------------------------
// Zero-noise extrapolation
// ---------------------------------------------------------------------------

enum class ZneMethod { Linear, Richardson };

struct ZneEstimate {
  std::vector<double> stretches;
  std::vector<double> values;
  double e0 = 0.0;
  ZneMethod method = ZneMethod::Linear;
};

/// Weights w with E0 = sum_i w_i E(c_i).
/// Linear: intercept of the least-squares line. Richardson: the interpolating
/// polynomial through all points, evaluated at zero.
inline std::vector<double> zne_weights(std::span<const double> c, ZneMethod method = ZneMethod::Linear) {
  const std::size_t m = c.size();
  if (m < 2) throw std::invalid_argument("extrapolation needs at least two stretch factors");
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(c[i]) || c[i] <= 0.0) throw std::invalid_argument("stretch factors must be positive");
    for (std::size_t j = i + 1; j < m; ++j)
      if (c[i] == c[j]) throw std::invalid_argument("duplicate stretch factor " + std::to_string(c[i]));
  }
  std::vector<double> w(m);
  if (method == ZneMethod::Linear) {
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(m);
    double scc = 0.0;
    for (double x : c) scc += (x - mean) * (x - mean);
    for (std::size_t i = 0; i < m; ++i) w[i] = 1.0 / static_cast<double>(m) - mean * (c[i] - mean) / scc;
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      double l = 1.0;
      for (std::size_t j = 0; j < m; ++j)
        if (j != i) l *= c[j] / (c[j] - c[i]);
      w[i] = l;
    }
  }
  return w;
}

inline ZneEstimate zne_extrapolate(const std::vector<std::pair<double, double>>& values, ZneMethod method = ZneMethod::Linear) {
  ZneEstimate est;
  est.method = method;
  for (const auto& [c, v] : values) {
    est.stretches.push_back(c);
    est.values.push_back(v);
  }
  const auto w = zne_weights(est.stretches, method);
  for (std::size_t i = 0; i < w.size(); ++i) est.e0 += w[i] * est.values[i];
  return est;
}

/// Elementwise extrapolation of matrices measured at several stretch factors.
inline CMatrix zne_extrapolate(const std::vector<std::pair<double, CMatrix>>& values, ZneMethod method = ZneMethod::Linear) {
  std::vector<double> c;
  for (const auto& [s, m] : values) c.push_back(s);
  const auto w = zne_weights(c, method);
  CMatrix out = CMatrix::Zero(values.front().second.rows(), values.front().second.cols());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (values[i].second.rows() != out.rows() || values[i].second.cols() != out.cols())
      throw std::invalid_argument("matrix shapes differ across stretch factors");
    out += w[i] * values[i].second;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Symmetries
// ---------------------------------------------------------------------------

inline std::vector<double> mirror_symmetrize(std::span<const double> v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = 0.5 * (v[i] + v[v.size() - 1 - i]);
  return out;
}

/// P rho P / Tr(P rho P) with P onto basis states of Hamming weight n.
inline DensityMatrix number_sector_project(const DensityMatrix& rho, int n_particles) {
  if (n_particles < 0 || n_particles > rho.n_qubits()) throw std::invalid_argument("particle number outside [0, n]");
  CMatrix m = rho.elements();
  const auto d = static_cast<std::size_t>(m.rows());
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      if (std::popcount(r) != n_particles || std::popcount(c) != n_particles)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 0.0;
  const double tr = m.trace().real();
  if (tr < 1e-12) throw std::domain_error("state has no weight in the " + std::to_string(n_particles) + "-particle sector");
  m /= tr;
  return DensityMatrix(rho.n_qubits(), std::move(m));
}

}  // namespace dqsim

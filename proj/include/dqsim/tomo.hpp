#pragma once

// Pauli-basis state tomography: settings, data collection, linear inversion
// and projection onto the physical states.

#include "dqsim/circuit.hpp"
#include "dqsim/noise.hpp"
#include "dqsim/qcore.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dqsim {

inline constexpr int kMaxTomographyQubits = 6;

/// Measurement basis per qubit; character j of `basis` acts on qubit j.
struct TomographySetting {
  std::string basis;
  Circuit rotation;
};

/// Gates taking the eigenbasis of `basis` to the computational basis.
inline Circuit basis_rotation(const std::string& basis) {
  Circuit c(static_cast<int>(basis.size()));
  for (std::size_t q = 0; q < basis.size(); ++q) {
    const int qi = static_cast<int>(q);
    switch (basis[q]) {
      case 'X': c.add(Gate::u3(qi, kPi / 2, 0.0, kPi)); break;
      case 'Y': c.add(Gate::u3(qi, kPi / 2, 0.0, kPi / 2)); break;
      case 'Z': break;
      default: throw std::invalid_argument("basis character must be X, Y or Z");
    }
  }
  return c;
}

/// All 3^n settings in lexicographic order of their basis strings.
inline std::vector<TomographySetting> settings(int n_qubits, int max_qubits = kMaxTomographyQubits) {
  if (n_qubits < 1) throw std::invalid_argument("tomography needs at least one qubit");
  if (n_qubits > max_qubits)
    throw std::invalid_argument("full tomography on " + std::to_string(n_qubits) + " qubits exceeds the limit of " +
                                std::to_string(max_qubits));
  std::size_t total = 1;
  for (int q = 0; q < n_qubits; ++q) total *= 3;
  std::vector<TomographySetting> out;
  out.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    std::string b(static_cast<std::size_t>(n_qubits), 'X');
    std::size_t r = k;
    for (int pos = n_qubits - 1; pos >= 0; --pos) {
      b[static_cast<std::size_t>(pos)] = "XYZ"[r % 3];
      r /= 3;
    }
    out.push_back({b, basis_rotation(b)});
  }
  return out;
}

/// Outcome distributions per setting. shots == 0 marks exact probabilities.
struct TomographyDataset {
  int n_qubits = 0;
  std::int64_t shots = 0;
  std::map<std::string, std::vector<double>> frequencies;
};

struct CollectOptions {
  std::int64_t shots = 0;
  std::uint64_t seed = 0;
  std::optional<NoiseModel> noise;            // rotation gates run under this model
  std::optional<ConfusionMatrix> readout;     // applied before sampling
};

inline TomographyDataset collect(const DensityMatrix& rho, const std::vector<TomographySetting>& sets,
                                 const CollectOptions& opt = {}) {
  if (opt.shots < 0) throw std::invalid_argument("shots must be non-negative");
  TomographyDataset ds{rho.n_qubits(), opt.shots, {}};
  for (std::size_t k = 0; k < sets.size(); ++k) {
    const auto& s = sets[k];
    if (static_cast<int>(s.basis.size()) != rho.n_qubits()) throw std::invalid_argument("setting width mismatch");
    const DensityMatrix rotated = opt.noise ? apply_noisy_circuit(rho, s.rotation, *opt.noise) : apply_circuit(rho, s.rotation);
    std::vector<double> p = rotated.probabilities();
    if (opt.readout) p = opt.readout->apply(p);
    if (opt.shots > 0)
      p = sample_distribution(p, rho.n_qubits(), opt.shots, derive_seed(opt.seed, static_cast<std::uint64_t>(k))).frequencies();
    ds.frequencies[s.basis] = std::move(p);
  }
  return ds;
}

/// mu = 2^-n sum_P <P> P. Pauli strings containing identities average over
/// every setting that measures their non-identity factors.
inline HermitianOperator linear_inversion(const TomographyDataset& ds) {
  const int n = ds.n_qubits;
  if (n < 1 || n > kMaxTomographyQubits) throw std::invalid_argument("dataset width outside supported range");
  const auto all = settings(n);
  for (const auto& s : all)
    if (!ds.frequencies.count(s.basis)) throw std::invalid_argument("incomplete dataset: missing setting " + s.basis);
  const std::size_t d = dim_of(n);
  for (const auto& [b, f] : ds.frequencies)
    if (f.size() != d) throw std::invalid_argument("setting " + b + " has the wrong number of outcomes");

  CMatrix mu = CMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  const std::size_t n_strings = std::size_t{1} << (2 * n);
  std::string label(static_cast<std::size_t>(n), 'I');
  for (std::size_t s = 0; s < n_strings; ++s) {
    std::size_t zmask = 0, xmask = 0, ycount = 0;
    for (int q = 0; q < n; ++q) {
      const char c = "IXYZ"[(s >> (2 * q)) & 3];
      label[static_cast<std::size_t>(q)] = c;
      if (c != 'I') zmask |= std::size_t{1} << q;
      if (c == 'X' || c == 'Y') xmask |= std::size_t{1} << q;
      if (c == 'Y') ++ycount;
    }
    double expval = 1.0;
    if (zmask != 0) {
      double sum = 0.0;
      int n_sets = 0;
      for (const auto& set : all) {
        bool ok = true;
        for (int q = 0; q < n && ok; ++q)
          if (label[static_cast<std::size_t>(q)] != 'I' && label[static_cast<std::size_t>(q)] != set.basis[static_cast<std::size_t>(q)])
            ok = false;
        if (!ok) continue;
        const auto& f = ds.frequencies.at(set.basis);
        for (std::size_t b = 0; b < d; ++b) sum += (std::popcount(b & zmask) % 2 ? -f[b] : f[b]);
        ++n_sets;
      }
      expval = sum / n_sets;
    }
    // P|c> = i^{#Y} (-1)^{popcount(c & (Y|Z mask))} |c ^ xmask>
    std::size_t phase_mask = 0;
    for (int q = 0; q < n; ++q) {
      const char c = label[static_cast<std::size_t>(q)];
      if (c == 'Y' || c == 'Z') phase_mask |= std::size_t{1} << q;
    }
    cplx base = 1.0;
    for (std::size_t k = 0; k < ycount % 4; ++k) base *= kI;
    for (std::size_t c = 0; c < d; ++c) {
      const double sign = std::popcount(c & phase_mask) % 2 ? -1.0 : 1.0;
      mu(static_cast<Eigen::Index>(c ^ xmask), static_cast<Eigen::Index>(c)) += expval * sign * base;
    }
  }
  mu /= static_cast<double>(d);
  mu = (mu + mu.adjoint()) * 0.5;
  return {n, std::move(mu)};
}

/// Closest trace-one positive semidefinite matrix in mu's eigenbasis: negative
/// eigenvalues are zeroed smallest first and the accumulated deficit is spread
/// evenly over the eigenvalues that remain.
inline DensityMatrix psd_project(const HermitianOperator& mu) {
  const double tr = mu.elements().trace().real();
  if (std::abs(tr - 1.0) > 1e-8) throw std::invalid_argument("psd_project expects a unit-trace operator");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(mu.elements());
  const RVector& ev = es.eigenvalues();  // ascending
  const auto d = ev.size();
  RVector lam = RVector::Zero(d);
  double acc = 0.0;
  Eigen::Index lo = 0;  // eigenvalues [lo, d) survive
  while (lo < d && ev(lo) + acc / static_cast<double>(d - lo) < 0.0) {
    acc += ev(lo);
    ++lo;
  }
  for (Eigen::Index k = lo; k < d; ++k) lam(k) = ev(k) + acc / static_cast<double>(d - lo);
  CMatrix rho = es.eigenvectors() * lam.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  rho = (rho + rho.adjoint()) * 0.5;
  rho /= rho.trace().real();
  return DensityMatrix(mu.n_qubits(), std::move(rho));
}

inline DensityMatrix reconstruct(const TomographyDataset& ds) { return psd_project(linear_inversion(ds)); }

}  // namespace dqsim

#pragma once

// Time-dependent spin and fermion models.
//
// Every model exposes its Hamiltonian at time t as a list of local terms:
//   bond (i,j):  J_perp (Sx Sx + Sy Sy) + J_z Sz Sz  = J_perp/4 (XX + YY) + J_z/4 ZZ
//   field at i:  H . S                               = (hx X + hy Y + hz Z) / 2
// with S = sigma/2 and |0> = spin up. The same terms drive the dense builders,
// the matrix-free action used by the exact integrator, and the Trotter compiler.

#include "dqsim/qcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <concepts>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dqsim {

struct BondTerm {
  int i = 0;
  int j = 1;
  double j_perp = 0.0;
  double j_z = 0.0;
  friend bool operator==(const BondTerm&, const BondTerm&) = default;
};

struct FieldTerm {
  int site = 0;
  double hx = 0.0;
  double hy = 0.0;
  double hz = 0.0;
  friend bool operator==(const FieldTerm&, const FieldTerm&) = default;
};

struct ModelTerms {
  int n_qubits = 0;
  std::vector<BondTerm> bonds;
  std::vector<FieldTerm> fields;
};

template <class M>
concept TimeDependentModel = requires(const M& m, double t) {
  { m.n_qubits() } -> std::convertible_to<int>;
  { m.terms(t) } -> std::same_as<ModelTerms>;
};

// ---------------------------------------------------------------------------
// Dense and matrix-free Hamiltonians
// ---------------------------------------------------------------------------

inline HermitianOperator hamiltonian(const ModelTerms& terms) {
  const int n = terms.n_qubits;
  const auto d = static_cast<Eigen::Index>(dim_of(n));
  CMatrix h = CMatrix::Zero(d, d);
  for (const auto& b : terms.bonds) {
    const CMatrix xx = embed_single(pauli::X(), b.i, n) * embed_single(pauli::X(), b.j, n);
    const CMatrix yy = embed_single(pauli::Y(), b.i, n) * embed_single(pauli::Y(), b.j, n);
    const CMatrix zz = embed_single(pauli::Z(), b.i, n) * embed_single(pauli::Z(), b.j, n);
    h += 0.25 * b.j_perp * (xx + yy) + 0.25 * b.j_z * zz;
  }
  for (const auto& f : terms.fields) {
    const CMatrix local = 0.5 * (f.hx * pauli::X() + f.hy * pauli::Y() + f.hz * pauli::Z());
    h += embed_single(local, f.site, n);
  }
  h = (h + h.adjoint()) * 0.5;
  return {n, std::move(h)};
}

/// out = H * in, column by column, without forming H.
inline CMatrix apply_hamiltonian(const ModelTerms& terms, const CMatrix& in) {
  const auto d = dim_of(terms.n_qubits);
  if (static_cast<std::size_t>(in.rows()) != d) throw std::invalid_argument("apply_hamiltonian: row count mismatch");
  CMatrix out = CMatrix::Zero(in.rows(), in.cols());
  for (const auto& b : terms.bonds) {
    const std::size_t mi = std::size_t{1} << b.i, mj = std::size_t{1} << b.j;
    const double hop = 0.5 * b.j_perp;
    const double zz = 0.25 * b.j_z;
    for (std::size_t s = 0; s < d; ++s) {
      const bool bi = s & mi, bj = s & mj;
      const auto row = static_cast<Eigen::Index>(s);
      if (zz != 0.0) out.row(row) += (bi == bj ? zz : -zz) * in.row(row);
      if (hop != 0.0 && bi != bj) out.row(static_cast<Eigen::Index>(s ^ mi ^ mj)) += hop * in.row(row);
    }
  }
  for (const auto& f : terms.fields) {
    const std::size_t m = std::size_t{1} << f.site;
    const cplx up(0.5 * f.hx, 0.5 * f.hy);    // <b^m| H |b> for b_i = 0
    const cplx down(0.5 * f.hx, -0.5 * f.hy); // for b_i = 1
    const double hz = 0.5 * f.hz;
    for (std::size_t s = 0; s < d; ++s) {
      const bool bit = s & m;
      const auto row = static_cast<Eigen::Index>(s);
      out.row(static_cast<Eigen::Index>(s ^ m)) += (bit ? down : up) * in.row(row);
      if (hz != 0.0) out.row(row) += (bit ? -hz : hz) * in.row(row);
    }
  }
  return out;
}

/// Cheap upper bound on the operator norm of the Hamiltonian.
inline double norm_bound(const ModelTerms& terms) {
  double s = 0.0;
  for (const auto& b : terms.bonds) s += 0.5 * std::abs(b.j_perp) + 0.25 * std::abs(b.j_z);
  for (const auto& f : terms.fields) s += 0.5 * std::hypot(f.hx, f.hy, f.hz);
  return s;
}

// ---------------------------------------------------------------------------
// Rabi model
// ---------------------------------------------------------------------------

struct RabiParams {
  double H0 = 1.0;
  double Theta = 2.0;
  double omega = 1.0;
  double alpha = 2.0 * kPi / 3.0;
};

inline FieldTerm rabi_field(const RabiParams& p, double t) {
  return {0, p.H0 * std::sin(p.Theta) * std::cos(p.omega * t), p.H0 * std::sin(p.Theta) * std::sin(p.omega * t),
          p.H0 * std::cos(p.Theta)};
}

inline HermitianOperator rabi_hamiltonian(const RabiParams& p, double t) {
  const FieldTerm f = rabi_field(p, t);
  return {1, 0.5 * (f.hx * pauli::X() + f.hy * pauli::Y() + f.hz * pauli::Z())};
}

class RabiModel {
 public:
  explicit RabiModel(RabiParams p) : p_(p) {
    if (!(p.H0 >= 0.0)) throw std::invalid_argument("Rabi field magnitude must be non-negative");
  }
  int n_qubits() const { return 1; }
  const RabiParams& params() const { return p_; }
  ModelTerms terms(double t) const { return {1, {}, {rabi_field(p_, t)}}; }

 private:
  RabiParams p_;
};

// ---------------------------------------------------------------------------
// Pulsed spin lattices
// ---------------------------------------------------------------------------

enum class Polarization { Circular, Linear };

struct PulseWaveform {
  Polarization polarization = Polarization::Circular;
  double h0 = 1.0;
  double omega = 1.0;
  double tau = 1.0;
  double t0 = 0.0;
};

struct FieldXY {
  double hx = 0.0;
  double hy = 0.0;
};

inline FieldXY pulse_field(const PulseWaveform& w, double t) {
  if (!(w.tau > 0.0)) throw std::invalid_argument("pulse width tau must be positive");
  const double s = t - w.t0;
  const double env = w.h0 * std::exp(-s * s / (2.0 * w.tau * w.tau));
  if (w.polarization == Polarization::Linear) return {env, 0.0};
  return {env * std::cos(w.omega * s), env * std::sin(w.omega * s)};
}

class SpinLattice {
 public:
  SpinLattice(int n_sites, std::vector<BondTerm> bonds, std::map<int, PulseWaveform> site_pulses = {})
      : n_sites_(n_sites), bonds_(std::move(bonds)), pulses_(std::move(site_pulses)) {
    if (n_sites < 1 || n_sites > kMaxQubits)
      throw std::invalid_argument("lattice size " + std::to_string(n_sites) + " outside [1, 12]");
    for (const auto& b : bonds_) {
      if (b.i < 0 || b.j < 0 || b.i >= n_sites || b.j >= n_sites)
        throw std::invalid_argument("bond (" + std::to_string(b.i) + "," + std::to_string(b.j) + ") outside lattice");
      if (b.i == b.j) throw std::invalid_argument("self-bond on site " + std::to_string(b.i));
    }
    for (const auto& [site, w] : pulses_) {
      if (site < 0 || site >= n_sites) throw std::invalid_argument("pulse on site outside lattice");
      if (!(w.tau > 0.0)) throw std::invalid_argument("pulse width tau must be positive");
    }
  }

  static SpinLattice chain(int n, double j_perp, double j_z, std::map<int, PulseWaveform> pulses = {}) {
    std::vector<BondTerm> bonds;
    for (int i = 0; i + 1 < n; ++i) bonds.push_back({i, i + 1, j_perp, j_z});
    return {n, std::move(bonds), std::move(pulses)};
  }

  static SpinLattice ring(int n, double j_perp, double j_z, std::map<int, PulseWaveform> pulses = {}) {
    if (n < 3) throw std::invalid_argument("a ring needs at least 3 sites");
    std::vector<BondTerm> bonds;
    for (int i = 0; i < n; ++i) bonds.push_back({i, (i + 1) % n, j_perp, j_z});
    return {n, std::move(bonds), std::move(pulses)};
  }

  int n_qubits() const { return n_sites_; }
  int n_sites() const { return n_sites_; }
  const std::vector<BondTerm>& bonds() const { return bonds_; }
  const std::map<int, PulseWaveform>& site_pulses() const { return pulses_; }

  ModelTerms terms(double t) const {
    ModelTerms out{n_sites_, bonds_, {}};
    for (const auto& [site, w] : pulses_) {
      const FieldXY f = pulse_field(w, t);
      out.fields.push_back({site, f.hx, f.hy, 0.0});
    }
    return out;
  }

 private:
  int n_sites_;
  std::vector<BondTerm> bonds_;
  std::map<int, PulseWaveform> pulses_;
};

inline HermitianOperator spin_hamiltonian(const SpinLattice& l, double t) { return hamiltonian(l.terms(t)); }

// ---------------------------------------------------------------------------
// Interaction quench on the four-site ring
// ---------------------------------------------------------------------------

struct QuenchSchedule {
  double j_perp = 1.0;
  double u_final = 2.0;
  double t_quench = 0.0;

  double u_at(double t) const { return t < t_quench ? 0.0 : u_final; }
  double anisotropy() const { return u_final / j_perp; }
};

class QuenchModel {
 public:
  static constexpr int kSites = 4;

  explicit QuenchModel(QuenchSchedule q) : q_(q) {
    if (q.j_perp == 0.0) throw std::invalid_argument("quench requires J_perp != 0");
  }
  int n_qubits() const { return kSites; }
  const QuenchSchedule& schedule() const { return q_; }

  ModelTerms terms(double t) const {
    ModelTerms out{kSites, {}, {}};
    const double u = q_.u_at(t);
    for (int i = 0; i < kSites; ++i) out.bonds.push_back({i, (i + 1) % kSites, q_.j_perp, u});
    return out;
  }

 private:
  QuenchSchedule q_;
};

inline HermitianOperator quench_hamiltonian(const QuenchSchedule& q, double t) {
  return hamiltonian(QuenchModel(q).terms(t));
}

// ---------------------------------------------------------------------------
// Exact diagonalization
// ---------------------------------------------------------------------------

inline HermitianOperator number_operator(int n_qubits) {
  const auto d = static_cast<Eigen::Index>(dim_of(n_qubits));
  CMatrix m = CMatrix::Zero(d, d);
  for (Eigen::Index s = 0; s < d; ++s) m(s, s) = std::popcount(static_cast<std::size_t>(s));
  return {n_qubits, std::move(m)};
}

struct GroundState {
  double energy = 0.0;
  double gap = 0.0;
  QuantumState state;
};

/// Lowest eigenpair, optionally restricted to a fixed particle number
/// (Hamming weight). Throws if the ground level is degenerate within 1e-9.
inline GroundState ground_state(const HermitianOperator& h, std::optional<int> particles = std::nullopt) {
  const int n = h.n_qubits();
  std::vector<Eigen::Index> basis;
  for (std::size_t s = 0; s < h.dim(); ++s)
    if (!particles || std::popcount(s) == *particles) basis.push_back(static_cast<Eigen::Index>(s));
  if (basis.empty()) throw std::invalid_argument("empty particle-number sector");
  const auto m = static_cast<Eigen::Index>(basis.size());
  CMatrix sub(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = h.elements()(basis[a], basis[b]);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sub);
  const auto& ev = es.eigenvalues();
  const double gap = m > 1 ? ev(1) - ev(0) : std::numeric_limits<double>::infinity();
  if (gap < 1e-9) throw std::runtime_error("ground state is degenerate (gap " + std::to_string(gap) + ")");
  CVector v = es.eigenvectors().col(0);
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  v *= std::conj(v(imax)) / std::abs(v(imax));
  CVector full = CVector::Zero(static_cast<Eigen::Index>(h.dim()));
  for (Eigen::Index a = 0; a < m; ++a) full(basis[a]) = v(a);
  return {ev(0), gap, QuantumState(n, std::move(full))};
}

// ---------------------------------------------------------------------------
// Spin observables. All are diagonal, so they act on probability vectors;
// quasi-probabilities from readout inversion are accepted as they are.
// ---------------------------------------------------------------------------

namespace detail {
inline int width_of_probs(std::span<const double> p) {
  const int n = log2_dim(static_cast<Eigen::Index>(p.size()));
  return n;
}
}  // namespace detail

inline double site_magnetization(std::span<const double> probs, int site) {
  const int n = detail::width_of_probs(probs);
  if (site < 0 || site >= n) throw std::out_of_range("site index out of range");
  double m = 0.0;
  for (std::size_t s = 0; s < probs.size(); ++s) m += (bit_of(s, site) ? -0.5 : 0.5) * probs[s];
  return m;
}

inline std::vector<double> site_magnetizations(std::span<const double> probs) {
  const int n = detail::width_of_probs(probs);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = site_magnetization(probs, i);
  return out;
}

inline double total_magnetization(std::span<const double> probs) {
  double m = 0.0;
  for (double v : site_magnetizations(probs)) m += v;
  return m;
}

/// S_AF = sum_{i=1..L} (-1)^i S^i_z with sites numbered from 1, so the
/// first site enters with a minus sign.
inline double staggered_magnetization(std::span<const double> probs) {
  const auto m = site_magnetizations(probs);
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += (i % 2 == 0 ? -1.0 : 1.0) * m[i];
  return s;
}

inline double site_magnetization(const QuantumState& s, int site) { return site_magnetization(s.probabilities(), site); }
inline double site_magnetization(const DensityMatrix& r, int site) { return site_magnetization(r.probabilities(), site); }
inline double total_magnetization(const QuantumState& s) { return total_magnetization(s.probabilities()); }
inline double total_magnetization(const DensityMatrix& r) { return total_magnetization(r.probabilities()); }
inline double staggered_magnetization(const QuantumState& s) { return staggered_magnetization(s.probabilities()); }
inline double staggered_magnetization(const DensityMatrix& r) { return staggered_magnetization(r.probabilities()); }

inline double particle_number(std::span<const double> probs) {
  double n = 0.0;
  for (std::size_t s = 0; s < probs.size(); ++s) n += std::popcount(s) * probs[s];
  return n;
}

/// P(qubit 0 = 1) on a one-qubit probability vector or marginal thereof.
inline double excited_probability(std::span<const double> probs, int qubit = 0) {
  double p = 0.0;
  for (std::size_t s = 0; s < probs.size(); ++s)
    if (bit_of(s, qubit)) p += probs[s];
  return p;
}

// ---------------------------------------------------------------------------
// Fermionic observables
// ---------------------------------------------------------------------------

/// C_ij = <c_i^dag c_j> with occupied = |1>, a_i = |0><1| and
/// c_i = (-1)^i (prod_{l<i} Z_l) a_i.
inline CMatrix correlation_matrix(const DensityMatrix& rho) {
  const int n = rho.n_qubits();
  const std::size_t d = rho.dim();
  CMatrix c = CMatrix::Zero(n, n);
  auto parity_below = [](std::size_t s, int i) {
    const std::size_t mask = (std::size_t{1} << i) - 1;
    return std::popcount(s & mask) % 2 == 0 ? 1.0 : -1.0;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t mi = std::size_t{1} << i, mj = std::size_t{1} << j;
      const double stagger = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      cplx acc = 0.0;
      for (std::size_t s = 0; s < d; ++s) {
        if (!(s & mj)) continue;
        const std::size_t s1 = s ^ mj;
        if (s1 & mi) continue;
        const std::size_t s2 = s1 | mi;
        const double sign = stagger * parity_below(s, j) * parity_below(s1, i);
        acc += sign * rho(s, s2);  // <s2|O|s> rho_{s,s2}
      }
      c(i, j) = acc;
    }
  }
  return c;
}

struct MomentumGrid {
  int n_sites = 4;
  std::vector<double> k_values;

  /// Solutions of exp(i k N) = -1 in (-pi, pi), ascending.
  static MomentumGrid antiperiodic(int n_sites) {
    if (n_sites < 1) throw std::invalid_argument("grid needs at least one site");
    MomentumGrid g{n_sites, {}};
    for (int m = 0; m < n_sites; ++m) {
      double k = kPi * (2.0 * m + 1.0) / n_sites;
      if (k > kPi) k -= 2.0 * kPi;
      g.k_values.push_back(k);
    }
    std::sort(g.k_values.begin(), g.k_values.end());
    return g;
  }
};

inline std::map<double, double> momentum_distribution(const CMatrix& c, const MomentumGrid& grid) {
  if (c.rows() != grid.n_sites || c.cols() != grid.n_sites)
    throw std::invalid_argument("correlation matrix size does not match the momentum grid");
  if (hermiticity_error(c) > 1e-9) throw std::invalid_argument("correlation matrix is not Hermitian");
  std::map<double, double> nk;
  for (double k : grid.k_values) {
    cplx s = 0.0;
    for (int i = 0; i < grid.n_sites; ++i)
      for (int j = 0; j < grid.n_sites; ++j) s += c(i, j) * std::exp(kI * (k * (i - j)));
    nk[k] = s.real() / grid.n_sites;
  }
  return nk;
}

inline double filling(const CMatrix& c) { return c.trace().real(); }

inline double fermi_jump(const std::map<double, double>& nk) {
  double inside = 0.0, outside = 0.0;
  int n_in = 0, n_out = 0;
  for (const auto& [k, n] : nk) {
    if (std::abs(k) < kPi / 2) {
      inside += n;
      ++n_in;
    } else {
      outside += n;
      ++n_out;
    }
  }
  if (n_in == 0 || n_out == 0) throw std::invalid_argument("momentum grid must straddle |k| = pi/2");
  return inside / n_in - outside / n_out;
}

/// Entropy of the first floor(n/2) qubits.
inline double bipartite_entropy(const DensityMatrix& rho) {
  std::vector<int> keep;
  for (int i = 0; i < rho.n_qubits() / 2; ++i) keep.push_back(i);
  if (keep.empty()) return 0.0;
  return von_neumann_entropy(partial_trace(rho, keep));
}

}  // namespace dqsim

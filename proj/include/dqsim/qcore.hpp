#pragma once

// Dense state and operator types over n qubits, plus the spectral and
// information-theoretic functionals used throughout the library.
//
// Basis ordering is little-endian everywhere: bit i of a basis index is the
// state of qubit i, so qubit 0 is the least significant bit.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dqsim {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using QubitList = std::vector<int>;

inline constexpr int kMaxQubits = 12;
inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// Eigenvalues in [-kEigenClamp, 0) are treated as zero; anything below is an
// unphysical input.
inline constexpr double kEigenClamp = 1e-9;

inline std::size_t dim_of(int n_qubits) { return std::size_t{1} << n_qubits; }

inline int bit_of(std::size_t index, int qubit) {
  return static_cast<int>((index >> qubit) & 1U);
}

// ---------------------------------------------------------------------------
// Small matrix helpers
// ---------------------------------------------------------------------------

namespace pauli {
inline CMatrix I() { return CMatrix::Identity(2, 2); }
inline CMatrix X() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline CMatrix Y() {
  CMatrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}
inline CMatrix Z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
inline CMatrix by_label(char label) {
  switch (label) {
    case 'I': return I();
    case 'X': return X();
    case 'Y': return Y();
    case 'Z': return Z();
    default: throw std::invalid_argument(std::string("unknown Pauli label '") + label + "'");
  }
}
}  // namespace pauli

/// Kronecker product a ⊗ b. With little-endian ordering, `b` acts on the lower
/// qubits.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Embeds a single-qubit operator on `qubit` of an n-qubit register.
inline CMatrix embed_single(const CMatrix& op, int qubit, int n_qubits) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int q = n_qubits - 1; q >= 0; --q) out = kron(out, q == qubit ? op : pauli::I());
  return out;
}

inline double hermiticity_error(const CMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const CMatrix& m, double tol) { return hermiticity_error(m) <= tol; }

inline bool is_unitary(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m.adjoint() * m - CMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

namespace detail {

inline int log2_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim) throw std::invalid_argument("dimension is not a power of two");
  return n;
}

inline void check_targets(std::span<const int> targets, int n_qubits) {
  if (targets.empty()) throw std::invalid_argument("target list is empty");
  for (std::size_t a = 0; a < targets.size(); ++a) {
    if (targets[a] < 0 || targets[a] >= n_qubits)
      throw std::out_of_range("target qubit " + std::to_string(targets[a]) + " out of range for " +
                              std::to_string(n_qubits) + " qubits");
    for (std::size_t b = a + 1; b < targets.size(); ++b)
      if (targets[a] == targets[b])
        throw std::invalid_argument("duplicate target qubit " + std::to_string(targets[a]));
  }
}

// Offsets of the 2^k local basis states inside the full index space; local
// bit j maps to qubit targets[j].
inline std::vector<std::size_t> local_offsets(std::span<const int> targets) {
  const std::size_t sub = std::size_t{1} << targets.size();
  std::vector<std::size_t> offsets(sub, 0);
  for (std::size_t s = 0; s < sub; ++s)
    for (std::size_t j = 0; j < targets.size(); ++j)
      if ((s >> j) & 1U) offsets[s] |= std::size_t{1} << targets[j];
  return offsets;
}

// Left-multiplies every column of `m` (2^n rows) by `op` embedded on `targets`.
inline void apply_local_columns(CMatrix& m, const CMatrix& op, std::span<const int> targets,
                                int n_qubits) {
  const auto offsets = local_offsets(targets);
  const auto sub = static_cast<Eigen::Index>(offsets.size());
  if (op.rows() != sub || op.cols() != sub)
    throw std::invalid_argument("operator dimension " + std::to_string(op.rows()) +
                                " does not match 2^" + std::to_string(targets.size()));
  std::size_t mask = 0;
  for (int t : targets) mask |= std::size_t{1} << t;
  const Eigen::Index cols = m.cols();
  CMatrix block(sub, cols);
  for (std::size_t base = 0; base < dim_of(n_qubits); ++base) {
    if (base & mask) continue;
    for (Eigen::Index s = 0; s < sub; ++s) block.row(s) = m.row(static_cast<Eigen::Index>(base + offsets[s]));
    block = op * block;
    for (Eigen::Index s = 0; s < sub; ++s) m.row(static_cast<Eigen::Index>(base + offsets[s])) = block.row(s);
  }
}

// m -> op m op^dagger with op embedded on targets.
inline void conjugate_local(CMatrix& m, const CMatrix& op, std::span<const int> targets, int n_qubits) {
  apply_local_columns(m, op, targets, n_qubits);
  CMatrix t = m.adjoint();
  apply_local_columns(t, op, targets, n_qubits);
  m = t.adjoint();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Pure state over n qubits.
class QuantumState {
 public:
  QuantumState(int n_qubits, CVector amplitudes)
      : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
    if (n_qubits < 0 || n_qubits > kMaxQubits)
      throw std::invalid_argument("qubit count " + std::to_string(n_qubits) + " outside [0, 12]");
    if (static_cast<std::size_t>(amplitudes_.size()) != dim_of(n_qubits))
      throw std::invalid_argument("amplitude vector length " + std::to_string(amplitudes_.size()) +
                                  " is not 2^" + std::to_string(n_qubits));
  }

  static QuantumState basis(int n_qubits, std::size_t index) {
    if (index >= dim_of(n_qubits)) throw std::out_of_range("basis index out of range");
    CVector v = CVector::Zero(static_cast<Eigen::Index>(dim_of(n_qubits)));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return {n_qubits, std::move(v)};
  }

  static QuantumState zero(int n_qubits) { return basis(n_qubits, 0); }

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return dim_of(n_qubits_); }
  const CVector& amplitudes() const { return amplitudes_; }
  cplx operator[](std::size_t i) const { return amplitudes_(static_cast<Eigen::Index>(i)); }
  double norm() const { return amplitudes_.norm(); }

  QuantumState normalized() const {
    const double nrm = norm();
    if (nrm == 0.0) throw std::domain_error("cannot normalize the zero vector");
    return {n_qubits_, amplitudes_ / nrm};
  }

  std::vector<double> probabilities() const {
    std::vector<double> p(dim());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(amplitudes_(static_cast<Eigen::Index>(i)));
    return p;
  }

 private:
  int n_qubits_;
  CVector amplitudes_;
};

/// Mixed state over n qubits: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
 public:
  DensityMatrix(int n_qubits, CMatrix elements) : DensityMatrix(n_qubits, std::move(elements), true) {}

  /// Skips the spectral check; shape, Hermiticity and trace are still verified.
  /// Used on hot paths where positivity follows from construction
  /// (unitary conjugation, CPTP maps).
  static DensityMatrix from_cptp_output(int n_qubits, CMatrix elements) {
    return DensityMatrix(n_qubits, std::move(elements), false);
  }

  static DensityMatrix from_pure(const QuantumState& psi) {
    const CVector& a = psi.amplitudes();
    return from_cptp_output(psi.n_qubits(), a * a.adjoint());
  }

  static DensityMatrix maximally_mixed(int n_qubits) {
    const auto d = static_cast<Eigen::Index>(dim_of(n_qubits));
    return from_cptp_output(n_qubits, CMatrix::Identity(d, d) / static_cast<double>(d));
  }

  static DensityMatrix basis(int n_qubits, std::size_t index) {
    return from_pure(QuantumState::basis(n_qubits, index));
  }

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return dim_of(n_qubits_); }
  const CMatrix& elements() const { return elements_; }
  cplx operator()(std::size_t i, std::size_t j) const {
    return elements_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  /// Diagonal in the computational basis; tiny negative values from rounding
  /// are clamped to zero.
  std::vector<double> probabilities() const {
    std::vector<double> p(dim());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::max(0.0, elements_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real());
    return p;
  }

 private:
  DensityMatrix(int n_qubits, CMatrix elements, bool check_spectrum)
      : n_qubits_(n_qubits), elements_(std::move(elements)) {
    if (n_qubits < 0 || n_qubits > kMaxQubits)
      throw std::invalid_argument("qubit count " + std::to_string(n_qubits) + " outside [0, 12]");
    const auto d = static_cast<Eigen::Index>(dim_of(n_qubits));
    if (elements_.rows() != d || elements_.cols() != d)
      throw std::invalid_argument("density matrix must be 2^n x 2^n");
    if (hermiticity_error(elements_) > 1e-10) throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(elements_.trace() - cplx(1.0)) > 1e-10)
      throw std::invalid_argument("density matrix trace differs from 1");
    if (check_spectrum) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(elements_, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -kEigenClamp)
        throw std::invalid_argument("density matrix has a negative eigenvalue");
    }
  }

  int n_qubits_;
  CMatrix elements_;
};

/// Hermitian operator on n qubits (Hamiltonians, observables).
class HermitianOperator {
 public:
  HermitianOperator(int n_qubits, CMatrix elements) : n_qubits_(n_qubits), elements_(std::move(elements)) {
    const auto d = static_cast<Eigen::Index>(dim_of(n_qubits));
    if (elements_.rows() != d || elements_.cols() != d)
      throw std::invalid_argument("operator must be 2^n x 2^n");
    if (hermiticity_error(elements_) > 1e-12) throw std::invalid_argument("operator is not Hermitian");
  }

  static HermitianOperator zero(int n_qubits) {
    const auto d = static_cast<Eigen::Index>(dim_of(n_qubits));
    return {n_qubits, CMatrix::Zero(d, d)};
  }

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return dim_of(n_qubits_); }
  const CMatrix& elements() const { return elements_; }

 private:
  int n_qubits_;
  CMatrix elements_;
};

/// Completely positive trace-preserving map in Kraus form.
class QuantumChannel {
 public:
  explicit QuantumChannel(std::vector<CMatrix> kraus_ops) : kraus_(std::move(kraus_ops)) {
    if (kraus_.empty()) throw std::invalid_argument("channel needs at least one Kraus operator");
    const Eigen::Index d = kraus_.front().rows();
    CMatrix sum = CMatrix::Zero(d, d);
    for (const auto& k : kraus_) {
      if (k.rows() != d || k.cols() != d)
        throw std::invalid_argument("Kraus operators must share one square dimension");
      sum += k.adjoint() * k;
    }
    if ((sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument("Kraus operators violate completeness (not trace preserving)");
    n_qubits_ = detail::log2_dim(d);
  }

  const std::vector<CMatrix>& kraus_ops() const { return kraus_; }
  int n_qubits() const { return n_qubits_; }

 private:
  std::vector<CMatrix> kraus_;
  int n_qubits_ = 0;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Applies `u` (2^k x 2^k, local bit j = targets[j]) to the state.
inline QuantumState apply_unitary(const QuantumState& state, const CMatrix& u, std::span<const int> targets) {
  detail::check_targets(targets, state.n_qubits());
  CMatrix col = state.amplitudes();
  detail::apply_local_columns(col, u, targets, state.n_qubits());
  return {state.n_qubits(), col.col(0)};
}

inline QuantumState apply_unitary(const QuantumState& state, const CMatrix& u, std::initializer_list<int> targets) {
  return apply_unitary(state, u, std::span<const int>(targets.begin(), targets.size()));
}

/// rho -> u rho u^dagger with u embedded on targets.
inline DensityMatrix apply_unitary(const DensityMatrix& rho, const CMatrix& u, std::span<const int> targets) {
  detail::check_targets(targets, rho.n_qubits());
  CMatrix m = rho.elements();
  detail::conjugate_local(m, u, targets, rho.n_qubits());
  return DensityMatrix::from_cptp_output(rho.n_qubits(), std::move(m));
}

inline DensityMatrix apply_unitary(const DensityMatrix& rho, const CMatrix& u, std::initializer_list<int> targets) {
  return apply_unitary(rho, u, std::span<const int>(targets.begin(), targets.size()));
}

/// rho -> sum_k K rho K^dagger on the given qubits.
inline DensityMatrix apply_channel(const DensityMatrix& rho, const QuantumChannel& channel,
                                   std::span<const int> targets) {
  detail::check_targets(targets, rho.n_qubits());
  if (static_cast<int>(targets.size()) != channel.n_qubits())
    throw std::invalid_argument("channel arity does not match target count");
  const auto d = static_cast<Eigen::Index>(rho.dim());
  CMatrix acc = CMatrix::Zero(d, d);
  for (const auto& k : channel.kraus_ops()) {
    CMatrix m = rho.elements();
    detail::conjugate_local(m, k, targets, rho.n_qubits());
    acc += m;
  }
  acc = (acc + acc.adjoint()) * 0.5;
  return DensityMatrix::from_cptp_output(rho.n_qubits(), std::move(acc));
}

inline DensityMatrix apply_channel(const DensityMatrix& rho, const QuantumChannel& channel,
                                   std::initializer_list<int> targets) {
  return apply_channel(rho, channel, std::span<const int>(targets.begin(), targets.size()));
}

/// exp(-i * scale * h) through the eigendecomposition of h.
inline CMatrix expm_hermitian(const CMatrix& h, double scale) {
  if (!is_hermitian(h, 1e-12)) throw std::invalid_argument("expm_hermitian: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const CMatrix& v = es.eigenvectors();
  CVector phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::exp(-kI * scale * es.eigenvalues()(i));
  return v * phases.asDiagonal() * v.adjoint();
}

inline CMatrix expm_hermitian(const HermitianOperator& h, double scale) {
  return expm_hermitian(h.elements(), scale);
}

/// Eigenvalues of a density matrix with [-1e-9, 0) clamped to zero.
inline RVector physical_eigenvalues(const CMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
  RVector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -kEigenClamp) throw std::domain_error("eigenvalue below -1e-9; not a physical state");
    ev(i) = std::max(ev(i), 0.0);
  }
  return ev;
}

/// Reduced state on `keep`; reduced bit j corresponds to qubit keep[j].
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  detail::check_targets(keep, rho.n_qubits());
  const int n = rho.n_qubits();
  const int k = static_cast<int>(keep.size());
  std::vector<int> traced;
  for (int q = 0; q < n; ++q)
    if (std::find(keep.begin(), keep.end(), q) == keep.end()) traced.push_back(q);

  const auto keep_off = detail::local_offsets(keep);
  const std::vector<std::size_t> env_off =
      traced.empty() ? std::vector<std::size_t>{0} : detail::local_offsets(traced);
  const auto dk = static_cast<Eigen::Index>(dim_of(k));
  CMatrix out = CMatrix::Zero(dk, dk);
  for (Eigen::Index a = 0; a < dk; ++a)
    for (Eigen::Index b = 0; b < dk; ++b) {
      cplx sum = 0;
      for (std::size_t e : env_off)
        sum += rho(keep_off[static_cast<std::size_t>(a)] | e, keep_off[static_cast<std::size_t>(b)] | e);
      out(a, b) = sum;
    }
  return DensityMatrix::from_cptp_output(k, std::move(out));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<int> keep) {
  return partial_trace(rho, std::span<const int>(keep.begin(), keep.size()));
}

/// -Tr[rho ln rho] in nats.
inline double von_neumann_entropy(const DensityMatrix& rho) {
  const RVector ev = physical_eigenvalues(rho.elements());
  double s = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > 0.0) s -= ev(i) * std::log(ev(i));
  return std::max(s, 0.0);
}

/// <psi|rho|psi>.
inline double fidelity(const DensityMatrix& rho, const QuantumState& psi) {
  if (rho.n_qubits() != psi.n_qubits()) throw std::invalid_argument("fidelity: dimension mismatch");
  const CVector& a = psi.amplitudes();
  const double f = (a.adjoint() * rho.elements() * a)(0, 0).real();
  return std::clamp(f, 0.0, 1.0 + 1e-10);
}

inline double fidelity(const QuantumState& a, const QuantumState& b) {
  if (a.n_qubits() != b.n_qubits()) throw std::invalid_argument("fidelity: dimension mismatch");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

/// Tr[rho^2].
inline double purity(const DensityMatrix& rho) {
  // Tr[rho^2] = sum_ij |rho_ij|^2 for Hermitian rho.
  return rho.elements().squaredNorm();
}

/// (1/2) ||a - b||_1.
inline double trace_distance(const CMatrix& a, const CMatrix& b) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a - b, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_distance(a.elements(), b.elements());
}

inline double expectation(const DensityMatrix& rho, const CMatrix& op) {
  return (rho.elements() * op).trace().real();
}

inline double expectation(const QuantumState& psi, const CMatrix& op) {
  const CVector& a = psi.amplitudes();
  return (a.adjoint() * op * a)(0, 0).real();
}

}  // namespace dqsim

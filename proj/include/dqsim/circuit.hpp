#pragma once

// Gate-level circuits over the U3 / U1 / RY / CX gate set.
//
// Matrix conventions follow the OpenQASM 2 definitions:
//   U3(θ,φ,λ) = [[cos(θ/2), -e^{iλ} sin(θ/2)], [e^{iφ} sin(θ/2), e^{i(φ+λ)} cos(θ/2)]]
//   U1(λ)     = diag(1, e^{iλ})
//   RY(θ)     = U3(θ, 0, 0)
// Circuits are purely unitary; measurement lives in noise.hpp.

#include "dqsim/qcore.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dqsim {

enum class GateKind { U3, U1, RY, CX };

inline const char* gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::U3: return "u3";
    case GateKind::U1: return "u1";
    case GateKind::RY: return "ry";
    case GateKind::CX: return "cx";
  }
  return "?";
}

struct Gate {
  GateKind kind = GateKind::U3;
  // qubits[0] is the target of single-qubit gates and the control of CX;
  // qubits[1] is the CX target.
  std::array<int, 2> qubits{0, -1};
  std::array<double, 3> params{0.0, 0.0, 0.0};

  static Gate u3(int q, double theta, double phi, double lambda) {
    return checked({GateKind::U3, {q, -1}, {theta, phi, lambda}});
  }
  static Gate u1(int q, double lambda) { return checked({GateKind::U1, {q, -1}, {lambda, 0.0, 0.0}}); }
  static Gate ry(int q, double theta) { return checked({GateKind::RY, {q, -1}, {theta, 0.0, 0.0}}); }
  static Gate cx(int control, int target) { return checked({GateKind::CX, {control, target}, {0.0, 0.0, 0.0}}); }

  // Convenience rotations expressed in the native set (exact, no phase).
  static Gate rx(int q, double theta) { return u3(q, theta, -kPi / 2, kPi / 2); }
  static Gate x(int q) { return u3(q, kPi, 0.0, kPi); }

  int arity() const { return kind == GateKind::CX ? 2 : 1; }
  bool is_two_qubit() const { return kind == GateKind::CX; }
  int control() const { return qubits[0]; }
  int target() const { return qubits[1]; }

  std::vector<int> targets() const {
    if (is_two_qubit()) return {qubits[0], qubits[1]};
    return {qubits[0]};
  }

  int n_params() const {
    switch (kind) {
      case GateKind::U3: return 3;
      case GateKind::U1:
      case GateKind::RY: return 1;
      case GateKind::CX: return 0;
    }
    return 0;
  }

  static Gate checked(Gate g) {
    for (double p : g.params)
      if (!std::isfinite(p)) throw std::invalid_argument("gate angle is not finite");
    if (g.qubits[0] < 0) throw std::invalid_argument("negative qubit index");
    if (g.kind == GateKind::CX) {
      if (g.qubits[1] < 0) throw std::invalid_argument("negative qubit index");
      if (g.qubits[0] == g.qubits[1]) throw std::invalid_argument("CX control equals target");
    }
    return g;
  }

  friend bool operator==(const Gate&, const Gate&) = default;
};

struct GateCounts {
  std::int64_t single_qubit = 0;
  std::int64_t two_qubit = 0;
  friend bool operator==(const GateCounts&, const GateCounts&) = default;
};

class Circuit {
 public:
  explicit Circuit(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits)
      throw std::invalid_argument("circuit width " + std::to_string(n_qubits) + " outside [1, 12]");
  }

  int n_qubits() const { return n_qubits_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  Circuit& add(const Gate& g) {
    Gate::checked(g);
    for (int q : g.targets())
      if (q >= n_qubits_)
        throw std::out_of_range("gate qubit " + std::to_string(q) + " out of range for " +
                                std::to_string(n_qubits_) + "-qubit circuit");
    gates_.push_back(g);
    return *this;
  }

  Circuit& append(const Circuit& other) {
    if (other.n_qubits_ > n_qubits_) throw std::invalid_argument("appended circuit is wider");
    for (const auto& g : other.gates_) add(g);
    return *this;
  }

  friend bool operator==(const Circuit&, const Circuit&) = default;

 private:
  int n_qubits_;
  std::vector<Gate> gates_;
};

inline CMatrix u3_matrix(double theta, double phi, double lambda) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  CMatrix m(2, 2);
  m << c, -std::exp(kI * lambda) * s, std::exp(kI * phi) * s, std::exp(kI * (phi + lambda)) * c;
  return m;
}

/// Local matrix of a gate. For CX the local basis bit 0 is the control and
/// bit 1 the target, matching Gate::targets().
inline CMatrix gate_unitary(const Gate& g) {
  switch (g.kind) {
    case GateKind::U3: return u3_matrix(g.params[0], g.params[1], g.params[2]);
    case GateKind::U1: {
      CMatrix m = CMatrix::Identity(2, 2);
      m(1, 1) = std::exp(kI * g.params[0]);
      return m;
    }
    case GateKind::RY: return u3_matrix(g.params[0], 0.0, 0.0);
    case GateKind::CX: {
      CMatrix m = CMatrix::Zero(4, 4);
      m(0, 0) = 1;
      m(2, 2) = 1;
      m(3, 1) = 1;
      m(1, 3) = 1;
      return m;
    }
  }
  throw std::logic_error("unhandled gate kind");
}

namespace detail {
inline void check_width(const Circuit& c, int n_qubits) {
  if (c.n_qubits() != n_qubits)
    throw std::invalid_argument("circuit width " + std::to_string(c.n_qubits()) + " does not match state width " +
                                std::to_string(n_qubits));
}
}  // namespace detail

inline QuantumState apply_circuit(const QuantumState& state, const Circuit& c) {
  detail::check_width(c, state.n_qubits());
  CMatrix col = state.amplitudes();
  for (const auto& g : c.gates()) {
    const auto t = g.targets();
    detail::apply_local_columns(col, gate_unitary(g), t, state.n_qubits());
  }
  return {state.n_qubits(), col.col(0)};
}

inline DensityMatrix apply_circuit(const DensityMatrix& rho, const Circuit& c) {
  detail::check_width(c, rho.n_qubits());
  CMatrix m = rho.elements();
  for (const auto& g : c.gates()) {
    const auto t = g.targets();
    detail::conjugate_local(m, gate_unitary(g), t, rho.n_qubits());
  }
  m = (m + m.adjoint()) * 0.5;
  return DensityMatrix::from_cptp_output(rho.n_qubits(), std::move(m));
}

/// Full 2^n x 2^n unitary of a circuit. Intended for small widths.
inline CMatrix circuit_unitary(const Circuit& c) {
  const auto d = static_cast<Eigen::Index>(dim_of(c.n_qubits()));
  CMatrix u = CMatrix::Identity(d, d);
  for (const auto& g : c.gates()) {
    const auto t = g.targets();
    detail::apply_local_columns(u, gate_unitary(g), t, c.n_qubits());
  }
  return u;
}

/// Replaces every CX by `stretch` consecutive copies. Since CX is self-inverse
/// the noiseless unitary is unchanged for odd stretch.
inline Circuit fold_cnots(const Circuit& c, int stretch) {
  if (stretch < 1 || stretch % 2 == 0)
    throw std::invalid_argument("stretch factor must be an odd integer >= 1, got " + std::to_string(stretch));
  Circuit out(c.n_qubits());
  for (const auto& g : c.gates()) {
    const int reps = g.is_two_qubit() ? stretch : 1;
    for (int r = 0; r < reps; ++r) out.add(g);
  }
  return out;
}

inline GateCounts count_gates(const Circuit& c) {
  GateCounts counts;
  for (const auto& g : c.gates()) (g.is_two_qubit() ? counts.two_qubit : counts.single_qubit) += 1;
  return counts;
}

inline Gate inverse(const Gate& g) {
  switch (g.kind) {
    case GateKind::U3: return Gate::u3(g.qubits[0], -g.params[0], -g.params[2], -g.params[1]);
    case GateKind::U1: return Gate::u1(g.qubits[0], -g.params[0]);
    case GateKind::RY: return Gate::ry(g.qubits[0], -g.params[0]);
    case GateKind::CX: return g;
  }
  throw std::logic_error("unhandled gate kind");
}

inline Circuit inverse(const Circuit& c) {
  Circuit out(c.n_qubits());
  for (auto it = c.gates().rbegin(); it != c.gates().rend(); ++it) out.add(inverse(*it));
  return out;
}

struct U3Angles {
  double theta = 0, phi = 0, lambda = 0;
};

/// Angles (θ, φ, λ) with U3(θ,φ,λ) equal to `u` up to a global phase.
inline U3Angles decompose_u3(const CMatrix& u) {
  if (u.rows() != 2 || u.cols() != 2) throw std::invalid_argument("decompose_u3 expects a 2x2 matrix");
  const double a = std::abs(u(0, 0)), b = std::abs(u(1, 0));
  U3Angles out;
  out.theta = 2.0 * std::atan2(b, a);
  constexpr double eps = 1e-14;
  if (b < eps) {
    out.lambda = std::arg(u(1, 1)) - std::arg(u(0, 0));
  } else if (a < eps) {
    out.phi = std::arg(u(1, 0));
    out.lambda = std::arg(-u(0, 1));
  } else {
    const double gamma = std::arg(u(0, 0));
    out.phi = std::arg(u(1, 0)) - gamma;
    out.lambda = std::arg(-u(0, 1)) - gamma;
  }
  return out;
}

/// Max elementwise deviation between a and b after removing the global phase.
inline double phase_insensitive_distance(const CMatrix& a, const CMatrix& b) {
  Eigen::Index r = 0, c = 0;
  b.cwiseAbs().maxCoeff(&r, &c);
  if (std::abs(b(r, c)) == 0.0) return a.cwiseAbs().maxCoeff();
  cplx phase = a(r, c) / b(r, c);
  if (std::abs(phase) > 0) phase /= std::abs(phase);
  return (a - phase * b).cwiseAbs().maxCoeff();
}

/// Merges runs of adjacent single-qubit gates on the same qubit into one U3.
/// The global phase of each run is dropped. Runs of length one are kept as is.
inline Circuit fuse_single_qubit_gates(const Circuit& c) {
  const int n = c.n_qubits();
  Circuit out(n);
  std::vector<CMatrix> pending(static_cast<std::size_t>(n));
  std::vector<std::vector<Gate>> run(static_cast<std::size_t>(n));

  auto flush = [&](int q) {
    auto& r = run[static_cast<std::size_t>(q)];
    if (r.size() == 1) {
      out.add(r.front());
    } else if (r.size() > 1) {
      const CMatrix& m = pending[static_cast<std::size_t>(q)];
      if (phase_insensitive_distance(m, CMatrix::Identity(2, 2)) > 1e-14) {
        const auto ang = decompose_u3(m);
        out.add(Gate::u3(q, ang.theta, ang.phi, ang.lambda));
      }
    }
    r.clear();
  };

  for (const auto& g : c.gates()) {
    if (g.is_two_qubit()) {
      flush(g.control());
      flush(g.target());
      out.add(g);
      continue;
    }
    const auto q = static_cast<std::size_t>(g.qubits[0]);
    if (run[q].empty()) pending[q] = CMatrix::Identity(2, 2);
    pending[q] = gate_unitary(g) * pending[q];
    run[q].push_back(g);
  }
  for (int q = 0; q < n; ++q) flush(q);
  return out;
}

}  // namespace dqsim

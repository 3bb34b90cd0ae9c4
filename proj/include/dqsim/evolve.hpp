#pragma once

// Time evolution: the exact time-ordered integrator and the Trotter compiler.

#include "dqsim/circuit.hpp"
#include "dqsim/models.hpp"
#include "dqsim/qcore.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dqsim {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model with a time-independent term list.
class StaticModel {
 public:
  explicit StaticModel(ModelTerms terms) : terms_(std::move(terms)) {}
  int n_qubits() const { return terms_.n_qubits; }
  ModelTerms terms(double) const { return terms_; }

 private:
  ModelTerms terms_;
};

// ---------------------------------------------------------------------------
// Exact evolution
// ---------------------------------------------------------------------------

/// exp(-i H dt) v by a scaled Taylor series; H is applied matrix-free.
inline CMatrix expmv(const ModelTerms& terms, CMatrix v, double dt) {
  const double nb = norm_bound(terms) * std::abs(dt);
  if (nb == 0.0) return v;
  const int chunks = std::max(1, static_cast<int>(std::ceil(nb / 0.5)));
  const double h = dt / chunks;
  for (int c = 0; c < chunks; ++c) {
    CMatrix term = v;
    CMatrix acc = v;
    for (int k = 1; k <= 60; ++k) {
      term = apply_hamiltonian(terms, term) * (cplx(0.0, -h) / static_cast<double>(k));
      acc += term;
      if (term.norm() <= 1e-17 * acc.norm()) break;
    }
    v = std::move(acc);
  }
  return v;
}

struct ExactOptions {
  std::int64_t substeps = 1;
  double tolerance = 1e-9;
  std::int64_t max_substeps = std::int64_t{1} << 20;
};

namespace detail {

template <TimeDependentModel Model>
CMatrix midpoint_product(const Model& model, const CMatrix& cols, double t0, double t1, std::int64_t n) {
  CMatrix v = cols;
  const double delta = (t1 - t0) / static_cast<double>(n);
  for (std::int64_t k = 0; k < n; ++k) {
    const double tm = t0 + (static_cast<double>(k) + 0.5) * delta;
    v = expmv(model.terms(tm), std::move(v), delta);
  }
  return v;
}

template <TimeDependentModel Model>
CMatrix converged_evolution(const Model& model, const CMatrix& cols, double t0, double t1, const ExactOptions& opt) {
  if (opt.substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  if (t1 == t0) return cols;
  CMatrix prev = midpoint_product(model, cols, t0, t1, opt.substeps);
  for (std::int64_t n = 2 * opt.substeps; n <= opt.max_substeps; n *= 2) {
    CMatrix cur = midpoint_product(model, cols, t0, t1, n);
    if ((cur - prev).norm() < opt.tolerance) return cur;
    prev = std::move(cur);
  }
  throw ConvergenceError("exact evolution did not converge to " + std::to_string(opt.tolerance) + " within " +
                         std::to_string(opt.max_substeps) + " substeps");
}

}  // namespace detail

template <TimeDependentModel Model>
QuantumState exact_evolve(const Model& model, const QuantumState& psi, double t_start, double t_end,
                          const ExactOptions& opt = {}) {
  if (psi.n_qubits() != model.n_qubits()) throw std::invalid_argument("state width does not match model");
  CMatrix v = detail::converged_evolution(model, psi.amplitudes(), t_start, t_end, opt);
  return {psi.n_qubits(), v.col(0)};
}

/// Mixed states are evolved through their eigenvectors: rho = sum_k p_k |k><k|.
template <TimeDependentModel Model>
DensityMatrix exact_evolve(const Model& model, const DensityMatrix& rho, double t_start, double t_end,
                           const ExactOptions& opt = {}) {
  if (rho.n_qubits() != model.n_qubits()) throw std::invalid_argument("state width does not match model");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.elements());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
    if (es.eigenvalues()(k) > 1e-15) keep.push_back(k);
  CMatrix cols(rho.elements().rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    cols.col(static_cast<Eigen::Index>(c)) = std::sqrt(es.eigenvalues()(keep[c])) * es.eigenvectors().col(keep[c]);
  CMatrix out = detail::converged_evolution(model, cols, t_start, t_end, opt);
  CMatrix m = out * out.adjoint();
  m /= m.trace().real();
  m = (m + m.adjoint()) * 0.5;
  return DensityMatrix::from_cptp_output(rho.n_qubits(), std::move(m));
}

// ---------------------------------------------------------------------------
// Trotter compilation
// ---------------------------------------------------------------------------

struct TrotterPlan {
  int order = 2;
  double dt = 0.1;
  int n_steps = 0;
  double t_start = 0.0;
  bool merge_half_steps = true;
  bool fuse_single_qubit = true;

  void validate() const {
    if (order != 1 && order != 2) throw std::invalid_argument("Trotter order must be 1 or 2");
    if (!(dt > 0.0)) throw std::invalid_argument("Trotter step dt must be positive");
    if (n_steps < 0) throw std::invalid_argument("number of Trotter steps must be non-negative");
  }
};

/// A: bonds at even list positions plus every field term. B: the other bonds.
struct TermSplit {
  std::vector<BondTerm> a_bonds;
  std::vector<BondTerm> b_bonds;
  std::vector<FieldTerm> fields;
};

inline TermSplit partition(const ModelTerms& terms) {
  TermSplit s;
  for (std::size_t k = 0; k < terms.bonds.size(); ++k) (k % 2 == 0 ? s.a_bonds : s.b_bonds).push_back(terms.bonds[k]);
  s.fields = terms.fields;
  return s;
}

namespace detail {

inline CMatrix local_bond_operator(const BondTerm& b) {
  const CMatrix xx = kron(pauli::X(), pauli::X());
  const CMatrix yy = kron(pauli::Y(), pauli::Y());
  const CMatrix zz = kron(pauli::Z(), pauli::Z());
  return 0.25 * b.j_perp * (xx + yy) + 0.25 * b.j_z * zz;
}

/// Gates on local qubits (0, 1) for exp(-i tau [J_perp/4 (XX+YY) + J_z/4 ZZ]).
inline Circuit local_bond_circuit(const BondTerm& b, double tau) {
  Circuit c(2);
  if (b.j_perp == 0.0 && b.j_z == 0.0) return c;
  if (b.j_z == 0.0) {
    const double a = tau * b.j_perp / 4.0;
    c.add(Gate::rx(0, -kPi / 2)).add(Gate::rx(1, -kPi / 2));
    c.add(Gate::cx(0, 1));
    c.add(Gate::rx(0, 2.0 * a)).add(Gate::u1(1, 2.0 * a));
    c.add(Gate::cx(0, 1));
    c.add(Gate::rx(0, kPi / 2)).add(Gate::rx(1, kPi / 2));
    return c;
  }
  if (b.j_perp == 0.0) {
    const double z = tau * b.j_z / 4.0;
    c.add(Gate::cx(0, 1)).add(Gate::u1(1, 2.0 * z)).add(Gate::cx(0, 1));
    return c;
  }
  // exp(i(alpha XX + beta YY + gamma ZZ)) in three CX.
  const double alpha = -tau * b.j_perp / 4.0;
  const double beta = alpha;
  const double gamma = -tau * b.j_z / 4.0;
  c.add(Gate::u1(0, -kPi / 2));
  c.add(Gate::cx(0, 1));
  c.add(Gate::u1(1, kPi / 2 - 2.0 * gamma)).add(Gate::ry(0, 2.0 * alpha - kPi / 2));
  c.add(Gate::cx(1, 0));
  c.add(Gate::ry(0, kPi / 2 - 2.0 * beta));
  c.add(Gate::cx(0, 1));
  c.add(Gate::u1(1, kPi / 2));
  return c;
}

inline Gate remap(const Gate& g, int q0, int q1) {
  Gate out = g;
  auto map = [&](int q) { return q == 0 ? q0 : q1; };
  out.qubits[0] = map(g.qubits[0]);
  if (g.is_two_qubit()) out.qubits[1] = map(g.qubits[1]);
  return out;
}

}  // namespace detail

/// Appends the bond factor to `c`, after checking the local block against
/// the matrix exponential of the bond term.
inline void emit_bond(Circuit& c, const BondTerm& b, double tau) {
  const Circuit local = detail::local_bond_circuit(b, tau);
  const CMatrix target = expm_hermitian(detail::local_bond_operator(b), tau);
  const double err = phase_insensitive_distance(circuit_unitary(local), target);
  if (err > 1e-10)
    throw std::logic_error("bond decomposition self-check failed (deviation " + std::to_string(err) + ")");
  for (const auto& g : local.gates()) c.add(detail::remap(g, b.i, b.j));
}

/// One U3 equal to exp(-i tau (hx X + hy Y + hz Z)/2) up to a global phase.
inline void emit_field(Circuit& c, const FieldTerm& f, double tau) {
  const CMatrix h = 0.5 * (f.hx * pauli::X() + f.hy * pauli::Y() + f.hz * pauli::Z());
  const auto ang = decompose_u3(expm_hermitian(h, tau));
  c.add(Gate::u3(f.site, ang.theta, ang.phi, ang.lambda));
}

namespace detail {

enum class LayerKind { Bonds, Fields };

struct Layer {
  LayerKind kind;
  std::vector<BondTerm> bonds;
  std::vector<FieldTerm> fields;
  double tau;
  int step;
};

inline void push_bonds(std::vector<Layer>& out, const std::vector<BondTerm>& bonds, double tau, int step) {
  if (!bonds.empty()) out.push_back({LayerKind::Bonds, bonds, {}, tau, step});
}

inline void push_fields(std::vector<Layer>& out, const std::vector<FieldTerm>& fields, double tau, int step) {
  if (!fields.empty()) out.push_back({LayerKind::Fields, {}, fields, tau, step});
}

inline void step_layers(std::vector<Layer>& out, const TermSplit& s, double dt, int order, int step) {
  if (order == 1) {
    push_bonds(out, s.a_bonds, dt, step);
    push_fields(out, s.fields, dt, step);
    push_bonds(out, s.b_bonds, dt, step);
    return;
  }
  std::vector<Layer> layers;
  push_bonds(layers, s.a_bonds, dt / 2, step);
  push_fields(layers, s.fields, dt / 2, step);
  push_bonds(layers, s.b_bonds, dt, step);
  push_fields(layers, s.fields, dt / 2, step);
  push_bonds(layers, s.a_bonds, dt / 2, step);
  // Empty layers leave identical neighbours (a single bond gives A/2 A/2);
  // those are one factor.
  for (auto& l : layers) {
    if (!out.empty() && out.back().step == step && out.back().kind == l.kind && out.back().bonds == l.bonds &&
        out.back().fields == l.fields)
      out.back().tau += l.tau;
    else
      out.push_back(std::move(l));
  }
}

/// Emits a run of bonds. Bonds sharing a site do not commute, so an
/// overlapping group is emitted palindromically to stay second order.
inline void emit_bond_layer(Circuit& c, const std::vector<BondTerm>& bonds, double tau) {
  std::vector<bool> used(static_cast<std::size_t>(c.n_qubits()), false);
  bool overlap = false;
  for (const auto& b : bonds) {
    if (used[static_cast<std::size_t>(b.i)] || used[static_cast<std::size_t>(b.j)]) overlap = true;
    used[static_cast<std::size_t>(b.i)] = used[static_cast<std::size_t>(b.j)] = true;
  }
  if (!overlap) {
    for (const auto& b : bonds) emit_bond(c, b, tau);
    return;
  }
  for (std::size_t k = 0; k + 1 < bonds.size(); ++k) emit_bond(c, bonds[k], tau / 2);
  emit_bond(c, bonds.back(), tau);
  for (std::size_t k = bonds.size() - 1; k-- > 0;) emit_bond(c, bonds[k], tau / 2);
}

inline Circuit emit_layers(int n_qubits, const std::vector<Layer>& layers, bool fuse) {
  Circuit out(n_qubits);
  std::size_t k = 0;
  while (k < layers.size()) {
    // Gates of one step form a segment; fusion never crosses segments.
    Circuit seg(n_qubits);
    const int step = layers[k].step;
    for (; k < layers.size() && layers[k].step == step; ++k) {
      const Layer& l = layers[k];
      if (l.kind == LayerKind::Bonds) emit_bond_layer(seg, l.bonds, l.tau);
      else
        for (const auto& f : l.fields) emit_field(seg, f, l.tau);
    }
    out.append(fuse ? fuse_single_qubit_gates(seg) : seg);
  }
  return out;
}

}  // namespace detail

/// One step at time t. Every factor is evaluated at the midpoint t + dt/2.
template <TimeDependentModel Model>
Circuit compile_trotter_step(const Model& model, double t, double dt, int order = 2, bool fuse = true) {
  TrotterPlan{order, dt, 1}.validate();
  std::vector<detail::Layer> layers;
  detail::step_layers(layers, partition(model.terms(t + dt / 2)), dt, order, 0);
  return detail::emit_layers(model.n_qubits(), layers, fuse);
}

/// The full evolution circuit for `plan`. With merging on, the closing A-bond
/// half of one step and the opening half of the next become a single factor
/// whenever their bond parameters agree.
template <TimeDependentModel Model>
Circuit compile_evolution(const Model& model, const TrotterPlan& plan) {
  plan.validate();
  std::vector<detail::Layer> layers;
  for (int s = 0; s < plan.n_steps; ++s) {
    const double t = plan.t_start + s * plan.dt;
    std::vector<detail::Layer> step;
    detail::step_layers(step, partition(model.terms(t + plan.dt / 2)), plan.dt, plan.order, s);
    std::size_t first = 0;
    if (plan.merge_half_steps && plan.order == 2 && !layers.empty() && !step.empty()) {
      auto& last = layers.back();
      const auto& head = step.front();
      if (last.kind == detail::LayerKind::Bonds && head.kind == detail::LayerKind::Bonds && last.bonds == head.bonds) {
        last.tau += head.tau;
        first = 1;
      }
    }
    for (std::size_t k = first; k < step.size(); ++k) layers.push_back(step[k]);
  }
  return detail::emit_layers(model.n_qubits(), layers, plan.fuse_single_qubit);
}

template <class State>
struct EvolutionRecord {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<Circuit> circuits;
  std::vector<GateCounts> gate_counts;
};

/// States after 0..n_steps steps. Each time point is compiled as a fresh
/// circuit from t_start, the way a device run would be.
template <TimeDependentModel Model, class State>
EvolutionRecord<State> evolve_trotterized(const Model& model, const State& initial, const TrotterPlan& plan) {
  plan.validate();
  EvolutionRecord<State> rec;
  for (int k = 0; k <= plan.n_steps; ++k) {
    TrotterPlan p = plan;
    p.n_steps = k;
    Circuit c = compile_evolution(model, p);
    rec.times.push_back(plan.t_start + k * plan.dt);
    rec.states.push_back(apply_circuit(initial, c));
    rec.gate_counts.push_back(count_gates(c));
    rec.circuits.push_back(std::move(c));
  }
  return rec;
}

}  // namespace dqsim

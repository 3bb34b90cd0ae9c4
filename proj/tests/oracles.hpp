#pragma once

// Closed-form references shared by the unit tests and the acceptance runner.

#include "dqsim/dqsim.hpp"

#include <algorithm>
#include <cmath>

namespace dqsim::testing {

/// Distance between pure states after aligning the global phase.
inline double state_error(const QuantumState& a, const QuantumState& b) {
  const cplx ov = b.amplitudes().dot(a.amplitudes());
  const cplx phase = std::abs(ov) > 0 ? ov / std::abs(ov) : cplx(1.0);
  return (a.amplitudes() - phase * b.amplitudes()).norm();
}

/// P(|1>) for the precessing field, solved in the co-rotating frame where the
/// Hamiltonian is constant and its exponential has a closed form.
inline double rabi_closed_form(const RabiParams& p, double t) {
  const double hx = 0.5 * p.H0 * std::sin(p.Theta);
  const double hz = 0.5 * (p.H0 * std::cos(p.Theta) - p.omega);
  const double w = std::hypot(hx, hz);
  const cplx a0 = std::cos(p.alpha / 2), a1 = std::sin(p.alpha / 2);
  // exp(-i t (hx X + hz Z)) = cos(wt) - i sin(wt) (hx X + hz Z) / w
  const double c = std::cos(w * t), s = w > 0 ? std::sin(w * t) / w : t;
  const cplx b1 = c * a1 - kI * s * (hx * a0 - hz * a1);
  return std::norm(b1);
}

/// Largest deviation of the Trotterized Rabi lane from the closed form.
inline double max_rabi_error(double dt, int n_steps, const RabiParams& p = {}) {
  Circuit prep(1);
  prep.add(Gate::ry(0, p.alpha));
  const auto rec = evolve_trotterized(RabiModel(p), apply_circuit(QuantumState::zero(1), prep), TrotterPlan{2, dt, n_steps});
  double worst = 0.0;
  for (std::size_t k = 0; k < rec.times.size(); ++k)
    worst = std::max(worst, std::abs(rec.states[k].probabilities()[1] - rabi_closed_form(p, rec.times[k])));
  return worst;
}

}  // namespace dqsim::testing

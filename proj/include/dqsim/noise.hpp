#pragma once

// Device calibration records, gate-level noise channels, readout confusion
// and seeded shot sampling.

#include "dqsim/circuit.hpp"
#include "dqsim/qcore.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dqsim {

// ---------------------------------------------------------------------------
// Calibration data
// ---------------------------------------------------------------------------

struct QubitCalibration {
  int qubit = 0;
  double t1_us = std::numeric_limits<double>::infinity();
  double t2_us = std::numeric_limits<double>::infinity();
  double u3_error = 0.0;
  double readout_error = 0.0;
};

struct EdgeCalibration {
  int control = 0;
  int target = 1;
  double cnot_error = 0.0;
};

class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct DeviceCalibration {
  std::string device;
  std::string date;
  std::vector<QubitCalibration> qubits;
  std::vector<EdgeCalibration> cnots;

  const QubitCalibration& qubit(int id) const {
    for (const auto& q : qubits)
      if (q.qubit == id) return q;
    throw std::out_of_range("qubit " + std::to_string(id) + " not in calibration for " + device);
  }

  /// Error of a CX between a and b in either direction.
  std::optional<double> cnot_error(int a, int b) const {
    for (const auto& e : cnots)
      if ((e.control == a && e.target == b) || (e.control == b && e.target == a)) return e.cnot_error;
    return std::nullopt;
  }

  double mean_cnot_error() const {
    if (cnots.empty()) return 0.0;
    double s = 0.0;
    for (const auto& e : cnots) s += e.cnot_error;
    return s / static_cast<double>(cnots.size());
  }
};

namespace detail {

inline double json_number(const nlohmann::json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw CalibrationError(path + "." + key, "missing field");
  if (!j.at(key).is_number()) throw CalibrationError(path + "." + key, "expected a number");
  return j.at(key).get<double>();
}

inline int json_int(const nlohmann::json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw CalibrationError(path + "." + key, "missing field");
  if (!j.at(key).is_number_integer()) throw CalibrationError(path + "." + key, "expected an integer");
  return j.at(key).get<int>();
}

inline void check_rate(double v, const std::string& path) {
  if (!(v >= 0.0 && v <= 1.0)) throw CalibrationError(path, "rate " + std::to_string(v) + " outside [0, 1]");
}

}  // namespace detail

inline DeviceCalibration parse_calibration(const nlohmann::json& j) {
  if (!j.is_object()) throw CalibrationError("$", "expected an object");
  DeviceCalibration cal;
  if (!j.contains("device") || !j.at("device").is_string()) throw CalibrationError("$.device", "missing string");
  cal.device = j.at("device").get<std::string>();
  if (j.contains("date")) {
    if (!j.at("date").is_string()) throw CalibrationError("$.date", "expected a string");
    cal.date = j.at("date").get<std::string>();
  }
  if (!j.contains("qubits") || !j.at("qubits").is_array()) throw CalibrationError("$.qubits", "missing array");
  const auto& qs = j.at("qubits");
  for (std::size_t k = 0; k < qs.size(); ++k) {
    const std::string path = "$.qubits[" + std::to_string(k) + "]";
    const auto& e = qs[k];
    if (!e.is_object()) throw CalibrationError(path, "expected an object");
    QubitCalibration q;
    q.qubit = detail::json_int(e, "qubit", path);
    q.t1_us = detail::json_number(e, "t1_us", path);
    q.t2_us = detail::json_number(e, "t2_us", path);
    q.u3_error = detail::json_number(e, "u3_error", path);
    q.readout_error = detail::json_number(e, "readout_error", path);
    if (!(q.t1_us > 0.0)) throw CalibrationError(path + ".t1_us", "must be positive");
    if (!(q.t2_us > 0.0)) throw CalibrationError(path + ".t2_us", "must be positive");
    detail::check_rate(q.u3_error, path + ".u3_error");
    detail::check_rate(q.readout_error, path + ".readout_error");
    for (const auto& other : cal.qubits)
      if (other.qubit == q.qubit) throw CalibrationError(path + ".qubit", "duplicate qubit " + std::to_string(q.qubit));
    cal.qubits.push_back(q);
  }
  if (j.contains("cnots")) {
    const auto& cs = j.at("cnots");
    if (!cs.is_array()) throw CalibrationError("$.cnots", "expected an array");
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const std::string path = "$.cnots[" + std::to_string(k) + "]";
      const auto& e = cs[k];
      if (!e.is_object()) throw CalibrationError(path, "expected an object");
      EdgeCalibration c;
      c.control = detail::json_int(e, "control", path);
      c.target = detail::json_int(e, "target", path);
      c.cnot_error = detail::json_number(e, "cnot_error", path);
      if (c.control == c.target) throw CalibrationError(path, "control equals target");
      detail::check_rate(c.cnot_error, path + ".cnot_error");
      cal.cnots.push_back(c);
    }
  }
  return cal;
}

inline DeviceCalibration load_calibration(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw CalibrationError(file.string(), "cannot open calibration file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw CalibrationError(file.string(), std::string("malformed JSON: ") + e.what());
  }
  return parse_calibration(j);
}

inline nlohmann::json to_json(const DeviceCalibration& cal) {
  nlohmann::json j;
  j["device"] = cal.device;
  j["date"] = cal.date;
  j["qubits"] = nlohmann::json::array();
  for (const auto& q : cal.qubits)
    j["qubits"].push_back(
        {{"qubit", q.qubit}, {"t1_us", q.t1_us}, {"t2_us", q.t2_us}, {"u3_error", q.u3_error}, {"readout_error", q.readout_error}});
  j["cnots"] = nlohmann::json::array();
  for (const auto& c : cal.cnots)
    j["cnots"].push_back({{"control", c.control}, {"target", c.target}, {"cnot_error", c.cnot_error}});
  return j;
}

// ---------------------------------------------------------------------------
// Channels
// ---------------------------------------------------------------------------

inline QuantumChannel depolarizing_channel(double p, int n_qubits) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("depolarizing rate outside [0, 1]");
  // (1-p) rho + p I/d Tr rho written with the 4^n Pauli strings.
  const std::size_t n_strings = std::size_t{1} << (2 * n_qubits);
  const double w_id = 1.0 - p + p / static_cast<double>(n_strings);
  const double w = p / static_cast<double>(n_strings);
  std::vector<CMatrix> kraus;
  for (std::size_t s = 0; s < n_strings; ++s) {
    CMatrix op = CMatrix::Identity(1, 1);
    for (int q = n_qubits - 1; q >= 0; --q) op = kron(op, pauli::by_label("IXYZ"[(s >> (2 * q)) & 3]));
    kraus.push_back(std::sqrt(s == 0 ? w_id : w) * op);
  }
  return QuantumChannel(std::move(kraus));
}

inline QuantumChannel amplitude_damping_channel(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("damping probability outside [0, 1]");
  CMatrix k0 = CMatrix::Zero(2, 2), k1 = CMatrix::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - gamma);
  k1(0, 1) = std::sqrt(gamma);
  return QuantumChannel({k0, k1});
}

inline QuantumChannel dephasing_channel(double p) {
  if (!(p >= 0.0 && p <= 0.5)) throw std::invalid_argument("dephasing probability outside [0, 1/2]");
  return QuantumChannel({std::sqrt(1.0 - p) * pauli::I(), std::sqrt(p) * pauli::Z()});
}

namespace detail {

/// rho -> (1-p) rho + p (I/2^k on `qubits`) x Tr_qubits rho.
inline void depolarize_inplace(CMatrix& m, std::span<const int> qubits, double p) {
  if (p == 0.0) return;
  std::size_t mask = 0;
  for (int q : qubits) mask |= std::size_t{1} << q;
  const auto d = static_cast<std::size_t>(m.rows());
  const std::size_t k = qubits.size();
  const std::size_t sub = std::size_t{1} << k;
  const auto offsets = local_offsets(qubits);
  CMatrix out = (1.0 - p) * m;
  const double w = p / static_cast<double>(sub);
  for (std::size_t r0 = 0; r0 < d; ++r0) {
    if (r0 & mask) continue;
    for (std::size_t c0 = 0; c0 < d; ++c0) {
      if (c0 & mask) continue;
      cplx tr = 0.0;
      for (std::size_t x = 0; x < sub; ++x)
        tr += m(static_cast<Eigen::Index>(r0 + offsets[x]), static_cast<Eigen::Index>(c0 + offsets[x]));
      for (std::size_t x = 0; x < sub; ++x)
        out(static_cast<Eigen::Index>(r0 + offsets[x]), static_cast<Eigen::Index>(c0 + offsets[x])) += w * tr;
    }
  }
  m = std::move(out);
}

inline void amplitude_damp_inplace(CMatrix& m, int q, double gamma) {
  if (gamma == 0.0) return;
  const std::size_t bit = std::size_t{1} << q;
  const auto d = static_cast<std::size_t>(m.rows());
  const double s = std::sqrt(1.0 - gamma);
  for (std::size_t r = 0; r < d; ++r) {
    if (r & bit) continue;
    for (std::size_t c = 0; c < d; ++c) {
      if (c & bit) continue;
      const auto R0 = static_cast<Eigen::Index>(r), R1 = static_cast<Eigen::Index>(r | bit);
      const auto C0 = static_cast<Eigen::Index>(c), C1 = static_cast<Eigen::Index>(c | bit);
      m(R0, C0) += gamma * m(R1, C1);
      m(R0, C1) *= s;
      m(R1, C0) *= s;
      m(R1, C1) *= 1.0 - gamma;
    }
  }
}

inline void dephase_inplace(CMatrix& m, int q, double p) {
  if (p == 0.0) return;
  const std::size_t bit = std::size_t{1} << q;
  const double f = 1.0 - 2.0 * p;
  const auto d = static_cast<std::size_t>(m.rows());
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      if (((r ^ c) & bit) != 0) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) *= f;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Noise model
// ---------------------------------------------------------------------------

struct GateDurations {
  double single_ns = 35.0;
  double cx_ns = 300.0;
};

struct QubitNoise {
  double u3_error = 0.0;
  double t1_us = std::numeric_limits<double>::infinity();
  double t2_us = std::numeric_limits<double>::infinity();
  double readout_error = 0.0;
};

/// Per-gate noise on circuit qubits 0..n-1: unitary, then depolarizing at the
/// gate error rate, then amplitude damping and pure dephasing for the gate
/// duration on each qubit the gate touches.
class NoiseModel {
 public:
  NoiseModel(std::vector<QubitNoise> qubits, std::map<std::pair<int, int>, double> cx_errors, double default_cx_error,
             GateDurations durations = {})
      : qubits_(std::move(qubits)), default_cx_(default_cx_error), durations_(durations) {
    if (qubits_.empty() || static_cast<int>(qubits_.size()) > kMaxQubits)
      throw std::invalid_argument("noise model width outside [1, 12]");
    for (const auto& q : qubits_) {
      if (!(q.u3_error >= 0.0 && q.u3_error <= 1.0)) throw std::invalid_argument("u3 error outside [0, 1]");
      if (!(q.readout_error >= 0.0 && q.readout_error <= 1.0)) throw std::invalid_argument("readout error outside [0, 1]");
      if (!(q.t1_us > 0.0) || !(q.t2_us > 0.0)) throw std::invalid_argument("t1 and t2 must be positive");
    }
    if (!(default_cx_ >= 0.0 && default_cx_ <= 1.0)) throw std::invalid_argument("CX error outside [0, 1]");
    if (!(durations_.single_ns >= 0.0) || !(durations_.cx_ns >= 0.0)) throw std::invalid_argument("negative gate duration");
    for (const auto& [edge, e] : cx_errors) {
      if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("CX error outside [0, 1]");
      cx_[std::minmax(edge.first, edge.second)] = e;
    }
  }

  static NoiseModel ideal(int n_qubits) {
    return {std::vector<QubitNoise>(static_cast<std::size_t>(n_qubits)), {}, 0.0};
  }

  /// Two-qubit depolarizing at rate p after every CX and nothing else.
  static NoiseModel cx_depolarizing(int n_qubits, double p) {
    return {std::vector<QubitNoise>(static_cast<std::size_t>(n_qubits)), {}, p};
  }

  /// layout[i] is the device qubit hosting circuit qubit i. CX pairs absent
  /// from the calibration use the device's mean CX error.
  static NoiseModel from_calibration(const DeviceCalibration& cal, std::span<const int> layout,
                                     GateDurations durations = {}) {
    std::vector<QubitNoise> qs;
    for (int dev : layout) {
      const auto& c = cal.qubit(dev);
      qs.push_back({c.u3_error, c.t1_us, c.t2_us, c.readout_error});
    }
    std::map<std::pair<int, int>, double> cx;
    for (std::size_t a = 0; a < layout.size(); ++a)
      for (std::size_t b = a + 1; b < layout.size(); ++b)
        if (auto e = cal.cnot_error(layout[a], layout[b])) cx[{static_cast<int>(a), static_cast<int>(b)}] = *e;
    return {std::move(qs), std::move(cx), cal.mean_cnot_error(), durations};
  }

  int n_qubits() const { return static_cast<int>(qubits_.size()); }
  const QubitNoise& qubit(int q) const { return qubits_.at(static_cast<std::size_t>(q)); }
  const GateDurations& durations() const { return durations_; }

  double cx_error(int a, int b) const {
    auto it = cx_.find(std::minmax(a, b));
    return it == cx_.end() ? default_cx_ : it->second;
  }

  std::vector<double> readout_errors() const {
    std::vector<double> out;
    for (const auto& q : qubits_) out.push_back(q.readout_error);
    return out;
  }

  NoiseModel without_readout() const {
    NoiseModel m = *this;
    for (auto& q : m.qubits_) q.readout_error = 0.0;
    return m;
  }

  static double damping_probability(double duration_ns, double t1_us) {
    if (std::isinf(t1_us)) return 0.0;
    return 1.0 - std::exp(-duration_ns * 1e-3 / t1_us);
  }

  /// Pure-dephasing flip probability: 1/T_phi = 1/t2 - 1/(2 t1), clamped at 0.
  static double dephasing_probability(double duration_ns, double t1_us, double t2_us) {
    const double rate = (std::isinf(t2_us) ? 0.0 : 1.0 / t2_us) - (std::isinf(t1_us) ? 0.0 : 0.5 / t1_us);
    if (rate <= 0.0) return 0.0;
    return 0.5 * (1.0 - std::exp(-duration_ns * 1e-3 * rate));
  }

  /// Applies one gate and its noise to m in place.
  void apply_gate(CMatrix& m, const Gate& g) const {
    const auto t = g.targets();
    detail::conjugate_local(m, gate_unitary(g), t, n_qubits());
    const double dur = g.is_two_qubit() ? durations_.cx_ns : durations_.single_ns;
    const double p = g.is_two_qubit() ? cx_error(g.control(), g.target()) : qubit(g.qubits[0]).u3_error;
    detail::depolarize_inplace(m, t, p);
    for (int q : t) {
      const auto& qn = qubit(q);
      detail::amplitude_damp_inplace(m, q, damping_probability(dur, qn.t1_us));
      detail::dephase_inplace(m, q, dephasing_probability(dur, qn.t1_us, qn.t2_us));
    }
  }

 private:
  std::vector<QubitNoise> qubits_;
  std::map<std::pair<int, int>, double> cx_;
  double default_cx_;
  GateDurations durations_;
};

inline DensityMatrix apply_noisy_circuit(const DensityMatrix& rho, const Circuit& c, const NoiseModel& nm) {
  if (c.n_qubits() != rho.n_qubits() || nm.n_qubits() != rho.n_qubits())
    throw std::invalid_argument("circuit, noise model and state widths differ");
  CMatrix m = rho.elements();
  for (const auto& g : c.gates()) nm.apply_gate(m, g);
  m = (m + m.adjoint()) * 0.5;
  m /= m.trace().real();
  return DensityMatrix::from_cptp_output(rho.n_qubits(), std::move(m));
}

// ---------------------------------------------------------------------------
// Readout
// ---------------------------------------------------------------------------

/// Lambda(j, i) = P(measure j | prepared i); columns are distributions.
class ConfusionMatrix {
 public:
  ConfusionMatrix(int n_qubits, RMatrix m) : n_(n_qubits), m_(std::move(m)) {
    const auto d = static_cast<Eigen::Index>(dim_of(n_qubits));
    if (m_.rows() != d || m_.cols() != d) throw std::invalid_argument("confusion matrix must be 2^n x 2^n");
    if (m_.minCoeff() < 0.0) throw std::invalid_argument("confusion matrix has negative entries");
    for (Eigen::Index c = 0; c < d; ++c)
      if (std::abs(m_.col(c).sum() - 1.0) > 1e-12) throw std::invalid_argument("confusion matrix column does not sum to 1");
  }

  static ConfusionMatrix identity(int n_qubits) {
    const auto d = static_cast<Eigen::Index>(dim_of(n_qubits));
    return {n_qubits, RMatrix::Identity(d, d)};
  }

  int n_qubits() const { return n_; }
  const RMatrix& matrix() const { return m_; }
  double operator()(std::size_t measured, std::size_t prepared) const {
    return m_(static_cast<Eigen::Index>(measured), static_cast<Eigen::Index>(prepared));
  }

  std::vector<double> apply(std::span<const double> p) const {
    if (static_cast<Eigen::Index>(p.size()) != m_.cols()) throw std::invalid_argument("probability vector length mismatch");
    const RVector out = m_ * Eigen::Map<const RVector>(p.data(), static_cast<Eigen::Index>(p.size()));
    return {out.data(), out.data() + out.size()};
  }

 private:
  int n_;
  RMatrix m_;
};

/// Tensor product of symmetric bit-flip matrices, qubit 0 least significant.
inline ConfusionMatrix build_confusion(std::span<const double> eps) {
  if (eps.empty()) throw std::invalid_argument("build_confusion needs at least one qubit");
  RMatrix m = RMatrix::Identity(1, 1);
  for (double e : eps) {
    if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("readout error outside [0, 1]");
    RMatrix q(2, 2);
    q << 1.0 - e, e, e, 1.0 - e;
    RMatrix next(q.rows() * m.rows(), q.cols() * m.cols());
    for (Eigen::Index r = 0; r < q.rows(); ++r)
      for (Eigen::Index c = 0; c < q.cols(); ++c) next.block(r * m.rows(), c * m.cols(), m.rows(), m.cols()) = q(r, c) * m;
    m = std::move(next);
  }
  return {static_cast<int>(eps.size()), std::move(m)};
}

inline ConfusionMatrix build_confusion(const DeviceCalibration& cal, std::span<const int> layout) {
  std::vector<double> eps;
  for (int q : layout) eps.push_back(cal.qubit(q).readout_error);
  return build_confusion(eps);
}

inline ConfusionMatrix build_confusion(const NoiseModel& nm) { return build_confusion(nm.readout_errors()); }

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for an independent sub-task, so results never depend on execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t task) {
  return splitmix64(splitmix64(master) ^ splitmix64(task + 0x632be59bd9b4e019ULL));
}

inline std::string to_bitstring(std::size_t index, int n_qubits) {
  std::string s(static_cast<std::size_t>(n_qubits), '0');
  for (int q = 0; q < n_qubits; ++q)
    if (bit_of(index, q)) s[static_cast<std::size_t>(n_qubits - 1 - q)] = '1';
  return s;
}

inline std::size_t from_bitstring(const std::string& s) {
  std::size_t idx = 0;
  for (char ch : s) {
    if (ch != '0' && ch != '1') throw std::invalid_argument("bitstring contains '" + std::string(1, ch) + "'");
    idx = (idx << 1) | static_cast<std::size_t>(ch == '1');
  }
  return idx;
}

/// Outcome counts keyed by bitstring, qubit 0 rightmost.
class CountsHistogram {
 public:
  CountsHistogram(int n_qubits, std::map<std::string, std::int64_t> counts) : n_(n_qubits), counts_(std::move(counts)) {
    for (const auto& [bits, c] : counts_) {
      if (static_cast<int>(bits.size()) != n_) throw std::invalid_argument("bitstring width mismatch");
      from_bitstring(bits);
      if (c < 0) throw std::invalid_argument("negative count");
      shots_ += c;
    }
  }

  static CountsHistogram from_index_counts(int n_qubits, std::span<const std::int64_t> counts) {
    std::map<std::string, std::int64_t> m;
    for (std::size_t i = 0; i < counts.size(); ++i)
      if (counts[i] > 0) m[to_bitstring(i, n_qubits)] = counts[i];
    return {n_qubits, std::move(m)};
  }

  int n_qubits() const { return n_; }
  std::int64_t shots() const { return shots_; }
  const std::map<std::string, std::int64_t>& counts() const { return counts_; }

  std::int64_t count(const std::string& bits) const {
    auto it = counts_.find(bits);
    return it == counts_.end() ? 0 : it->second;
  }

  /// Relative frequencies indexed by basis state.
  std::vector<double> frequencies() const {
    std::vector<double> f(dim_of(n_), 0.0);
    if (shots_ == 0) return f;
    for (const auto& [bits, c] : counts_) f[from_bitstring(bits)] = static_cast<double>(c) / static_cast<double>(shots_);
    return f;
  }

  friend bool operator==(const CountsHistogram&, const CountsHistogram&) = default;

 private:
  int n_;
  std::map<std::string, std::int64_t> counts_;
  std::int64_t shots_ = 0;
};

/// Draws `shots` outcomes from a probability vector (tiny negative entries are
/// treated as zero).
inline CountsHistogram sample_distribution(std::span<const double> probs, int n_qubits, std::int64_t shots,
                                           std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  std::vector<double> w(probs.begin(), probs.end());
  for (auto& x : w) x = std::max(0.0, x);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> dist(w.begin(), w.end());
  std::vector<std::int64_t> counts(w.size(), 0);
  for (std::int64_t s = 0; s < shots; ++s) ++counts[dist(rng)];
  return CountsHistogram::from_index_counts(n_qubits, counts);
}

inline std::vector<double> measured_probabilities(const DensityMatrix& rho, const ConfusionMatrix& lambda) {
  if (rho.n_qubits() != lambda.n_qubits()) throw std::invalid_argument("confusion matrix width mismatch");
  return lambda.apply(rho.probabilities());
}

inline CountsHistogram sample_counts(const DensityMatrix& rho, const ConfusionMatrix& lambda, std::int64_t shots,
                                     std::uint64_t seed) {
  return sample_distribution(measured_probabilities(rho, lambda), rho.n_qubits(), shots, seed);
}

/// Prepares every basis state with X gates under the model's gate noise,
/// measures with its readout noise and tabulates the empirical confusion matrix.
inline ConfusionMatrix calibration_experiment(const NoiseModel& nm, int n_qubits, std::int64_t shots, std::uint64_t seed) {
  if (n_qubits < 1 || n_qubits > 8) throw std::invalid_argument("calibration experiment supports 1..8 qubits");
  if (nm.n_qubits() != n_qubits) throw std::invalid_argument("noise model width mismatch");
  const auto d = static_cast<Eigen::Index>(dim_of(n_qubits));
  const ConfusionMatrix readout = build_confusion(nm);
  const NoiseModel gates_only = nm.without_readout();
  RMatrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    Circuit prep(n_qubits);
    for (int q = 0; q < n_qubits; ++q)
      if (bit_of(static_cast<std::size_t>(i), q)) prep.add(Gate::x(q));
    const DensityMatrix rho = apply_noisy_circuit(DensityMatrix::basis(n_qubits, 0), prep, gates_only);
    const auto f = sample_counts(rho, readout, shots, derive_seed(seed, static_cast<std::uint64_t>(i))).frequencies();
    for (Eigen::Index j = 0; j < d; ++j) m(j, i) = f[static_cast<std::size_t>(j)];
    m.col(i) /= m.col(i).sum();
  }
  return {n_qubits, std::move(m)};
}

}  // namespace dqsim

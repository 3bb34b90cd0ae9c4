#pragma once

// Experiment configuration, the multi-lane runner and result files.
//
// Lanes per time point:
//   exact          time-ordered integration of the model
//   trotter_ideal  noiseless Trotter circuit
//   noisy_raw      density-matrix simulation under the noise model, sampled
//   mitigated      noisy data after every enabled mitigation
//                  (readout, then ZNE, then symmetry)
//   zne            ZNE applied to the raw noisy data alone
//   sigma          shot-noise standard error of noisy_raw (spin experiments)

#include "dqsim/circuit.hpp"
#include "dqsim/evolve.hpp"
#include "dqsim/mitigate.hpp"
#include "dqsim/models.hpp"
#include "dqsim/noise.hpp"
#include "dqsim/qasm.hpp"
#include "dqsim/qcore.hpp"
#include "dqsim/tomo.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#ifndef DQSIM_VERSION
#define DQSIM_VERSION "0.1.0"
#endif

namespace dqsim {

namespace fs = std::filesystem;
using nlohmann::json;

enum class ExperimentId { Rabi, Dimer, Plaquette, Chain, Quench };

struct ExperimentInfo {
  ExperimentId id;
  const char* name;
  const char* description;
};

inline constexpr std::array<ExperimentInfo, 5> kExperiments{{
    {ExperimentId::Rabi, "E1_rabi", "single spin in a rotating field, P(|1>) versus time"},
    {ExperimentId::Dimer, "E2_dimer", "XX dimer under a circular pulse, total magnetization"},
    {ExperimentId::Plaquette, "E3_plaquette", "four-site ring under a circular pulse, staggered magnetization"},
    {ExperimentId::Chain, "E4_chain", "edge-driven eight-site chain, site-resolved magnetization"},
    {ExperimentId::Quench, "E5_quench", "interaction quench of the half-filled four-site ring"},
}};

inline const char* experiment_name(ExperimentId id) {
  for (const auto& e : kExperiments)
    if (e.id == id) return e.name;
  return "?";
}

inline ExperimentId parse_experiment_id(const std::string& s) {
  for (const auto& e : kExperiments)
    if (s == e.name) return e.id;
  throw std::invalid_argument("unknown experiment '" + s + "'");
}

struct PulseSpec {
  std::vector<int> sites;
  PulseWaveform waveform;
};

struct LatticeSpec {
  std::string geometry = "chain";
  int n_sites = 2;
  double j_perp = 1.0;
  double j_z = 0.0;
  std::vector<PulseSpec> pulses;
  std::string initial_state = "up";  // "up" or "neel"
};

struct QuenchSpec {
  double j_perp = 1.0;
  std::vector<double> u_final{1.0, 2.0};
  std::string prep = "exact";  // "exact" or "qasm"
};

struct MitigationSpec {
  bool readout = true;
  bool zne = false;
  bool symmetry = false;
  std::vector<double> stretches{1.0, 3.0};
  ZneMethod zne_method = ZneMethod::Linear;
  InversionMethod readout_method = InversionMethod::Inverse;
};

struct ExperimentConfig {
  ExperimentId id = ExperimentId::Rabi;
  RabiParams rabi;
  LatticeSpec lattice;
  QuenchSpec quench;
  TrotterPlan trotter;
  fs::path calibration;
  std::vector<int> layout;
  std::int64_t shots = 8192;
  std::uint64_t seed = 1;
  MitigationSpec mitigation;
  GateDurations durations;
  bool noise = true;
  // Overrides the calibration with two-qubit depolarizing only (rate in
  // cx_depolarizing) and ideal readout; used for controlled studies.
  std::optional<double> cx_depolarizing;
  fs::path output_dir;
};

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config field '") + key + "': " + e.what());
  }
}

inline PulseWaveform parse_waveform(const json& j) {
  PulseWaveform w;
  const std::string pol = get_or<std::string>(j, "polarization", "circular");
  if (pol == "circular") w.polarization = Polarization::Circular;
  else if (pol == "linear") w.polarization = Polarization::Linear;
  else throw std::invalid_argument("pulse polarization must be 'circular' or 'linear'");
  w.h0 = get_or(j, "h0", w.h0);
  w.omega = get_or(j, "omega", w.omega);
  w.tau = get_or(j, "tau", w.tau);
  w.t0 = get_or(j, "t0", w.t0);
  if (!(w.tau > 0.0)) throw std::invalid_argument("pulse tau must be positive");
  return w;
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j, const fs::path& base_dir = {}) {
  using detail::get_or;
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  if (!j.contains("experiment")) throw std::invalid_argument("config is missing 'experiment'");
  ExperimentConfig cfg;
  cfg.id = parse_experiment_id(j.at("experiment").get<std::string>());

  if (j.contains("rabi")) {
    const auto& r = j.at("rabi");
    cfg.rabi.H0 = get_or(r, "H0", cfg.rabi.H0);
    cfg.rabi.Theta = get_or(r, "Theta", cfg.rabi.Theta);
    cfg.rabi.omega = get_or(r, "omega", cfg.rabi.omega);
    cfg.rabi.alpha = get_or(r, "alpha", cfg.rabi.alpha);
  }
  if (j.contains("lattice")) {
    const auto& l = j.at("lattice");
    cfg.lattice.geometry = get_or<std::string>(l, "geometry", cfg.lattice.geometry);
    cfg.lattice.n_sites = get_or(l, "n_sites", cfg.lattice.n_sites);
    cfg.lattice.j_perp = get_or(l, "j_perp", cfg.lattice.j_perp);
    cfg.lattice.j_z = get_or(l, "j_z", cfg.lattice.j_z);
    cfg.lattice.initial_state = get_or<std::string>(l, "initial_state", cfg.lattice.initial_state);
    if (l.contains("pulses"))
      for (const auto& p : l.at("pulses")) cfg.lattice.pulses.push_back({p.at("sites").get<std::vector<int>>(), detail::parse_waveform(p)});
    if (cfg.lattice.geometry != "chain" && cfg.lattice.geometry != "ring")
      throw std::invalid_argument("lattice geometry must be 'chain' or 'ring'");
    if (cfg.lattice.initial_state != "up" && cfg.lattice.initial_state != "neel")
      throw std::invalid_argument("lattice initial_state must be 'up' or 'neel'");
  }
  if (j.contains("quench")) {
    const auto& q = j.at("quench");
    cfg.quench.j_perp = get_or(q, "j_perp", cfg.quench.j_perp);
    cfg.quench.u_final = get_or(q, "u_final", cfg.quench.u_final);
    cfg.quench.prep = get_or<std::string>(q, "prep", cfg.quench.prep);
    if (cfg.quench.prep != "exact" && cfg.quench.prep != "qasm")
      throw std::invalid_argument("quench prep must be 'exact' or 'qasm'");
    if (cfg.quench.u_final.empty()) throw std::invalid_argument("quench needs at least one u_final value");
  }
  if (j.contains("trotter")) {
    const auto& t = j.at("trotter");
    cfg.trotter.order = get_or(t, "order", cfg.trotter.order);
    cfg.trotter.dt = get_or(t, "dt", cfg.trotter.dt);
    cfg.trotter.n_steps = get_or(t, "n_steps", cfg.trotter.n_steps);
    cfg.trotter.merge_half_steps = get_or(t, "merge_half_steps", cfg.trotter.merge_half_steps);
    cfg.trotter.fuse_single_qubit = get_or(t, "fuse_single_qubit", cfg.trotter.fuse_single_qubit);
  }
  cfg.trotter.validate();

  if (j.contains("calibration")) {
    fs::path p = j.at("calibration").get<std::string>();
    cfg.calibration = p.is_absolute() ? p : base_dir / p;
  }
  cfg.layout = get_or(j, "layout", cfg.layout);
  cfg.shots = get_or<std::int64_t>(j, "shots", cfg.shots);
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
  cfg.noise = get_or(j, "noise", cfg.noise);
  if (j.contains("cx_depolarizing")) cfg.cx_depolarizing = j.at("cx_depolarizing").get<double>();
  if (cfg.shots < 0) throw std::invalid_argument("shots must be non-negative (0 selects exact probabilities)");

  if (j.contains("mitigation")) {
    const auto& m = j.at("mitigation");
    cfg.mitigation.readout = get_or(m, "readout", cfg.mitigation.readout);
    cfg.mitigation.zne = get_or(m, "zne", cfg.mitigation.zne);
    cfg.mitigation.symmetry = get_or(m, "symmetry", cfg.mitigation.symmetry);
    cfg.mitigation.stretches = get_or(m, "stretches", cfg.mitigation.stretches);
    const std::string zm = get_or<std::string>(m, "zne_method", "linear");
    if (zm == "linear") cfg.mitigation.zne_method = ZneMethod::Linear;
    else if (zm == "richardson") cfg.mitigation.zne_method = ZneMethod::Richardson;
    else throw std::invalid_argument("zne_method must be 'linear' or 'richardson'");
    const std::string rm = get_or<std::string>(m, "readout_method", "inverse");
    if (rm == "inverse") cfg.mitigation.readout_method = InversionMethod::Inverse;
    else if (rm == "pseudoinverse") cfg.mitigation.readout_method = InversionMethod::Pseudoinverse;
    else throw std::invalid_argument("readout_method must be 'inverse' or 'pseudoinverse'");
  }
  if (j.contains("durations")) {
    cfg.durations.single_ns = get_or(j.at("durations"), "single_ns", cfg.durations.single_ns);
    cfg.durations.cx_ns = get_or(j.at("durations"), "cx_ns", cfg.durations.cx_ns);
  }
  cfg.output_dir = get_or<std::string>(j, "output_dir", std::string("out/") + experiment_name(cfg.id));
  return cfg;
}

inline ExperimentConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open config " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(file.string() + ": malformed JSON: " + e.what());
  }
  return parse_config(j, file.parent_path());
}

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = experiment_name(c.id);
  j["calibration"] = c.calibration.filename().string();
  j["layout"] = c.layout;
  j["shots"] = c.shots;
  j["seed"] = c.seed;
  j["noise"] = c.noise;
  if (c.cx_depolarizing) j["cx_depolarizing"] = *c.cx_depolarizing;
  j["trotter"] = {{"order", c.trotter.order},
                  {"dt", c.trotter.dt},
                  {"n_steps", c.trotter.n_steps},
                  {"merge_half_steps", c.trotter.merge_half_steps},
                  {"fuse_single_qubit", c.trotter.fuse_single_qubit}};
  j["mitigation"] = {{"readout", c.mitigation.readout},
                     {"zne", c.mitigation.zne},
                     {"symmetry", c.mitigation.symmetry},
                     {"stretches", c.mitigation.stretches},
                     {"zne_method", c.mitigation.zne_method == ZneMethod::Linear ? "linear" : "richardson"},
                     {"readout_method", c.mitigation.readout_method == InversionMethod::Inverse ? "inverse" : "pseudoinverse"}};
  j["durations"] = {{"single_ns", c.durations.single_ns}, {"cx_ns", c.durations.cx_ns}};
  switch (c.id) {
    case ExperimentId::Rabi:
      j["rabi"] = {{"H0", c.rabi.H0}, {"Theta", c.rabi.Theta}, {"omega", c.rabi.omega}, {"alpha", c.rabi.alpha}};
      break;
    case ExperimentId::Quench:
      j["quench"] = {{"j_perp", c.quench.j_perp}, {"u_final", c.quench.u_final}, {"prep", c.quench.prep}};
      break;
    default: {
      json pulses = json::array();
      for (const auto& p : c.lattice.pulses)
        pulses.push_back({{"sites", p.sites},
                          {"polarization", p.waveform.polarization == Polarization::Linear ? "linear" : "circular"},
                          {"h0", p.waveform.h0},
                          {"omega", p.waveform.omega},
                          {"tau", p.waveform.tau},
                          {"t0", p.waveform.t0}});
      j["lattice"] = {{"geometry", c.lattice.geometry}, {"n_sites", c.lattice.n_sites}, {"j_perp", c.lattice.j_perp},
                      {"j_z", c.lattice.j_z}, {"initial_state", c.lattice.initial_state}, {"pulses", pulses}};
    }
  }
  return j;
}

inline SpinLattice build_lattice(const LatticeSpec& l) {
  std::map<int, PulseWaveform> pulses;
  for (const auto& p : l.pulses)
    for (int s : p.sites) pulses[s] = p.waveform;
  return l.geometry == "ring" ? SpinLattice::ring(l.n_sites, l.j_perp, l.j_z, pulses)
                              : SpinLattice::chain(l.n_sites, l.j_perp, l.j_z, pulses);
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct ResultRow {
  double t = 0.0;
  std::string observable;
  std::optional<double> exact{}, trotter_ideal{}, noisy_raw{}, mitigated{}, zne{}, sigma{};
};

struct LaneFailure {
  double t = 0.0;
  std::string lane;
  std::string error;
};

struct RunResult {
  std::vector<ResultRow> rows;
  std::vector<LaneFailure> failures;
  json manifest;
};

inline std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 && EVP_DigestFinal_ex(ctx, md.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-256 computation failed");
  std::string hex;
  char buf[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out = "t,observable,exact,trotter_ideal,noisy_raw,mitigated,zne,sigma\n";
  auto cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& r : rows) {
    out += format_number(r.t) + "," + r.observable + "," + cell(r.exact) + "," + cell(r.trotter_ideal) + "," +
           cell(r.noisy_raw) + "," + cell(r.mitigated) + "," + cell(r.zne) + "," + cell(r.sigma) + "\n";
  }
  return out;
}

inline constexpr const char* kPlotScript = R"(#!/usr/bin/env python3
"""Plot every observable in results.csv against time, one panel per observable."""
import csv
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

LANES = ["exact", "trotter_ideal", "noisy_raw", "mitigated", "zne"]
STYLES = {"exact": "-", "trotter_ideal": "--", "noisy_raw": "o", "mitigated": "s", "zne": "^"}


def main(path="results.csv", out="results.png"):
    series = defaultdict(lambda: defaultdict(list))
    with open(path) as f:
        for row in csv.DictReader(f):
            for lane in LANES:
                if row[lane]:
                    series[row["observable"]][lane].append((float(row["t"]), float(row[lane])))
    names = list(series)
    cols = min(4, len(names))
    rows = (len(names) + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(4 * cols, 3 * rows), squeeze=False)
    for ax, name in zip(axes.flat, names):
        for lane, pts in series[name].items():
            ts, vs = zip(*pts)
            ax.plot(ts, vs, STYLES[lane], label=lane, markersize=3)
        ax.set_title(name)
        ax.set_xlabel("t")
    for ax in list(axes.flat)[len(names):]:
        ax.axis("off")
    axes.flat[0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out, dpi=120)


if __name__ == "__main__":
    main(*sys.argv[1:])
)";

inline void emit_outputs(const RunResult& r, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  auto write = [&](const char* name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << content;
  };
  write("results.csv", results_csv(r.rows));
  write("manifest.json", r.manifest.dump(2) + "\n");
  write("plot_results.py", kPlotScript);
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

namespace detail {

/// A diagonal observable: value = sum_b coeff[b] p[b].
struct DiagonalObservable {
  std::string name;
  std::vector<double> coeff;
  double value(std::span<const double> p) const {
    double s = 0.0;
    for (std::size_t b = 0; b < p.size(); ++b) s += coeff[b] * p[b];
    return s;
  }
  double sigma(std::span<const double> f, std::int64_t shots) const {
    if (shots <= 0) return 0.0;
    double m = 0.0, m2 = 0.0;
    for (std::size_t b = 0; b < f.size(); ++b) {
      m += coeff[b] * f[b];
      m2 += coeff[b] * coeff[b] * f[b];
    }
    return std::sqrt(std::max(0.0, m2 - m * m) / static_cast<double>(shots));
  }
};

inline std::vector<DiagonalObservable> spin_observables(ExperimentId id, int n) {
  const std::size_t d = dim_of(n);
  std::vector<DiagonalObservable> obs;
  auto make = [&](std::string name, auto f) {
    DiagonalObservable o{std::move(name), std::vector<double>(d)};
    for (std::size_t b = 0; b < d; ++b) o.coeff[b] = f(b);
    obs.push_back(std::move(o));
  };
  auto sz = [](std::size_t b, int i) { return bit_of(b, i) ? -0.5 : 0.5; };
  switch (id) {
    case ExperimentId::Rabi: make("P1", [](std::size_t b) { return static_cast<double>(b & 1); }); break;
    case ExperimentId::Dimer:
    case ExperimentId::Plaquette:
      make("Sz_total", [&](std::size_t b) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += sz(b, i);
        return s;
      });
      if (id == ExperimentId::Plaquette)
        make("S_AF", [&](std::size_t b) {
          double s = 0.0;
          for (int i = 0; i < n; ++i) s += (i % 2 == 0 ? -1.0 : 1.0) * sz(b, i);
          return s;
        });
      break;
    case ExperimentId::Chain:
      for (int i = 0; i < n; ++i) make("Sz_" + std::to_string(i), [&](std::size_t b) { return sz(b, i); });
      break;
    case ExperimentId::Quench: break;
  }
  return obs;
}

inline json counts_json(double t, const GateCounts& g) {
  return {{"t", t}, {"single_qubit", g.single_qubit}, {"two_qubit", g.two_qubit}};
}

inline std::string stretch_key(double c) { return "stretch_" + format_number(c); }

/// Stretch factors the noisy lanes need, always including 1.
inline std::vector<double> noisy_stretches(const MitigationSpec& m) {
  std::vector<double> s{1.0};
  if (m.zne)
    for (double c : m.stretches)
      if (c != 1.0) s.push_back(c);
  return s;
}

inline std::uint64_t task_id(int time_index, int variant, int stretch_index, int lane) {
  return (static_cast<std::uint64_t>(time_index) << 24) ^ (static_cast<std::uint64_t>(variant) << 16) ^
         (static_cast<std::uint64_t>(stretch_index) << 8) ^ static_cast<std::uint64_t>(lane);
}

struct NoiseSetup {
  NoiseModel gates;                 // gate noise, no readout
  ConfusionMatrix true_readout;     // what the simulated device does
  ConfusionMatrix mitigation;       // what the experimenter calibrated
  json manifest;
};

/// `bonds` lists the circuit-qubit pairs the model couples; pairs without a
/// calibrated CX error are reported in the manifest.
inline NoiseSetup make_noise(const ExperimentConfig& cfg, int n, const std::vector<BondTerm>& bonds = {}) {
  json man;
  if (!cfg.noise) {
    man["model"] = "none";
    return {NoiseModel::ideal(n), ConfusionMatrix::identity(n), ConfusionMatrix::identity(n), man};
  }
  if (cfg.cx_depolarizing) {
    man["model"] = "cx_depolarizing";
    man["rate"] = *cfg.cx_depolarizing;
    return {NoiseModel::cx_depolarizing(n, *cfg.cx_depolarizing), ConfusionMatrix::identity(n),
            ConfusionMatrix::identity(n), man};
  }
  if (cfg.calibration.empty()) throw std::invalid_argument("config needs a calibration file when noise is enabled");
  if (static_cast<int>(cfg.layout.size()) != n)
    throw std::invalid_argument("layout has " + std::to_string(cfg.layout.size()) + " qubits, model needs " + std::to_string(n));
  const std::string bytes = read_file(cfg.calibration);
  const DeviceCalibration cal = parse_calibration(json::parse(bytes));
  NoiseModel full = NoiseModel::from_calibration(cal, cfg.layout, cfg.durations);
  ConfusionMatrix truth = build_confusion(full);
  ConfusionMatrix measured = cfg.shots > 0
                                 ? calibration_experiment(full, n, cfg.shots, derive_seed(cfg.seed, 0xCA11B))
                                 : truth;
  man["model"] = "calibration";
  man["device"] = cal.device;
  man["date"] = cal.date;
  man["file"] = cfg.calibration.filename().string();
  man["sha256"] = sha256_hex(bytes);
  json missing = json::array();
  for (const auto& b : bonds) {
    const int da = cfg.layout[static_cast<std::size_t>(b.i)], db = cfg.layout[static_cast<std::size_t>(b.j)];
    if (!cal.cnot_error(da, db)) missing.push_back({da, db});
  }
  man["cx_pairs_using_mean_error"] = missing;
  man["mean_cnot_error"] = cal.mean_cnot_error();
  return {full.without_readout(), truth, measured, man};
}

inline std::vector<double> measure(const DensityMatrix& rho, const ConfusionMatrix& readout, std::int64_t shots,
                                   std::uint64_t seed) {
  auto p = readout.apply(rho.probabilities());
  if (shots == 0) return p;
  return sample_distribution(p, rho.n_qubits(), shots, seed).frequencies();
}

template <class F>
void guarded(std::vector<LaneFailure>& failures, double t, const char* lane, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    failures.push_back({t, lane, e.what()});
  }
}

template <TimeDependentModel Model>
RunResult run_spin(const ExperimentConfig& cfg, const Model& model, const Circuit& prep) {
  const int n = model.n_qubits();
  const auto obs = spin_observables(cfg.id, n);
  const NoiseSetup noise = make_noise(cfg, n, model.terms(cfg.trotter.t_start).bonds);
  const auto stretches = noisy_stretches(cfg.mitigation);
  const bool mirror = cfg.mitigation.symmetry && cfg.id == ExperimentId::Chain;
  const ReadoutOptions ro{cfg.mitigation.readout_method, false};

  RunResult res;
  json counts = json::object();
  const QuantumState psi0 = apply_circuit(QuantumState::zero(n), prep);
  QuantumState exact = psi0;
  for (int k = 0; k <= cfg.trotter.n_steps; ++k) {
    const double t = cfg.trotter.t_start + k * cfg.trotter.dt;
    std::vector<ResultRow> rows(obs.size());
    for (std::size_t o = 0; o < obs.size(); ++o) rows[o] = {t, obs[o].name};

    guarded(res.failures, t, "exact", [&] {
      if (k > 0) exact = exact_evolve(model, exact, t - cfg.trotter.dt, t);
      const auto p = exact.probabilities();
      for (std::size_t o = 0; o < obs.size(); ++o) rows[o].exact = obs[o].value(p);
    });

    TrotterPlan plan = cfg.trotter;
    plan.n_steps = k;
    Circuit evo(n);
    guarded(res.failures, t, "trotter_ideal", [&] {
      evo = compile_evolution(model, plan);
      const auto p = apply_circuit(psi0, evo).probabilities();
      for (std::size_t o = 0; o < obs.size(); ++o) rows[o].trotter_ideal = obs[o].value(p);
    });
    Circuit full(n);
    full.append(prep).append(evo);

    guarded(res.failures, t, "noisy", [&] {
      std::vector<std::vector<double>> raw;  // per stretch
      for (std::size_t s = 0; s < stretches.size(); ++s) {
        const Circuit folded = fold_cnots(full, static_cast<int>(stretches[s]));
        counts[stretch_key(stretches[s])].push_back(counts_json(t, count_gates(folded)));
        const DensityMatrix rho = apply_noisy_circuit(DensityMatrix::basis(n, 0), folded, noise.gates);
        raw.push_back(measure(rho, noise.true_readout, cfg.shots, derive_seed(cfg.seed, task_id(k, 0, static_cast<int>(s), 1))));
      }
      auto values = [&](const std::vector<double>& p) {
        std::vector<double> v;
        for (const auto& o : obs) v.push_back(o.value(p));
        return v;
      };
      auto extrapolate = [&](const std::vector<std::vector<double>>& per_stretch) {
        std::vector<double> out(obs.size());
        for (std::size_t o = 0; o < obs.size(); ++o) {
          std::vector<std::pair<double, double>> pts;
          for (std::size_t s = 0; s < stretches.size(); ++s) pts.push_back({stretches[s], per_stretch[s][o]});
          out[o] = zne_extrapolate(pts, cfg.mitigation.zne_method).e0;
        }
        return out;
      };

      const auto raw_vals = values(raw[0]);
      for (std::size_t o = 0; o < obs.size(); ++o) {
        rows[o].noisy_raw = raw_vals[o];
        if (cfg.shots > 0) rows[o].sigma = obs[o].sigma(raw[0], cfg.shots);
      }

      std::vector<std::vector<double>> raw_per_stretch, mit_per_stretch;
      for (const auto& f : raw) {
        raw_per_stretch.push_back(values(f));
        mit_per_stretch.push_back(cfg.mitigation.readout ? values(mitigate_readout(f, noise.mitigation, ro)) : values(f));
      }
      std::vector<double> mit = cfg.mitigation.zne ? extrapolate(mit_per_stretch) : mit_per_stretch[0];
      if (mirror) mit = mirror_symmetrize(mit);
      for (std::size_t o = 0; o < obs.size(); ++o) rows[o].mitigated = mit[o];
      if (cfg.mitigation.zne) {
        const auto z = extrapolate(raw_per_stretch);
        for (std::size_t o = 0; o < obs.size(); ++o) rows[o].zne = z[o];
      }
    });
    for (auto& r : rows) res.rows.push_back(std::move(r));
  }
  res.manifest["gate_counts"] = counts;
  res.manifest["noise"] = noise.manifest;
  return res;
}

inline std::string momentum_label(double k, int n_sites) {
  const long m = std::lround(k * n_sites / kPi);
  return std::to_string(m) + "pi/" + std::to_string(n_sites);
}

struct FermionObservables {
  std::vector<std::string> names;
  std::vector<double> values;
};

inline FermionObservables fermion_observables(const DensityMatrix& rho, const std::string& suffix) {
  const auto grid = MomentumGrid::antiperiodic(rho.n_qubits());
  const CMatrix c = correlation_matrix(rho);
  const auto nk = momentum_distribution(c, grid);
  FermionObservables out;
  for (const auto& [k, v] : nk) {
    out.names.push_back("n_k(" + momentum_label(k, grid.n_sites) + ")" + suffix);
    out.values.push_back(v);
  }
  out.names.push_back("fermi_jump" + suffix);
  out.values.push_back(fermi_jump(nk));
  out.names.push_back("filling" + suffix);
  out.values.push_back(filling(c));
  out.names.push_back("entropy" + suffix);
  out.values.push_back(bipartite_entropy(rho));
  return out;
}

inline json prep_circuit_fidelities(const QuantumState& target) {
  const Circuit prep = qasm::parse_circuit(qasm::kFermiSeaPreparation);
  const QuantumState psi = apply_circuit(QuantumState::zero(prep.n_qubits()), prep);
  const int n = psi.n_qubits();
  CVector rev(static_cast<Eigen::Index>(psi.dim()));
  for (std::size_t s = 0; s < psi.dim(); ++s) {
    std::size_t r = 0;
    for (int b = 0; b < n; ++b)
      if (bit_of(s, b)) r |= std::size_t{1} << (n - 1 - b);
    rev(static_cast<Eigen::Index>(r)) = psi[s];
  }
  return {{"qubit0_least_significant", fidelity(psi, target)},
          {"qubit0_most_significant", fidelity(QuantumState(n, rev), target)}};
}

inline RunResult run_quench(const ExperimentConfig& cfg) {
  constexpr int n = QuenchModel::kSites;
  const NoiseSetup noise = make_noise(cfg, n, QuenchModel({cfg.quench.j_perp, 0.0, 0.0}).terms(0.0).bonds);
  const auto stretches = noisy_stretches(cfg.mitigation);
  const ReadoutOptions ro{cfg.mitigation.readout_method, false};
  const auto sets = settings(n);
  const bool qasm_prep = cfg.quench.prep == "qasm";
  const Circuit prep_circuit = qasm::parse_circuit(qasm::kFermiSeaPreparation);

  RunResult res;
  json counts = json::object();
  json fidelities = json::object();
  for (std::size_t u = 0; u < cfg.quench.u_final.size(); ++u) {
    const double uf = cfg.quench.u_final[u];
    const QuenchModel model({cfg.quench.j_perp, uf, 0.0});
    const GroundState gs = ground_state(hamiltonian(model.terms(-1.0)));
    const QuantumState psi0 = qasm_prep ? apply_circuit(QuantumState::zero(n), prep_circuit) : gs.state;
    const int particles = static_cast<int>(std::lround(particle_number(gs.state.probabilities())));
    const std::string suffix = "@U=" + format_number(uf);
    if (u == 0) fidelities = prep_circuit_fidelities(gs.state);

    QuantumState exact = psi0;
    for (int k = 0; k <= cfg.trotter.n_steps; ++k) {
      const double t = cfg.trotter.t_start + k * cfg.trotter.dt;
      std::vector<ResultRow> rows;
      auto set_lane = [&](const FermionObservables& fo, std::optional<double> ResultRow::*lane) {
        if (rows.empty())
          for (const auto& name : fo.names) rows.push_back({t, name});
        for (std::size_t o = 0; o < fo.values.size(); ++o) rows[o].*lane = fo.values[o];
      };
      // Row skeleton so a failing lane still leaves named rows.
      set_lane(fermion_observables(DensityMatrix::from_pure(psi0), suffix), &ResultRow::sigma);
      for (auto& r : rows) r.sigma.reset();

      guarded(res.failures, t, "exact", [&] {
        if (k > 0) exact = exact_evolve(model, exact, t - cfg.trotter.dt, t);
        set_lane(fermion_observables(DensityMatrix::from_pure(exact), suffix), &ResultRow::exact);
      });

      TrotterPlan plan = cfg.trotter;
      plan.n_steps = k;
      Circuit evo(n);
      guarded(res.failures, t, "trotter_ideal", [&] {
        evo = compile_evolution(model, plan);
        set_lane(fermion_observables(DensityMatrix::from_pure(apply_circuit(psi0, evo)), suffix), &ResultRow::trotter_ideal);
      });

      guarded(res.failures, t, "noisy", [&] {
        Circuit full(n);
        if (qasm_prep) full.append(prep_circuit);
        full.append(evo);
        const DensityMatrix rho0 = qasm_prep ? DensityMatrix::basis(n, 0) : DensityMatrix::from_pure(psi0);
        std::vector<std::pair<double, CMatrix>> raw_mu, mit_mu;
        for (std::size_t s = 0; s < stretches.size(); ++s) {
          const Circuit folded = fold_cnots(full, static_cast<int>(stretches[s]));
          counts[suffix][stretch_key(stretches[s])].push_back(counts_json(t, count_gates(folded)));
          const DensityMatrix rho = apply_noisy_circuit(rho0, folded, noise.gates);
          CollectOptions co;
          co.shots = cfg.shots;
          co.seed = derive_seed(cfg.seed, task_id(k, static_cast<int>(u), static_cast<int>(s), 2));
          co.noise = noise.gates;
          co.readout = noise.true_readout;
          const TomographyDataset ds = collect(rho, sets, co);
          raw_mu.push_back({stretches[s], linear_inversion(ds).elements()});
          const TomographyDataset mds = cfg.mitigation.readout ? mitigate_readout(ds, noise.mitigation, ro) : ds;
          mit_mu.push_back({stretches[s], linear_inversion(mds).elements()});
        }
        set_lane(fermion_observables(psd_project(HermitianOperator(n, raw_mu[0].second)), suffix), &ResultRow::noisy_raw);

        const CMatrix mu = cfg.mitigation.zne ? zne_extrapolate(mit_mu, cfg.mitigation.zne_method) : mit_mu[0].second;
        DensityMatrix rho_m = psd_project(HermitianOperator(n, (mu + mu.adjoint()) * 0.5));
        if (cfg.mitigation.symmetry) rho_m = number_sector_project(rho_m, particles);
        set_lane(fermion_observables(rho_m, suffix), &ResultRow::mitigated);

        if (cfg.mitigation.zne) {
          const CMatrix mz = zne_extrapolate(raw_mu, cfg.mitigation.zne_method);
          set_lane(fermion_observables(psd_project(HermitianOperator(n, (mz + mz.adjoint()) * 0.5)), suffix), &ResultRow::zne);
        }
      });
      for (auto& r : rows) res.rows.push_back(std::move(r));
    }
  }
  // Group rows by time so the table reads chronologically.
  std::stable_sort(res.rows.begin(), res.rows.end(), [](const ResultRow& a, const ResultRow& b) { return a.t < b.t; });
  res.manifest["gate_counts"] = counts;
  res.manifest["noise"] = noise.manifest;
  res.manifest["prep_circuit_fidelity"] = fidelities;
  res.manifest["prep"] = cfg.quench.prep;
  return res;
}

}  // namespace detail

inline RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.trotter.validate();
  RunResult res;
  switch (cfg.id) {
    case ExperimentId::Rabi: {
      Circuit prep(1);
      prep.add(Gate::ry(0, cfg.rabi.alpha));
      res = detail::run_spin(cfg, RabiModel(cfg.rabi), prep);
      break;
    }
    case ExperimentId::Dimer:
    case ExperimentId::Plaquette:
    case ExperimentId::Chain: {
      const SpinLattice lattice = build_lattice(cfg.lattice);
      Circuit prep(lattice.n_sites());
      if (cfg.lattice.initial_state == "neel")
        for (int i = 1; i < lattice.n_sites(); i += 2) prep.add(Gate::x(i));
      res = detail::run_spin(cfg, lattice, prep);
      if (cfg.id == ExperimentId::Chain)
        res.manifest["reference_counts"] = {{"entangling_gates", 126}, {"entangling_gates_stretch_3", 378}, {"single_qubit_gates", 260}};
      break;
    }
    case ExperimentId::Quench: res = detail::run_quench(cfg); break;
  }
  json failures = json::array();
  for (const auto& f : res.failures) failures.push_back({{"t", f.t}, {"lane", f.lane}, {"error", f.error}});
  res.manifest["lane_failures"] = failures;
  res.manifest["config"] = to_json(cfg);
  res.manifest["experiment"] = experiment_name(cfg.id);
  res.manifest["seed"] = cfg.seed;
  res.manifest["shots"] = cfg.shots;
  res.manifest["version"] = DQSIM_VERSION;
  return res;
}

}  // namespace dqsim

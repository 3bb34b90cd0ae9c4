// Command-line front end: run bundled or custom experiments, inspect
// calibrations and QASM files.

#include "dqsim/dqsim.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

using namespace dqsim;

// Accepts either a config path or a bundled experiment name.
fs::path resolve_config(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  for (const auto& e : kExperiments)
    if (arg == e.name) return fs::path(DQSIM_DATA_DIR) / "configs" / (std::string(e.name) + ".json");
  throw std::invalid_argument("no config file or bundled experiment named '" + arg + "'");
}

int cmd_list() {
  for (const auto& e : kExperiments)
    std::printf("%-14s %s\n  %s\n", e.name, e.description,
                (fs::path(DQSIM_DATA_DIR) / "configs" / (std::string(e.name) + ".json")).c_str());
  return 0;
}

int cmd_parse(const std::string& file) {
  const std::string text = read_file(file);
  const qasm::Program prog = qasm::parse(text);
  const Circuit c = qasm::lower(prog);
  std::map<std::string, int> by_name;
  for (const auto& s : prog.statements) ++by_name[s.name];
  const GateCounts g = count_gates(c);
  std::printf("qubits: %d\nstatements: %zu\n", c.n_qubits(), prog.statements.size());
  for (const auto& [name, n] : by_name) std::printf("  %s: %d\n", name.c_str(), n);
  std::printf("single-qubit gates: %lld\ntwo-qubit gates: %lld\n", static_cast<long long>(g.single_qubit),
              static_cast<long long>(g.two_qubit));
  return 0;
}

int cmd_calibrate(const ExperimentConfig& cfg, int n_qubits) {
  const auto noise = detail::make_noise(cfg, n_qubits);
  json out;
  out["noise"] = noise.manifest;
  out["shots"] = cfg.shots;
  out["seed"] = cfg.seed;
  const RMatrix& m = noise.mitigation.matrix();
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  out["confusion"] = rows;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int model_width(const ExperimentConfig& cfg) {
  switch (cfg.id) {
    case ExperimentId::Rabi: return 1;
    case ExperimentId::Quench: return QuenchModel::kSites;
    default: return cfg.lattice.n_sites;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Digital quantum simulation of driven spin and fermion lattices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DQSIM_VERSION);

  std::string config_arg, qasm_file, out_dir, prep;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> shots;
  std::vector<double> stretches;
  bool no_noise = false;

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("config", config_arg, "config file or bundled experiment name")->required();
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--shots", shots, "shots per circuit; 0 uses exact probabilities");
  };

  auto* run = app.add_subcommand("run", "run an experiment and write results");
  add_run_flags(run);
  run->add_flag("--no-noise", no_noise, "ideal device");
  run->add_option("--stretch", stretches, "CNOT stretch factors for extrapolation");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--prep", prep, "quench state preparation")->check(CLI::IsMember({"exact", "qasm"}));

  auto* cal = app.add_subcommand("calibrate", "print the readout confusion matrix of a config");
  add_run_flags(cal);

  auto* parse = app.add_subcommand("parse", "parse a QASM file and report gate counts");
  parse->add_option("file", qasm_file, "OpenQASM 2.0 file")->required()->check(CLI::ExistingFile);

  app.add_subcommand("list-experiments", "list bundled experiments");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list-experiments")) return cmd_list();
    if (app.got_subcommand("parse")) return cmd_parse(qasm_file);

    ExperimentConfig cfg = load_config(resolve_config(config_arg));
    if (seed) cfg.seed = *seed;
    if (shots) {
      if (*shots < 0) throw std::invalid_argument("--shots must be non-negative");
      cfg.shots = *shots;
    }
    if (app.got_subcommand("calibrate")) return cmd_calibrate(cfg, model_width(cfg));

    if (no_noise) cfg.noise = false;
    if (!stretches.empty()) {
      cfg.mitigation.stretches = stretches;
      cfg.mitigation.zne = true;
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!prep.empty()) cfg.quench.prep = prep;

    const RunResult r = run_experiment(cfg);
    emit_outputs(r, cfg.output_dir);
    std::printf("%s: %zu rows written to %s\n", experiment_name(cfg.id), r.rows.size(), cfg.output_dir.c_str());
    for (const auto& f : r.failures) std::fprintf(stderr, "lane %s failed at t=%g: %s\n", f.lane.c_str(), f.t, f.error.c_str());
    return r.failures.empty() ? 0 : 3;
  } catch (const qasm::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

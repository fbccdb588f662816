#pragma once

// qspeed command-line front end. run() is separate from main() so tests can drive it.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qspeed/qspeed.hpp"

namespace qspeed::cli {

using io::json;
using io::number;

enum exit_code : int { ok = 0, invalid = 2, numerical = 3 };

struct Options {
  std::string format = "json";
  std::uint64_t seed = 0;
};

inline std::uint64_t default_seed() {
  if (const char* s = std::getenv("QSPEED_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw invalid_parameter(std::string("QSPEED_SEED is not an unsigned integer: ") + s);
    }
  }
  return 0;
}

inline std::string csv_cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

/// Scalar fields of a flat object as a two-line CSV; a "rows" array becomes one line per row.
inline std::string to_csv(const json& report) {
  std::ostringstream os;
  const json* rows = nullptr;
  json single = json::array();
  if (report.contains("rows") && report["rows"].is_array()) {
    rows = &report["rows"];
  } else {
    single.push_back(report);
    rows = &single;
  }
  std::vector<std::string> keys;
  for (const auto& row : *rows) {
    for (auto it = row.begin(); it != row.end(); ++it) {
      if (it.value().is_structured()) continue;
      if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) keys.push_back(it.key());
    }
  }
  for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? "," : "") << keys[i];
  os << "\n";
  for (const auto& row : *rows) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      os << (i ? "," : "");
      if (row.contains(keys[i])) os << csv_cell(row[keys[i]]);
    }
    os << "\n";
  }
  return os.str();
}

inline void emit(const json& report, const Options& opt, std::ostream& out) {
  if (opt.format == "csv") {
    out << to_csv(report);
  } else {
    out << report.dump(2) << "\n";
  }
}

inline json povm_json(const POVM& p) { return io::to_json(p)["elements"]; }

// ---------------------------------------------------------------------------
// subcommands

struct SpeedArgs {
  std::string family;
  double theta = 0.0;
  double alpha = 2.0;
  bool povm = false;
  std::string target = "trace_speed";
};

inline json cmd_speed(const SpeedArgs& a) {
  const ParametricFamily fam = io::family_from_json(io::load(a.family));
  require_alpha(a.alpha);
  json r;
  r["family"] = to_string(fam.kind());
  r["theta"] = number(a.theta);
  r["alpha"] = number(a.alpha);
  const double f1 = trace_speed(fam, a.theta);
  r["F1"] = number(f1);
  r["S1"] = number(0.5 * f1);
  try {
    const double f2 = qfi(fam, a.theta);
    r["F2"] = number(f2);
    r["S2"] = number(std::sqrt(f2 / 8.0));
  } catch (const undefined_quantity&) {
    r["F2"] = number(infinity);
    r["S2"] = number(infinity);
  }
  const SchattenSpeed s = schatten_speed(fam, a.theta, a.alpha);
  r["schatten_F"] = number(s.value);
  r["schatten_S"] = number(s.speed);
  r["hilbert_schmidt_S"] = number(hilbert_schmidt_speed(fam, a.theta));
  if (a.povm) r["optimal_povm"] = povm_json(optimal_povm(fam, a.theta, parse_povm_target(a.target)));
  return r;
}

struct DistanceArgs {
  std::string rho;
  std::string sigma;
  double alpha = 2.0;
};

inline json cmd_distance(const DistanceArgs& a) {
  const DensityMatrix rho = io::density_from_json(io::load(a.rho), "");
  const DensityMatrix sigma = io::density_from_json(io::load(a.sigma), "");
  json r;
  r["alpha"] = number(a.alpha);
  r["D1"] = number(trace_distance(rho, sigma));
  r["D2"] = number(bures_distance(rho, sigma));
  r["fidelity"] = number(fidelity(rho, sigma));
  r["schatten_D"] = number(schatten_distance(rho, sigma, a.alpha));
  r["success_probability"] = number(discrimination_probability(rho, sigma));
  return r;
}

struct WitnessArgs {
  std::string family;
  std::string state;
  std::string partition;
  std::string bound = "ksep";
  int k = 1;
  double alpha = 1.0;
  double theta = 0.0;
};

inline json report_json(const WitnessReport& w) {
  return json{{"speed", number(w.speed)},
              {"bound", number(w.bound)},
              {"kind", w.kind},
              {"alpha", number(w.alpha)},
              {"verdict", to_string(w.verdict)}};
}

inline int qubit_count(Index dim) {
  int n = 0;
  while (int_pow(2, n) < dim) ++n;
  if (int_pow(2, n) != dim) throw invalid_input("dimension " + std::to_string(dim) + " is not a power of 2");
  return n;
}

inline json cmd_witness(const WitnessArgs& a) {
  if (a.family.empty() == a.state.empty()) throw invalid_input("give exactly one of --family or --state");
  if (a.bound == "ksep") {
    if (!a.family.empty()) {
      const ParametricFamily fam = io::family_from_json(io::load(a.family));
      return report_json(witness_ksep(fam, a.theta, qubit_count(fam.dim()), a.k, a.alpha));
    }
    const DensityMatrix rho = io::density_from_json(io::load(a.state), "");
    return report_json(witness_ksep(rho, {0.0, 0.0, 1.0}, a.k, a.alpha));
  }
  if (a.bound == "asep") {
    if (a.partition.empty()) throw invalid_input("asep bound needs --partition");
    const Partition part = io::partition_from_json(io::load(a.partition));
    const DensityMatrix rho = a.family.empty()
                                  ? io::density_from_json(io::load(a.state), "")
                                  : io::family_from_json(io::load(a.family)).density_at(a.theta);
    return report_json(witness_asep(rho, part, a.alpha));
  }
  throw invalid_parameter("unknown bound kind '" + a.bound + "' (expected ksep or asep)");
}

struct BoundArgs {
  std::string kind;
  std::string hamiltonian;
  std::string gamma;
  std::string state;
  std::string superop;
  std::string partition;
  int n = 1;
  int k = 1;
  double alpha = 1.0;
};

inline json cmd_bound(const BoundArgs& a, const Options& opt) {
  auto need = [](const std::string& v, const char* flag) {
    if (v.empty()) throw invalid_input(std::string("this bound needs ") + flag);
    return v;
  };
  json r;
  r["kind"] = a.kind;
  if (a.kind == "heisenberg") {
    const HeisenbergLimit h = heisenberg_limit(io::hermitian_from_json(io::load(need(a.hamiltonian, "--hamiltonian")), ""));
    r["F1_max"] = number(h.f1_max);
    r["F2_max"] = number(h.f2_max);
  } else if (a.kind == "bhatia_davis") {
    const HermitianOperator h = io::hermitian_from_json(io::load(need(a.hamiltonian, "--hamiltonian")), "");
    const DensityMatrix rho = io::density_from_json(io::load(need(a.state, "--state")), "");
    r["F2_bound"] = number(bhatia_davis_bound(h, rho));
  } else if (a.kind == "ksep") {
    r["n"] = a.n;
    r["k"] = a.k;
    r["alpha"] = number(a.alpha);
    r["bound"] = number(ksep_bound(a.n, a.k, a.alpha));
  } else if (a.kind == "asep") {
    const DensityMatrix rho = io::density_from_json(io::load(need(a.state, "--state")), "");
    const Partition part = io::partition_from_json(io::load(need(a.partition, "--partition")));
    r["alpha"] = number(a.alpha);
    r["bound"] = number(asep_bound(rho, part, a.alpha));
  } else if (a.kind == "nonhermitian") {
    const HermitianOperator h = io::hermitian_from_json(io::load(need(a.hamiltonian, "--hamiltonian")), "");
    const HermitianOperator g = io::hermitian_from_json(io::load(need(a.gamma, "--gamma")), "");
    const NonHermitianBound b = nonhermitian_speed_bound(h, g);
    r["F1_bound"] = number(b.f1);
    r["F2_bound"] = number(b.f2);
    r["r"] = number(b.r);
    if (h.dim() == 2) {
      try {
        const NonHermitianBound c = nonhermitian_qubit_bound(h, g);
        r["closed_form_F1"] = number(c.f1);
        if (std::abs(c.f1 - b.f1) > 1e-6 * std::max(1.0, c.f1)) {
          throw numerical_error("closed form and numerical minimum disagree");
        }
      } catch (const invalid_input&) {
        // non-commuting pair: no closed form
      }
    }
  } else if (a.kind == "superop") {
    const Superoperator l = io::superop_from_json(io::load(need(a.superop, "--superop")), "");
    SuperopNormConfig cfg;
    cfg.seed = opt.seed;
    const SuperopNormResult s = superop_norm(l, a.alpha, cfg);
    r["alpha"] = number(a.alpha);
    r["norm"] = number(s.value);
    r["converged"] = s.converged;
  } else {
    throw invalid_parameter("unknown bound kind '" + a.kind +
                            "' (expected heisenberg, bhatia_davis, ksep, asep, nonhermitian or superop)");
  }
  return r;
}

struct EstimateArgs {
  std::string kind;
  std::string rho;
  std::string sigma;
  std::string family;
  std::string model = "cauchy";
  std::string estimator = "median";
  double scale = 1.0;
  double theta = 0.0;
  int m = 101;
  std::int64_t trials = 20000;
};

inline ContinuousModel model_by_name(const std::string& name, double scale) {
  if (name == "gaussian") return gaussian_model(scale);
  if (name == "cauchy") return cauchy_model(scale);
  if (name == "laplace") return laplace_model(scale);
  if (name == "skewed") return skewed_exponential_model(scale);
  throw invalid_parameter("unknown model '" + name + "'");
}

inline Estimator estimator_by_name(const std::string& name) {
  if (name == "median") return sample_median;
  if (name == "mean") return sample_mean;
  throw invalid_parameter("unknown estimator '" + name + "'");
}

inline json cmd_estimate(const EstimateArgs& a, const Options& opt) {
  json r;
  r["kind"] = a.kind;
  if (a.kind == "discrimination") {
    const DensityMatrix rho = io::density_from_json(io::load(a.rho), "rho");
    const DensityMatrix sigma = io::density_from_json(io::load(a.sigma), "sigma");
    const DiscriminationResult d = discrimination_game(rho, sigma, helstrom_povm(rho, sigma), a.trials, opt.seed);
    r["predicted"] = number(discrimination_probability(rho, sigma));
    r["rate"] = number(d.rate);
    r["stderr"] = number(d.stderr_);
    r["trials"] = d.trials;
  } else if (a.kind == "median") {
    const EstimationResult e = median_dispersion_vs_bound(model_by_name(a.model, a.scale), a.theta, a.m, a.trials, opt.seed);
    r["model"] = a.model;
    r["dispersion"] = number(e.dispersion);
    r["bound"] = number(e.bound);
    r["stderr"] = number(e.stderr_);
    r["m"] = e.m;
    r["trials"] = e.trials;
    r["satisfied"] = e.satisfied;
  } else if (a.kind == "median_bias") {
    const MedianReport m =
        median_check(model_by_name(a.model, a.scale), estimator_by_name(a.estimator), a.theta, a.trials, a.m, opt.seed);
    r["model"] = a.model;
    r["estimator"] = a.estimator;
    r["fraction"] = number(m.fraction);
    r["stderr"] = number(m.stderr_);
    r["z"] = number(m.z);
    r["balanced"] = m.balanced;
    r["m"] = m.m;
    r["trials"] = m.trials;
  } else if (a.kind == "cramer_rao") {
    const CramerRaoReport c =
        cramer_rao_check(model_by_name(a.model, a.scale), a.theta, estimator_by_name(a.estimator), a.m, a.trials, opt.seed);
    r["model"] = a.model;
    r["estimator"] = a.estimator;
    r["variance"] = number(c.variance);
    r["bound"] = number(c.bound);
    r["stderr"] = number(c.stderr_);
    r["biased"] = c.biased;
    r["converged"] = c.converged;
    r["asserted"] = c.asserted;
    r["satisfied"] = c.satisfied;
    r["m"] = c.m;
    r["trials"] = c.trials;
  } else if (a.kind == "quantum_median") {
    const ParametricFamily fam = io::family_from_json(io::load(a.family));
    const QuantumMedianBound q = quantum_median_bound(fam, a.theta);
    r["bound"] = number(q.bound);
    r["optimal_povm"] = povm_json(q.povm);
  } else {
    throw invalid_parameter("unknown estimate kind '" + a.kind +
                            "' (expected discrimination, median, median_bias, cramer_rao or quantum_median)");
  }
  return r;
}

struct OracleArgs {
  std::string family;
  std::string rho;
  std::string sigma;
  double theta = 0.0;
  double alpha = 2.0;
  int restarts = 32;
};

inline json oracle_row(const std::string& quantity, double closed, double brute) {
  return json{{"quantity", quantity},
              {"closed_form", number(closed)},
              {"brute_force", number(brute)},
              {"discrepancy", number(closed - brute)}};
}

inline json cmd_oracle(const OracleArgs& a, const Options& opt) {
  SearchConfig cfg;
  cfg.restarts = a.restarts;
  cfg.seed = opt.seed;
  json rows = json::array();
  if (!a.family.empty()) {
    const ParametricFamily fam = io::family_from_json(io::load(a.family));
    rows.push_back(oracle_row("F1", trace_speed(fam, a.theta),
                              brute_force_max(fam, a.theta, FisherObjective::power, 1.0, cfg).value));
    rows.push_back(oracle_row("F2", qfi(fam, a.theta),
                              brute_force_max(fam, a.theta, FisherObjective::power, 2.0, cfg).value));
    rows.push_back(oracle_row("schatten_F", schatten_speed(fam, a.theta, a.alpha).value,
                              brute_force_max(fam, a.theta, FisherObjective::schatten, a.alpha, cfg).value));
  } else if (!a.rho.empty() && !a.sigma.empty()) {
    const DensityMatrix rho = io::density_from_json(io::load(a.rho), "rho");
    const DensityMatrix sigma = io::density_from_json(io::load(a.sigma), "sigma");
    rows.push_back(oracle_row("D1", trace_distance(rho, sigma),
                              brute_force_max(rho, sigma, DistanceObjective::power, 1.0, cfg).value));
    rows.push_back(oracle_row("schatten_D", schatten_distance(rho, sigma, a.alpha),
                              brute_force_max(rho, sigma, DistanceObjective::schatten, a.alpha, cfg).value));
  } else {
    throw invalid_input("oracle needs --family, or --rho and --sigma");
  }
  return json{{"theta", number(a.theta)}, {"alpha", number(a.alpha)}, {"restarts", a.restarts}, {"rows", rows}};
}

// ---------------------------------------------------------------------------
// validate

inline void check_hermitian(const ComplexMatrix& m, const std::string& what, std::vector<std::string>& diag) {
  const double asym = max_asymmetry(m);
  if (asym > tol::hermitian) diag.push_back(what + "max asymmetry " + io::number_text(asym));
}

inline void check_density(const ComplexMatrix& m, const std::string& what, std::vector<std::string>& diag) {
  check_hermitian(m, what, diag);
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  const RealVector ev = detail::eig_unchecked(h).values;
  if (ev(0) < -tol::psd(m.rows(), ev.cwiseAbs().maxCoeff())) {
    diag.push_back(what + "negative eigenvalue " + io::number_text(ev(0)));
  }
  const double dev = std::abs(m.trace().real() - 1.0);
  if (dev > tol::trace) diag.push_back(what + "trace deviation " + io::number_text(dev));
}

inline json cmd_validate(const std::string& path, const std::string& type, int& code) {
  const json j = io::load(path);
  std::vector<std::string> diag;
  try {
    if (type == "density") {
      check_density(io::matrix_from_json(j), "", diag);
    } else if (type == "hermitian") {
      check_hermitian(io::matrix_from_json(j), "", diag);
    } else if (type == "povm") {
      const json& els = io::field(j, "elements", "");
      if (!els.is_array() || els.empty()) io::field_error("elements", "expected a non-empty array");
      ComplexMatrix sum;
      for (std::size_t i = 0; i < els.size(); ++i) {
        const std::string prefix = "elements[" + std::to_string(i) + "]: ";
        const ComplexMatrix e = io::matrix_from_json(els[i], "elements[" + std::to_string(i) + "]");
        if (i == 0) sum = ComplexMatrix::Zero(e.rows(), e.cols());
        if (e.rows() != sum.rows()) io::field_error("elements", "elements have different dimensions");
        check_hermitian(e, prefix, diag);
        const RealVector ev = detail::eig_unchecked(0.5 * (e + e.adjoint())).values;
        if (ev(0) < -std::max(1e-12, tol::psd(e.rows(), ev.cwiseAbs().maxCoeff()))) {
          diag.push_back(prefix + "negative eigenvalue " + io::number_text(ev(0)));
        }
        sum += e;
      }
      const double dev = (sum - identity(sum.rows())).cwiseAbs().maxCoeff();
      if (dev > 1e-9) diag.push_back("completeness deviation " + io::number_text(dev));
    } else if (type == "family") {
      io::family_from_json(j);
    } else if (type == "prob") {
      io::prob_from_json(j);
    } else {
      throw invalid_parameter("unknown type '" + type + "' (expected density, hermitian, povm, family or prob)");
    }
  } catch (const invalid_input& e) {
    diag.push_back(e.what());
  }
  code = diag.empty() ? exit_code::ok : exit_code::invalid;
  return json{{"file", path}, {"type", type}, {"valid", diag.empty()}, {"diagnostics", diag}};
}

// ---------------------------------------------------------------------------

/// Runs the command line `args` (without the program name). Reports go to `out`, errors to `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Statistical speeds, distances and bounds for parametrized quantum states", "qspeed"};
  app.require_subcommand(1);
  Options opt;
  std::optional<std::uint64_t> seed;
  app.add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", seed, "Random seed (default: QSPEED_SEED or 0)");

  SpeedArgs sp;
  auto* speed = app.add_subcommand("speed", "Trace speed, QFI and Schatten speeds of a family");
  speed->add_option("--family", sp.family, "Family JSON")->required();
  speed->add_option("--theta", sp.theta, "Parameter value");
  speed->add_option("--alpha", sp.alpha, "Schatten order");
  speed->add_flag("--povm", sp.povm, "Include the optimal POVM");
  speed->add_option("--target", sp.target, "POVM target: trace_speed, schatten or qfi");

  DistanceArgs di;
  auto* distance = app.add_subcommand("distance", "Trace, Bures and Schatten distances");
  distance->add_option("--rho", di.rho, "First state JSON")->required();
  distance->add_option("--sigma", di.sigma, "Second state JSON")->required();
  distance->add_option("--alpha", di.alpha, "Schatten order");

  WitnessArgs wi;
  auto* witness = app.add_subcommand("witness", "Entanglement witness from a separability speed limit");
  witness->add_option("--family", wi.family, "Unitary family JSON");
  witness->add_option("--state", wi.state, "State JSON (generator J_z, or partition Hamiltonian)");
  witness->add_option("--partition", wi.partition, "Partition JSON for the asep bound");
  witness->add_option("--bound", wi.bound, "ksep or asep");
  witness->add_option("--k", wi.k, "Largest entangled block size for ksep");
  witness->add_option("--alpha", wi.alpha, "Schatten order");
  witness->add_option("--theta", wi.theta, "Parameter value");

  BoundArgs bo;
  auto* bound = app.add_subcommand("bound", "Heisenberg, separability, non-Hermitian and superoperator bounds");
  bound->add_option("--kind", bo.kind, "heisenberg, bhatia_davis, ksep, asep, nonhermitian or superop")->required();
  bound->add_option("--hamiltonian", bo.hamiltonian, "Hamiltonian JSON");
  bound->add_option("--gamma", bo.gamma, "Gamma JSON");
  bound->add_option("--state", bo.state, "State JSON");
  bound->add_option("--superop", bo.superop, "Superoperator matrix JSON");
  bound->add_option("--partition", bo.partition, "Partition JSON");
  bound->add_option("--n", bo.n, "Number of qubits");
  bound->add_option("--k", bo.k, "Largest entangled block size");
  bound->add_option("--alpha", bo.alpha, "Schatten order");

  EstimateArgs es;
  auto* estimate = app.add_subcommand("estimate", "Monte Carlo estimation reports");
  estimate->add_option("--kind", es.kind, "discrimination, median, median_bias, cramer_rao or quantum_median")->required();
  estimate->add_option("--rho", es.rho, "First state JSON");
  estimate->add_option("--sigma", es.sigma, "Second state JSON");
  estimate->add_option("--family", es.family, "Family JSON");
  estimate->add_option("--model", es.model, "gaussian, cauchy, laplace or skewed");
  estimate->add_option("--estimator", es.estimator, "median or mean");
  estimate->add_option("--scale", es.scale, "Model scale");
  estimate->add_option("--theta", es.theta, "True parameter");
  estimate->add_option("--m", es.m, "Sample size per estimate");
  estimate->add_option("--trials", es.trials, "Number of replicas");

  OracleArgs orc;
  auto* oracle = app.add_subcommand("oracle", "Brute-force measurement search against closed forms");
  oracle->add_option("--family", orc.family, "Family JSON");
  oracle->add_option("--rho", orc.rho, "First state JSON");
  oracle->add_option("--sigma", orc.sigma, "Second state JSON");
  oracle->add_option("--theta", orc.theta, "Parameter value");
  oracle->add_option("--alpha", orc.alpha, "Schatten order");
  oracle->add_option("--restarts", orc.restarts, "Random restarts");

  std::string vpath;
  std::string vtype = "density";
  auto* validate = app.add_subcommand("validate", "Check type invariants of a JSON input");
  validate->add_option("file", vpath, "JSON file")->required();
  validate->add_option("--type", vtype, "density, hermitian, povm, family or prob");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::invalid;
  }

  try {
    opt.seed = seed ? *seed : default_seed();
    json report;
    int code = exit_code::ok;
    if (*speed) report = cmd_speed(sp);
    if (*distance) report = cmd_distance(di);
    if (*witness) report = cmd_witness(wi);
    if (*bound) report = cmd_bound(bo, opt);
    if (*estimate) report = cmd_estimate(es, opt);
    if (*oracle) report = cmd_oracle(orc, opt);
    if (*validate) report = cmd_validate(vpath, vtype, code);
    emit(report, opt, out);
    return code;
  } catch (const numerical_error& e) {
    err << "numerical error: " << e.what() << "\n";
    return exit_code::numerical;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return exit_code::invalid;
  } catch (const std::domain_error& e) {
    err << "undefined: " << e.what() << "\n";
    return exit_code::invalid;
  }
}

}  // namespace qspeed::cli

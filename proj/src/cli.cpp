#include "ebbm/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "ebbm/dataset_io.hpp"
#include "ebbm/errors.hpp"
#include "ebbm/estimator.hpp"
#include "ebbm/harness.hpp"
#include "ebbm/oracle.hpp"
#include "ebbm/parallel.hpp"
#include "ebbm/rng.hpp"
#include "ebbm/sampler.hpp"

namespace ebbm {

namespace {

using json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Non-finite values become the strings "inf" / "-inf" / "nan".
json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

int cmd_generate(std::size_t n, std::size_t N, double H, double J, const std::string& prior_name,
                 std::uint64_t seed, double delta_beta, int sweeps, unsigned workers,
                 const std::string& out_path, std::ostream& out, std::ostream& err) {
  if (!(J >= 0.0) || !std::isfinite(J)) throw InputError("--J must be >= 0");
  if (!std::isfinite(H)) throw InputError("--H must be finite");
  const PriorSpec prior{parse_prior_family(prior_name.c_str()), J * J, H};
  SamplerConfig config;
  config.delta_beta = delta_beta;
  config.sweeps_per_beta = sweeps;
  validate(config);
  const auto machine_seed = child_seed(seed, 0);
  const auto data_seed = child_seed(seed, 1);
  const auto machine = sample_parameters(prior, n, machine_seed);
  const auto data = generate_dataset(machine, N, config, data_seed, workers);
  if (out_path.empty() || out_path == "-") {
    out << format_dataset(data);
  } else {
    write_dataset(data, out_path);
  }
  err << "seed " << seed << " machine_seed " << machine_seed << " data_seed " << data_seed
      << " prior " << to_string(prior.family) << " gamma " << num(prior.gamma) << " H "
      << num(H) << '\n';
  return kExitOk;
}

json result_document(const EstimateResult& r, const std::string& digest) {
  const auto& d = r.diagnostics;
  json doc;
  doc["version"] = kResultVersion;
  doc["input_digest"] = digest;
  doc["seed"] = nullptr;
  doc["branch"] = to_string(r.branch);
  doc["gamma_hat"] = json_number(r.gamma_hat);
  doc["J_hat"] = json_number(r.J_hat);
  doc["H_hat"] = r.H_hat ? json(*r.H_hat) : json(nullptr);
  doc["diagnostics"] = {
      {"M", d.M},
      {"entropy_M", d.entropy_M},
      {"Phi_M", d.linear_M},
      {"phi2_M", d.quadratic_M},
      {"entropy_term", json_number(d.entropy_term)},
      {"linear_term", json_number(d.linear_term)},
      {"quadratic_term", json_number(d.quadratic_term)},
      {"laplace_ok", d.laplace_ok},
      {"laplace_margin", json_number(d.laplace_margin)},
  };
  return doc;
}

int cmd_estimate(const std::string& in_path, const std::string& format, std::ostream& out) {
  std::string text;
  {
    std::ifstream f(in_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + in_path);
    std::ostringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  const auto data = parse_dataset(text);
  const auto digest = fnv1a_hex(text);
  const auto r = run_estimator(compute_stats(data));
  if (format == "json") {
    out << result_document(r, digest).dump(2) << '\n';
  } else {
    const auto& d = r.diagnostics;
    out << "version,input_digest,branch,gamma_hat,J_hat,H_hat,M,phi2_M,Phi_M,laplace_ok,"
           "laplace_margin\n";
    out << kResultVersion << ',' << digest << ',' << to_string(r.branch) << ','
        << num(r.gamma_hat) << ',' << num(r.J_hat) << ',' << (r.H_hat ? num(*r.H_hat) : "")
        << ',' << num(d.M) << ',' << num(d.quadratic_M) << ',' << num(d.linear_M) << ','
        << (d.laplace_ok ? 1 : 0) << ',' << num(d.laplace_margin) << '\n';
  }
  return kExitOk;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw InputError("config: " + key + ": not a number '" + v + "'");
  return x;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw InputError("config: " + key + ": not a non-negative integer '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw InputError("config: " + key + ": out of range '" + v + "'");
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in) {
  ExperimentConfig c;
  c.J_grid.clear();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError("config line " + std::to_string(line_no) + ": expected key=value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "n") {
      c.n = to_unsigned(key, value);
    } else if (key == "N") {
      c.N = to_unsigned(key, value);
    } else if (key == "H_true") {
      c.H_true = to_double(key, value);
    } else if (key == "J_grid") {
      std::stringstream ss(value);
      for (std::string cell; std::getline(ss, cell, ',');)
        if (!trim(cell).empty()) c.J_grid.push_back(to_double(key, trim(cell)));
    } else if (key == "prior") {
      c.prior = parse_prior_family(value.c_str());
    } else if (key == "repeats") {
      c.repeats = to_unsigned(key, value);
    } else if (key == "seed") {
      c.master_seed = to_unsigned(key, value);
    } else if (key == "delta_beta") {
      c.sampler.delta_beta = to_double(key, value);
    } else if (key == "sweeps") {
      c.sampler.sweeps_per_beta = static_cast<int>(to_unsigned(key, value));
    } else {
      throw InputError("config: unknown key '" + key + "'");
    }
  }
  return c;
}

namespace {

int cmd_experiment(const std::string& config_path, const std::string& out_dir, unsigned workers,
                   std::ostream& out, std::ostream& err) {
  std::ifstream f(config_path);
  if (!f) throw std::runtime_error("cannot open " + config_path);
  auto config = parse_experiment_config(f);
  config.workers = workers;
  validate(config);
  std::filesystem::create_directories(out_dir);
  const auto summary = run_experiment(config);
  for (const auto& p : summary.points) {
    err << "J_true " << num(p.J_true) << " mean_J_hat " << num(p.mean_J_hat) << " sd "
        << num(p.sd_J_hat) << " zero/finite/diverged/error " << p.n_zero << '/' << p.n_finite
        << '/' << p.n_diverged << '/' << p.n_error << '\n';
  }
  const auto paths = OutputPaths::in_directory(out_dir);
  emit_outputs(summary, paths);
  out << "wrote " << paths.trials.string() << ' ' << paths.summary.string() << ' '
      << paths.plot_J.string() << ' ' << paths.plot_H.string() << '\n';
  return kExitOk;
}

int cmd_oracle(const std::string& suite, std::uint64_t seed, double perturb, std::ostream& out) {
  std::vector<oracle::SuiteReport> reports;
  const bool all = suite == "all";
  if (all || suite == "psi") reports.push_back(oracle::psi_suite(seed));
  if (all || suite == "georges") reports.push_back(oracle::georges_suite(1.0 + perturb));
  if (all || suite == "mc") reports.push_back(oracle::mc_suite(seed));
  if (all || suite == "ml") reports.push_back(oracle::ml_suite(seed));
  bool ok = true;
  for (const auto& r : reports) {
    out << r.suite << ' ' << (r.passed() ? "PASS" : "FAIL") << " cases " << r.cases.size()
        << " max_gap " << num(r.max_gap()) << '\n';
    for (const auto& c : r.cases) {
      if (c.passed) continue;
      out << "  failed " << c.name << " gap " << num(c.gap) << " tolerance " << num(c.tolerance)
          << (c.detail.empty() ? "" : " inputs: " + c.detail) << '\n';
    }
    ok = ok && r.passed();
  }
  return ok ? kExitOk : kExitFailure;
}

int cmd_advise(double H, std::size_t n, std::ostream& out) {
  const auto advice = advise_sample_size(H, n);
  out << "N " << advice.N << '\n';
  out << "anchors |H|=0 -> " << num(0.4 * static_cast<double>(n))
      << ", |H|=0.2 -> 30, |H|=0.4 -> 5 (linear between, constant beyond)\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Empirical Bayes hyperparameter estimation for Boltzmann machines"};
  app.name(args.empty() ? "ebbm" : args.front());
  app.require_subcommand(1);

  std::size_t n = 0, N = 0;
  double H = 0.0, J = 0.0, delta_beta = 0.03, perturb = 0.0;
  std::string prior = "gauss", out_path, in_path, format = "json", config_path, out_dir, suite = "all";
  std::uint64_t seed = 1;
  int sweeps = 1;
  unsigned workers = 1;

  auto* gen = app.add_subcommand("generate", "Sample a machine from the prior and write a dataset");
  gen->add_option("--n", n, "Number of spins")->required()->check(CLI::Range(2, 1 << 20));
  gen->add_option("--N", N, "Number of samples")->required()->check(CLI::Range(1, 1 << 30));
  gen->add_option("--H", H, "Field");
  gen->add_option("--J", J, "Coupling scale, gamma = J^2");
  gen->add_option("--prior", prior)->check(CLI::IsMember({"gauss", "laplace"}));
  gen->add_option("--seed", seed);
  gen->add_option("--delta-beta", delta_beta);
  gen->add_option("--sweeps", sweeps, "Heat-bath sweeps per temperature");
  gen->add_option("--workers", workers)->check(CLI::Range(1u, 1024u));
  gen->add_option("--out", out_path, "Output file (default stdout)");

  auto* est = app.add_subcommand("estimate", "Estimate gamma and H from a dataset");
  est->add_option("--in", in_path)->required();
  est->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  auto* exp = app.add_subcommand("experiment", "Run a repeated-trial sweep from a config file");
  exp->add_option("--config", config_path)->required();
  exp->add_option("--out-dir", out_dir)->required();
  exp->add_option("--workers", workers)->check(CLI::Range(1u, 1024u));

  auto* orc = app.add_subcommand("oracle", "Run brute-force verification suites");
  orc->add_option("--suite", suite)->check(CLI::IsMember({"psi", "georges", "mc", "ml", "all"}));
  orc->add_option("--seed", seed);
  orc->add_option("--perturb", perturb, "Relative error injected into the closed forms");

  auto* adv = app.add_subcommand("advise", "Suggest a sample size");
  adv->add_option("--H", H)->required();
  adv->add_option("--n", n)->required()->check(CLI::Range(2, 1 << 30));

  try {
    std::vector<std::string> rest(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen)
      return cmd_generate(n, N, H, J, prior, seed, delta_beta, sweeps, workers, out_path, out, err);
    if (*est) return cmd_estimate(in_path, format, out);
    if (*exp) return cmd_experiment(config_path, out_dir, workers, out, err);
    if (*orc) return cmd_oracle(suite, seed, perturb, out);
    if (*adv) return cmd_advise(H, n, out);
  } catch (const DegenerateMagnetization& e) {
    err << "error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const DegenerateObjective& e) {
    err << "error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace ebbm

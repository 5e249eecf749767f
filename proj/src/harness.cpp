#include "ebbm/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ebbm/errors.hpp"
#include "ebbm/moments.hpp"
#include "ebbm/parallel.hpp"
#include "ebbm/rng.hpp"

namespace ebbm {

void validate(const ExperimentConfig& config) {
  if (config.n < 2) throw InputError("experiment: n must be >= 2");
  if (config.N < 1) throw InputError("experiment: N must be >= 1");
  if (config.repeats < 1) throw InputError("experiment: repeats must be >= 1");
  if (!std::isfinite(config.H_true)) throw InputError("experiment: H_true must be finite");
  for (double J : config.J_grid)
    if (!(J >= 0.0) || !std::isfinite(J)) throw InputError("experiment: J grid values must be >= 0");
  validate(config.sampler);
}

TrialRecord run_trial(const ExperimentConfig& config, std::size_t grid_index,
                      std::size_t trial_index) {
  TrialRecord rec;
  rec.J_true = config.J_grid.at(grid_index);
  rec.trial = trial_index;
  rec.seed = derive_seed(config.master_seed, {grid_index, trial_index});
  rec.quadratic_M = rec.linear_M = std::nan("");

  const PriorSpec prior{config.prior, rec.J_true * rec.J_true, config.H_true};
  const auto machine = sample_parameters(prior, config.n, child_seed(rec.seed, 0));
  const auto data = generate_dataset(machine, config.N, config.sampler, child_seed(rec.seed, 1));
  try {
    rec.result = run_estimator(compute_stats(data));
    rec.quadratic_M = rec.result->diagnostics.quadratic_M;
    rec.linear_M = rec.result->diagnostics.linear_M;
  } catch (const DegenerateMagnetization& e) {
    rec.error = e.what();
  } catch (const DegenerateObjective& e) {
    rec.error = e.what();
  }
  return rec;
}

namespace {

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  double mean() const { return count ? sum / count : std::nan(""); }
  double sd() const {
    if (count < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, (sum_sq - count * m * m) / (count - 1)));
  }
};

}  // namespace

GridPointSummary summarize(double J_true, std::span<const TrialRecord> trials, double H_true) {
  GridPointSummary s;
  s.J_true = J_true;
  s.repeats = trials.size();
  Moments J, H_err;
  std::vector<double> H_hat;
  std::size_t flagged = 0, estimated = 0;
  for (const auto& t : trials) {
    if (!t.result) {
      ++s.n_error;
      continue;
    }
    ++estimated;
    if (!t.result->diagnostics.laplace_ok) ++flagged;
    switch (t.result->branch) {
      case GammaBranch::Zero: ++s.n_zero; break;
      case GammaBranch::Finite: ++s.n_finite; break;
      case GammaBranch::Diverged: ++s.n_diverged; continue;
    }
    J.add(t.result->J_hat);
    H_err.add(std::abs(H_true - *t.result->H_hat));
    H_hat.push_back(*t.result->H_hat);
  }
  s.mean_J_hat = J.mean();
  s.sd_J_hat = J.sd();
  s.mae_H = H_err.mean();
  Moments H;
  for (double h : H_hat) H.add(h);
  s.sd_H = H.sd();
  s.laplace_flag_rate = estimated ? static_cast<double>(flagged) / estimated : 0.0;
  return s;
}

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  validate(config);
  ExperimentSummary out;
  out.config = config;
  const std::size_t R = config.repeats;
  out.trials.resize(config.J_grid.size() * R);
  parallel_for(out.trials.size(), config.workers, [&](std::size_t k) {
    out.trials[k] = run_trial(config, k / R, k % R);
  });
  for (std::size_t g = 0; g < config.J_grid.size(); ++g) {
    out.points.push_back(summarize(config.J_grid[g],
                                   std::span<const TrialRecord>(out.trials).subspan(g * R, R),
                                   config.H_true));
  }
  return out;
}

OutputPaths OutputPaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "trials.csv", dir / "summary.csv", dir / "plot_J.dat", dir / "plot_H.dat"};
}

namespace {

constexpr const char* kTrialHeader =
    "n,N,H_true,J_true,prior,trial,seed,branch,gamma_hat,J_hat,H_hat,phi2_M,Phi_M,laplace_ok";
constexpr const char* kSummaryHeader =
    "n,N,H_true,J_true,prior,repeats,mean_J_hat,sd_J_hat,mae_H,sd_H,n_zero,n_finite,n_diverged,"
    "n_error,laplace_flag_rate";

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return f;
}

void finish(std::ofstream& f, const std::filesystem::path& path) {
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void emit_outputs(const ExperimentSummary& summary, const OutputPaths& paths) {
  const auto& c = summary.config;
  const std::string prefix = std::to_string(c.n) + ',' + std::to_string(c.N) + ',' +
                             num(c.H_true) + ',';
  {
    auto f = open_for_write(paths.trials);
    f << kTrialHeader << '\n';
    for (const auto& t : summary.trials) {
      f << prefix << num(t.J_true) << ',' << to_string(c.prior) << ',' << t.trial << ','
        << t.seed << ',';
      if (!t.result) {
        f << "error,,,,,,\n";
        continue;
      }
      const auto& r = *t.result;
      f << to_string(r.branch) << ',' << num(r.gamma_hat) << ',' << num(r.J_hat) << ','
        << (r.H_hat ? num(*r.H_hat) : "") << ',' << num(t.quadratic_M) << ','
        << num(t.linear_M) << ',' << (r.diagnostics.laplace_ok ? 1 : 0) << '\n';
    }
    finish(f, paths.trials);
  }
  {
    auto f = open_for_write(paths.summary);
    f << kSummaryHeader << '\n';
    for (const auto& p : summary.points) {
      f << prefix << num(p.J_true) << ',' << to_string(c.prior) << ',' << p.repeats << ','
        << num(p.mean_J_hat) << ',' << num(p.sd_J_hat) << ',' << num(p.mae_H) << ','
        << num(p.sd_H) << ',' << p.n_zero << ',' << p.n_finite << ',' << p.n_diverged << ','
        << p.n_error << ',' << num(p.laplace_flag_rate) << '\n';
    }
    finish(f, paths.summary);
  }
  {
    auto f = open_for_write(paths.plot_J);
    f << "# J_true mean_J_hat sd_J_hat\n";
    for (const auto& p : summary.points)
      f << num(p.J_true) << ' ' << num(p.mean_J_hat) << ' ' << num(p.sd_J_hat) << '\n';
    finish(f, paths.plot_J);
  }
  {
    auto f = open_for_write(paths.plot_H);
    f << "# J_true mae_H sd_H\n";
    for (const auto& p : summary.points)
      f << num(p.J_true) << ' ' << num(p.mae_H) << ' ' << num(p.sd_H) << '\n';
    finish(f, paths.plot_H);
  }
}

std::vector<GridPointSummary> read_summary_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(f, line) || line != kSummaryHeader)
    throw InputError(path.string() + ": unexpected summary header");
  std::vector<GridPointSummary> out;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cols.push_back(cell);
    if (cols.size() != 15)
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected 15 columns");
    auto d = [&](std::size_t k) { return std::strtod(cols[k].c_str(), nullptr); };
    auto u = [&](std::size_t k) {
      return static_cast<std::size_t>(std::strtoull(cols[k].c_str(), nullptr, 10));
    };
    GridPointSummary p;
    p.J_true = d(3);
    p.repeats = u(5);
    p.mean_J_hat = d(6);
    p.sd_J_hat = d(7);
    p.mae_H = d(8);
    p.sd_H = d(9);
    p.n_zero = u(10);
    p.n_finite = u(11);
    p.n_diverged = u(12);
    p.n_error = u(13);
    p.laplace_flag_rate = d(14);
    out.push_back(p);
  }
  return out;
}

}  // namespace ebbm

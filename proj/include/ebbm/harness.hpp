#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ebbm/estimator.hpp"
#include "ebbm/model.hpp"
#include "ebbm/sampler.hpp"

namespace ebbm {

/// One sweep over J_true = sqrt(gamma_true) at fixed n, N and H_true.
struct ExperimentConfig {
  std::size_t n = 300;
  std::size_t N = 120;
  double H_true = 0.0;
  std::vector<double> J_grid;
  PriorFamily prior = PriorFamily::Gaussian;
  std::size_t repeats = 300;
  std::uint64_t master_seed = 1;
  SamplerConfig sampler;
  unsigned workers = 1;  // does not affect results

  double alpha() const { return static_cast<double>(N) / static_cast<double>(n); }
};

void validate(const ExperimentConfig& config);

struct TrialRecord {
  double J_true = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::optional<EstimateResult> result;  // empty when the trial errored
  std::string error;                     // e.g. "degenerate magnetization"
  double quadratic_M = 0.0;              // phi2(M)
  double linear_M = 0.0;                 // Phi(M)
};

/// Trial `trial_index` at grid point `grid_index`. Seeded by
/// derive_seed(master_seed, {grid_index, trial_index}); the machine uses child
/// 0 of that seed and the data child 1.
TrialRecord run_trial(const ExperimentConfig& config, std::size_t grid_index,
                      std::size_t trial_index);

struct GridPointSummary {
  double J_true = 0.0;
  std::size_t repeats = 0;
  double mean_J_hat = 0.0;  // over Zero and Finite trials
  double sd_J_hat = 0.0;
  double mae_H = 0.0;       // mean |H_true - H_hat|
  double sd_H = 0.0;
  std::size_t n_zero = 0;
  std::size_t n_finite = 0;
  std::size_t n_diverged = 0;
  std::size_t n_error = 0;
  double laplace_flag_rate = 0.0;  // fraction of estimated trials failing the check

  friend bool operator==(const GridPointSummary&, const GridPointSummary&) = default;
};

struct ExperimentSummary {
  ExperimentConfig config;
  std::vector<TrialRecord> trials;  // grid-major, then trial index
  std::vector<GridPointSummary> points;
};

/// Sample-sd (denominator k - 1); 0 for fewer than two values.
GridPointSummary summarize(double J_true, std::span<const TrialRecord> trials, double H_true);

ExperimentSummary run_experiment(const ExperimentConfig& config);

struct OutputPaths {
  std::filesystem::path trials;
  std::filesystem::path summary;
  std::filesystem::path plot_J;  // J_true, mean_J_hat, sd_J_hat
  std::filesystem::path plot_H;  // J_true, mae_H, sd_H

  static OutputPaths in_directory(const std::filesystem::path& dir);
};

void emit_outputs(const ExperimentSummary& summary, const OutputPaths& paths);

/// Reads a summary CSV written by emit_outputs back into grid points.
std::vector<GridPointSummary> read_summary_csv(const std::filesystem::path& path);

}  // namespace ebbm

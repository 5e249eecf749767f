#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ebbm/model.hpp"
#include "ebbm/moments.hpp"
#include "ebbm/rng.hpp"

namespace ebbm {

/// Inverse temperatures 0 = beta_0 < beta_1 < ... < beta_T = 1.
struct AnnealSchedule {
  std::vector<double> betas;
  double delta_beta = 0.0;
};

struct SamplerConfig {
  double delta_beta = 0.03;
  int sweeps_per_beta = 1;
  bool track_weights = false;
};

void validate(const SamplerConfig& config);

/// beta_t = min(t * delta_beta, 1), terminating at exactly 1.
AnnealSchedule make_schedule(double delta_beta);

/// One sequential heat-bath pass over sites 0..n-1 at inverse temperature beta.
SpinConfiguration gibbs_sweep(const BoltzmannMachine& machine, double beta,
                              const SpinConfiguration& state, Rng& rng);

struct AnnealedSample {
  SpinConfiguration state;
  std::optional<double> log_weight;
};

/// Uniform start at beta = 0, then `sweeps_per_beta` sweeps at each later
/// beta. With track_weights the AIS log-weight
///   sum_t (beta_{t+1} - beta_t) * exponent(x_t)
/// is returned; exp of it is an unbiased estimate of Z / 2^n.
AnnealedSample annealed_sample(const BoltzmannMachine& machine, const AnnealSchedule& schedule,
                               const SamplerConfig& config, Rng& rng);

/// N independent annealed chains; chain mu uses child_seed(master_seed, mu),
/// so the output does not depend on `workers`.
Dataset generate_dataset(const BoltzmannMachine& machine, std::size_t N,
                         const SamplerConfig& config, std::uint64_t master_seed,
                         unsigned workers = 1);

}  // namespace ebbm

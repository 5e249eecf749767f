#include "ebbm/sampler.hpp"

#include <cmath>
#include <string>

#include "ebbm/errors.hpp"
#include "ebbm/parallel.hpp"

namespace ebbm {

void validate(const SamplerConfig& config) {
  if (!(config.delta_beta > 0.0 && config.delta_beta <= 1.0)) {
    throw InputError("delta_beta must lie in (0, 1]");
  }
  if (config.sweeps_per_beta < 1) throw InputError("sweeps_per_beta must be >= 1");
}

AnnealSchedule make_schedule(double delta_beta) {
  if (!(delta_beta > 0.0 && delta_beta <= 1.0)) {
    throw InputError("delta_beta must lie in (0, 1]");
  }
  AnnealSchedule schedule;
  schedule.delta_beta = delta_beta;
  for (std::size_t t = 0;; ++t) {
    const double beta = static_cast<double>(t) * delta_beta;
    // Guard against t * delta_beta landing a rounding error below 1.
    if (beta >= 1.0 - 1e-12) {
      schedule.betas.push_back(1.0);
      break;
    }
    schedule.betas.push_back(beta);
  }
  return schedule;
}

namespace {

// Working state of one chain: spins plus cached local fields
// field[i] = sum_j J_ij s_j, updated incrementally on every flip.
struct Chain {
  std::vector<Spin> spins;
  std::vector<double> field;

  Chain(const BoltzmannMachine& m, std::vector<Spin> s) : spins(std::move(s)), field(m.n(), 0.0) {
    const std::size_t n = m.n();
    for (std::size_t j = 0; j < n; ++j) {
      const double sj = spins[j];
      const auto row = m.row(j);
      for (std::size_t i = 0; i < n; ++i) field[i] += sj * row[i];
    }
  }

  void sweep(const BoltzmannMachine& m, double beta, Rng& rng) {
    const std::size_t n = m.n();
    const double h = m.h();
    double* f = field.data();
    for (std::size_t i = 0; i < n; ++i) {
      const double p_up = 1.0 / (1.0 + std::exp(-2.0 * beta * (h + f[i])));
      const Spin next = rng.uniform() < p_up ? 1 : -1;
      if (next != spins[i]) {
        const double delta = 2.0 * next;
        const double* row = m.row(i).data();
        for (std::size_t j = 0; j < n; ++j) f[j] += delta * row[j];
        spins[i] = next;
      }
    }
  }

  double exponent(const BoltzmannMachine& m) const {
    // 0.5 * sum_i s_i field_i counts every pair once.
    double pairs = 0.0;
    long mag = 0;
    for (std::size_t i = 0; i < spins.size(); ++i) {
      pairs += spins[i] * field[i];
      mag += spins[i];
    }
    return m.h() * static_cast<double>(mag) + 0.5 * pairs;
  }
};

std::vector<Spin> uniform_spins(std::size_t n, Rng& rng) {
  std::vector<Spin> s(n);
  for (auto& v : s) v = rng.uniform() < 0.5 ? 1 : -1;
  return s;
}

}  // namespace

SpinConfiguration gibbs_sweep(const BoltzmannMachine& machine, double beta,
                              const SpinConfiguration& state, Rng& rng) {
  if (state.size() != machine.n()) throw InputError("gibbs_sweep: state length mismatch");
  if (!(beta >= 0.0)) throw InputError("gibbs_sweep: beta must be >= 0");
  Chain chain(machine, {state.spins().begin(), state.spins().end()});
  chain.sweep(machine, beta, rng);
  return SpinConfiguration(std::move(chain.spins));
}

AnnealedSample annealed_sample(const BoltzmannMachine& machine, const AnnealSchedule& schedule,
                               const SamplerConfig& config, Rng& rng) {
  validate(config);
  const auto& betas = schedule.betas;
  if (betas.size() < 2 || betas.front() != 0.0 || betas.back() != 1.0) {
    throw InputError("annealed_sample: schedule must run from 0 to 1");
  }
  Chain chain(machine, uniform_spins(machine.n(), rng));
  double log_weight = 0.0;
  for (std::size_t t = 1; t < betas.size(); ++t) {
    if (config.track_weights) log_weight += (betas[t] - betas[t - 1]) * chain.exponent(machine);
    for (int k = 0; k < config.sweeps_per_beta; ++k) chain.sweep(machine, betas[t], rng);
  }
  AnnealedSample out{SpinConfiguration(std::move(chain.spins)), std::nullopt};
  if (config.track_weights) out.log_weight = log_weight;
  return out;
}

Dataset generate_dataset(const BoltzmannMachine& machine, std::size_t N,
                         const SamplerConfig& config, std::uint64_t master_seed,
                         unsigned workers) {
  if (N < 1) throw InputError("generate_dataset: N must be >= 1");
  validate(config);
  const auto schedule = make_schedule(config.delta_beta);
  const std::size_t n = machine.n();
  std::vector<Spin> flat(n * N);
  SamplerConfig chain_config = config;
  chain_config.track_weights = false;
  parallel_for(N, workers, [&](std::size_t mu) {
    Rng rng(child_seed(master_seed, mu));
    const auto sample = annealed_sample(machine, schedule, chain_config, rng);
    std::copy(sample.state.spins().begin(), sample.state.spins().end(), flat.begin() + mu * n);
  });
  return Dataset(n, N, std::move(flat));
}

}  // namespace ebbm

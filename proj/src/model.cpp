#include "ebbm/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ebbm/errors.hpp"
#include "ebbm/rng.hpp"

namespace ebbm {

SpinConfiguration::SpinConfiguration(std::vector<Spin> spins) : spins_(std::move(spins)) {
  if (spins_.size() < 2) throw InputError("spin configuration needs at least 2 spins");
  for (Spin s : spins_) {
    if (s != 1 && s != -1) throw InputError("spin values must be -1 or +1");
  }
}

SpinConfiguration SpinConfiguration::flipped() const {
  std::vector<Spin> out(spins_.size());
  std::transform(spins_.begin(), spins_.end(), out.begin(), [](Spin s) { return Spin(-s); });
  return SpinConfiguration(std::move(out));
}

BoltzmannMachine::BoltzmannMachine(std::size_t n, double h, std::span<const double> pair_couplings)
    : n_(n), h_(h), dense_(n * n, 0.0) {
  if (n < 2) throw InputError("machine needs at least 2 spins");
  if (pair_couplings.size() != pair_count(n)) {
    throw InputError("expected " + std::to_string(pair_count(n)) + " couplings, got " +
                     std::to_string(pair_couplings.size()));
  }
  if (!std::isfinite(h)) throw InputError("field must be finite");
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const double v = pair_couplings[k];
      if (!std::isfinite(v)) throw InputError("couplings must be finite");
      dense_[i * n + j] = v;
      dense_[j * n + i] = v;
    }
  }
}

BoltzmannMachine BoltzmannMachine::uncoupled(std::size_t n, double h) {
  std::vector<double> zeros(pair_count(n), 0.0);
  return BoltzmannMachine(n, h, zeros);
}

std::vector<double> BoltzmannMachine::pair_couplings() const {
  std::vector<double> out;
  out.reserve(pair_count(n_));
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) out.push_back(dense_[i * n_ + j]);
  return out;
}

double BoltzmannMachine::coupling_energy(std::span<const Spin> s) const {
  if (s.size() != n_) throw InputError("configuration length does not match machine size");
  double total = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = dense_.data() + i * n_;
    double partial = 0.0;
    for (std::size_t j = i + 1; j < n_; ++j) partial += row[j] * s[j];
    total += s[i] * partial;
  }
  return total;
}

double BoltzmannMachine::exponent(std::span<const Spin> s) const {
  const double couplings = coupling_energy(s);
  long magnetization = 0;
  for (Spin v : s) magnetization += v;
  return h_ * static_cast<double>(magnetization) + couplings;
}

const char* to_string(PriorFamily family) noexcept {
  return family == PriorFamily::Gaussian ? "gauss" : "laplace";
}

PriorFamily parse_prior_family(const char* name) {
  const std::string s(name);
  if (s == "gauss" || s == "gaussian") return PriorFamily::Gaussian;
  if (s == "laplace") return PriorFamily::Laplace;
  throw InputError("unknown prior family '" + s + "' (expected gauss or laplace)");
}

namespace {

// Walks all 2^n states in Gray-code order, calling visit(exponent, spins).
// Each step flips one spin and updates the exponent in O(n).
template <class Visit>
void enumerate_states(const BoltzmannMachine& m, Visit&& visit) {
  const std::size_t n = m.n();
  std::vector<Spin> s(n, -1);
  double value = m.exponent(s);
  visit(value, std::span<const Spin>(s));
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const auto b = static_cast<std::size_t>(std::countr_zero(k));
    const auto row = m.row(b);
    double local = m.h();
    for (std::size_t j = 0; j < n; ++j) local += row[j] * s[j];
    value -= 2.0 * s[b] * local;
    s[b] = static_cast<Spin>(-s[b]);
    visit(value, std::span<const Spin>(s));
  }
}

}  // namespace

double log_partition(const BoltzmannMachine& machine) {
  if (machine.n() > kMaxPartitionSpins) {
    throw CapabilityError("log_partition: exact enumeration limited to n <= " +
                          std::to_string(kMaxPartitionSpins));
  }
  double shift = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  enumerate_states(machine, [&](double v, std::span<const Spin>) {
    if (v > shift) {
      sum = sum * std::exp(shift - v) + 1.0;
      shift = v;
    } else {
      sum += std::exp(v - shift);
    }
  });
  return shift + std::log(sum);
}

ExactMoments exact_moments(const BoltzmannMachine& machine) {
  const std::size_t n = machine.n();
  if (n > kMaxMomentSpins) {
    throw CapabilityError("exact_moments: exact enumeration limited to n <= " +
                          std::to_string(kMaxMomentSpins));
  }
  double shift = -std::numeric_limits<double>::infinity();
  enumerate_states(machine, [&](double v, std::span<const Spin>) { shift = std::max(shift, v); });

  ExactMoments out{std::vector<double>(n, 0.0), std::vector<double>(pair_count(n), 0.0)};
  double norm = 0.0;
  enumerate_states(machine, [&](double v, std::span<const Spin> s) {
    const double w = std::exp(v - shift);
    norm += w;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      out.site[i] += w * s[i];
      const double ws = w * s[i];
      for (std::size_t j = i + 1; j < n; ++j, ++k) out.pair[k] += ws * s[j];
    }
  });
  for (double& x : out.site) x /= norm;
  for (double& x : out.pair) x /= norm;
  return out;
}

BoltzmannMachine sample_parameters(const PriorSpec& prior, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw InputError("sample_parameters: n must be at least 2");
  if (!(prior.gamma >= 0.0) || !std::isfinite(prior.gamma)) {
    throw InputError("sample_parameters: gamma must be finite and >= 0");
  }
  std::vector<double> couplings(pair_count(n), 0.0);
  if (prior.gamma > 0.0) {
    Rng rng(seed);
    const double sd = std::sqrt(prior.gamma / static_cast<double>(n));
    if (prior.family == PriorFamily::Gaussian) {
      for (double& v : couplings) v = sd * rng.normal();
    } else {
      // Two-sided exponential with rate sqrt(2n/gamma), by inverse CDF.
      const double scale = sd / std::numbers::sqrt2;
      for (double& v : couplings) {
        const double u = rng.uniform_open() - 0.5;
        const double mag = -std::log1p(-2.0 * std::abs(u));
        v = u < 0.0 ? -scale * mag : scale * mag;
      }
    }
  }
  return BoltzmannMachine(n, prior.H, couplings);
}

double log_prior_density(const PriorSpec& prior, const BoltzmannMachine& machine) {
  if (!(prior.gamma > 0.0)) throw InputError("log_prior_density: gamma must be > 0");
  if (machine.h() != prior.H) throw InputError("log_prior_density: machine field differs from H");
  const double n = static_cast<double>(machine.n());
  const auto couplings = machine.pair_couplings();
  double total = 0.0;
  if (prior.family == PriorFamily::Gaussian) {
    const double norm = 0.5 * std::log(n / (2.0 * std::numbers::pi * prior.gamma));
    for (double j : couplings) total += norm - n * j * j / (2.0 * prior.gamma);
  } else {
    const double norm = 0.5 * std::log(n / (2.0 * prior.gamma));
    const double rate = std::sqrt(2.0 * n / prior.gamma);
    for (double j : couplings) total += norm - rate * std::abs(j);
  }
  return total;
}

}  // namespace ebbm

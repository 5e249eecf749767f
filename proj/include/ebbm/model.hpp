#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ebbm {

using Spin = std::int8_t;

// Index of the unordered pair (i, j), i < j, in row-major upper-triangle order:
// (0,1), (0,2), ..., (0,n-1), (1,2), ...
constexpr std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n) noexcept {
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

constexpr std::size_t pair_count(std::size_t n) noexcept { return n * (n - 1) / 2; }

/// A configuration of n Ising spins, each exactly -1 or +1.
class SpinConfiguration {
 public:
  explicit SpinConfiguration(std::vector<Spin> spins);

  std::size_t size() const noexcept { return spins_.size(); }
  Spin operator[](std::size_t i) const noexcept { return spins_[i]; }
  std::span<const Spin> spins() const noexcept { return spins_; }

  SpinConfiguration flipped() const;

  friend bool operator==(const SpinConfiguration&, const SpinConfiguration&) = default;

 private:
  std::vector<Spin> spins_;
};

/// Fully-connected Boltzmann machine
///   P(S | h, J) = exp(h * sum_i S_i + sum_{i<j} J_ij S_i S_j) / Z(h, J)
/// with a uniform field h. Couplings are kept as a dense symmetric matrix
/// with zero diagonal so the sampler can stream whole rows.
class BoltzmannMachine {
 public:
  // `pair_couplings` is in pair_index order and must hold n(n-1)/2 entries.
  BoltzmannMachine(std::size_t n, double h, std::span<const double> pair_couplings);

  static BoltzmannMachine uncoupled(std::size_t n, double h);

  std::size_t n() const noexcept { return n_; }
  double h() const noexcept { return h_; }
  double coupling(std::size_t i, std::size_t j) const noexcept { return dense_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {dense_.data() + i * n_, n_};
  }
  std::vector<double> pair_couplings() const;

  /// Positive exponent h * sum_i s_i + sum_{i<j} J_ij s_i s_j.
  double exponent(std::span<const Spin> s) const;
  double exponent(const SpinConfiguration& s) const { return exponent(s.spins()); }

  /// sum_{i<j} J_ij s_i s_j alone.
  double coupling_energy(std::span<const Spin> s) const;

 private:
  std::size_t n_;
  double h_;
  std::vector<double> dense_;
};

enum class PriorFamily { Gaussian, Laplace };

const char* to_string(PriorFamily family) noexcept;
PriorFamily parse_prior_family(const char* name);

/// Delta prior on h at H, and i.i.d. Gaussian or Laplace couplings with
/// Var[J_ij] = gamma / n.
struct PriorSpec {
  PriorFamily family = PriorFamily::Gaussian;
  double gamma = 0.0;
  double H = 0.0;
};

inline constexpr std::size_t kMaxPartitionSpins = 20;
inline constexpr std::size_t kMaxMomentSpins = 16;

/// ln Z by exhaustive enumeration with max-shifted accumulation. n <= 20.
double log_partition(const BoltzmannMachine& machine);

struct ExactMoments {
  std::vector<double> site;  // <S_i>
  std::vector<double> pair;  // <S_i S_j> in pair_index order
};

/// Site and pair means under the Gibbs distribution. n <= 16.
ExactMoments exact_moments(const BoltzmannMachine& machine);

/// Draws h = H and J_ij i.i.d. from the prior; pure function of its inputs.
BoltzmannMachine sample_parameters(const PriorSpec& prior, std::size_t n, std::uint64_t seed);

/// sum_{i<j} ln p(J_ij | gamma). The delta factor on h is excluded, but h
/// must equal H exactly.
double log_prior_density(const PriorSpec& prior, const BoltzmannMachine& machine);

// Used by the exact enumerators: state bit k of `code` is spin k (+1 when set).
inline void decode_state(std::uint64_t code, std::span<Spin> out) noexcept {
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = ((code >> k) & 1U) ? 1 : -1;
}

}  // namespace ebbm

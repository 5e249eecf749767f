#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ebbm/model.hpp"
#include "ebbm/moments.hpp"

namespace ebbm::oracle {

// Brute-force verifiers. Everything here is independent of the estimator's
// closed forms: data averages are recomputed directly from the samples and
// every expectation is an explicit sum over states.

inline constexpr std::size_t kMaxReplicatedSpins = 15;

/// tau natural copies of an n-spin system tied to a small dataset.
class ReplicatedSystem {
 public:
  ReplicatedSystem(const Dataset& data, std::size_t tau);

  std::size_t n() const noexcept { return n_; }
  std::size_t N() const noexcept { return N_; }
  std::size_t tau() const noexcept { return tau_; }
  double x() const noexcept { return static_cast<double>(tau_) / static_cast<double>(N_); }
  double d_site(std::size_t i) const noexcept { return d_site_[i]; }
  double d_pair(std::size_t i, std::size_t j) const noexcept { return d_pair_[i * n_ + j]; }
  double M() const noexcept { return M_; }
  double C1() const noexcept { return C1_; }
  double C2() const noexcept { return C2_; }
  double Omega() const noexcept { return Omega_; }
  double omega(std::size_t i) const noexcept { return omega_[i]; }

  // Replica a, site i of state `code` is bit a * n + i.
  int spin(std::uint64_t code, std::size_t a, std::size_t i) const noexcept {
    return ((code >> (a * n_ + i)) & 1U) ? 1 : -1;
  }
  std::uint64_t state_count() const noexcept { return std::uint64_t{1} << (n_ * tau_); }

  /// E_int: the gamma-derivative of the replicated Hamiltonian.
  double interaction(std::uint64_t code) const;

  /// Replicated Hamiltonian E_x(S; field, gamma).
  double hamiltonian(std::uint64_t code, double field, double gamma) const;

 private:
  std::size_t n_, N_, tau_;
  std::vector<double> d_site_, d_pair_, omega_;
  double M_ = 0.0, C1_ = 0.0, C2_ = 0.0, Omega_ = 0.0;
};

struct PsiCheck {
  double lhs = 0.0;  // ln of the prior-averaged replicated sum
  double rhs = 0.0;  // ln of the closed Gaussian form with F_x
  double gap = 0.0;
};

/// Gaussian-prior replica identity at x = tau / N, both sides by enumeration.
PsiCheck psi_identity_check(const Dataset& data, double H, double gamma, std::size_t tau);

struct SingleReplicaCheck {
  double lhs = 0.0;
  double via_partition = 0.0;  // through log_partition of a rescaled machine
  double gap = 0.0;
};

/// tau = 1: the replicated sum is one Boltzmann machine with J_ij = gamma N d_ij / n.
SingleReplicaCheck single_replica_check(const Dataset& data, double H, double gamma);

struct GeorgesCheck {
  double mean_interaction = 0.0;   // <E_int>_0
  double first_order_formula = 0.0;  // n N phi_x^(1)(m)
  double mean_operator = 0.0;      // <U_x(0)>_0
  double operator_sq = 0.0;        // <U_x(0)^2>_0 from the expanded three-term form
  double operator_sq_direct = 0.0; // <U_x(0)^2>_0 from its definition
  double second_order_formula = 0.0;  // -2 n N phi_x^(2)(m)
  double first_gap = 0.0;
  double second_gap = 0.0;
};

/// Expectations under the independent-spin product measure with <S> = m.
/// `formula_scale` multiplies the closed-form side (1 for a real check; other
/// values serve as a negative control).
GeorgesCheck georges_check(const Dataset& data, double m, std::size_t tau,
                           double formula_scale = 1.0);

/// Replicated Gibbs free energy G_x(m, H, gamma) by enumeration, with the
/// Lagrange multiplier solved by bracketing.
double gibbs_free_energy(const ReplicatedSystem& sys, double m, double H, double gamma);

struct EvidenceEstimate {
  double value = 0.0;   // (1/(nN)) ln E_prior[P(D | h, J)]
  double std_error = 0.0;  // jackknife over 20 blocks
};

/// Monte Carlo evidence with exact partition functions per prior draw.
/// Draw k uses sample_parameters(prior, n, child_seed(seed, k)), so runs at
/// different gamma share random numbers.
EvidenceEstimate eb_likelihood_mc(const Dataset& data, const PriorSpec& prior, std::size_t n_mc,
                                  std::uint64_t seed);

struct MlFit {
  double h = 0.0;
  std::vector<double> J;  // pair_index order
  std::size_t iterations = 0;
  double gradient_norm = 0.0;  // infinity norm at exit
};

/// Exact maximum likelihood for the uniform-field machine (n <= 12), by
/// damped Newton ascent on the concave log-likelihood.
MlFit ml_fit_exact(const Dataset& data, std::size_t max_iterations = 200);

/// (f(m + step) - f(m - step)) / (2 step).
double finite_difference(const std::function<double(double)>& f, double m, double step);

// Suites behind the `oracle` subcommand and the acceptance tests.

struct CaseResult {
  std::string name;
  double gap = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CaseResult> cases;
  bool passed() const;
  double max_gap() const;
};

SuiteReport psi_suite(std::uint64_t seed, std::size_t cases = 50);
SuiteReport georges_suite(double formula_scale = 1.0);
SuiteReport mc_suite(std::uint64_t seed);
SuiteReport ml_suite(std::uint64_t seed);

}  // namespace ebbm::oracle

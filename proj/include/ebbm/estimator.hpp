#pragma once

#include <cstddef>
#include <optional>

#include "ebbm/moments.hpp"

namespace ebbm {

/// Inputs of the second-order expansion of the replicated Gibbs free energy
/// around gamma = 0, for replica parameter x (tau = x N copies).
struct PlefkaContext {
  double n = 0.0;
  double N = 0.0;
  double x = -1.0;
  double tau = 0.0;  // x * N
  double K = 0.0;    // tau (tau - 1) / 2
  double C1 = 0.0;
  double C2 = 0.0;
  double Omega = 0.0;

  static PlefkaContext make(std::size_t n, std::size_t N, double x, double C1, double C2,
                            double Omega);
  static PlefkaContext from_stats(const SufficientStats& stats, double x = -1.0);
};

/// Negative mean-field entropy e(m); e(+-1) = 0 by continuity.
double negative_entropy(double m);

/// First- and second-order expansion coefficients for general x.
double plefka_first_order(double m, const PlefkaContext& ctx);
double plefka_second_order(double m, const PlefkaContext& ctx);

/// Coefficient of gamma in the approximate likelihood bracket (x = -1 first
/// order plus the constant coming from the Gaussian integral).
double linear_coefficient(double m, const SufficientStats& stats);

/// Coefficient of gamma^2 in the bracket: the x = -1 second-order term.
double quadratic_coefficient(double m, const SufficientStats& stats);

/// d/dm of the x = -1 first-order term (equal to d/dm of linear_coefficient).
double linear_coefficient_slope(double m, const SufficientStats& stats);
double quadratic_coefficient_slope(double m, const SufficientStats& stats);

enum class GammaBranch { Zero, Finite, Diverged };

const char* to_string(GammaBranch branch) noexcept;

struct GammaEstimate {
  GammaBranch branch = GammaBranch::Zero;
  double gamma = 0.0;  // +inf when Diverged
};

/// argmax over gamma >= 0 of -b gamma - a gamma^2 for a = quadratic
/// coefficient, b = linear coefficient. Signs are decided against the
/// threshold 1e-10 * max(1, |a| + |b|); both near zero raises
/// DegenerateObjective.
GammaEstimate classify_gamma(double a, double b);
GammaEstimate estimate_gamma(const SufficientStats& stats);

inline constexpr double kMagnetizationGuard = 1e-12;

/// Field estimate at the stationary point m = M. Requires |M| <= 1 - 1e-12.
double estimate_field(const SufficientStats& stats, double gamma);

struct LaplaceDiagnostic {
  bool ok = true;
  double margin = 0.0;  // xi / (N (1 + max|d_ij|)); +inf as gamma -> 0
};

/// Conservative stand-in for the Laplace equivalence condition:
/// sqrt(2n / gamma) > N (1 + max|d_ij|). gamma must be > 0.
LaplaceDiagnostic laplace_assumption(const SufficientStats& stats, double gamma);

struct EstimateDiagnostics {
  double M = 0.0;
  double entropy_M = 0.0;
  double linear_M = 0.0;
  double quadratic_M = 0.0;
  // Magnitudes of the three bracket terms at m = M.
  double entropy_term = 0.0;
  double linear_term = 0.0;
  double quadratic_term = 0.0;
  bool laplace_ok = true;
  double laplace_margin = 0.0;
};

struct EstimateResult {
  GammaBranch branch = GammaBranch::Zero;
  double gamma_hat = 0.0;
  double J_hat = 0.0;
  std::optional<double> H_hat;  // empty when Diverged
  EstimateDiagnostics diagnostics;
};

/// Closed-form empirical Bayes estimate: gamma first, then H. No iteration.
EstimateResult run_estimator(const SufficientStats& stats);

/// Bracket H m - e(m) + linear(m) gamma + quadratic(m) gamma^2.
double eb_objective(double m, double H, double gamma, const SufficientStats& stats);

struct ApproxLikelihood {
  double value = 0.0;
  double m_star = 0.0;
};

/// H M - bracket(m*) where m* solves the stationarity condition
///   H = artanh m - linear'(m) gamma - quadratic'(m) gamma^2.
/// When several stationary points exist the one with the largest bracket
/// value is taken.
ApproxLikelihood eb_likelihood_approx(double H, double gamma, const SufficientStats& stats);

struct SampleSizeAdvice {
  std::size_t N = 1;
  bool heuristic = true;
};

/// Empirical anchors: |H| = 0 -> 0.4 n, 0.2 -> 30, 0.4 -> 5; linear in |H|
/// between anchors and constant beyond them.
SampleSizeAdvice advise_sample_size(double H_guess, std::size_t n);

}  // namespace ebbm

#include "ebbm/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "ebbm/errors.hpp"

namespace ebbm {

PlefkaContext PlefkaContext::make(std::size_t n, std::size_t N, double x, double C1, double C2,
                                  double Omega) {
  if (n < 2) throw InputError("PlefkaContext: n must be >= 2");
  if (N < 1) throw InputError("PlefkaContext: N must be >= 1");
  PlefkaContext ctx;
  ctx.n = static_cast<double>(n);
  ctx.N = static_cast<double>(N);
  ctx.x = x;
  ctx.tau = x * ctx.N;
  ctx.K = ctx.tau * (ctx.tau - 1.0) / 2.0;
  ctx.C1 = C1;
  ctx.C2 = C2;
  ctx.Omega = Omega;
  return ctx;
}

PlefkaContext PlefkaContext::from_stats(const SufficientStats& s, double x) {
  return make(s.n, s.N, x, s.C1, s.C2, s.Omega);
}

double negative_entropy(double m) {
  if (!(std::abs(m) <= 1.0)) throw InputError("negative_entropy: |m| must be <= 1");
  auto xlogx = [](double p) { return p > 0.0 ? p * std::log(p) : 0.0; };
  return xlogx((1.0 + m) / 2.0) + xlogx((1.0 - m) / 2.0);
}

double plefka_first_order(double m, const PlefkaContext& c) {
  const double m2 = m * m;
  return -(c.x * (c.n - 1.0) * c.N * c.C1 / (2.0 * c.n)) * m2 -
         ((c.n - 1.0) * c.K / (2.0 * c.n * c.N)) * m2 * m2;
}

double plefka_second_order(double m, const PlefkaContext& c) {
  const double n = c.n, N = c.N, tau = c.tau, K = c.K;
  const double n2 = n * n;
  const double m2 = m * m;
  const double m4 = m2 * m2;
  const double q = 1.0 - m2;
  const double q4 = 1.0 - m4;
  return -((n - 1.0) * (n - 1.0) * tau * N * c.Omega / (2.0 * n2)) * m2 * q -
         ((n - 1.0) * tau * N * c.C2 / (4.0 * n2)) * q * q -
         ((n - 1.0) * K * c.C1 / n2) * m2 * q * q -
         ((n - 1.0) * K / (2.0 * n2 * N)) * (n + tau - 3.0) * m4 * q * q -
         ((n - 1.0) * K / (4.0 * n2 * N)) * q4 * q4;
}

namespace {

// x = -1 specializations, written out term by term.
struct MinusOneTerms {
  double c1_m2;    // coefficient of m^2 in the first-order term
  double c1_m4;    // coefficient of m^4 (enters with a minus sign)
  double omega;    // m^2 (1 - m^2)
  double pair_sq;  // (1 - m^2)^2
  double mean;     // - m^2 (1 - m^2)^2
  double size;     // - m^4 (1 - m^2)^2
  double tail;     // - (1 - m^4)^2
};

MinusOneTerms minus_one_terms(const SufficientStats& s) {
  const double n = static_cast<double>(s.n);
  const double N = static_cast<double>(s.N);
  const double n2 = n * n;
  MinusOneTerms t;
  t.c1_m2 = (n - 1.0) * N * s.C1 / (2.0 * n);
  t.c1_m4 = (n - 1.0) * (N + 1.0) / (4.0 * n);
  t.omega = (n - 1.0) * (n - 1.0) * N * N * s.Omega / (2.0 * n2);
  t.pair_sq = (n - 1.0) * N * N * s.C2 / (4.0 * n2);
  t.mean = (n - 1.0) * N * (N + 1.0) * s.C1 / (2.0 * n2);
  t.size = (n - 1.0) * (N + 1.0) * (n - N - 3.0) / (4.0 * n2);
  t.tail = (n - 1.0) * (N + 1.0) / (8.0 * n2);
  return t;
}

}  // namespace

double linear_coefficient(double m, const SufficientStats& s) {
  const double n = static_cast<double>(s.n);
  const double N = static_cast<double>(s.N);
  const double m2 = m * m;
  return ((n - 1.0) * N * s.C1 / (2.0 * n)) * m2 -
         ((n - 1.0) * N / (4.0 * n)) * (s.C2 + ((N + 1.0) / N) * (m2 * m2 - 1.0 / (N + 1.0)));
}

double quadratic_coefficient(double m, const SufficientStats& s) {
  const auto t = minus_one_terms(s);
  const double m2 = m * m;
  const double m4 = m2 * m2;
  const double q = 1.0 - m2;
  const double q4 = 1.0 - m4;
  return t.omega * m2 * q + t.pair_sq * q * q - t.mean * m2 * q * q - t.size * m4 * q * q -
         t.tail * q4 * q4;
}

double linear_coefficient_slope(double m, const SufficientStats& s) {
  const auto t = minus_one_terms(s);
  return 2.0 * t.c1_m2 * m - 4.0 * t.c1_m4 * m * m * m;
}

double quadratic_coefficient_slope(double m, const SufficientStats& s) {
  const auto t = minus_one_terms(s);
  const double m2 = m * m;
  const double m3 = m2 * m;
  const double q = 1.0 - m2;
  return t.omega * (2.0 * m - 4.0 * m3) - 4.0 * t.pair_sq * m * q -
         t.mean * 2.0 * m * q * (1.0 - 3.0 * m2) - t.size * 4.0 * m3 * q * (1.0 - 2.0 * m2) +
         t.tail * 8.0 * m3 * (1.0 - m2 * m2);
}

const char* to_string(GammaBranch branch) noexcept {
  switch (branch) {
    case GammaBranch::Zero: return "zero";
    case GammaBranch::Finite: return "finite";
    case GammaBranch::Diverged: return "diverged";
  }
  return "unknown";
}

GammaEstimate classify_gamma(double a, double b) {
  const double theta = 1e-10 * std::max(1.0, std::abs(a) + std::abs(b));
  auto sign = [theta](double v) { return v > theta ? 1 : (v < -theta ? -1 : 0); };
  const int sa = sign(a);
  const int sb = sign(b);
  if (sa == 0 && sb == 0) throw DegenerateObjective();
  if ((sa > 0 && sb >= 0) || (sa == 0 && sb > 0)) return {GammaBranch::Zero, 0.0};
  if (sa > 0 && sb < 0) return {GammaBranch::Finite, -b / (2.0 * a)};
  return {GammaBranch::Diverged, std::numeric_limits<double>::infinity()};
}

GammaEstimate estimate_gamma(const SufficientStats& stats) {
  return classify_gamma(quadratic_coefficient(stats.M, stats), linear_coefficient(stats.M, stats));
}

namespace {

void require_magnetization(double M) {
  if (!(std::abs(M) <= 1.0 - kMagnetizationGuard)) throw DegenerateMagnetization();
}

}  // namespace

double estimate_field(const SufficientStats& stats, double gamma) {
  require_magnetization(stats.M);
  if (!std::isfinite(gamma)) throw InputError("estimate_field: gamma must be finite");
  const double M = stats.M;
  return std::atanh(M) - (linear_coefficient_slope(M, stats) * gamma +
                          quadratic_coefficient_slope(M, stats) * gamma * gamma);
}

LaplaceDiagnostic laplace_assumption(const SufficientStats& stats, double gamma) {
  if (!(gamma > 0.0)) throw InputError("laplace_assumption: gamma must be > 0");
  LaplaceDiagnostic out;
  const double xi = std::sqrt(2.0 * static_cast<double>(stats.n) / gamma);
  const double bound = static_cast<double>(stats.N) * (1.0 + stats.max_abs_dij);
  out.ok = xi > bound;
  out.margin = xi / bound;
  return out;
}

EstimateResult run_estimator(const SufficientStats& stats) {
  require_magnetization(stats.M);
  const double M = stats.M;
  EstimateResult r;
  auto& d = r.diagnostics;
  d.M = M;
  d.entropy_M = negative_entropy(M);
  d.linear_M = linear_coefficient(M, stats);
  d.quadratic_M = quadratic_coefficient(M, stats);

  const auto g = classify_gamma(d.quadratic_M, d.linear_M);
  r.branch = g.branch;
  r.gamma_hat = g.gamma;
  r.J_hat = std::sqrt(g.gamma);
  if (g.branch != GammaBranch::Diverged) r.H_hat = estimate_field(stats, g.gamma);

  d.entropy_term = std::abs(d.entropy_M);
  if (g.branch == GammaBranch::Diverged) {
    d.linear_term = std::numeric_limits<double>::infinity();
    d.quadratic_term = std::numeric_limits<double>::infinity();
    d.laplace_ok = false;
    d.laplace_margin = 0.0;
  } else {
    d.linear_term = std::abs(d.linear_M * g.gamma);
    d.quadratic_term = std::abs(d.quadratic_M * g.gamma * g.gamma);
    if (g.gamma > 0.0) {
      const auto lap = laplace_assumption(stats, g.gamma);
      d.laplace_ok = lap.ok;
      d.laplace_margin = lap.margin;
    } else {
      d.laplace_ok = true;
      d.laplace_margin = std::numeric_limits<double>::infinity();
    }
  }
  return r;
}

double eb_objective(double m, double H, double gamma, const SufficientStats& stats) {
  if (!(std::abs(m) <= 1.0)) throw InputError("eb_objective: |m| must be <= 1");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InputError("eb_objective: gamma must be finite and >= 0");
  }
  return H * m - negative_entropy(m) + linear_coefficient(m, stats) * gamma +
         quadratic_coefficient(m, stats) * gamma * gamma;
}

ApproxLikelihood eb_likelihood_approx(double H, double gamma, const SufficientStats& stats) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InputError("eb_likelihood_approx: gamma must be finite and >= 0");
  }
  // Solve in u = artanh(m), where the condition reads
  //   u - linear'(tanh u) gamma - quadratic'(tanh u) gamma^2 - H = 0.
  auto residual = [&](double u) {
    const double m = std::tanh(u);
    return u - linear_coefficient_slope(m, stats) * gamma -
           quadratic_coefficient_slope(m, stats) * gamma * gamma - H;
  };
  constexpr double kLimit = 18.0;
  constexpr int kGrid = 4000;
  std::vector<double> roots;
  double u_prev = -kLimit;
  double r_prev = residual(u_prev);
  if (r_prev == 0.0) roots.push_back(u_prev);
  for (int k = 1; k <= kGrid; ++k) {
    const double u = -kLimit + 2.0 * kLimit * k / kGrid;
    const double r = residual(u);
    if (r == 0.0) {
      roots.push_back(u);
    } else if (r_prev != 0.0 && (r < 0.0) != (r_prev < 0.0)) {
      std::uintmax_t iters = 200;
      const auto bracket = boost::math::tools::toms748_solve(
          residual, u_prev, u, r_prev, r, boost::math::tools::eps_tolerance<double>(52), iters);
      roots.push_back(0.5 * (bracket.first + bracket.second));
    }
    u_prev = u;
    r_prev = r;
  }
  if (roots.empty()) {
    throw NumericalError("eb_likelihood_approx: no stationary point in |artanh m| <= 18 for H=" +
                         std::to_string(H) + ", gamma=" + std::to_string(gamma));
  }
  ApproxLikelihood best;
  double best_bracket = -std::numeric_limits<double>::infinity();
  for (double u : roots) {
    const double m = std::tanh(u);
    const double b = eb_objective(m, H, gamma, stats);
    if (b > best_bracket) {
      best_bracket = b;
      best.m_star = m;
    }
  }
  best.value = H * stats.M - best_bracket;
  return best;
}

SampleSizeAdvice advise_sample_size(double H_guess, std::size_t n) {
  if (n < 2) throw InputError("advise_sample_size: n must be >= 2");
  const double a = std::abs(H_guess);
  const double at_zero = 0.4 * static_cast<double>(n);
  double N;
  if (a <= 0.2) {
    N = at_zero + (30.0 - at_zero) * (a / 0.2);
  } else if (a <= 0.4) {
    N = 30.0 + (5.0 - 30.0) * ((a - 0.2) / 0.2);
  } else {
    N = 5.0;
  }
  SampleSizeAdvice out;
  out.N = static_cast<std::size_t>(std::max(1.0, std::round(N)));
  return out;
}

}  // namespace ebbm

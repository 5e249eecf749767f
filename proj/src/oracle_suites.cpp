#include <algorithm>
#include <cmath>
#include <sstream>

#include "ebbm/estimator.hpp"
#include "ebbm/oracle.hpp"
#include "ebbm/rng.hpp"
#include "ebbm/sampler.hpp"

namespace ebbm::oracle {

bool SuiteReport::passed() const {
  return std::all_of(cases.begin(), cases.end(), [](const CaseResult& c) { return c.passed; });
}

double SuiteReport::max_gap() const {
  double g = 0.0;
  for (const auto& c : cases) g = std::max(g, c.gap);
  return g;
}

namespace {

Dataset random_dataset(std::size_t n, std::size_t N, Rng& rng) {
  std::vector<Spin> flat(n * N);
  for (auto& s : flat) s = rng.uniform() < 0.5 ? 1 : -1;
  return Dataset(n, N, std::move(flat));
}

// Two samples (+,+,-) and (+,-,-).
Dataset small_example() { return Dataset(3, 2, {1, 1, -1, 1, -1, -1}); }

CaseResult check(std::string name, double gap, double tolerance, std::string detail = {}) {
  return {std::move(name), gap, tolerance, gap <= tolerance, std::move(detail)};
}

std::string describe(std::initializer_list<std::pair<const char*, double>> fields) {
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (const auto& [k, v] : fields) {
    os << (first ? "" : " ") << k << '=' << v;
    first = false;
  }
  return os.str();
}

}  // namespace

SuiteReport psi_suite(std::uint64_t seed, std::size_t cases) {
  constexpr double kTol = 1e-9;
  SuiteReport report{"psi", {}};
  Rng rng(seed);
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 3.0);    // 2..4
    const std::size_t tau = 1 + static_cast<std::size_t>(rng.uniform() * 3.0);  // 1..3
    const std::size_t N = 1 + static_cast<std::size_t>(rng.uniform() * 4.0);    // 1..4
    const double gamma = 0.5 * rng.uniform();
    const double H = rng.uniform() - 0.5;
    const auto data = random_dataset(n, N, rng);
    const auto r = psi_identity_check(data, H, gamma, tau);
    report.cases.push_back(check("random#" + std::to_string(c), r.gap, kTol,
                                 describe({{"n", double(n)}, {"tau", double(tau)}, {"N", double(N)},
                                           {"gamma", gamma}, {"H", H}})));
  }
  {
    const auto r = psi_identity_check(small_example(), 0.1, 0.3, 2);
    report.cases.push_back(check("n3_N2_tau2", r.gap, kTol, describe({{"gamma", 0.3}, {"H", 0.1}})));
  }
  {
    // gamma = 0: both sides equal n tau ln 2cosh H + n N H M.
    const double H = 0.35;
    const auto data = small_example();
    const auto r = psi_identity_check(data, H, 0.0, 3);
    const double M = compute_stats(data).M;
    const double expected = 3.0 * 3.0 * std::log(2.0 * std::cosh(H)) + 3.0 * 2.0 * H * M;
    report.cases.push_back(check("decoupled", std::max(std::abs(r.lhs - expected),
                                                       std::abs(r.rhs - expected)),
                                 1e-12));
  }
  for (double gamma : {0.1, 0.45}) {
    const auto data = random_dataset(4, 3, rng);
    const auto r = single_replica_check(data, 0.2, gamma);
    report.cases.push_back(check("single_replica", r.gap, kTol, describe({{"gamma", gamma}})));
  }
  return report;
}

SuiteReport georges_suite(double formula_scale) {
  constexpr double kTol = 1e-10;
  SuiteReport report{"georges", {}};
  Rng rng(20240611);
  const double ms[] = {0.0, 0.3, -0.3, 0.7, -0.7};
  for (std::size_t n : {3u, 4u}) {
    for (std::size_t tau : {2u, 3u}) {
      const auto data = random_dataset(n, 3, rng);
      for (double m : ms) {
        const auto g = georges_check(data, m, tau, formula_scale);
        const auto info = describe({{"n", double(n)}, {"tau", double(tau)}, {"m", m}});
        report.cases.push_back(check("first_order", g.first_gap, kTol, info));
        report.cases.push_back(check("second_order", g.second_gap, kTol, info));
        report.cases.push_back(check("centered", std::abs(g.mean_operator), 1e-12, info));
      }
    }
  }
  {
    const auto g = georges_check(small_example(), 0.4, 2, formula_scale);
    report.cases.push_back(check("n3_tau2_first", g.first_gap, kTol));
    report.cases.push_back(check("n3_tau2_second", g.second_gap, kTol));
  }
  // Gibbs free energy: closed zeroth order, and its gamma-derivatives at 0
  // against the first two expansion coefficients.
  {
    const auto data = random_dataset(3, 2, rng);
    const ReplicatedSystem sys(data, 2);
    const double nt = 6.0;
    const double H = 0.15;
    for (double m : {0.0, 0.4, -0.6}) {
      const double g0 = gibbs_free_energy(sys, m, H, 0.0);
      const double zeroth = -nt * H * m + nt * negative_entropy(m);
      report.cases.push_back(check("gibbs_zeroth", std::abs(g0 - zeroth), 1e-10,
                                   describe({{"m", m}})));
      const double step = 1e-3;
      const double gp = gibbs_free_energy(sys, m, H, step);
      const double gm = gibbs_free_energy(sys, m, H, -step);
      const double d1 = (gp - gm) / (2.0 * step);
      const double d2 = (gp - 2.0 * g0 + gm) / (step * step);
      const auto gc = georges_check(data, m, 2, formula_scale);
      report.cases.push_back(check("gibbs_slope", std::abs(d1 - gc.first_order_formula), 1e-5,
                                   describe({{"m", m}})));
      report.cases.push_back(check("gibbs_curvature", std::abs(d2 + gc.second_order_formula), 1e-4,
                                   describe({{"m", m}})));
    }
  }
  return report;
}

SuiteReport mc_suite(std::uint64_t seed) {
  SuiteReport report{"mc", {}};
  {
    // One sample, gamma = 0: L = H M - ln 2cosh H with no Monte Carlo noise.
    const Dataset one(5, 1, {1, -1, 1, 1, -1});
    const PriorSpec prior{PriorFamily::Gaussian, 0.0, 0.3};
    const auto e = eb_likelihood_mc(one, prior, 200, seed);
    const double expected = 0.3 * 0.2 - std::log(2.0 * std::cosh(0.3));
    report.cases.push_back(check("deterministic_prior", std::abs(e.value - expected) + e.std_error,
                                 1e-12));
  }
  Rng rng(seed);
  {
    const auto data = random_dataset(6, 10, rng);
    const PriorSpec prior{PriorFamily::Gaussian, 0.5, 0.1};
    const auto a = eb_likelihood_mc(data, prior, 4000, child_seed(seed, 1));
    const auto b = eb_likelihood_mc(data, prior, 4000, child_seed(seed, 2));
    const double combined = std::hypot(a.std_error, b.std_error);
    report.cases.push_back(check("seed_agreement", std::abs(a.value - b.value), 3.0 * combined,
                                 describe({{"a", a.value}, {"b", b.value}})));
  }
  {
    // Flat-top check: the estimator's gamma should sit within two standard
    // errors of the best gamma on a grid of Monte Carlo evidence values.
    const std::size_t n = 8, N = 40, draws = 20000;
    const PriorSpec truth{PriorFamily::Gaussian, 0.25, 0.0};
    const auto machine = sample_parameters(truth, n, child_seed(seed, 3));
    SamplerConfig config;
    config.sweeps_per_beta = 5;
    const auto data = generate_dataset(machine, N, config, child_seed(seed, 4));
    const auto est = run_estimator(compute_stats(data));
    if (est.branch == GammaBranch::Diverged) {
      report.cases.push_back({"flat_top", INFINITY, 0.0, false, "estimator diverged"});
    } else {
      const double H = *est.H_hat;
      const std::uint64_t mc_seed = child_seed(seed, 5);
      // At small gamma the second-order likelihood must track the evidence.
      const auto stats = compute_stats(data);
      const double mc_zero = eb_likelihood_mc(data, {PriorFamily::Gaussian, 0.0, H}, 100, mc_seed).value;
      const double approx_zero = eb_likelihood_approx(H, 0.0, stats).value;
      for (double g : {0.01, 0.03}) {
        const auto e = eb_likelihood_mc(data, {PriorFamily::Gaussian, g, H}, draws, mc_seed);
        const double approx = eb_likelihood_approx(H, g, stats).value - approx_zero;
        report.cases.push_back(check("small_gamma_agreement",
                                     std::abs((e.value - mc_zero) - approx), 3.0 * e.std_error,
                                     describe({{"gamma", g}, {"mc", e.value - mc_zero},
                                               {"approx", approx}})));
      }
      const double top = std::max(1.0, 3.0 * est.gamma_hat);
      double best = -INFINITY, best_gamma = 0.0, best_se = 0.0;
      for (int k = 0; k <= 40; ++k) {
        const double g = top * k / 40.0;
        const auto e = eb_likelihood_mc(data, {PriorFamily::Gaussian, g, H}, draws, mc_seed);
        if (e.value > best) {
          best = e.value;
          best_gamma = g;
          best_se = e.std_error;
        }
      }
      const auto at_hat =
          eb_likelihood_mc(data, {PriorFamily::Gaussian, est.gamma_hat, H}, draws, mc_seed);
      const double se = std::max(at_hat.std_error, best_se);
      report.cases.push_back(check("flat_top", std::max(0.0, best - at_hat.value), 2.0 * se,
                                   describe({{"gamma_hat", est.gamma_hat},
                                             {"grid_best_gamma", best_gamma},
                                             {"L_hat", at_hat.value},
                                             {"L_best", best}})));
    }
  }
  return report;
}

SuiteReport ml_suite(std::uint64_t seed) {
  SuiteReport report{"ml", {}};
  {
    // All eight states of three spins: every data moment vanishes.
    std::vector<Spin> flat;
    for (std::uint64_t c = 0; c < 8; ++c) {
      std::vector<Spin> s(3);
      decode_state(c, s);
      flat.insert(flat.end(), s.begin(), s.end());
    }
    const auto fit = ml_fit_exact(Dataset(3, 8, flat));
    double worst = std::abs(fit.h);
    for (double j : fit.J) worst = std::max(worst, std::abs(j));
    report.cases.push_back(check("symmetric_fixed_point", worst, 1e-8));
  }
  {
    const std::size_t n = 8, N = 100000;
    const double gamma_true = 0.5;
    const PriorSpec truth{PriorFamily::Gaussian, gamma_true, 0.1};
    const auto machine = sample_parameters(truth, n, child_seed(seed, 1));
    SamplerConfig config;
    config.sweeps_per_beta = 3;
    const auto data = generate_dataset(machine, N, config, child_seed(seed, 2));
    const auto fit = ml_fit_exact(data);
    const auto exact = exact_moments(BoltzmannMachine(n, fit.h, fit.J));
    const auto stats = compute_stats(data);
    double mag_model = 0.0;
    for (double v : exact.site) mag_model += v;
    double worst = std::abs(mag_model - static_cast<double>(n) * stats.M);
    for (std::size_t k = 0; k < exact.pair.size(); ++k)
      worst = std::max(worst, std::abs(exact.pair[k] - stats.d_pair[k]));
    report.cases.push_back(check("moment_matching", worst, 1e-7));

    double sum_sq = 0.0;
    for (double j : fit.J) sum_sq += j * j;
    const double pairs = static_cast<double>(fit.J.size());
    const double gamma_ml = static_cast<double>(n) / pairs * sum_sq;
    const double se = gamma_true * std::sqrt(2.0 / pairs);
    report.cases.push_back(check("large_N_gamma", std::abs(gamma_ml - gamma_true), 3.0 * se,
                                 describe({{"gamma_ml", gamma_ml}, {"gamma_true", gamma_true}})));
  }
  return report;
}

}  // namespace ebbm::oracle

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ebbm/errors.hpp"
#include "ebbm/estimator.hpp"
#include "ebbm/oracle.hpp"
#include "ebbm/rng.hpp"

using namespace ebbm;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SufficientStats example_stats() { return compute_stats(Dataset(3, 2, {1, 1, -1, 1, -1, -1})); }

// Statistics with arbitrary (not necessarily realizable) C1, C2, Omega.
SufficientStats synthetic(std::size_t n, std::size_t N, double M, double C1, double C2, double Omega) {
  SufficientStats s;
  s.n = n;
  s.N = N;
  s.M = M;
  s.C1 = C1;
  s.C2 = C2;
  s.Omega = Omega;
  s.max_abs_dij = 1.0;
  return s;
}

SufficientStats random_stats(Rng& rng) {
  const std::size_t n = 3 + static_cast<std::size_t>(rng.uniform() * 300);
  const std::size_t N = 1 + static_cast<std::size_t>(rng.uniform() * 200);
  const double C1 = 2.0 * rng.uniform() - 1.0;
  const double C2 = C1 * C1 + (1.0 - C1 * C1) * rng.uniform();
  return synthetic(n, N, 1.8 * rng.uniform() - 0.9, C1, C2, 0.5 * rng.uniform());
}

Dataset random_spins(std::size_t n, std::size_t N, std::uint64_t seed, double bias) {
  Rng rng(seed);
  std::vector<Spin> flat(n * N);
  for (auto& s : flat) s = rng.uniform() < bias ? 1 : -1;
  return Dataset(n, N, flat);
}

// Dataset drawn from a ferromagnetic-ish latent factor so all branches appear.
Dataset correlated_data(std::size_t n, std::size_t N, std::uint64_t seed, double strength) {
  Rng rng(seed);
  std::vector<Spin> flat;
  for (std::size_t mu = 0; mu < N; ++mu) {
    const double z = rng.uniform() < 0.5 ? strength : -strength;
    for (std::size_t i = 0; i < n; ++i) flat.push_back(rng.uniform() < 0.5 + 0.5 * std::tanh(z) ? 1 : -1);
  }
  return Dataset(n, N, flat);
}

}  // namespace

TEST_CASE("negative entropy") {
  CHECK(negative_entropy(0.0) == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  CHECK(negative_entropy(1.0) == 0.0);
  CHECK(negative_entropy(-1.0) == 0.0);
  CHECK(negative_entropy(0.5) == doctest::Approx(-0.562335144618808).epsilon(1e-12));
  CHECK_THROWS_AS(negative_entropy(1.5), InputError);
}

TEST_CASE("first-order coefficient") {
  const auto ctx = PlefkaContext::make(3, 2, 1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0 / 18.0);
  CHECK(plefka_first_order(0.0, ctx) == 0.0);
  CHECK(plefka_first_order(1.0, ctx) == doctest::Approx(1.0 / 18.0).epsilon(1e-14));

  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    const auto s = random_stats(rng);
    const double m = 2.0 * rng.uniform() - 1.0;
    const double n = s.n, N = s.N;
    const auto c = PlefkaContext::from_stats(s);
    const double expected = ((n - 1) * N * s.C1 / (2 * n)) * m * m -
                            ((n - 1) * (N + 1) / (4 * n)) * std::pow(m, 4);
    CHECK(plefka_first_order(m, c) == doctest::Approx(expected).epsilon(1e-12));
    // Explicit display against first order plus constant.
    CHECK(linear_coefficient(m, s) ==
          doctest::Approx(plefka_first_order(m, c) - ((n - 1) * N / (4 * n)) * (s.C2 - 1.0 / N))
              .epsilon(1e-12));
  }
}

TEST_CASE("linear coefficient examples") {
  const auto s = example_stats();
  CHECK(linear_coefficient(0.0, s) == doctest::Approx(1.0 / 18.0).epsilon(1e-14));
  const auto up = synthetic(5, 4, 0.0, 1.0, 1.0, 0.0);
  CHECK(std::abs(linear_coefficient(1.0, up)) < 1e-14);
  Rng rng(2);
  for (int k = 0; k < 20; ++k) {
    const auto r = random_stats(rng);
    const double n = r.n, N = r.N;
    CHECK(linear_coefficient(0.0, r) ==
          doctest::Approx(-((n - 1) * N / (4 * n)) * (r.C2 - 1.0 / N)).epsilon(1e-13));
  }
}

TEST_CASE("quadratic coefficient") {
  const auto s = example_stats();
  CHECK(quadratic_coefficient(0.0, s) == doctest::Approx(2.0 / 27.0 - 1.0 / 12.0).epsilon(1e-14));
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    const auto r = random_stats(rng);
    const double m = 2.0 * rng.uniform() - 1.0;
    const auto c = PlefkaContext::from_stats(r);
    const double a = quadratic_coefficient(m, r);
    CHECK(plefka_second_order(m, c) == doctest::Approx(a).epsilon(1e-12).scale(1.0));
    CHECK(quadratic_coefficient(-m, r) == a);
    CHECK(linear_coefficient(-m, r) == linear_coefficient(m, r));
    for (double edge : {-1.0, 1.0}) {
      CHECK(quadratic_coefficient(edge, r) == 0.0);
      CHECK(plefka_second_order(edge, PlefkaContext::from_stats(r, 0.7)) == 0.0);
    }
    const double n = r.n, N = r.N;
    CHECK(quadratic_coefficient(0.0, r) ==
          doctest::Approx((n - 1) * N * N * r.C2 / (4 * n * n) - (n - 1) * (N + 1) / (8 * n * n))
              .epsilon(1e-12));
  }
}

TEST_CASE("slopes are odd and match finite differences") {
  Rng rng(4);
  int checked = 0;
  for (int k = 0; k < 100; ++k) {
    const auto s = random_stats(rng);
    const double m = 1.8 * rng.uniform() - 0.9;
    CHECK(linear_coefficient_slope(0.0, s) == 0.0);
    CHECK(quadratic_coefficient_slope(0.0, s) == 0.0);
    CHECK(linear_coefficient_slope(-m, s) == -linear_coefficient_slope(m, s));
    CHECK(quadratic_coefficient_slope(-m, s) == -quadratic_coefficient_slope(m, s));

    const double d1 = linear_coefficient_slope(m, s);
    const double d2 = quadratic_coefficient_slope(m, s);
    const double f1 = oracle::finite_difference([&](double x) { return linear_coefficient(x, s); }, m, 1e-5);
    const double f2 = oracle::finite_difference([&](double x) { return quadratic_coefficient(x, s); }, m, 1e-5);
    // Relative error, with an absolute floor tied to the function scale.
    const double scale1 = std::abs(linear_coefficient(m, s)) + std::abs(d1) + 1.0;
    const double scale2 = std::abs(quadratic_coefficient(m, s)) + std::abs(d2) + 1.0;
    CHECK(std::abs(d1 - f1) <= 1e-6 * scale1);
    CHECK(std::abs(d2 - f2) <= 1e-6 * scale2);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("finite difference helper") {
  auto sq = [](double x) { return x * x; };
  CHECK(oracle::finite_difference(sq, 1.0, 1e-3) == doctest::Approx(2.0).epsilon(1e-12));
  auto e = [](double m) { return negative_entropy(m); };
  const double target = std::atanh(0.3);
  const double err1 = std::abs(oracle::finite_difference(e, 0.3, 1e-2) - target);
  const double err2 = std::abs(oracle::finite_difference(e, 0.3, 5e-3) - target);
  CHECK(err1 < 1e-4);
  CHECK(err1 / err2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("gamma branches") {
  CHECK(classify_gamma(2.0, -1.0).branch == GammaBranch::Finite);
  CHECK(classify_gamma(2.0, -1.0).gamma == 0.25);
  CHECK(classify_gamma(1.0, 0.5).branch == GammaBranch::Zero);
  for (double b : {-1.0, 0.0, 1.0}) {
    const auto g = classify_gamma(-0.1, b);
    CHECK(g.branch == GammaBranch::Diverged);
    CHECK(g.gamma == kInf);
  }
  // All nine sign combinations; exactly one outcome each.
  for (double a : {-1.0, 0.0, 1.0}) {
    for (double b : {-1.0, 0.0, 1.0}) {
      CAPTURE(a);
      CAPTURE(b);
      if (a == 0.0 && b == 0.0) {
        CHECK_THROWS_AS(classify_gamma(a, b), DegenerateObjective);
        continue;
      }
      const auto g = classify_gamma(a, b);
      const bool zero = (a > 0 && b >= 0) || (a == 0 && b > 0);
      const bool finite = a > 0 && b < 0;
      const auto expected = zero ? GammaBranch::Zero : finite ? GammaBranch::Finite : GammaBranch::Diverged;
      CHECK(g.branch == expected);
    }
  }
  CHECK_THROWS_AS(classify_gamma(1e-12, -1e-12), DegenerateObjective);
}

TEST_CASE("field estimate") {
  auto s = synthetic(10, 5, 0.5, 0.1, 0.2, 0.01);
  CHECK(estimate_field(s, 0.0) == doctest::Approx(0.549306144334055).epsilon(1e-12));
  s.M = 0.0;
  CHECK(estimate_field(s, 0.7) == 0.0);
  s.M = 1.0;
  CHECK_THROWS_AS(estimate_field(s, 0.1), DegenerateMagnetization);
}

TEST_CASE("pipeline examples") {
  CHECK_THROWS_AS(run_estimator(compute_stats(Dataset(3, 2, std::vector<Spin>(6, 1)))),
                  DegenerateMagnetization);
  const auto r = run_estimator(example_stats());
  CHECK(r.branch == GammaBranch::Diverged);
  CHECK_FALSE(r.H_hat.has_value());
  CHECK(r.gamma_hat == kInf);
}

TEST_CASE("laplace diagnostic") {
  auto s = synthetic(300, 120, 0.0, 0.0, 0.0, 0.0);
  const auto big = laplace_assumption(s, 1.0);
  CHECK_FALSE(big.ok);
  CHECK(big.margin == doctest::Approx(std::sqrt(600.0) / 240.0));
  s.N = 5;
  CHECK(laplace_assumption(s, 0.16).ok);
  CHECK(laplace_assumption(s, 1e-300).ok);
  CHECK_THROWS_AS(laplace_assumption(s, 0.0), InputError);
}

TEST_CASE("sample size advice") {
  CHECK(advise_sample_size(0.0, 300).N == 120);
  CHECK(advise_sample_size(0.2, 300).N == 30);
  CHECK(advise_sample_size(-0.2, 300).N == 30);
  CHECK(advise_sample_size(0.4, 500).N == 5);
  CHECK(advise_sample_size(0.4, 1000).N == 5);
  CHECK(advise_sample_size(0.9, 1000).N == 5);
  CHECK(advise_sample_size(0.3, 300).N == 18);
}

TEST_CASE("approximate likelihood at zero coupling") {
  const auto s = compute_stats(random_spins(6, 9, 5, 0.6));
  for (double H : {-0.4, 0.0, 0.3}) {
    const auto a = eb_likelihood_approx(H, 0.0, s);
    CHECK(a.m_star == doctest::Approx(std::tanh(H)).epsilon(1e-12));
    CHECK(a.value == doctest::Approx(H * s.M - H * std::tanh(H) + negative_entropy(std::tanh(H)))
                         .epsilon(1e-12));
  }
}

TEST_CASE("closed-form optimality on finite branches") {
  int finite = 0;
  for (std::uint64_t seed = 0; seed < 60 && finite < 15; ++seed) {
    const auto data = correlated_data(40, 10 + seed % 30, seed, 0.05 + 0.01 * (seed % 20));
    const auto s = compute_stats(data);
    EstimateResult r;
    try {
      r = run_estimator(s);
    } catch (const std::domain_error&) {
      continue;
    }
    if (r.branch != GammaBranch::Finite) continue;
    ++finite;
    const double a = r.diagnostics.quadratic_M, b = r.diagnostics.linear_M;
    auto q = [&](double g) { return -b * g - a * g * g; };
    const double eps = 1e-6 * (1.0 + r.gamma_hat);
    CHECK(q(r.gamma_hat) > q(r.gamma_hat + eps));
    CHECK(q(r.gamma_hat) > q(r.gamma_hat - eps));

    // Dense grid, then refine around the best cell.
    double lo = 0.0, hi = 4.0 * r.gamma_hat + 1.0;
    for (int round = 0; round < 6; ++round) {
      double best = lo, best_v = -kInf;
      for (int k = 0; k <= 1000; ++k) {
        const double g = lo + (hi - lo) * k / 1000.0;
        if (q(g) > best_v) {
          best_v = q(g);
          best = g;
        }
      }
      const double cell = (hi - lo) / 1000.0;
      lo = std::max(0.0, best - cell);
      hi = best + cell;
    }
    CHECK(std::abs(0.5 * (lo + hi) - r.gamma_hat) <= 1e-8);

    // Stationarity of the bracket in m at (M, H_hat, gamma_hat).
    const double M = s.M, g = r.gamma_hat;
    const double residual = *r.H_hat - std::atanh(M) + linear_coefficient_slope(M, s) * g +
                            quadratic_coefficient_slope(M, s) * g * g;
    CHECK(std::abs(residual) <= 1e-10);
    const auto approx = eb_likelihood_approx(*r.H_hat, g, s);
    CHECK(approx.m_star == doctest::Approx(M).epsilon(1e-8));
  }
  CHECK(finite >= 5);
}

TEST_CASE("symmetry of the full pipeline") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = correlated_data(30, 20, seed, 0.1);
    const std::size_t n = d.n(), N = d.N();
    std::vector<Spin> flip, perm;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = (7 * i + 3) % n;
    for (std::size_t mu = 0; mu < N; ++mu) {
      const auto s = d.sample(mu);
      for (std::size_t i = 0; i < n; ++i) {
        flip.push_back(static_cast<Spin>(-s[i]));
        perm.push_back(s[order[i]]);
      }
    }
    const auto base = run_estimator(compute_stats(d));
    const auto flipped = run_estimator(compute_stats(Dataset(n, N, flip)));
    const auto permuted = run_estimator(compute_stats(Dataset(n, N, perm)));
    CHECK(flipped.branch == base.branch);
    CHECK(flipped.gamma_hat == base.gamma_hat);
    if (base.H_hat) CHECK(*flipped.H_hat == -*base.H_hat);
    CHECK(permuted.branch == base.branch);
    CHECK(permuted.gamma_hat == base.gamma_hat);
    CHECK(permuted.H_hat == base.H_hat);
    CHECK(permuted.diagnostics.laplace_margin == base.diagnostics.laplace_margin);
  }
}

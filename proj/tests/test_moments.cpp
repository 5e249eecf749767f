#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ebbm/errors.hpp"
#include "ebbm/moments.hpp"
#include "ebbm/rng.hpp"

using namespace ebbm;

namespace {

Dataset random_spins(std::size_t n, std::size_t N, std::uint64_t seed, double bias = 0.5) {
  Rng rng(seed);
  std::vector<Spin> flat(n * N);
  for (auto& s : flat) s = rng.uniform() < bias ? 1 : -1;
  return Dataset(n, N, flat);
}

Dataset transform(const Dataset& d, const std::vector<std::size_t>& site_perm,
                  const std::vector<std::size_t>& sample_perm, int sign) {
  std::vector<Spin> flat;
  for (std::size_t mu : sample_perm) {
    const auto s = d.sample(mu);
    for (std::size_t i : site_perm) flat.push_back(static_cast<Spin>(sign * s[i]));
  }
  return Dataset(d.n(), d.N(), flat);
}

// Straightforward double loops in floating point.
struct Naive {
  double M, C1, C2, Omega;
};

Naive naive(const Dataset& d) {
  const std::size_t n = d.n(), N = d.N();
  std::vector<double> di(n, 0.0), dij(n * n, 0.0);
  for (std::size_t mu = 0; mu < N; ++mu) {
    const auto s = d.sample(mu);
    for (std::size_t i = 0; i < n; ++i) {
      di[i] += s[i] / double(N);
      for (std::size_t j = 0; j < n; ++j) dij[i * n + j] += s[i] * s[j] / double(N);
    }
  }
  Naive r{0, 0, 0, 0};
  for (double v : di) r.M += v / n;
  const double P = n * (n - 1) / 2.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      r.C1 += dij[i * n + j] / P;
      r.C2 += dij[i * n + j] * dij[i * n + j] / P;
    }
  for (std::size_t i = 0; i < n; ++i) {
    double w = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) w += dij[i * n + j] / (n - 1);
    w -= r.C1;
    r.Omega += w * w / n;
  }
  return r;
}

}  // namespace

TEST_CASE("dataset validation") {
  CHECK_THROWS_AS(Dataset(3, 1, {1, 1}), InputError);
  CHECK_THROWS_AS(Dataset(3, 1, {1, 2, 1}), InputError);
  CHECK_THROWS_AS(Dataset(1, 1, {1}), InputError);
  CHECK_THROWS_AS(Dataset(2, 0, {}), InputError);
}

TEST_CASE("hand-computed example") {
  const Dataset d(3, 2, {1, 1, -1, 1, -1, -1});
  const auto s = compute_stats(d);
  CHECK(s.d_site == std::vector<double>{1.0, 0.0, -1.0});
  CHECK(s.d_pair == std::vector<double>{0.0, -1.0, 0.0});
  CHECK(s.M == 0.0);
  CHECK(s.C1 == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
  CHECK(s.C2 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(s.omega[0] == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
  CHECK(s.omega[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(s.omega[2] == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
  CHECK(s.Omega == doctest::Approx(1.0 / 18.0).epsilon(1e-15));
  CHECK(s.max_abs_dij == 1.0);
}

TEST_CASE("constant and single-sample data") {
  const auto up = compute_stats(Dataset(4, 3, std::vector<Spin>(12, 1)));
  CHECK(up.M == 1.0);
  CHECK(up.C1 == 1.0);
  CHECK(up.C2 == 1.0);
  CHECK(up.Omega == 0.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed)
    CHECK(compute_stats(random_spins(6, 1, seed)).C2 == 1.0);
}

TEST_CASE("agreement with naive loops") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = random_spins(5 + seed, 7 + 3 * seed, seed, 0.3 + 0.04 * seed);
    const auto s = compute_stats(d);
    const auto r = naive(d);
    CHECK(std::abs(s.M - r.M) < 1e-12);
    CHECK(std::abs(s.C1 - r.C1) < 1e-12);
    CHECK(std::abs(s.C2 - r.C2) < 1e-12);
    CHECK(std::abs(s.Omega - r.Omega) < 1e-12);
  }
}

TEST_CASE("exact invariances") {
  const std::size_t n = 9, N = 13;
  const auto d = random_spins(n, N, 77, 0.65);
  const auto s = compute_stats(d);
  std::vector<std::size_t> sites(n), samples(N);
  for (std::size_t i = 0; i < n; ++i) sites[i] = i;
  for (std::size_t i = 0; i < N; ++i) samples[i] = i;

  Rng rng(3);
  std::shuffle(sites.begin(), sites.end(), rng);
  std::shuffle(samples.begin(), samples.end(), rng);
  std::vector<std::size_t> identity_sites(n);
  for (std::size_t i = 0; i < n; ++i) identity_sites[i] = i;

  SUBCASE("site relabeling") {
    const auto p = compute_stats(transform(d, sites, samples, 1));
    CHECK(p.M == s.M);
    CHECK(p.C1 == s.C1);
    CHECK(p.C2 == s.C2);
    CHECK(p.Omega == s.Omega);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(p.d_site[i] == s.d_site[sites[i]]);
      CHECK(p.omega[i] == s.omega[sites[i]]);
    }
  }
  SUBCASE("global flip") {
    const auto f = compute_stats(transform(d, identity_sites, samples, -1));
    CHECK(f.M == -s.M);
    CHECK(f.C1 == s.C1);
    CHECK(f.C2 == s.C2);
    CHECK(f.Omega == s.Omega);
    CHECK(f.d_pair == s.d_pair);
    for (std::size_t i = 0; i < n; ++i) CHECK(f.d_site[i] == -s.d_site[i]);
  }
}

TEST_CASE("bounds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = compute_stats(random_spins(4 + seed % 5, 1 + seed, seed, 0.1 + 0.04 * seed));
    CHECK(std::abs(s.M) <= 1.0);
    CHECK(std::abs(s.C1) <= 1.0);
    CHECK(s.C1 * s.C1 <= s.C2 + 1e-15);
    CHECK(s.C2 <= 1.0);
    CHECK(s.Omega >= 0.0);
    CHECK(s.Omega <= 4.0);
  }
}

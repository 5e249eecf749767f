#include <doctest.h>

#include <cmath>

#include "ebbm/errors.hpp"
#include "ebbm/estimator.hpp"
#include "ebbm/oracle.hpp"

using namespace ebbm;
using namespace ebbm::oracle;

namespace {

Dataset example() { return Dataset(3, 2, {1, 1, -1, 1, -1, -1}); }

std::string failures(const SuiteReport& r) {
  std::string out;
  for (const auto& c : r.cases)
    if (!c.passed) out += c.name + " gap=" + std::to_string(c.gap) + " " + c.detail + "\n";
  return out;
}

}  // namespace

TEST_CASE("replicated system recomputes the statistics") {
  const ReplicatedSystem sys(example(), 2);
  const auto s = compute_stats(example());
  CHECK(sys.M() == doctest::Approx(s.M));
  CHECK(sys.C1() == doctest::Approx(s.C1));
  CHECK(sys.C2() == doctest::Approx(s.C2));
  CHECK(sys.Omega() == doctest::Approx(s.Omega));
  CHECK(sys.state_count() == 64);
  CHECK_THROWS_AS(ReplicatedSystem(Dataset(8, 1, std::vector<Spin>(8, 1)), 2), CapabilityError);
}

TEST_CASE("replica identity") {
  const auto r = psi_identity_check(example(), 0.1, 0.3, 2);
  CHECK(r.gap <= 1e-9);
  const auto one = single_replica_check(example(), 0.25, 0.4);
  CHECK(one.gap <= 1e-9);
  const auto suite = psi_suite(17);
  INFO(failures(suite));
  CHECK(suite.passed());
  CHECK(suite.cases.size() >= 50);
}

TEST_CASE("expansion coefficients against product-measure enumeration") {
  const auto g = georges_check(example(), 0.4, 2);
  CHECK(g.first_gap <= 1e-10);
  CHECK(g.second_gap <= 1e-10);
  CHECK(std::abs(g.mean_operator) <= 1e-12);
  CHECK(std::abs(g.operator_sq - g.operator_sq_direct) <= 1e-10);
  const auto zero = georges_check(example(), 0.0, 3);
  CHECK(std::abs(zero.mean_interaction) <= 1e-12);

  const auto suite = georges_suite();
  INFO(failures(suite));
  CHECK(suite.passed());
}

TEST_CASE("a perturbed coefficient is caught") {
  CHECK_FALSE(georges_suite(1.001).passed());
}

TEST_CASE("gibbs free energy at zero coupling") {
  const ReplicatedSystem sys(example(), 2);
  for (double m : {-0.5, 0.0, 0.2}) {
    const double expected = -6.0 * 0.3 * m + 6.0 * negative_entropy(m);
    CHECK(gibbs_free_energy(sys, m, 0.3, 0.0) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("monte carlo evidence") {
  const Dataset one(4, 1, {1, 1, -1, 1});
  const auto e = eb_likelihood_mc(one, {PriorFamily::Gaussian, 0.0, -0.2}, 100, 3);
  CHECK(e.std_error == 0.0);
  CHECK(e.value == doctest::Approx(-0.2 * 0.5 - std::log(2.0 * std::cosh(0.2))).epsilon(1e-13));
  CHECK_THROWS_AS(eb_likelihood_mc(one, {PriorFamily::Gaussian, 0.1, 0.0}, 10, 3), InputError);
  CHECK_THROWS_AS(eb_likelihood_mc(Dataset(13, 1, std::vector<Spin>(13, 1)),
                                   {PriorFamily::Gaussian, 0.1, 0.0}, 100, 3),
                  CapabilityError);
}

TEST_CASE("exact maximum likelihood") {
  const auto suite = ml_suite(5);
  INFO(failures(suite));
  CHECK(suite.passed());
}

TEST_CASE("second-order likelihood tracks the evidence at small coupling") {
  const auto suite = mc_suite(1);
  int seen = 0;
  for (const auto& c : suite.cases) {
    if (c.name != "small_gamma_agreement" && c.name != "seed_agreement" &&
        c.name != "deterministic_prior")
      continue;
    ++seen;
    INFO(c.name << " " << c.detail);
    CHECK(c.passed);
  }
  CHECK(seen == 4);
}

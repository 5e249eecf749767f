#include "ebbm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "ebbm/errors.hpp"
#include "ebbm/estimator.hpp"
#include "ebbm/rng.hpp"

namespace ebbm::oracle {

namespace {

// Streaming log-sum-exp.
class LogSumExp {
 public:
  void add(double v) {
    if (v > shift_) {
      sum_ = sum_ * std::exp(shift_ - v) + 1.0;
      shift_ = v;
    } else {
      sum_ += std::exp(v - shift_);
    }
  }
  double value() const { return shift_ + std::log(sum_); }

 private:
  double shift_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

double log_mean_exp(const std::vector<double>& v, std::size_t skip_block, std::size_t blocks) {
  LogSumExp acc;
  std::size_t count = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (blocks != 0 && k % blocks == skip_block) continue;
    acc.add(v[k]);
    ++count;
  }
  return acc.value() - std::log(static_cast<double>(count));
}

}  // namespace

ReplicatedSystem::ReplicatedSystem(const Dataset& data, std::size_t tau)
    : n_(data.n()), N_(data.N()), tau_(tau) {
  if (tau < 1) throw InputError("ReplicatedSystem: tau must be >= 1");
  if (n_ * tau_ > kMaxReplicatedSpins) {
    throw CapabilityError("ReplicatedSystem: n * tau must be <= " +
                          std::to_string(kMaxReplicatedSpins));
  }
  const double Nd = static_cast<double>(N_);
  const double nd = static_cast<double>(n_);
  d_site_.assign(n_, 0.0);
  d_pair_.assign(n_ * n_, 0.0);
  for (std::size_t mu = 0; mu < N_; ++mu) {
    const auto s = data.sample(mu);
    for (std::size_t i = 0; i < n_; ++i) {
      d_site_[i] += s[i] / Nd;
      for (std::size_t j = 0; j < n_; ++j) {
        if (j != i) d_pair_[i * n_ + j] += s[i] * s[j] / Nd;
      }
    }
  }
  for (double v : d_site_) M_ += v / nd;
  const double pairs = nd * (nd - 1.0) / 2.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      C1_ += d_pair(i, j) / pairs;
      C2_ += d_pair(i, j) * d_pair(i, j) / pairs;
    }
  }
  omega_.assign(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      if (j != i) row += d_pair(i, j);
    }
    omega_[i] = row / (nd - 1.0) - C1_;
    Omega_ += omega_[i] * omega_[i] / nd;
  }
}

double ReplicatedSystem::interaction(std::uint64_t code) const {
  const double Nd = static_cast<double>(N_);
  const double nd = static_cast<double>(n_);
  double total = 0.0;
  std::vector<int> prod(tau_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      int replica_sum = 0;
      for (std::size_t a = 0; a < tau_; ++a) {
        prod[a] = spin(code, a, i) * spin(code, a, j);
        replica_sum += prod[a];
      }
      int cross = 0;
      for (std::size_t a = 0; a < tau_; ++a)
        for (std::size_t b = a + 1; b < tau_; ++b) cross += prod[a] * prod[b];
      total -= (Nd / nd) * d_pair(i, j) * replica_sum + cross / nd;
    }
  }
  return total;
}

double ReplicatedSystem::hamiltonian(std::uint64_t code, double field, double gamma) const {
  int total_spin = 0;
  for (std::size_t a = 0; a < tau_; ++a)
    for (std::size_t i = 0; i < n_; ++i) total_spin += spin(code, a, i);
  return -field * total_spin + gamma * interaction(code);
}

PsiCheck psi_identity_check(const Dataset& data, double H, double gamma, std::size_t tau) {
  const ReplicatedSystem sys(data, tau);
  const std::size_t n = sys.n();
  const double nd = static_cast<double>(n);
  const double Nd = static_cast<double>(sys.N());
  const double taud = static_cast<double>(tau);

  // Left side: prior average done per pair in closed form,
  // E[exp(J A)] = exp(gamma A^2 / (2n)) for J ~ N(0, gamma/n).
  LogSumExp lhs;
  LogSumExp free_energy;
  for (std::uint64_t code = 0; code < sys.state_count(); ++code) {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int replica_sum = 0;
      for (std::size_t a = 0; a < tau; ++a) replica_sum += sys.spin(code, a, i);
      v += H * (replica_sum + Nd * sys.d_site(i));
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double A = Nd * sys.d_pair(i, j);
        for (std::size_t a = 0; a < tau; ++a) A += sys.spin(code, a, i) * sys.spin(code, a, j);
        v += gamma * A * A / (2.0 * nd);
      }
    }
    lhs.add(v);
    free_energy.add(-sys.hamiltonian(code, H, gamma));
  }
  PsiCheck out;
  out.lhs = lhs.value();
  const double F = -free_energy.value();
  out.rhs = nd * Nd * H * sys.M() +
            gamma * (nd - 1.0) * Nd * Nd / 4.0 * (sys.C2() + (taud / Nd) / Nd) - F;
  out.gap = std::abs(out.lhs - out.rhs);
  return out;
}

SingleReplicaCheck single_replica_check(const Dataset& data, double H, double gamma) {
  const ReplicatedSystem sys(data, 1);
  const std::size_t n = sys.n();
  const double nd = static_cast<double>(n);
  const double Nd = static_cast<double>(sys.N());
  std::vector<double> J;
  double sum_d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      J.push_back(gamma * Nd * sys.d_pair(i, j) / nd);
      sum_d2 += sys.d_pair(i, j) * sys.d_pair(i, j);
    }
  }
  SingleReplicaCheck out;
  out.lhs = psi_identity_check(data, H, gamma, 1).lhs;
  out.via_partition = nd * Nd * H * sys.M() +
                      gamma / (2.0 * nd) * (static_cast<double>(J.size()) + Nd * Nd * sum_d2) +
                      log_partition(BoltzmannMachine(n, H, J));
  out.gap = std::abs(out.lhs - out.via_partition);
  return out;
}

GeorgesCheck georges_check(const Dataset& data, double m, std::size_t tau, double formula_scale) {
  if (!(std::abs(m) < 1.0)) throw InputError("georges_check: |m| must be < 1");
  const ReplicatedSystem sys(data, tau);
  const std::size_t n = sys.n();
  const double nd = static_cast<double>(n);
  const double Nd = static_cast<double>(sys.N());
  const double taud = static_cast<double>(tau);
  const std::uint64_t states = sys.state_count();
  const std::size_t spins = n * tau;

  std::vector<double> weight(states), interaction(states), total_spin(states);
  for (std::uint64_t code = 0; code < states; ++code) {
    double w = 1.0;
    int sum = 0;
    for (std::size_t k = 0; k < spins; ++k) {
      const int s = ((code >> k) & 1U) ? 1 : -1;
      w *= (1.0 + m * s) / 2.0;
      sum += s;
    }
    weight[code] = w;
    total_spin[code] = sum;
    interaction[code] = sys.interaction(code);
  }

  // Moments under the product measure.
  double mean_int = 0.0, mean_spin = 0.0;
  for (std::uint64_t c = 0; c < states; ++c) {
    mean_int += weight[c] * interaction[c];
    mean_spin += weight[c] * total_spin[c];
  }
  double cov = 0.0, var = 0.0;
  for (std::uint64_t c = 0; c < states; ++c) {
    cov += weight[c] * (total_spin[c] - mean_spin) * (interaction[c] - mean_int);
    var += weight[c] * (total_spin[c] - mean_spin) * (total_spin[c] - mean_spin);
  }
  // Keeping <sum S> fixed as gamma moves requires d lambda/d gamma = cov / var.
  const double lambda_slope = cov / var;

  GeorgesCheck out;
  out.mean_interaction = mean_int;
  const double m2 = m * m;
  for (std::uint64_t c = 0; c < states; ++c) {
    double u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double dev = 0.0;
      for (std::size_t a = 0; a < tau; ++a) dev += sys.spin(c, a, i) - m;
      u += (nd - 1.0) * Nd / nd * sys.omega(i) * m * dev;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double same = 0.0;
        for (std::size_t a = 0; a < tau; ++a)
          same += (sys.spin(c, a, i) - m) * (sys.spin(c, a, j) - m);
        u += Nd / nd * (sys.d_pair(i, j) + (taud - 1.0) / Nd * m2) * same;
        double cross = 0.0;
        for (std::size_t a = 0; a < tau; ++a) {
          const double pa = sys.spin(c, a, i) * sys.spin(c, a, j) - m2;
          for (std::size_t b = a + 1; b < tau; ++b)
            cross += pa * (sys.spin(c, b, i) * sys.spin(c, b, j) - m2);
        }
        u += cross / nd;
      }
    }
    const double direct = mean_int - interaction[c] + lambda_slope * (total_spin[c] - mean_spin);
    out.mean_operator += weight[c] * u;
    out.operator_sq += weight[c] * u * u;
    out.operator_sq_direct += weight[c] * direct * direct;
  }

  const auto ctx = PlefkaContext::make(n, sys.N(), sys.x(), sys.C1(), sys.C2(), sys.Omega());
  out.first_order_formula = formula_scale * nd * Nd * plefka_first_order(m, ctx);
  out.second_order_formula = formula_scale * -2.0 * nd * Nd * plefka_second_order(m, ctx);
  out.first_gap = std::abs(out.mean_interaction - out.first_order_formula);
  out.second_gap = std::max(std::abs(out.operator_sq - out.second_order_formula),
                            std::abs(out.operator_sq_direct - out.second_order_formula));
  return out;
}

double gibbs_free_energy(const ReplicatedSystem& sys, double m, double H, double gamma) {
  if (!(std::abs(m) < 1.0)) throw InputError("gibbs_free_energy: |m| must be < 1");
  const std::uint64_t states = sys.state_count();
  const double spins = static_cast<double>(sys.n() * sys.tau());
  std::vector<double> total_spin(states), interaction(states);
  for (std::uint64_t c = 0; c < states; ++c) {
    total_spin[c] = -sys.hamiltonian(c, 1.0, 0.0);
    interaction[c] = sys.interaction(c);
  }
  auto log_sum = [&](double lambda) {
    LogSumExp acc;
    for (std::uint64_t c = 0; c < states; ++c) acc.add(lambda * total_spin[c] - gamma * interaction[c]);
    return acc.value();
  };
  // d/d lambda of the bracket: n tau m - <sum S>_lambda, decreasing in lambda.
  auto stationarity = [&](double lambda) {
    const double shift = log_sum(lambda);
    double mean = 0.0;
    for (std::uint64_t c = 0; c < states; ++c)
      mean += total_spin[c] * std::exp(lambda * total_spin[c] - gamma * interaction[c] - shift);
    return spins * m - mean;
  };
  double lo = -1.0, hi = 1.0;
  while (stationarity(lo) < 0.0) lo *= 2.0;
  while (stationarity(hi) > 0.0) hi *= 2.0;
  std::uintmax_t iters = 300;
  const auto root = boost::math::tools::toms748_solve(
      stationarity, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  const double lambda = 0.5 * (root.first + root.second);
  return -spins * H * m + lambda * spins * m - log_sum(lambda);
}

EvidenceEstimate eb_likelihood_mc(const Dataset& data, const PriorSpec& prior, std::size_t n_mc,
                                  std::uint64_t seed) {
  constexpr std::size_t kMaxSpins = 12;
  constexpr std::size_t kBlocks = 20;
  const std::size_t n = data.n();
  const std::size_t N = data.N();
  if (n > kMaxSpins) throw CapabilityError("eb_likelihood_mc: n must be <= 12");
  if (n_mc < 100) throw InputError("eb_likelihood_mc: n_mc must be >= 100");

  // Data enter only through the total spin sum and the pair sums.
  double spin_sum = 0.0;
  std::vector<double> pair_sum(pair_count(n), 0.0);
  for (std::size_t mu = 0; mu < N; ++mu) {
    const auto s = data.sample(mu);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      spin_sum += s[i];
      for (std::size_t j = i + 1; j < n; ++j, ++k) pair_sum[k] += s[i] * s[j];
    }
  }

  std::vector<double> log_lik(n_mc);
  for (std::size_t k = 0; k < n_mc; ++k) {
    const auto machine = sample_parameters(prior, n, child_seed(seed, k));
    const auto J = machine.pair_couplings();
    double v = machine.h() * spin_sum;
    for (std::size_t p = 0; p < J.size(); ++p) v += J[p] * pair_sum[p];
    log_lik[k] = v - static_cast<double>(N) * log_partition(machine);
  }

  const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(N));
  EvidenceEstimate out;
  out.value = scale * log_mean_exp(log_lik, 0, 0);
  // A constant integrand (e.g. gamma = 0) has no Monte Carlo error at all.
  const auto [lo, hi] = std::minmax_element(log_lik.begin(), log_lik.end());
  if (*lo == *hi) return out;
  std::vector<double> leave_out(kBlocks);
  double mean = 0.0;
  for (std::size_t b = 0; b < kBlocks; ++b) {
    leave_out[b] = log_mean_exp(log_lik, b, kBlocks);
    mean += leave_out[b] / kBlocks;
  }
  double ss = 0.0;
  for (double v : leave_out) ss += (v - mean) * (v - mean);
  out.std_error = scale * std::sqrt(ss * (kBlocks - 1.0) / kBlocks);
  return out;
}

namespace {

// Sufficient-statistic vector phi(S) = (sum_i S_i, S_i S_j for i<j).
struct ModelMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double log_z = 0.0;
};

ModelMoments model_moments(std::size_t n, const Eigen::VectorXd& theta) {
  const std::size_t dim = 1 + pair_count(n);
  const std::uint64_t states = std::uint64_t{1} << n;
  std::vector<Spin> s(n);
  Eigen::VectorXd phi(dim);
  std::vector<double> value(states);
  double shift = -std::numeric_limits<double>::infinity();
  auto features = [&](std::uint64_t code) {
    decode_state(code, s);
    double mag = 0.0;
    for (Spin v : s) mag += v;
    phi[0] = mag;
    std::size_t k = 1;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j, ++k) phi[k] = s[i] * s[j];
  };
  for (std::uint64_t c = 0; c < states; ++c) {
    features(c);
    value[c] = theta.dot(phi);
    shift = std::max(shift, value[c]);
  }
  ModelMoments out{Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Zero(dim, dim), 0.0};
  double norm = 0.0;
  for (std::uint64_t c = 0; c < states; ++c) {
    features(c);
    const double w = std::exp(value[c] - shift);
    norm += w;
    out.mean += w * phi;
    out.cov.selfadjointView<Eigen::Lower>().rankUpdate(phi, w);
  }
  out.mean /= norm;
  out.cov = out.cov.selfadjointView<Eigen::Lower>();
  out.cov /= norm;
  out.cov -= out.mean * out.mean.transpose();
  out.log_z = shift + std::log(norm);
  return out;
}

}  // namespace

MlFit ml_fit_exact(const Dataset& data, std::size_t max_iterations) {
  constexpr std::size_t kMaxSpins = 12;
  constexpr double kTolerance = 1e-8;
  const std::size_t n = data.n();
  if (n > kMaxSpins) throw CapabilityError("ml_fit_exact: n must be <= 12");
  const std::size_t dim = 1 + pair_count(n);
  const double Nd = static_cast<double>(data.N());

  Eigen::VectorXd target = Eigen::VectorXd::Zero(dim);
  for (std::size_t mu = 0; mu < data.N(); ++mu) {
    const auto s = data.sample(mu);
    std::size_t k = 1;
    for (std::size_t i = 0; i < n; ++i) {
      target[0] += s[i] / Nd;
      for (std::size_t j = i + 1; j < n; ++j, ++k) target[k] += s[i] * s[j] / Nd;
    }
  }

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  auto mm = model_moments(n, theta);
  double objective = theta.dot(target) - mm.log_z;
  MlFit fit;
  for (fit.iterations = 0; fit.iterations < max_iterations; ++fit.iterations) {
    const Eigen::VectorXd grad = target - mm.mean;
    fit.gradient_norm = grad.lpNorm<Eigen::Infinity>();
    if (fit.gradient_norm <= kTolerance) break;
    Eigen::VectorXd step = mm.cov.ldlt().solve(grad);
    if (!step.allFinite() || step.dot(grad) <= 0.0) step = grad;
    // Backtracking (Armijo) on the exact concave log-likelihood.
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      const Eigen::VectorXd trial = theta + t * step;
      auto trial_mm = model_moments(n, trial);
      const double trial_obj = trial.dot(target) - trial_mm.log_z;
      if (trial_obj >= objective + 1e-4 * t * step.dot(grad) || k == 59) {
        accepted = trial_obj >= objective;
        if (accepted) {
          theta = trial;
          mm = std::move(trial_mm);
          objective = trial_obj;
        }
        break;
      }
    }
    if (!accepted) break;
  }
  const Eigen::VectorXd grad = target - mm.mean;
  fit.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  if (fit.gradient_norm > kTolerance) {
    throw NumericalError("ml_fit_exact: no convergence after " + std::to_string(fit.iterations) +
                         " iterations (gradient norm " + std::to_string(fit.gradient_norm) + ")");
  }
  fit.h = theta[0];
  fit.J.assign(theta.data() + 1, theta.data() + dim);
  return fit;
}

double finite_difference(const std::function<double(double)>& f, double m, double step) {
  return (f(m + step) - f(m - step)) / (2.0 * step);
}

}  // namespace ebbm::oracle

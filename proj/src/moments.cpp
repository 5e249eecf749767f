#include "ebbm/moments.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>

#include "ebbm/errors.hpp"

namespace ebbm {

Dataset::Dataset(std::size_t n, std::size_t N, std::vector<Spin> flat)
    : n_(n), N_(N), flat_(std::move(flat)) {
  if (n < 2) throw InputError("dataset needs n >= 2");
  if (N < 1) throw InputError("dataset needs N >= 1");
  if (flat_.size() != n * N) throw InputError("dataset size does not match n * N");
  for (std::size_t k = 0; k < flat_.size(); ++k) {
    if (flat_[k] != 1 && flat_[k] != -1) {
      throw InputError("dataset entry " + std::to_string(k) + " is not -1 or +1");
    }
  }
}

namespace {

std::vector<Spin> flatten(std::size_t n, const std::vector<SpinConfiguration>& samples) {
  std::vector<Spin> flat;
  flat.reserve(n * samples.size());
  for (const auto& s : samples) {
    if (s.size() != n) throw InputError("sample length does not match n");
    flat.insert(flat.end(), s.spins().begin(), s.spins().end());
  }
  return flat;
}

}  // namespace

Dataset::Dataset(std::size_t n, const std::vector<SpinConfiguration>& samples)
    : Dataset(n, samples.size(), flatten(n, samples)) {}

SufficientStats compute_stats(const Dataset& data) {
  const std::size_t n = data.n();
  const std::size_t N = data.N();
  const std::size_t pairs = pair_count(n);

  // Integer sums: site_sum[i] = sum_mu S_i, pair_sum[k] = sum_mu S_i S_j.
  std::vector<std::int64_t> site_sum(n, 0);
  std::vector<std::int32_t> pair_sum(pairs, 0);
  for (std::size_t mu = 0; mu < N; ++mu) {
    const auto s = data.sample(mu);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      site_sum[i] += s[i];
      const int si = s[i];
      std::int32_t* out = pair_sum.data() + k;
      const std::size_t len = n - i - 1;
      for (std::size_t t = 0; t < len; ++t) out[t] += si * s[i + 1 + t];
      k += len;
    }
  }

  const double Nd = static_cast<double>(N);
  const double nd = static_cast<double>(n);
  SufficientStats st;
  st.n = n;
  st.N = N;
  st.d_site.resize(n);
  st.d_pair.resize(pairs);
  st.omega.resize(n);

  std::int64_t total_site = 0;
  for (std::size_t i = 0; i < n; ++i) {
    st.d_site[i] = static_cast<double>(site_sum[i]) / Nd;
    total_site += site_sum[i];
  }
  st.M = static_cast<double>(total_site) / (nd * Nd);

  std::int64_t total_pair = 0;
  std::int64_t total_pair_sq = 0;
  std::int64_t max_abs = 0;
  std::vector<std::int64_t> row_sum(n, 0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const std::int64_t v = pair_sum[k];
      st.d_pair[k] = static_cast<double>(v) / Nd;
      total_pair += v;
      total_pair_sq += v * v;
      row_sum[i] += v;
      row_sum[j] += v;
      max_abs = std::max<std::int64_t>(max_abs, std::llabs(v));
    }
  }
  const double P = static_cast<double>(pairs);
  st.C1 = static_cast<double>(total_pair) / (P * Nd);
  st.C2 = static_cast<double>(total_pair_sq) / (P * Nd * Nd);
  st.max_abs_dij = static_cast<double>(max_abs) / Nd;

  // omega_i = (n * row_i - 2 * total) / (n (n-1) N); numerators are integers
  // summing to zero, so Omega carries no cancellation error.
  const double denom = nd * (nd - 1.0) * Nd;
  __int128 sq = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const __int128 w = static_cast<__int128>(n) * row_sum[i] - 2 * static_cast<__int128>(total_pair);
    st.omega[i] = static_cast<double>(w) / denom;
    sq += w * w;
  }
  st.Omega = static_cast<double>(sq) / (denom * denom) / nd;
  return st;
}

}  // namespace ebbm

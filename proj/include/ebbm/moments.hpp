#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ebbm/model.hpp"

namespace ebbm {

/// N observed spin configurations of length n, stored row-major.
class Dataset {
 public:
  Dataset(std::size_t n, std::size_t N, std::vector<Spin> flat);
  Dataset(std::size_t n, const std::vector<SpinConfiguration>& samples);

  std::size_t n() const noexcept { return n_; }
  std::size_t N() const noexcept { return N_; }
  std::span<const Spin> sample(std::size_t mu) const noexcept {
    return {flat_.data() + mu * n_, n_};
  }
  std::span<const Spin> flat() const noexcept { return flat_; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t n_;
  std::size_t N_;
  std::vector<Spin> flat_;
};

/// Everything the closed-form estimator consumes.
struct SufficientStats {
  std::size_t n = 0;
  std::size_t N = 0;
  double M = 0.0;                // mean magnetization
  std::vector<double> d_site;    // d_i
  std::vector<double> d_pair;    // d_ij, pair_index order
  double C1 = 0.0;               // mean of d_ij over pairs
  std::vector<double> omega;     // per-site deviation of mean correlation from C1
  double C2 = 0.0;               // mean of d_ij^2 over pairs
  double Omega = 0.0;            // mean of omega_i^2
  double max_abs_dij = 0.0;
};

/// Single pass over the data. Site and pair sums are accumulated as integers,
/// so every statistic is exactly invariant under sample reordering, spin
/// relabeling, and global spin flip.
SufficientStats compute_stats(const Dataset& dataset);

}  // namespace ebbm

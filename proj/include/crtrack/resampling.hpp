#pragma once

// Classical resampling schemes. Each `*_indices` function maps a weight
// vector to N ancestor indices; the `*_resample` wrappers apply them to a
// ParticleSet and return an equally weighted set.
//
// Inverse-CDF convention: a point u in (0, 1] selects the unique j with
// C_{j-1} < u <= C_j, where C is the normalized cumulative weight. A point
// landing exactly on C_j therefore selects j, and zero-weight entries are
// never selected.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "crtrack/particle.hpp"
#include "crtrack/rng.hpp"

namespace crtrack {

class CumulativeWeights {
 public:
  explicit CumulativeWeights(std::span<const double> w) : cum_(w.size()) {
    checked_weight_sum(w);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc += w[i];
      cum_[i] = acc;
    }
    total_ = acc;
    last_positive_ = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i] > 0.0) last_positive_ = i;
  }

  std::size_t size() const noexcept { return cum_.size(); }

  /// Index selected by `u` in (0, 1].
  std::size_t select(double u) const { return select_scaled(static_cast<long double>(u) * total_); }

  /// Index selected by `pos`, a point on the unnormalized scale (0, total].
  std::size_t select_scaled(long double pos) const {
    auto it = std::lower_bound(cum_.begin(), cum_.end(), pos);
    if (it == cum_.end()) return last_positive_;
    return static_cast<std::size_t>(it - cum_.begin());
  }

  long double total() const noexcept { return total_; }

 private:
  std::vector<long double> cum_;
  long double total_ = 0.0L;
  std::size_t last_positive_ = 0;
};

template <class URBG>
std::vector<std::size_t> multinomial_indices(std::span<const double> w, std::size_t n, URBG& rng) {
  const CumulativeWeights cdf(w);
  std::vector<std::size_t> out(n);
  for (auto& o : out) o = cdf.select(uniform_open_closed(rng));
  return out;
}

/// One draw in each stratum ((i-1)/n, i/n].
template <class URBG>
std::vector<std::size_t> stratified_indices(std::span<const double> w, std::size_t n, URBG& rng) {
  const CumulativeWeights cdf(w);
  std::vector<std::size_t> out(n);
  const long double scale = cdf.total() / static_cast<long double>(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = cdf.select_scaled((static_cast<long double>(i) + uniform_open_closed(rng)) * scale);
  return out;
}

/// Deterministic part of systematic resampling: points (i-1)/n + offset/n
/// for a given `offset` in (0, 1].
inline std::vector<std::size_t> systematic_indices_at(std::span<const double> w, std::size_t n,
                                                      double offset) {
  const CumulativeWeights cdf(w);
  std::vector<std::size_t> out(n);
  const long double scale = cdf.total() / static_cast<long double>(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = cdf.select_scaled((static_cast<long double>(i) + offset) * scale);
  return out;
}

template <class URBG>
std::vector<std::size_t> systematic_indices(std::span<const double> w, std::size_t n, URBG& rng) {
  return systematic_indices_at(w, n, uniform_open_closed(rng));
}

/// floor(n w_i) deterministic copies of each entry, in index order. The
/// residual weights n w_i - floor(n w_i) are returned through `residual`.
inline std::vector<std::size_t> residual_deterministic(std::span<const double> w, std::size_t n,
                                                       std::vector<double>& residual) {
  const double total = checked_weight_sum(w);
  std::vector<std::size_t> out;
  out.reserve(n);
  residual.assign(w.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double expected = static_cast<double>(n) * w[i] / total;
    const double copies = std::floor(expected);
    residual[i] = std::max(0.0, expected - copies);
    for (std::size_t c = 0; c < static_cast<std::size_t>(copies) && out.size() < n; ++c) out.push_back(i);
  }
  return out;
}

template <class URBG>
std::vector<std::size_t> residual_indices(std::span<const double> w, std::size_t n, URBG& rng) {
  std::vector<double> residual;
  std::vector<std::size_t> out = residual_deterministic(w, n, residual);
  const std::size_t remaining = n - out.size();
  if (remaining > 0) {
    double rsum = 0.0;
    for (double r : residual) rsum += r;
    // Rounding can leave a positive remainder with all residuals zero.
    if (!(rsum > 0.0)) residual.assign(w.begin(), w.end());
    auto extra = multinomial_indices(std::span<const double>(residual), remaining, rng);
    out.insert(out.end(), extra.begin(), extra.end());
  }
  return out;
}

/// Selection function for weighted resampling; receives a normalized weight.
using WeightFunction = std::function<double(double)>;

/// g(w) = exp(scale * w).
inline WeightFunction exponential_weight_function(double scale) {
  return [scale](double w) { return std::exp(scale * w); };
}

/// Draws n indices with probability rho_i = g(w_i) / sum g, and returns the
/// corrected weights w_i / rho_i of the draws through `corrected`.
template <class URBG>
std::vector<std::size_t> weighted_draw(std::span<const double> w, std::size_t n, const WeightFunction& g,
                                       URBG& rng, std::vector<double>& corrected) {
  const double total = checked_weight_sum(w);
  std::vector<double> rho(w.size());
  double rho_sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    rho[i] = g(w[i] / total);
    if (!(rho[i] > 0.0) || !std::isfinite(rho[i]))
      throw Error(Errc::degenerate_weights, "selection function must be strictly positive and finite");
    rho_sum += rho[i];
  }
  for (double& r : rho) r /= rho_sum;
  auto draws = multinomial_indices(std::span<const double>(rho), n, rng);
  corrected.resize(n);
  for (std::size_t i = 0; i < n; ++i) corrected[i] = (w[draws[i]] / total) / rho[draws[i]];
  return draws;
}

/// Weighted draw followed by a systematic pass on the corrected weights so
/// the result is equally weighted.
template <class URBG>
std::vector<std::size_t> weighted_indices(std::span<const double> w, std::size_t n, const WeightFunction& g,
                                          URBG& rng) {
  std::vector<double> corrected;
  auto draws = weighted_draw(w, n, g, rng, corrected);
  auto pick = systematic_indices(std::span<const double>(corrected), n, rng);
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = draws[pick[i]];
  return out;
}

template <class URBG>
ParticleSet multinomial_resample(const ParticleSet& set, URBG& rng) {
  const auto w = set.weights();
  return copy_ancestors(set, multinomial_indices(std::span<const double>(w), set.size(), rng));
}

template <class URBG>
ParticleSet stratified_resample(const ParticleSet& set, URBG& rng) {
  const auto w = set.weights();
  return copy_ancestors(set, stratified_indices(std::span<const double>(w), set.size(), rng));
}

template <class URBG>
ParticleSet systematic_resample(const ParticleSet& set, URBG& rng) {
  const auto w = set.weights();
  return copy_ancestors(set, systematic_indices(std::span<const double>(w), set.size(), rng));
}

template <class URBG>
ParticleSet residual_resample(const ParticleSet& set, URBG& rng) {
  const auto w = set.weights();
  return copy_ancestors(set, residual_indices(std::span<const double>(w), set.size(), rng));
}

template <class URBG>
ParticleSet weighted_resample(const ParticleSet& set, const WeightFunction& g, URBG& rng) {
  const auto w = set.weights();
  return copy_ancestors(set, weighted_indices(std::span<const double>(w), set.size(), g, rng));
}

}  // namespace crtrack

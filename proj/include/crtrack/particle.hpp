#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "crtrack/error.hpp"
#include "crtrack/geometry.hpp"

namespace crtrack {

/// One weighted hypothesis. `parts[k]` holds the time-t pose for parts
/// already processed this frame and the time-(t-1) pose for the others.
/// `part_weights[k]` is the likelihood factor part k received since the last
/// resampling (1 when it has none), so `weight` is proportional to their
/// product across the whole set.
struct Particle {
  ObjectState parts;
  std::vector<double> part_weights;
  double weight = 1.0;
};

struct ParticleSet {
  std::vector<Particle> particles;
  std::vector<bool> processed;  // Q: parts at time t

  ParticleSet() = default;

  /// `count` exact copies of `initial`, each with weight 1/count.
  ParticleSet(const ObjectState& initial, std::size_t count)
      : particles(count, Particle{initial, std::vector<double>(initial.size(), 1.0),
                                  count ? 1.0 / static_cast<double>(count) : 0.0}),
        processed(initial.size(), true) {}

  std::size_t size() const noexcept { return particles.size(); }
  std::size_t part_count() const noexcept { return processed.size(); }

  std::vector<double> weights() const {
    std::vector<double> w(particles.size());
    for (std::size_t i = 0; i < particles.size(); ++i) w[i] = particles[i].weight;
    return w;
  }

  bool fully_processed() const {
    for (bool b : processed)
      if (!b) return false;
    return true;
  }

  void begin_frame() { processed.assign(processed.size(), false); }

  /// Rescales weights to sum to one. Returns false (and leaves the weights
  /// alone) when the sum is zero or not finite.
  bool normalize() {
    double total = 0.0;
    for (const auto& p : particles) total += p.weight;
    if (!(total > 0.0) || !std::isfinite(total)) return false;
    for (auto& p : particles) p.weight /= total;
    return true;
  }

  void equalize() {
    const double w = particles.empty() ? 0.0 : 1.0 / static_cast<double>(particles.size());
    for (auto& p : particles) {
      p.weight = w;
      std::fill(p.part_weights.begin(), p.part_weights.end(), 1.0);
    }
  }
};

/// Throws DegenerateWeights unless all weights are finite, nonnegative and
/// sum to a positive value. Returns the sum.
inline double checked_weight_sum(std::span<const double> w) {
  double total = 0.0;
  for (double v : w) {
    if (!std::isfinite(v) || v < 0.0) throw Error(Errc::degenerate_weights, "non-finite or negative weight");
    total += v;
  }
  if (!(total > 0.0) || !std::isfinite(total))
    throw Error(Errc::degenerate_weights, "weights sum to zero");
  return total;
}

/// New set made of copies of `set.particles[ancestors[i]]`, equal weights
/// and reset per-part factors.
inline ParticleSet copy_ancestors(const ParticleSet& set, std::span<const std::size_t> ancestors) {
  ParticleSet out;
  out.processed = set.processed;
  out.particles.reserve(ancestors.size());
  for (std::size_t a : ancestors) out.particles.push_back(set.particles[a]);
  out.equalize();
  return out;
}

}  // namespace crtrack

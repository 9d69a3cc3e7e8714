#pragma once

// Explicit construction of the combinatorial set, for validating
// combinatorial resampling on small instances. Exponential in the number
// of particles; guarded against blow-up.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "crtrack/dbn.hpp"
#include "crtrack/error.hpp"
#include "crtrack/particle.hpp"

namespace crtrack {

struct OracleLimits {
  std::size_t max_particles = 8;
  std::size_t max_step_parts = 3;
  std::size_t max_permutation_tuples = 20000;
};

/// Every particle set obtained from `set` by permuting, independently for
/// each part k of step `stage`, the values of {k} and its descendants among
/// particles whose within-slice parent of k is bit-identical (all particles
/// when k is a root). One entry per permutation tuple, so repeated sets are
/// kept. The weight of each output particle is the product of the factors
/// part_weights[k] it carries for the step parts (unnormalized).
inline std::vector<ParticleSet> enumerate_combinatorial_set(const ParticleSet& set, const DbnSpec& dbn,
                                                            const Partition& partition, std::size_t stage,
                                                            const OracleLimits& limits = {}) {
  const std::size_t n = set.size();
  const auto step = partition.step(stage);
  if (n > limits.max_particles || step.size() > limits.max_step_parts)
    throw Error(Errc::instance_too_large, std::to_string(n) + " particles, " + std::to_string(step.size()) +
                                              " parts in the step");

  auto same_state = [](const PartState& a, const PartState& b) {
    return std::bit_cast<std::uint64_t>(a.x) == std::bit_cast<std::uint64_t>(b.x) &&
           std::bit_cast<std::uint64_t>(a.y) == std::bit_cast<std::uint64_t>(b.y) &&
           std::bit_cast<std::uint64_t>(a.theta) == std::bit_cast<std::uint64_t>(b.theta);
  };

  // Admissible permutations of particle indices, per step part.
  std::vector<std::vector<std::vector<std::size_t>>> admissible(step.size());
  std::vector<std::vector<PartIndex>> moved(step.size());
  std::size_t tuples = 1;
  for (std::size_t slot = 0; slot < step.size(); ++slot) {
    const PartIndex k = step[slot];
    const auto parent = dbn.parent(k);
    moved[slot] = descendants_within_slice(dbn, k);
    moved[slot].push_back(k);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i)
        if (parent) ok = same_state(set.particles[i].parts[*parent], set.particles[perm[i]].parts[*parent]);
      if (ok) admissible[slot].push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    tuples *= admissible[slot].size();
    if (tuples > limits.max_permutation_tuples)
      throw Error(Errc::instance_too_large, "more than " + std::to_string(limits.max_permutation_tuples) +
                                                " permutation tuples");
  }

  std::vector<ParticleSet> out;
  out.reserve(tuples);
  std::vector<std::size_t> choice(step.size(), 0);
  for (std::size_t t = 0; t < tuples; ++t) {
    ParticleSet permuted = set;
    for (std::size_t i = 0; i < n; ++i) {
      Particle& p = permuted.particles[i];
      double w = 1.0;
      for (std::size_t slot = 0; slot < step.size(); ++slot) {
        const Particle& src = set.particles[admissible[slot][choice[slot]][i]];
        for (PartIndex b : moved[slot]) {
          p.parts[b] = src.parts[b];
          p.part_weights[b] = src.part_weights[b];
        }
        w *= p.part_weights[step[slot]];
      }
      p.weight = w;
    }
    out.push_back(std::move(permuted));
    for (std::size_t slot = 0; slot < step.size(); ++slot) {
      if (++choice[slot] < admissible[slot].size()) break;
      choice[slot] = 0;
    }
  }
  return out;
}

}  // namespace crtrack

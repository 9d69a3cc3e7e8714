#pragma once

// Fixtures and brute-force oracles shared by the unit tests and the
// acceptance binary. Nothing here calls the code under test to compute an
// expected value except where noted (the enumerated combinatorial set).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "crtrack/combinatorial.hpp"
#include "crtrack/combinatorial_oracle.hpp"
#include "crtrack/dbn.hpp"
#include "crtrack/particle.hpp"

namespace crtrack::testing {

/// Torso 0; head 5, arms 1-2 and 3-4 (1-based: parent(2)=parent(4)=parent(6)=1,
/// parent(3)=2, parent(5)=4).
inline DbnSpec torso_arms_head_dbn() {
  return DbnSpec({std::nullopt, PartIndex{0}, PartIndex{1}, PartIndex{0}, PartIndex{3}, PartIndex{0}});
}

/// Same object without the head: 1-based parent(2)=1, parent(3)=2,
/// parent(4)=1, parent(5)=4.
inline DbnSpec two_arm_dbn() {
  return DbnSpec({std::nullopt, PartIndex{0}, PartIndex{1}, PartIndex{0}, PartIndex{3}});
}

/// A particle whose part k holds the label `labels[k]` in x, zero y and theta.
inline Particle labelled_particle(const std::vector<double>& labels, double weight = 1.0) {
  Particle p;
  for (double v : labels) p.parts.push_back({v, 0.0, 0.0});
  p.part_weights.assign(labels.size(), 1.0);
  p.weight = weight;
  return p;
}

inline ParticleSet labelled_set(const std::vector<std::vector<double>>& rows) {
  ParticleSet set;
  for (const auto& r : rows) set.particles.push_back(labelled_particle(r, 1.0 / static_cast<double>(rows.size())));
  set.processed.assign(rows.front().size(), true);
  return set;
}

/// Five particles over parts 1..5 (zero-based 0..4); the step is parts 3
/// and 5, i.e. zero-based stage 2 of the parallel partition.
inline ParticleSet two_arm_set() {
  // Rows listed as (part 3, part 2, part 1, part 4, part 5).
  const double rows[5][5] = {{5, 1, 0, 3, 8}, {6, 1, 0, 3, 9}, {7, 1, 0, 4, 12}, {10, 2, 0, 4, 13}, {11, 2, 0, 4, 14}};
  std::vector<std::vector<double>> by_part;
  for (const auto& r : rows) by_part.push_back({r[2], r[1], r[0], r[3], r[4]});
  return labelled_set(by_part);
}

using StateKey = std::vector<std::uint64_t>;

inline StateKey state_key(const Particle& p) {
  StateKey key;
  for (const auto& s : p.parts) {
    key.push_back(std::bit_cast<std::uint64_t>(s.x));
    key.push_back(std::bit_cast<std::uint64_t>(s.y));
    key.push_back(std::bit_cast<std::uint64_t>(s.theta));
  }
  return key;
}

/// Random small instance: a forest of at most `max_parts` parts, a stage of
/// its parallel partition with one or two parts, integer per-part factors
/// 1..9 on the step parts, and a central fragment shared by at least two
/// particles.
struct RandomInstance {
  DbnSpec dbn;
  Partition partition;
  std::size_t stage = 0;
  ParticleSet set;
  std::vector<std::vector<int>> int_weights;  // [particle][slot]
};

inline std::optional<RandomInstance> random_instance(std::mt19937_64& rng, std::size_t max_parts = 5,
                                                     std::size_t max_particles = 6) {
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  const std::size_t parts = pick(2, max_parts);
  std::vector<std::optional<PartIndex>> parents(parts);
  for (PartIndex k = 1; k < parts; ++k)
    if (pick(0, 5) > 0) parents[k] = pick(0, k - 1);  // mostly attached, sometimes a new root
  DbnSpec dbn(parents);
  Partition partition = compute_partition(dbn);
  std::vector<std::size_t> candidates;
  for (std::size_t s = 0; s < partition.step_count(); ++s)
    if (partition.step(s).size() <= 2) candidates.push_back(s);
  if (candidates.empty()) return std::nullopt;
  const std::size_t stage = candidates[pick(0, candidates.size() - 1)];
  const StageLayout layout = make_stage_layout(dbn, partition, stage);

  const std::size_t n = pick(2, max_particles);
  std::vector<bool> is_central(parts, false);
  for (PartIndex k : layout.central) is_central[k] = true;

  RandomInstance inst{dbn, partition, stage, {}, {}};
  inst.set.processed.assign(parts, true);
  for (std::size_t i = 0; i < n; ++i) {
    Particle p;
    p.parts.resize(parts);
    p.part_weights.assign(parts, 1.0);
    for (PartIndex k = 0; k < parts; ++k) {
      // Central values from a pool of two so groups collide; block values
      // distinct per particle so permutations are visible.
      const double v = is_central[k] ? static_cast<double>(pick(0, 1)) : 100.0 + 10.0 * static_cast<double>(i) + k;
      p.parts[k] = {v, 0.0, 0.0};
    }
    inst.set.particles.push_back(std::move(p));
  }
  // Force a duplicated central fragment.
  for (PartIndex k : layout.central) inst.set.particles[1].parts[k] = inst.set.particles[0].parts[k];

  inst.int_weights.assign(n, std::vector<int>(layout.step_parts.size()));
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0;
    for (std::size_t slot = 0; slot < layout.step_parts.size(); ++slot) {
      const int iw = static_cast<int>(pick(1, 9));
      inst.int_weights[i][slot] = iw;
      inst.set.particles[i].part_weights[layout.step_parts[slot]] = iw;
      w *= iw;
    }
    inst.set.particles[i].weight = w;
  }
  return inst;
}

/// Exact total weight of the enumerated combinatorial set carried by
/// particles whose central fragment equals that of central group h, per h.
/// Weights must be integers (they are read back as such).
inline std::vector<unsigned __int128> exact_group_mass(const std::vector<ParticleSet>& enumerated,
                                                       const CompatibilityGroups& groups,
                                                       const StageLayout& layout) {
  std::map<detail::ValueKey, std::size_t> group_of_key;
  // Group keys recomputed from the first enumerated set (central parts never move).
  for (std::size_t h = 0; h < groups.group_count(); ++h)
    group_of_key[detail::fragment_key(enumerated.front().particles[groups.central[h].front()], layout.central)] = h;
  std::vector<unsigned __int128> mass(groups.group_count(), 0);
  for (const auto& s : enumerated) {
    for (const auto& p : s.particles) {
      unsigned __int128 w = 1;
      for (PartIndex k : layout.step_parts) w *= static_cast<unsigned __int128>(std::llround(p.part_weights[k]));
      mass.at(group_of_key.at(detail::fragment_key(p, layout.central))) += w;
    }
  }
  return mass;
}

/// Probability of each distinct particle state when one particle is drawn
/// proportionally to weight from the union of the enumerated sets.
inline std::map<StateKey, double> exact_single_particle_law(const std::vector<ParticleSet>& enumerated,
                                                            const StageLayout& layout) {
  std::map<StateKey, long double> mass;
  long double total = 0.0L;
  for (const auto& s : enumerated) {
    for (const auto& p : s.particles) {
      long double w = 1.0L;
      for (PartIndex k : layout.step_parts) w *= p.part_weights[k];
      mass[state_key(p)] += w;
      total += w;
    }
  }
  std::map<StateKey, double> law;
  for (const auto& [k, m] : mass) law[k] = static_cast<double>(m / total);
  return law;
}

/// Total variation between an exact law and empirical counts.
inline double total_variation(const std::map<StateKey, double>& law, const std::map<StateKey, std::size_t>& counts,
                              std::size_t draws) {
  double tv = 0.0;
  for (const auto& [k, p] : law) {
    auto it = counts.find(k);
    const double q = it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(draws);
    tv += std::abs(p - q);
  }
  for (const auto& [k, c] : counts)
    if (!law.count(k)) tv += static_cast<double>(c) / static_cast<double>(draws);
  return 0.5 * tv;
}

/// Counts of each index in an ancestor vector.
inline std::vector<std::size_t> copy_counts(const std::vector<std::size_t>& ancestors, std::size_t m) {
  std::vector<std::size_t> c(m, 0);
  for (auto a : ancestors) ++c.at(a);
  return c;
}

}  // namespace crtrack::testing

#pragma once

// Combinatorial resampling.
//
// At stage s the parts of the current step may swap their values (together
// with the lagged values of their descendants) between any two particles
// that agree bit for bit on the part's within-slice parent. The union of
// every particle set reachable by such swaps is never built; instead a new
// particle is drawn by
//   1. picking a central group S_h (particles equal on every non-swappable
//      part) with probability proportional to W_h, and
//   2. for each step part k, picking a donor from S_h^k (particles sharing
//      S_h's parent value for k) proportionally to its factor w^{(r),k}.
// W_h = N_h * prod_k [ N^k! / A(N_h^k, N_h) * A(N_h^k - 1, N_h - 1) * W_h^k ]
// with A(n, r) = n! / (n - r)!, evaluated in log space.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "crtrack/dbn.hpp"
#include "crtrack/particle.hpp"
#include "crtrack/resampling.hpp"
#include "crtrack/rng.hpp"

namespace crtrack {

/// Which parts move together at a given stage.
struct StageLayout {
  std::vector<PartIndex> step_parts;                // P_j
  std::vector<std::optional<PartIndex>> parent_of;  // within-slice parent per step part
  std::vector<std::vector<PartIndex>> blocks;       // {k} + lagged descendants, per step part
  std::vector<PartIndex> central;                   // every part outside the blocks
};

inline StageLayout make_stage_layout(const DbnSpec& dbn, const Partition& partition, std::size_t stage) {
  if (stage >= partition.step_count()) throw Error(Errc::bad_index, "stage outside the partition");
  StageLayout layout;
  std::vector<bool> in_block(dbn.part_count(), false);
  for (PartIndex k : partition.step(stage)) {
    layout.step_parts.push_back(k);
    layout.parent_of.push_back(dbn.parent(k));
    std::vector<PartIndex> block{k};
    for (PartIndex d : descendants_within_slice(dbn, k)) block.push_back(d);
    for (PartIndex b : block) in_block[b] = true;
    layout.blocks.push_back(std::move(block));
  }
  for (PartIndex k = 0; k < dbn.part_count(); ++k)
    if (!in_block[k]) layout.central.push_back(k);
  return layout;
}

namespace detail {

using ValueKey = std::vector<std::uint64_t>;

inline void append_bits(ValueKey& key, const PartState& s) {
  key.push_back(std::bit_cast<std::uint64_t>(s.x));
  key.push_back(std::bit_cast<std::uint64_t>(s.y));
  key.push_back(std::bit_cast<std::uint64_t>(s.theta));
}

inline ValueKey fragment_key(const Particle& p, std::span<const PartIndex> parts) {
  ValueKey key;
  key.reserve(3 * parts.size());
  for (PartIndex k : parts) append_bits(key, p.parts[k]);
  return key;
}

/// Groups indices 0..n-1 by key, groups ordered by first occurrence.
template <class KeyOf>
std::vector<std::vector<std::size_t>> group_by(std::size_t n, KeyOf&& key_of, std::vector<std::size_t>& group_of) {
  std::map<ValueKey, std::size_t> ids;
  std::vector<std::vector<std::size_t>> groups;
  group_of.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = ids.emplace(key_of(i), groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
    group_of[i] = it->second;
  }
  return groups;
}

inline double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

/// log A(n, r) = log(n! / (n - r)!).
inline double log_arrangements(std::size_t n, std::size_t r) {
  return log_factorial(n) - log_factorial(n - r);
}

}  // namespace detail

struct CompatibilityGroups {
  struct PartClasses {
    PartIndex part = 0;
    std::vector<std::vector<std::size_t>> classes;  // particles sharing a parent value
    std::vector<double> class_weight;               // sum of w^{(i),k} over a class
    std::vector<std::size_t> class_of_group;        // central group h -> its class
    std::size_t largest = 0;                        // N^k
  };

  std::vector<std::vector<std::size_t>> central;  // S_1..S_R
  std::vector<PartClasses> parts;                 // one per step part, ascending

  std::size_t group_count() const noexcept { return central.size(); }
  std::size_t group_size(std::size_t h) const { return central.at(h).size(); }

  /// S_h^k for the `slot`-th step part.
  const std::vector<std::size_t>& compatible(std::size_t slot, std::size_t h) const {
    const auto& pc = parts.at(slot);
    return pc.classes[pc.class_of_group.at(h)];
  }
  std::size_t compatible_size(std::size_t slot, std::size_t h) const { return compatible(slot, h).size(); }
  double compatible_weight(std::size_t slot, std::size_t h) const {
    const auto& pc = parts.at(slot);
    return pc.class_weight[pc.class_of_group.at(h)];
  }
  std::size_t largest_compatible(std::size_t slot) const { return parts.at(slot).largest; }
};

/// Central groups and per-part compatibility classes at `stage`. Equality is
/// bit-exact on (x, y, theta).
inline CompatibilityGroups group_compatibility(const ParticleSet& set, const StageLayout& layout) {
  CompatibilityGroups g;
  const std::size_t n = set.size();
  std::vector<std::size_t> group_of;
  g.central = detail::group_by(
      n, [&](std::size_t i) { return detail::fragment_key(set.particles[i], layout.central); }, group_of);

  for (std::size_t slot = 0; slot < layout.step_parts.size(); ++slot) {
    CompatibilityGroups::PartClasses pc;
    pc.part = layout.step_parts[slot];
    const auto parent = layout.parent_of[slot];
    std::vector<std::size_t> class_of;
    pc.classes = detail::group_by(
        n,
        [&](std::size_t i) {
          detail::ValueKey key;
          if (parent) detail::append_bits(key, set.particles[i].parts[*parent]);
          return key;
        },
        class_of);
    pc.class_weight.assign(pc.classes.size(), 0.0);
    for (std::size_t c = 0; c < pc.classes.size(); ++c) {
      for (std::size_t i : pc.classes[c]) pc.class_weight[c] += set.particles[i].part_weights[pc.part];
      pc.largest = std::max(pc.largest, pc.classes[c].size());
    }
    pc.class_of_group.resize(g.central.size());
    for (std::size_t h = 0; h < g.central.size(); ++h) pc.class_of_group[h] = class_of[g.central[h].front()];
    g.parts.push_back(std::move(pc));
  }
  return g;
}

inline CompatibilityGroups group_compatibility(const ParticleSet& set, const DbnSpec& dbn,
                                               const Partition& partition, std::size_t stage) {
  return group_compatibility(set, make_stage_layout(dbn, partition, stage));
}

/// log W_h. Returns -inf when some W_h^k is zero.
inline double group_log_weight(const CompatibilityGroups& groups, std::size_t h) {
  if (h >= groups.group_count()) throw Error(Errc::bad_group, "group index out of range");
  const std::size_t nh = groups.group_size(h);
  double log_w = std::log(static_cast<double>(nh));
  for (std::size_t slot = 0; slot < groups.parts.size(); ++slot) {
    const std::size_t nhk = groups.compatible_size(slot, h);
    const double whk = groups.compatible_weight(slot, h);
    if (!(whk > 0.0)) return -std::numeric_limits<double>::infinity();
    log_w += detail::log_factorial(groups.largest_compatible(slot)) - detail::log_arrangements(nhk, nh) +
             detail::log_arrangements(nhk - 1, nh - 1) + std::log(whk);
  }
  return log_w;
}

/// Group selection probabilities exp(log W_h - max log W), normalized.
inline std::vector<double> group_probabilities(const CompatibilityGroups& groups) {
  std::vector<double> log_w(groups.group_count());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h < log_w.size(); ++h) {
    log_w[h] = group_log_weight(groups, h);
    if (std::isnan(log_w[h]) || log_w[h] == std::numeric_limits<double>::infinity())
      throw Error(Errc::degenerate_weights, "group weight is not finite");
    top = std::max(top, log_w[h]);
  }
  if (!std::isfinite(top)) throw Error(Errc::degenerate_weights, "every group weight is zero");
  double total = 0.0;
  for (double& v : log_w) total += (v = std::exp(v - top));
  for (double& v : log_w) v /= total;
  return log_w;
}

/// Draws set.size() particles from the implicit combinatorial set. The
/// result carries weight 1/N per particle and per-part factors reset to 1.
template <class URBG>
ParticleSet combinatorial_resample(const ParticleSet& set, const StageLayout& layout, URBG& rng) {
  const std::size_t n = set.size();
  const CompatibilityGroups groups = group_compatibility(set, layout);
  const std::vector<double> group_p = group_probabilities(groups);
  const CumulativeWeights group_cdf(group_p);

  // Donor distributions per (slot, class), built lazily: classes that no
  // central group points at are never sampled.
  std::vector<std::vector<std::optional<CumulativeWeights>>> donor_cdf(groups.parts.size());
  for (std::size_t slot = 0; slot < groups.parts.size(); ++slot)
    donor_cdf[slot].resize(groups.parts[slot].classes.size());

  ParticleSet out;
  out.processed = set.processed;
  out.particles.reserve(n);
  std::vector<double> scratch;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t h = group_cdf.select(uniform_open_closed(rng));
    Particle p = set.particles[groups.central[h].front()];
    for (std::size_t slot = 0; slot < groups.parts.size(); ++slot) {
      const auto& pc = groups.parts[slot];
      const std::size_t c = pc.class_of_group[h];
      auto& cdf = donor_cdf[slot][c];
      if (!cdf) {
        scratch.clear();
        for (std::size_t r : pc.classes[c]) scratch.push_back(set.particles[r].part_weights[pc.part]);
        cdf.emplace(std::span<const double>(scratch));
      }
      const std::size_t donor = pc.classes[c][cdf->select(uniform_open_closed(rng))];
      for (PartIndex b : layout.blocks[slot]) p.parts[b] = set.particles[donor].parts[b];
    }
    out.particles.push_back(std::move(p));
  }
  out.equalize();
  return out;
}

template <class URBG>
ParticleSet combinatorial_resample(const ParticleSet& set, const DbnSpec& dbn, const Partition& partition,
                                   std::size_t stage, URBG& rng) {
  return combinatorial_resample(set, make_stage_layout(dbn, partition, stage), rng);
}

}  // namespace crtrack

#pragma once

// Structure of the tracked object's dynamic Bayesian network.
//
// Every part k carries a temporal self-arc x_{t-1}^k -> x_t^k and a single
// observation node y_t^k; neither is stored because both are implied. The
// only free structure is the within-slice parent of each part, which must
// form a directed forest.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crtrack/error.hpp"

namespace crtrack {

/// Zero-based part index. Part ids in prose and in figures are 1-based;
/// part `k` here is part `k + 1` there.
using PartIndex = std::size_t;

class DbnSpec {
 public:
  DbnSpec() = default;
  explicit DbnSpec(std::vector<std::optional<PartIndex>> within_slice_parent)
      : parent_(std::move(within_slice_parent)) {}

  std::size_t part_count() const noexcept { return parent_.size(); }

  std::optional<PartIndex> parent(PartIndex k) const {
    check_index(k);
    return parent_[k];
  }

  std::span<const std::optional<PartIndex>> parents() const noexcept { return parent_; }

  std::vector<PartIndex> children(PartIndex k) const {
    check_index(k);
    std::vector<PartIndex> out;
    for (PartIndex c = 0; c < parent_.size(); ++c)
      if (parent_[c] == k) out.push_back(c);
    return out;
  }

  void check_index(PartIndex k) const {
    if (k >= parent_.size())
      throw Error(Errc::bad_index, "part " + std::to_string(k) + " outside [0, " +
                                       std::to_string(parent_.size()) + ")");
  }

 private:
  std::vector<std::optional<PartIndex>> parent_;
};

/// Throws unless the within-slice parent relation is a directed forest over
/// a nonempty, dense set of parts.
inline void validate_structure(const DbnSpec& spec) {
  const std::size_t count = spec.part_count();
  if (count == 0) throw Error(Errc::empty_model, "model has no parts");
  for (PartIndex k = 0; k < count; ++k) {
    auto p = spec.parents()[k];
    if (p && *p >= count)
      throw Error(Errc::bad_index, "parent of part " + std::to_string(k) + " is " +
                                       std::to_string(*p) + ", outside the model");
  }
  for (PartIndex k = 0; k < count; ++k) {
    PartIndex cur = k;
    std::size_t steps = 0;
    while (auto p = spec.parents()[cur]) {
      cur = *p;
      if (++steps > count || cur == k)
        throw Error(Errc::cycle_detected, "parent chain from part " + std::to_string(k) +
                                              " does not reach a root");
    }
  }
}

/// Ordered steps P_1..P_K over the parts. Stage `s` is zero-based, so
/// `processed_before(s)` is Q_{s} in one-based notation (parts handled by
/// earlier stages) and `pending_after(s)` is R_{s+1}.
class Partition {
 public:
  Partition() = default;

  Partition(std::vector<std::vector<PartIndex>> steps, std::size_t part_count)
      : steps_(std::move(steps)), stage_of_(part_count, kUnassigned) {
    for (std::size_t s = 0; s < steps_.size(); ++s) {
      if (steps_[s].empty()) throw Error(Errc::bad_index, "empty partition step");
      std::sort(steps_[s].begin(), steps_[s].end());
      for (PartIndex k : steps_[s]) {
        if (k >= part_count || stage_of_[k] != kUnassigned)
          throw Error(Errc::bad_index, "partition steps are not disjoint over the parts");
        stage_of_[k] = s;
      }
    }
    for (auto s : stage_of_)
      if (s == kUnassigned) throw Error(Errc::bad_index, "partition does not cover every part");
  }

  std::size_t step_count() const noexcept { return steps_.size(); }
  std::size_t part_count() const noexcept { return stage_of_.size(); }
  std::span<const PartIndex> step(std::size_t s) const { return steps_.at(s); }
  const std::vector<std::vector<PartIndex>>& steps() const noexcept { return steps_; }
  std::size_t stage_of(PartIndex k) const { return stage_of_.at(k); }

  std::vector<PartIndex> processed_before(std::size_t s) const { return collect(0, s); }
  std::vector<PartIndex> processed_through(std::size_t s) const { return collect(0, s + 1); }
  std::vector<PartIndex> pending_after(std::size_t s) const { return collect(s + 1, steps_.size()); }

  bool operator==(const Partition&) const = default;

 private:
  static constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

  std::vector<PartIndex> collect(std::size_t from, std::size_t to) const {
    std::vector<PartIndex> out;
    for (PartIndex k = 0; k < stage_of_.size(); ++k)
      if (stage_of_[k] >= from && stage_of_[k] < to) out.push_back(k);
    return out;
  }

  std::vector<std::vector<PartIndex>> steps_;
  std::vector<std::size_t> stage_of_;
};

/// True iff every part's within-slice parent is handled at a strictly
/// earlier step, and first-step parts are roots.
inline bool respects_structure(const Partition& partition, const DbnSpec& spec) {
  if (partition.part_count() != spec.part_count()) return false;
  for (PartIndex k = 0; k < spec.part_count(); ++k) {
    auto p = spec.parents()[k];
    const std::size_t s = partition.stage_of(k);
    if (s == 0 && p) return false;
    if (p && partition.stage_of(*p) >= s) return false;
  }
  return true;
}

/// Parallel partition: roots first, then every part whose parent has
/// already been placed. Parts within a step are in ascending order.
inline Partition compute_partition(const DbnSpec& spec) {
  validate_structure(spec);
  const std::size_t count = spec.part_count();
  std::vector<bool> placed(count, false);
  std::vector<std::vector<PartIndex>> steps;
  std::size_t remaining = count;
  while (remaining > 0) {
    std::vector<PartIndex> step;
    for (PartIndex k = 0; k < count; ++k) {
      if (placed[k]) continue;
      auto p = spec.parents()[k];
      if (!p || placed[*p]) step.push_back(k);
    }
    for (PartIndex k : step) placed[k] = true;
    remaining -= step.size();
    steps.push_back(std::move(step));
  }
  return Partition(std::move(steps), count);
}

/// Classic partitioned sampling: one part per step, in the order of the
/// parallel partition flattened (so every parent precedes its children).
inline Partition singleton_partition(const DbnSpec& spec) {
  std::vector<std::vector<PartIndex>> steps;
  const Partition parallel = compute_partition(spec);
  for (const auto& step : parallel.steps())
    for (PartIndex k : step) steps.push_back({k});
  return Partition(std::move(steps), spec.part_count());
}

/// Transitive closure of the child relation from `k`, excluding `k`,
/// ascending.
inline std::vector<PartIndex> descendants_within_slice(const DbnSpec& spec, PartIndex k) {
  spec.check_index(k);
  std::vector<PartIndex> out;
  std::vector<PartIndex> frontier{k};
  while (!frontier.empty()) {
    PartIndex cur = frontier.back();
    frontier.pop_back();
    for (PartIndex c = 0; c < spec.part_count(); ++c) {
      if (spec.parents()[c] == cur) {
        out.push_back(c);
        frontier.push_back(c);
        if (out.size() > spec.part_count())
          throw Error(Errc::cycle_detected, "descendant walk revisits a part");
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace crtrack

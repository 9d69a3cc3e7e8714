#pragma once

// Partitioned sampling over a partition P_1..P_K of the object's parts:
// for each step, propagate and correct every part of the step, then
// resample once.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crtrack/combinatorial.hpp"
#include "crtrack/dbn.hpp"
#include "crtrack/geometry.hpp"
#include "crtrack/likelihood.hpp"
#include "crtrack/particle.hpp"
#include "crtrack/resampling.hpp"
#include "crtrack/rng.hpp"

namespace crtrack {

enum class ResamplerKind { multinomial, stratified, systematic, residual, weighted, combinatorial };

inline std::string_view to_string(ResamplerKind kind) {
  switch (kind) {
    case ResamplerKind::multinomial: return "multinomial";
    case ResamplerKind::stratified: return "stratified";
    case ResamplerKind::systematic: return "systematic";
    case ResamplerKind::residual: return "residual";
    case ResamplerKind::weighted: return "weighted";
    case ResamplerKind::combinatorial: return "combinatorial";
  }
  return "unknown";
}

inline std::optional<ResamplerKind> parse_resampler(std::string_view name) {
  for (auto kind : {ResamplerKind::multinomial, ResamplerKind::stratified, ResamplerKind::systematic,
                    ResamplerKind::residual, ResamplerKind::weighted, ResamplerKind::combinatorial})
    if (name == to_string(kind)) return kind;
  if (name == "cr") return ResamplerKind::combinatorial;
  return std::nullopt;
}

enum class PartitionMode { singleton, parallel };

inline std::string_view to_string(PartitionMode mode) {
  return mode == PartitionMode::singleton ? "singleton" : "parallel";
}

inline std::optional<PartitionMode> parse_partition_mode(std::string_view name) {
  if (name == "singleton") return PartitionMode::singleton;
  if (name == "parallel") return PartitionMode::parallel;
  return std::nullopt;
}

/// Partitioned sampling proper uses one part per step; combinatorial
/// resampling needs the parallel steps to have anything to combine.
inline PartitionMode default_partition_mode(ResamplerKind kind) {
  return kind == ResamplerKind::combinatorial ? PartitionMode::parallel : PartitionMode::singleton;
}

struct TrackerConfig {
  std::size_t particle_count = 100;
  MotionParams proposal{1.0, 0.025};
  LikelihoodParams likelihood{};
  ResamplerKind resampler = ResamplerKind::combinatorial;
  double weighted_scale = 20.0;  // g(w) = exp(weighted_scale * w)
  std::uint64_t seed = 1;
  PartitionMode mode = PartitionMode::parallel;
};

inline Partition make_partition(const DbnSpec& dbn, PartitionMode mode) {
  return mode == PartitionMode::parallel ? compute_partition(dbn) : singleton_partition(dbn);
}

struct StepStats {
  std::size_t resample_calls = 0;
  double resample_seconds = 0.0;
  std::size_t underflow_events = 0;
};

struct TrackResult {
  std::vector<ObjectState> estimates;  // one per frame; frame 0 is the initial pose
  std::vector<double> errors;          // one per frame when ground truth was supplied
  std::size_t resample_calls = 0;
  double resample_seconds = 0.0;
  double total_seconds = 0.0;
  std::size_t underflow_events = 0;
  std::vector<std::string> warnings;

  /// Mean error over the tracked frames (every frame after the first); the
  /// first frame's error when that is the only one.
  double mean_error() const {
    if (errors.empty()) return 0.0;
    if (errors.size() == 1) return errors.front();
    double sum = 0.0;
    for (std::size_t f = 1; f < errors.size(); ++f) sum += errors[f];
    return sum / static_cast<double>(errors.size() - 1);
  }
};

/// Random-walk proposal for part `k`: independent Gaussian steps on x, y and
/// theta. Marks `k` as processed.
template <class URBG>
void propagate_part(ParticleSet& set, PartIndex k, const MotionParams& proposal, URBG& rng) {
  if (k >= set.part_count()) throw Error(Errc::bad_index, "part outside the particle state");
  if (set.processed[k]) throw Error(Errc::already_processed, "part " + std::to_string(k) + " already propagated");
  std::normal_distribution<double> unit(0.0, 1.0);
  for (auto& p : set.particles) {
    PartState& s = p.parts[k];
    if (proposal.sigma_xy > 0.0) {
      s.x += proposal.sigma_xy * unit(rng);
      s.y += proposal.sigma_xy * unit(rng);
    }
    if (proposal.sigma_theta > 0.0) s.theta = wrap_angle(s.theta + proposal.sigma_theta * unit(rng));
  }
  set.processed[k] = true;
}

/// Multiplies each particle's weight by exp(-lambda d^2) for part `k` and
/// renormalizes. Returns false when every weight underflowed, in which case
/// the weights are reset to uniform.
inline bool correct_part(ParticleSet& set, PartIndex k, const Image& frame, const References& refs,
                         const ArticulatedModel& model, const LikelihoodParams& params) {
  for (auto& p : set.particles) {
    const Histogram8 h = region_histogram(frame, place_polygon(model, k, p.parts[k]));
    const double factor = part_weight_factor(bhattacharyya(h, refs.per_part.at(k)), params);
    p.part_weights[k] = factor;
    p.weight *= factor;
  }
  if (set.normalize()) return true;
  const double w = set.size() ? 1.0 / static_cast<double>(set.size()) : 0.0;
  for (auto& p : set.particles) p.weight = w;
  return false;
}

/// Weighted estimate: weighted mean of x and y, weighted circular mean of
/// theta. Means are taken relative to the first particle, so a cloud of
/// identical particles returns that particle exactly.
inline ObjectState estimate(const ParticleSet& set) {
  if (set.particles.empty()) throw Error(Errc::degenerate_weights, "empty particle set");
  if (!set.fully_processed()) throw Error(Errc::not_fully_processed, "some parts still hold lagged values");
  const auto& ref = set.particles.front().parts;
  ObjectState out(ref.size());
  double total = 0.0;
  for (const auto& p : set.particles) total += p.weight;
  if (!(total > 0.0)) throw Error(Errc::degenerate_weights, "weights sum to zero");
  for (PartIndex k = 0; k < ref.size(); ++k) {
    double dx = 0.0, dy = 0.0, s = 0.0, c = 0.0;
    for (const auto& p : set.particles) {
      const double w = p.weight / total;
      dx += w * (p.parts[k].x - ref[k].x);
      dy += w * (p.parts[k].y - ref[k].y);
      const double dt = p.parts[k].theta - ref[k].theta;
      s += w * std::sin(dt);
      c += w * std::cos(dt);
    }
    out[k] = {ref[k].x + dx, ref[k].y + dy, wrap_angle(ref[k].theta + std::atan2(s, c))};
  }
  return out;
}

/// Owns the particle cloud and the per-run configuration.
class PartitionedTracker {
 public:
  PartitionedTracker(const ArticulatedModel& model, TrackerConfig cfg)
      : model_(&model), cfg_(cfg), partition_(make_partition(model.dbn(), cfg.mode)) {
    if (cfg_.particle_count == 0) throw Error(Errc::config_error, "particle count must be at least 1");
    if (cfg_.proposal.sigma_xy < 0.0 || cfg_.proposal.sigma_theta < 0.0)
      throw Error(Errc::config_error, "proposal sigmas must be nonnegative");
    for (std::size_t s = 0; s < partition_.step_count(); ++s)
      layouts_.push_back(make_stage_layout(model.dbn(), partition_, s));
  }

  /// Exact copies of `initial` and references from the first frame.
  void initialize(const Image& first, const ObjectState& initial) {
    refs_ = init_references(first, *model_, initial);
    set_ = ParticleSet(initial, cfg_.particle_count);
    frame_ = 0;
  }

  /// One frame of partitioned sampling.
  StepStats step(const Image& frame) {
    ++frame_;
    StepStats stats;
    set_.begin_frame();
    for (std::size_t s = 0; s < partition_.step_count(); ++s) {
      for (PartIndex k : partition_.step(s)) {
        Rng rng = make_stream(cfg_.seed, {frame_, 1, k});
        propagate_part(set_, k, cfg_.proposal, rng);
        if (!correct_part(set_, k, frame, refs_, *model_, cfg_.likelihood)) ++stats.underflow_events;
      }
      const auto t0 = std::chrono::steady_clock::now();
      resample_stage(s);
      stats.resample_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      ++stats.resample_calls;
    }
    return stats;
  }

  ObjectState current_estimate() const { return estimate(set_); }

  const ParticleSet& particles() const noexcept { return set_; }
  ParticleSet& particles() noexcept { return set_; }
  const Partition& partition() const noexcept { return partition_; }
  const References& references() const noexcept { return refs_; }
  const TrackerConfig& config() const noexcept { return cfg_; }

 private:
  void resample_stage(std::size_t s) {
    Rng rng = make_stream(cfg_.seed, {frame_, 2, s});
    switch (cfg_.resampler) {
      case ResamplerKind::multinomial: set_ = multinomial_resample(set_, rng); break;
      case ResamplerKind::stratified: set_ = stratified_resample(set_, rng); break;
      case ResamplerKind::systematic: set_ = systematic_resample(set_, rng); break;
      case ResamplerKind::residual: set_ = residual_resample(set_, rng); break;
      case ResamplerKind::weighted:
        set_ = weighted_resample(set_, exponential_weight_function(cfg_.weighted_scale), rng);
        break;
      case ResamplerKind::combinatorial: set_ = combinatorial_resample(set_, layouts_[s], rng); break;
    }
  }

  const ArticulatedModel* model_;
  TrackerConfig cfg_;
  Partition partition_;
  std::vector<StageLayout> layouts_;
  References refs_;
  ParticleSet set_;
  std::uint64_t frame_ = 0;
};

using FrameSource = std::function<Image(std::size_t)>;

/// Tracks `frame_count` frames from `frames`. Frame 0 is only used to build
/// the references; `truth`, when given, must hold one state per frame.
inline TrackResult track_sequence(const FrameSource& frames, std::size_t frame_count, const ObjectState& initial,
                                  const ArticulatedModel& model, const TrackerConfig& cfg,
                                  std::span<const ObjectState> truth = {}) {
  if (frame_count == 0) throw Error(Errc::config_error, "at least one frame is required");
  if (!truth.empty() && truth.size() < frame_count)
    throw Error(Errc::config_error, "ground truth is shorter than the sequence");
  const auto t0 = std::chrono::steady_clock::now();
  TrackResult result;
  PartitionedTracker tracker(model, cfg);
  tracker.initialize(frames(0), initial);
  result.warnings = tracker.references().warnings;
  result.estimates.push_back(initial);
  for (std::size_t f = 1; f < frame_count; ++f) {
    const StepStats stats = tracker.step(frames(f));
    result.resample_calls += stats.resample_calls;
    result.resample_seconds += stats.resample_seconds;
    if (stats.underflow_events > 0) {
      result.underflow_events += stats.underflow_events;
      result.warnings.push_back("frame " + std::to_string(f) + ": all weights underflowed " +
                                std::to_string(stats.underflow_events) + " time(s); reset to uniform");
    }
    result.estimates.push_back(tracker.current_estimate());
  }
  if (!truth.empty())
    for (std::size_t f = 0; f < frame_count; ++f)
      result.errors.push_back(estimation_error(model, result.estimates[f], truth[f]));
  result.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

inline TrackResult track_sequence(std::span<const Image> frames, const ObjectState& initial,
                                  const ArticulatedModel& model, const TrackerConfig& cfg,
                                  std::span<const ObjectState> truth = {}) {
  return track_sequence([&](std::size_t f) { return frames[f]; }, frames.size(), initial, model, cfg, truth);
}

}  // namespace crtrack

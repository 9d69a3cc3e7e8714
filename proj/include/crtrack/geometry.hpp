#pragma once

// Articulated object made of rectangular parts: pose, placement, synthetic
// ground-truth motion, rendering and the corner-distance error.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "crtrack/dbn.hpp"
#include "crtrack/error.hpp"
#include "crtrack/image.hpp"

namespace crtrack {

/// Wraps an angle to (-pi, pi]. Values already in range are returned as is.
inline double wrap_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  if (theta > -pi && theta <= pi) return theta;
  double r = std::remainder(theta, 2.0 * pi);
  if (r <= -pi) r += 2.0 * pi;
  return r;
}

struct PartState {
  double x = 0.0;      // center abscissa, px
  double y = 0.0;      // center ordinate, px
  double theta = 0.0;  // orientation, rad, in (-pi, pi]

  bool operator==(const PartState&) const = default;
};

/// One pose per part; size equals the model's part count.
using ObjectState = std::vector<PartState>;

struct PartShape {
  double length = 30.0;  // along the part axis
  double width = 12.0;
};

struct MotionParams {
  double sigma_xy = 1.0;
  double sigma_theta = 0.025;
};

using Quad = std::array<Point, 4>;

class ArticulatedModel {
 public:
  ArticulatedModel(DbnSpec dbn, std::vector<PartShape> shapes)
      : dbn_(std::move(dbn)), shapes_(std::move(shapes)), order_(compute_partition(dbn_)) {
    if (shapes_.size() != dbn_.part_count())
      throw Error(Errc::bad_index, "one shape per part is required");
    for (const auto& s : shapes_)
      if (!(s.length > 0.0) || !(s.width > 0.0))
        throw Error(Errc::config_error, "part lengths and widths must be positive");
  }

  const DbnSpec& dbn() const noexcept { return dbn_; }
  std::size_t part_count() const noexcept { return dbn_.part_count(); }
  const PartShape& shape(PartIndex k) const {
    dbn_.check_index(k);
    return shapes_[k];
  }
  std::span<const PartShape> shapes() const noexcept { return shapes_; }
  /// Parallel partition of the model's structure; parents precede children.
  const Partition& structure_order() const noexcept { return order_; }

 private:
  DbnSpec dbn_;
  std::vector<PartShape> shapes_;
  Partition order_;
};

/// Corners of part `k` at pose `s`. The order is fixed: local corners
/// (-L/2,-W/2), (L/2,-W/2), (L/2,W/2), (-L/2,W/2), i.e. counterclockwise in
/// a y-up frame starting at the base-left corner, rotated by theta about the
/// center and translated to (x, y). The base is the -L/2 end.
inline Quad place_polygon(const ArticulatedModel& model, PartIndex k, const PartState& s) {
  const PartShape& shape = model.shape(k);
  const double hl = 0.5 * shape.length, hw = 0.5 * shape.width;
  const double c = std::cos(s.theta), sn = std::sin(s.theta);
  const std::array<Point, 4> local{{{-hl, -hw}, {hl, -hw}, {hl, hw}, {-hl, hw}}};
  Quad out;
  for (std::size_t i = 0; i < 4; ++i)
    out[i] = {s.x + local[i].x * c - local[i].y * sn, s.y + local[i].x * sn + local[i].y * c};
  return out;
}

inline Point base_midpoint(const ArticulatedModel& model, PartIndex k, const PartState& s) {
  const double hl = 0.5 * model.shape(k).length;
  return {s.x - hl * std::cos(s.theta), s.y - hl * std::sin(s.theta)};
}

inline Point tip_midpoint(const ArticulatedModel& model, PartIndex k, const PartState& s) {
  const double hl = 0.5 * model.shape(k).length;
  return {s.x + hl * std::cos(s.theta), s.y + hl * std::sin(s.theta)};
}

/// Pose of child `k` at absolute orientation `theta` with its base midpoint
/// on its parent's tip midpoint.
inline PartState attach_to_parent(const ArticulatedModel& model, PartIndex k, double theta,
                                  const PartState& parent_state) {
  const PartIndex p = *model.dbn().parent(k);
  const Point tip = tip_midpoint(model, p, parent_state);
  const double hl = 0.5 * model.shape(k).length;
  theta = wrap_angle(theta);
  return {tip.x + hl * std::cos(theta), tip.y + hl * std::sin(theta), theta};
}

/// One step of the synthetic generator: roots take a Gaussian random walk,
/// every child's joint angle (relative to its parent) is perturbed, and the
/// child is re-attached to its parent's tip. With all-zero params the input
/// is returned unchanged.
template <class URBG>
ObjectState ground_truth_step(const ArticulatedModel& model, const ObjectState& state,
                              const MotionParams& params, URBG& rng) {
  if (state.size() != model.part_count())
    throw Error(Errc::bad_index, "state size does not match the model");
  if (params.sigma_xy == 0.0 && params.sigma_theta == 0.0) return state;
  std::normal_distribution<double> unit(0.0, 1.0);
  ObjectState next = state;
  for (const auto& step : model.structure_order().steps()) {
    for (PartIndex k : step) {
      const auto p = model.dbn().parent(k);
      const double dtheta = params.sigma_theta * unit(rng);
      if (!p) {
        next[k].x = state[k].x + params.sigma_xy * unit(rng);
        next[k].y = state[k].y + params.sigma_xy * unit(rng);
        next[k].theta = wrap_angle(state[k].theta + dtheta);
      } else {
        const double relative = wrap_angle(state[k].theta - state[*p].theta) + dtheta;
        next[k] = attach_to_parent(model, k, next[*p].theta + relative, next[*p]);
      }
    }
  }
  return next;
}

/// Moves every part by the same offset.
inline void translate(ObjectState& state, double dx, double dy) {
  for (auto& s : state) {
    s.x += dx;
    s.y += dy;
  }
}

/// Gray level of part `k`: the nonzero 32-wide histogram bins are cycled
/// through so consecutive parts land in different bins, with a small
/// per-cycle offset keeping levels distinct for up to 168 parts.
inline std::uint8_t part_intensity(PartIndex k) {
  const auto bin = 1 + static_cast<int>(k % 7);
  const auto offset = 4 + static_cast<int>((k / 7) % 24);
  return static_cast<std::uint8_t>(32 * bin + offset);
}

/// Renders the object on a black canvas, higher part indices on top.
inline Image render_frame(const ArticulatedModel& model, const ObjectState& state, int width,
                          int height) {
  if (width <= 0 || height <= 0) throw Error(Errc::config_error, "canvas must be positive");
  Image image(width, height, 0);
  for (PartIndex k = 0; k < model.part_count(); ++k) {
    const Quad q = place_polygon(model, k, state.at(k));
    fill_polygon(image, q, part_intensity(k));
  }
  return image;
}

/// Sum over parts and corners of the distance between matching corners.
inline double estimation_error(const ArticulatedModel& model, const ObjectState& estimate,
                               const ObjectState& truth) {
  if (estimate.size() != model.part_count() || truth.size() != model.part_count())
    throw Error(Errc::bad_index, "state size does not match the model");
  double total = 0.0;
  for (PartIndex k = 0; k < model.part_count(); ++k) {
    const Quad a = place_polygon(model, k, estimate[k]);
    const Quad b = place_polygon(model, k, truth[k]);
    for (std::size_t c = 0; c < 4; ++c) total += std::hypot(a[c].x - b[c].x, a[c].y - b[c].y);
  }
  return total;
}

/// Star-shaped object: part 0 is the central body, followed by `arm_count`
/// arms of `arm_length` parts each, numbered arm by arm from the body
/// outwards. Total parts: 1 + arm_count * arm_length.
inline ArticulatedModel make_star_model(std::size_t arm_count, std::size_t arm_length,
                                        PartShape shape) {
  if (arm_length == 0) throw Error(Errc::config_error, "arm length must be at least 1");
  std::vector<std::optional<PartIndex>> parent{std::nullopt};
  for (std::size_t a = 0; a < arm_count; ++a) {
    for (std::size_t l = 0; l < arm_length; ++l) {
      const PartIndex self = parent.size();
      parent.push_back(l == 0 ? PartIndex{0} : self - 1);
    }
  }
  std::vector<PartShape> shapes(parent.size(), shape);
  return ArticulatedModel(DbnSpec(std::move(parent)), std::move(shapes));
}

/// Initial pose for a star model: body horizontal at `center`, arms fanned
/// over [-3pi/4, 3pi/4] relative to the body, each arm straight.
inline ObjectState star_initial_pose(const ArticulatedModel& model, std::size_t arm_count,
                                     std::size_t arm_length, Point center) {
  ObjectState state(model.part_count());
  state[0] = {center.x, center.y, 0.0};
  for (std::size_t a = 0; a < arm_count; ++a) {
    const double fan = 0.75 * std::numbers::pi;
    const double angle =
        arm_count == 1 ? 0.0 : -fan + 2.0 * fan * static_cast<double>(a) / static_cast<double>(arm_count - 1);
    for (std::size_t l = 0; l < arm_length; ++l) {
      const PartIndex k = 1 + a * arm_length + l;
      const PartIndex p = *model.dbn().parent(k);
      state[k] = attach_to_parent(model, k, angle, state[p]);
    }
  }
  return state;
}

}  // namespace crtrack

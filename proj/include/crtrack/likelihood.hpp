#pragma once

// Per-part observation model: 8-bin gray histograms compared with the
// Bhattacharyya distance d, giving a likelihood factor exp(-lambda d^2).

#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "crtrack/error.hpp"
#include "crtrack/geometry.hpp"
#include "crtrack/image.hpp"

namespace crtrack {

struct Histogram8 {
  std::array<double, 8> bins{};
  bool empty = false;  // no pixel fell in the region; bins are uniform

  static Histogram8 uniform() {
    Histogram8 h;
    h.bins.fill(0.125);
    h.empty = true;
    return h;
  }
};

struct LikelihoodParams {
  double lambda = 50.0;
};

inline std::size_t intensity_bin(std::uint8_t v) { return static_cast<std::size_t>(v) >> 5; }

/// Normalized histogram of the pixels whose centers fall inside `corners`.
inline Histogram8 region_histogram(const Image& image, const Quad& corners) {
  std::array<std::size_t, 8> counts{};
  std::size_t total = 0;
  scan_polygon(corners, image.width, image.height, [&](int iy, int ib, int ie) {
    const std::uint8_t* row = image.pixels.data() + static_cast<std::ptrdiff_t>(iy) * image.width;
    for (int ix = ib; ix < ie; ++ix) ++counts[intensity_bin(row[ix])];
    total += static_cast<std::size_t>(ie - ib);
  });
  if (total == 0) return Histogram8::uniform();
  Histogram8 h;
  for (std::size_t b = 0; b < 8; ++b) h.bins[b] = static_cast<double>(counts[b]) / static_cast<double>(total);
  return h;
}

inline double bhattacharyya(const Histogram8& p, const Histogram8& q) {
  double affinity = 0.0;
  for (std::size_t b = 0; b < 8; ++b) affinity += std::sqrt(p.bins[b] * q.bins[b]);
  return std::sqrt(std::max(0.0, 1.0 - affinity));
}

inline double part_weight_factor(double d, const LikelihoodParams& params) {
  return std::exp(-params.lambda * d * d);
}

struct References {
  std::vector<Histogram8> per_part;
  std::vector<std::string> warnings;
};

/// Reference histograms taken at the initial pose on the first frame.
/// Parts with no visible pixel get a uniform reference and a warning.
inline References init_references(const Image& image, const ArticulatedModel& model,
                                  const ObjectState& initial) {
  if (initial.size() != model.part_count())
    throw Error(Errc::bad_index, "initial state size does not match the model");
  References refs;
  refs.per_part.reserve(model.part_count());
  for (PartIndex k = 0; k < model.part_count(); ++k) {
    refs.per_part.push_back(region_histogram(image, place_polygon(model, k, initial[k])));
    if (refs.per_part.back().empty)
      refs.warnings.push_back("part " + std::to_string(k) +
                              " covers no pixel in the first frame; using a uniform reference");
  }
  return refs;
}

}  // namespace crtrack

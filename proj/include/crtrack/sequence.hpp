#pragma once

// Synthetic sequences of a star-shaped articulated object and their on-disk
// form: frame_0001.pgm ... frame_NNNN.pgm, truth.csv and object.json.
//
// truth.csv has no header; row f is "f,x_1,y_1,theta_1,...,x_P,y_P,theta_P"
// with the 1-based frame index and 6-decimal fixed-point values.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "crtrack/error.hpp"
#include "crtrack/geometry.hpp"
#include "crtrack/image.hpp"
#include "crtrack/rng.hpp"

namespace crtrack {

struct SequenceSpec {
  std::string name = "object";
  std::size_t arm_count = 4;
  std::size_t arm_length = 3;
  std::size_t frame_count = 60;
  int width = 160;
  int height = 128;
  MotionParams motion{1.0, 0.025};
  PartShape shape{12.0, 5.0};
  std::uint64_t seed = 1;

  std::size_t part_count() const { return 1 + arm_count * arm_length; }
};

struct Sequence {
  ArticulatedModel model;
  std::vector<ObjectState> truth;
  int width = 0;
  int height = 0;
  std::vector<Image> frames;  // empty for generated sequences, rendered on demand

  std::size_t frame_count() const { return frames.empty() ? truth.size() : frames.size(); }
  /// Ground truth covers every frame (not just the initial pose).
  bool has_full_truth() const { return truth.size() >= frame_count(); }

  Image frame(std::size_t f) const {
    if (!frames.empty()) return frames.at(f);
    return render_frame(model, truth.at(f), width, height);
  }
};

inline void validate(const SequenceSpec& spec) {
  if (spec.arm_length < 1) throw Error(Errc::config_error, "arm_length must be at least 1");
  if (spec.frame_count < 1) throw Error(Errc::config_error, "frame_count must be at least 1");
  if (spec.width <= 0 || spec.height <= 0) throw Error(Errc::config_error, "canvas must be positive");
  if (spec.motion.sigma_xy < 0.0 || spec.motion.sigma_theta < 0.0)
    throw Error(Errc::config_error, "motion sigmas must be nonnegative");
}

/// Ground-truth trajectory; the root is kept on the canvas by translating
/// the whole object back whenever its center leaves it.
inline Sequence generate_sequence(const SequenceSpec& spec) {
  validate(spec);
  ArticulatedModel model = make_star_model(spec.arm_count, spec.arm_length, spec.shape);
  ObjectState state = star_initial_pose(model, spec.arm_count, spec.arm_length,
                                        {0.5 * spec.width, 0.5 * spec.height});
  Rng rng = make_stream(spec.seed, {0x5e9});
  std::vector<ObjectState> truth{state};
  truth.reserve(spec.frame_count);
  for (std::size_t f = 1; f < spec.frame_count; ++f) {
    state = ground_truth_step(model, state, spec.motion, rng);
    const double cx = std::clamp(state[0].x, 0.0, static_cast<double>(spec.width));
    const double cy = std::clamp(state[0].y, 0.0, static_cast<double>(spec.height));
    if (cx != state[0].x || cy != state[0].y) translate(state, cx - state[0].x, cy - state[0].y);
    truth.push_back(state);
  }
  return Sequence{std::move(model), std::move(truth), spec.width, spec.height, {}};
}

inline std::string frame_file_name(std::size_t f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04zu.pgm", f + 1);
  return buf;
}

inline void write_truth_csv(const std::filesystem::path& path, const std::vector<ObjectState>& truth) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
  char buf[64];
  for (std::size_t f = 0; f < truth.size(); ++f) {
    out << (f + 1);
    for (const auto& s : truth[f]) {
      for (double v : {s.x, s.y, s.theta}) {
        std::snprintf(buf, sizeof buf, ",%.6f", v);
        out << buf;
      }
    }
    out << '\n';
  }
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

inline std::vector<ObjectState> read_truth_csv(const std::filesystem::path& path, std::size_t part_count) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::vector<ObjectState> truth;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(Errc::io_error, path.string() + ": bad number '" + cell + "'");
      }
    }
    if (values.size() != 1 + 3 * part_count)
      throw Error(Errc::io_error, path.string() + ": expected " + std::to_string(1 + 3 * part_count) +
                                      " columns, got " + std::to_string(values.size()));
    ObjectState s(part_count);
    for (std::size_t k = 0; k < part_count; ++k)
      s[k] = {values[1 + 3 * k], values[2 + 3 * k], wrap_angle(values[3 + 3 * k])};
    truth.push_back(std::move(s));
  }
  return truth;
}

/// Model description stored next to the frames.
inline nlohmann::json model_to_json(const ArticulatedModel& model) {
  nlohmann::json parents = nlohmann::json::array();
  nlohmann::json lengths = nlohmann::json::array();
  nlohmann::json widths = nlohmann::json::array();
  for (PartIndex k = 0; k < model.part_count(); ++k) {
    auto p = model.dbn().parent(k);
    parents.push_back(p ? nlohmann::json(*p) : nlohmann::json(nullptr));
    lengths.push_back(model.shape(k).length);
    widths.push_back(model.shape(k).width);
  }
  return {{"parents", parents}, {"part_length", lengths}, {"part_width", widths}};
}

/// Accepts either {"parents": [...], "part_length": x|[...], "part_width": x|[...]}
/// with zero-based parent indices (null for roots), or the star form
/// {"arms": A, "arm_length": L, "part_length": x, "part_width": y}.
inline ArticulatedModel model_from_json(const nlohmann::json& j) {
  try {
    auto shape_at = [&](const char* key, std::size_t k, double fallback) {
      if (!j.contains(key)) return fallback;
      const auto& v = j.at(key);
      return v.is_array() ? v.at(k).get<double>() : v.get<double>();
    };
    if (j.contains("parents")) {
      std::vector<std::optional<PartIndex>> parents;
      for (const auto& p : j.at("parents")) {
        if (p.is_null()) parents.emplace_back();
        else parents.emplace_back(p.get<PartIndex>());
      }
      std::vector<PartShape> shapes;
      for (std::size_t k = 0; k < parents.size(); ++k)
        shapes.push_back({shape_at("part_length", k, 12.0), shape_at("part_width", k, 5.0)});
      return ArticulatedModel(DbnSpec(std::move(parents)), std::move(shapes));
    }
    return make_star_model(j.at("arms").get<std::size_t>(), j.at("arm_length").get<std::size_t>(),
                           {shape_at("part_length", 0, 12.0), shape_at("part_width", 0, 5.0)});
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config_error, std::string("model description: ") + e.what());
  }
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config_error, path.string() + ": " + e.what());
  }
}

/// Writes frames, truth.csv and object.json into `dir` (created if needed).
inline void write_sequence(const Sequence& seq, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + dir.string() + ": " + ec.message());
  for (std::size_t f = 0; f < seq.frame_count(); ++f) write_pgm(dir / frame_file_name(f), seq.frame(f));
  write_truth_csv(dir / "truth.csv", seq.truth);
  std::ofstream out(dir / "object.json");
  out << model_to_json(seq.model).dump(2) << '\n';
  if (!out) throw Error(Errc::io_error, "cannot write object.json in " + dir.string());
}

/// Frame files (.pgm / .ppm) of a directory, sorted by name.
inline std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir) {
  std::error_code ec;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".pgm" || ext == ".ppm")) files.push_back(entry.path());
  }
  if (ec) throw Error(Errc::io_error, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  return files;
}

/// Loads a frame directory. The model comes from `model_json` when given,
/// otherwise from dir/object.json; the truth from `truth_csv` when given,
/// otherwise from dir/truth.csv.
inline Sequence load_sequence(const std::filesystem::path& dir, std::filesystem::path model_json = {},
                              std::filesystem::path truth_csv = {}) {
  if (model_json.empty()) model_json = dir / "object.json";
  if (truth_csv.empty()) truth_csv = dir / "truth.csv";
  ArticulatedModel model = model_from_json(read_json_file(model_json));
  std::vector<Image> frames;
  for (const auto& p : list_frames(dir)) frames.push_back(read_pnm(p));
  if (frames.empty()) throw Error(Errc::io_error, "no .pgm/.ppm frames in " + dir.string());
  auto truth = read_truth_csv(truth_csv, model.part_count());
  if (truth.empty()) throw Error(Errc::io_error, truth_csv.string() + " has no rows");
  const int w = frames.front().width, h = frames.front().height;
  return Sequence{std::move(model), std::move(truth), w, h, std::move(frames)};
}

}  // namespace crtrack

#pragma once

// Benchmark matrix: objects x resamplers x particle counts x runs, each cell
// one seeded tracking run. Results go to a CSV with one row per cell.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "crtrack/error.hpp"
#include "crtrack/rng.hpp"
#include "crtrack/sequence.hpp"
#include "crtrack/tracker.hpp"

namespace crtrack {

struct ObjectEntry {
  SequenceSpec spec;
  std::filesystem::path sequence_dir;  // load frames from here instead of generating
};

struct ResamplerEntry {
  std::string label;
  ResamplerKind kind = ResamplerKind::multinomial;
  PartitionMode mode = PartitionMode::singleton;
  double weighted_scale = 20.0;
};

struct BenchmarkConfig {
  std::uint64_t master_seed = 1;
  std::size_t runs = 10;
  std::vector<std::size_t> particle_counts{50, 100};
  MotionParams proposal{1.0, 0.025};
  LikelihoodParams likelihood{};
  std::vector<ObjectEntry> objects;
  std::vector<ResamplerEntry> resamplers;
  std::size_t workers = 1;
};

struct BenchmarkRow {
  std::string object;
  std::string resampler;
  std::string partition;
  std::size_t particles = 0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::size_t frames = 0;
  double mean_error = 0.0;  // px, averaged over tracked frames
  std::size_t resample_calls = 0;
  double resample_seconds = 0.0;
  double total_seconds = 0.0;

  bool operator==(const BenchmarkRow&) const = default;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
};

/// Desk-scale defaults; `paper_scale` switches to 800x640 canvases, 300
/// frames, 30 runs and 30x12 parts.
struct ScaleDefaults {
  int width = 160;
  int height = 128;
  std::size_t frames = 60;
  std::size_t runs = 10;
  PartShape shape{12.0, 5.0};

  static ScaleDefaults desk() { return {}; }
  static ScaleDefaults paper() { return {800, 640, 300, 30, {30.0, 12.0}}; }
};

namespace detail {

template <class T>
T json_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline MotionParams motion_from_json(const nlohmann::json& j, MotionParams fallback) {
  return {json_or(j, "sigma_xy", fallback.sigma_xy), json_or(j, "sigma_theta", fallback.sigma_theta)};
}

}  // namespace detail

/// Parses a benchmark description. See configs/desk.json for the format.
inline BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j, const ScaleDefaults& scale,
                                                  const std::filesystem::path& base_dir = {}) {
  using detail::json_or;
  BenchmarkConfig cfg;
  try {
    const bool paper = json_or(j, "paper_scale", false);
    const ScaleDefaults sd = paper ? ScaleDefaults::paper() : scale;
    cfg.master_seed = json_or<std::uint64_t>(j, "master_seed", 1);
    cfg.runs = json_or<std::size_t>(j, "runs", sd.runs);
    if (j.contains("particles")) cfg.particle_counts = j.at("particles").get<std::vector<std::size_t>>();
    if (j.contains("proposal")) cfg.proposal = detail::motion_from_json(j.at("proposal"), cfg.proposal);
    cfg.likelihood.lambda = json_or(j, "lambda", cfg.likelihood.lambda);
    cfg.workers = json_or<std::size_t>(j, "workers", 1);

    const int width = j.contains("canvas") ? j.at("canvas").at(0).get<int>() : sd.width;
    const int height = j.contains("canvas") ? j.at("canvas").at(1).get<int>() : sd.height;
    const std::size_t frames = json_or<std::size_t>(j, "frames", sd.frames);

    std::size_t index = 0;
    for (const auto& o : j.at("objects")) {
      ObjectEntry entry;
      SequenceSpec& s = entry.spec;
      s.name = json_or<std::string>(o, "name", "object" + std::to_string(index));
      s.arm_count = json_or<std::size_t>(o, "arms", 4);
      s.arm_length = json_or<std::size_t>(o, "arm_length", 3);
      s.frame_count = json_or<std::size_t>(o, "frames", frames);
      s.width = width;
      s.height = height;
      if (o.contains("canvas")) {
        s.width = o.at("canvas").at(0).get<int>();
        s.height = o.at("canvas").at(1).get<int>();
      }
      s.shape = {json_or(o, "part_length", sd.shape.length), json_or(o, "part_width", sd.shape.width)};
      if (o.contains("motion")) s.motion = detail::motion_from_json(o.at("motion"), s.motion);
      if (o.contains("sequence_dir")) {
        std::filesystem::path dir = o.at("sequence_dir").get<std::string>();
        entry.sequence_dir = dir.is_relative() && !base_dir.empty() ? base_dir / dir : dir;
      }
      if (s.name.find(',') != std::string::npos) throw Error(Errc::config_error, "object names may not contain ','");
      validate(s);
      cfg.objects.push_back(std::move(entry));
      ++index;
    }

    for (const auto& r : j.at("resamplers")) {
      ResamplerEntry entry;
      const std::string name = r.is_string() ? r.get<std::string>() : r.at("name").get<std::string>();
      const auto kind = parse_resampler(name);
      if (!kind) throw Error(Errc::config_error, "unknown resampler '" + name + "'");
      entry.kind = *kind;
      entry.label = std::string(to_string(*kind));
      entry.mode = default_partition_mode(*kind);
      if (r.is_object()) {
        entry.label = json_or(r, "label", entry.label);
        entry.weighted_scale = json_or(r, "g_scale", entry.weighted_scale);
        if (r.contains("partition")) {
          const auto mode = parse_partition_mode(r.at("partition").get<std::string>());
          if (!mode) throw Error(Errc::config_error, "unknown partition mode for '" + name + "'");
          entry.mode = *mode;
        }
      }
      if (entry.label.find(',') != std::string::npos)
        throw Error(Errc::config_error, "resampler labels may not contain ','");
      cfg.resamplers.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config_error, e.what());
  }
  if (cfg.objects.empty() || cfg.resamplers.empty() || cfg.particle_counts.empty() || cfg.runs == 0)
    throw Error(Errc::config_error, "objects, resamplers, particles and runs must be nonempty");
  for (auto n : cfg.particle_counts)
    if (n == 0) throw Error(Errc::config_error, "particle counts must be positive");
  return cfg;
}

/// Worker count: CRTRACK_WORKERS overrides the configured value.
inline std::size_t effective_workers(std::size_t configured) {
  if (const char* env = std::getenv("CRTRACK_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return configured == 0 ? 1 : configured;
}

inline std::uint64_t sequence_seed(std::uint64_t master, std::size_t object, std::size_t run) {
  return derive_seed(master, {0x53, object, run});
}

inline std::uint64_t tracker_seed(std::uint64_t master, std::size_t object, std::size_t run,
                                  std::size_t resampler, std::size_t particles) {
  return derive_seed(master, {0x54, object, run, resampler, particles});
}

/// Runs every cell. Generated objects get one sequence per (object, run),
/// shared by all resamplers and particle counts of that run. Rows are in
/// object, resampler, particle count, run order regardless of `workers`.
inline BenchmarkReport run_benchmark(const BenchmarkConfig& cfg, std::size_t workers = 1) {
  const std::size_t n_obj = cfg.objects.size(), n_res = cfg.resamplers.size(),
                    n_part = cfg.particle_counts.size(), runs = cfg.runs;

  // Sequences are built up front so worker threads only read them.
  std::vector<std::vector<Sequence>> sequences(n_obj);
  for (std::size_t o = 0; o < n_obj; ++o) {
    const auto& entry = cfg.objects[o];
    if (!entry.sequence_dir.empty()) {
      sequences[o].push_back(load_sequence(entry.sequence_dir));
      if (!sequences[o].back().has_full_truth())
        throw Error(Errc::config_error, "benchmark sequences need ground truth for every frame");
      continue;
    }
    for (std::size_t r = 0; r < runs; ++r) {
      SequenceSpec spec = entry.spec;
      spec.seed = sequence_seed(cfg.master_seed, o, r);
      sequences[o].push_back(generate_sequence(spec));
    }
  }

  BenchmarkReport report;
  report.rows.resize(n_obj * n_res * n_part * runs);
  std::atomic<std::size_t> next{0};
  std::vector<std::string> failures(report.rows.size());

  auto work = [&] {
    for (std::size_t cell = next++; cell < report.rows.size(); cell = next++) {
      std::size_t rest = cell;
      const std::size_t run = rest % runs;
      rest /= runs;
      const std::size_t pi = rest % n_part;
      rest /= n_part;
      const std::size_t ri = rest % n_res;
      const std::size_t oi = rest / n_res;

      const auto& res = cfg.resamplers[ri];
      const Sequence& seq = sequences[oi].size() == 1 ? sequences[oi][0] : sequences[oi][run];
      TrackerConfig tc;
      tc.particle_count = cfg.particle_counts[pi];
      tc.proposal = cfg.proposal;
      tc.likelihood = cfg.likelihood;
      tc.resampler = res.kind;
      tc.weighted_scale = res.weighted_scale;
      tc.mode = res.mode;
      tc.seed = tracker_seed(cfg.master_seed, oi, run, ri, tc.particle_count);
      try {
        const TrackResult tr = track_sequence([&](std::size_t f) { return seq.frame(f); }, seq.frame_count(),
                                              seq.truth.front(), seq.model, tc, seq.truth);
        BenchmarkRow& row = report.rows[cell];
        row.object = cfg.objects[oi].spec.name;
        row.resampler = res.label;
        row.partition = std::string(to_string(res.mode));
        row.particles = tc.particle_count;
        row.run = run;
        row.seed = tc.seed;
        row.frames = seq.frame_count();
        row.mean_error = tr.mean_error();
        row.resample_calls = tr.resample_calls;
        row.resample_seconds = tr.resample_seconds;
        row.total_seconds = tr.total_seconds;
      } catch (const std::exception& e) {
        failures[cell] = e.what();
      }
    }
  };

  workers = std::max<std::size_t>(1, std::min(workers, report.rows.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures)
    if (!f.empty()) throw Error(Errc::config_error, "benchmark cell failed: " + f);
  return report;
}

inline constexpr const char* kResultsHeader =
    "object,resampler,partition,particles,run,seed,frames,mean_error_px,resample_calls,resample_seconds,"
    "total_seconds";

namespace detail {

inline std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_results_csv(std::ostream& out, const BenchmarkReport& report) {
  out << kResultsHeader << '\n';
  for (const auto& r : report.rows) {
    out << r.object << ',' << r.resampler << ',' << r.partition << ',' << r.particles << ',' << r.run << ','
        << r.seed << ',' << r.frames << ',' << detail::format_exact(r.mean_error) << ',' << r.resample_calls << ','
        << detail::format_exact(r.resample_seconds) << ',' << detail::format_exact(r.total_seconds) << '\n';
  }
}

inline void write_results_csv(const std::filesystem::path& path, const BenchmarkReport& report) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
  write_results_csv(out, report);
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

inline BenchmarkReport read_results_csv(std::istream& in, const std::string& origin = "results") {
  BenchmarkReport report;
  std::string line;
  if (!std::getline(in, line) || line.substr(0, line.find_last_not_of("\r") + 1) != kResultsHeader)
    throw Error(Errc::io_error, origin + ": missing or unexpected header");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 11) throw Error(Errc::io_error, origin + ":" + std::to_string(line_no) + ": expected 11 columns");
    try {
      BenchmarkRow r;
      r.object = cells[0];
      r.resampler = cells[1];
      r.partition = cells[2];
      r.particles = std::stoull(cells[3]);
      r.run = std::stoull(cells[4]);
      r.seed = std::stoull(cells[5]);
      r.frames = std::stoull(cells[6]);
      r.mean_error = std::stod(cells[7]);
      r.resample_calls = std::stoull(cells[8]);
      r.resample_seconds = std::stod(cells[9]);
      r.total_seconds = std::stod(cells[10]);
      report.rows.push_back(std::move(r));
    } catch (const std::exception&) {
      throw Error(Errc::io_error, origin + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  return report;
}

inline BenchmarkReport read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return read_results_csv(in, path.string());
}

struct CellSummary {
  std::string object;
  std::string resampler;
  std::size_t particles = 0;
  std::size_t runs = 0;
  double mean_error = 0.0;
  double std_error = 0.0;  // sample standard deviation across runs
  double mean_resample_seconds = 0.0;
  double mean_total_seconds = 0.0;
  double resample_calls_per_run = 0.0;
};

/// Mean and spread over runs per (object, resampler, particle count), in
/// first-appearance order.
inline std::vector<CellSummary> summarize(const BenchmarkReport& report) {
  std::vector<CellSummary> out;
  std::map<std::tuple<std::string, std::string, std::size_t>, std::size_t> index;
  std::vector<std::vector<const BenchmarkRow*>> members;
  for (const auto& r : report.rows) {
    auto [it, inserted] = index.emplace(std::make_tuple(r.object, r.resampler, r.particles), out.size());
    if (inserted) {
      out.push_back({r.object, r.resampler, r.particles});
      members.emplace_back();
    }
    members[it->second].push_back(&r);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& s = out[i];
    const auto& rows = members[i];
    s.runs = rows.size();
    for (const auto* r : rows) {
      s.mean_error += r->mean_error;
      s.mean_resample_seconds += r->resample_seconds;
      s.mean_total_seconds += r->total_seconds;
      s.resample_calls_per_run += static_cast<double>(r->resample_calls);
    }
    const double n = static_cast<double>(rows.size());
    s.mean_error /= n;
    s.mean_resample_seconds /= n;
    s.mean_total_seconds /= n;
    s.resample_calls_per_run /= n;
    if (rows.size() > 1) {
      double ss = 0.0;
      for (const auto* r : rows) ss += (r->mean_error - s.mean_error) * (r->mean_error - s.mean_error);
      s.std_error = std::sqrt(ss / (n - 1.0));
    }
  }
  return out;
}

}  // namespace crtrack

// crtrack: generate synthetic sequences, track them, run benchmark matrices
// and plot the results.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "crtrack/crtrack.hpp"

namespace fs = std::filesystem;
using namespace crtrack;

namespace {

struct GenerateArgs {
  fs::path out;
  fs::path config;
  std::optional<std::size_t> arms, arm_length, frames;
  std::optional<int> width, height;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma_xy, sigma_theta, part_length, part_width;
};

struct TrackArgs {
  fs::path frames;
  fs::path truth;
  fs::path model;
  fs::path config;
  fs::path out;
  std::string resampler = "combinatorial";
  std::string partition;
  std::optional<std::size_t> particles;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma_xy, sigma_theta, lambda, g_scale;
};

struct BenchArgs {
  fs::path config;
  fs::path out = "results.csv";
  fs::path summary;
  bool paper_scale = false;
  std::optional<std::size_t> workers;
};

struct PlotArgs {
  fs::path in;
  fs::path out = "fig.svg";
  std::string object;
  std::string title;
};

template <class T>
void override_from(std::optional<T>& slot, const nlohmann::json& j, const char* key) {
  if (!slot && j.contains(key)) slot = j.at(key).get<T>();
}

int run_generate(GenerateArgs a) {
  SequenceSpec spec;
  if (!a.config.empty()) {
    const auto j = read_json_file(a.config);
    try {
      override_from(a.arms, j, "arms");
      override_from(a.arm_length, j, "arm_length");
      override_from(a.frames, j, "frames");
      override_from(a.width, j, "width");
      override_from(a.height, j, "height");
      override_from(a.seed, j, "seed");
      override_from(a.sigma_xy, j, "sigma_xy");
      override_from(a.sigma_theta, j, "sigma_theta");
      override_from(a.part_length, j, "part_length");
      override_from(a.part_width, j, "part_width");
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::config_error, e.what());
    }
  }
  spec.arm_count = a.arms.value_or(spec.arm_count);
  spec.arm_length = a.arm_length.value_or(spec.arm_length);
  spec.frame_count = a.frames.value_or(spec.frame_count);
  spec.width = a.width.value_or(spec.width);
  spec.height = a.height.value_or(spec.height);
  spec.seed = a.seed.value_or(spec.seed);
  spec.motion = {a.sigma_xy.value_or(spec.motion.sigma_xy), a.sigma_theta.value_or(spec.motion.sigma_theta)};
  spec.shape = {a.part_length.value_or(spec.shape.length), a.part_width.value_or(spec.shape.width)};
  const Sequence seq = generate_sequence(spec);
  write_sequence(seq, a.out);
  std::printf("wrote %zu frames (%zu parts, %dx%d) to %s\n", seq.frame_count(), seq.model.part_count(), spec.width,
              spec.height, a.out.string().c_str());
  return 0;
}

int run_track(TrackArgs a) {
  TrackerConfig cfg;
  if (!a.config.empty()) {
    const auto j = read_json_file(a.config);
    try {
      override_from(a.particles, j, "particles");
      override_from(a.seed, j, "seed");
      override_from(a.lambda, j, "lambda");
      override_from(a.g_scale, j, "g_scale");
      if (j.contains("proposal")) {
        override_from(a.sigma_xy, j.at("proposal"), "sigma_xy");
        override_from(a.sigma_theta, j.at("proposal"), "sigma_theta");
      }
      if (a.partition.empty() && j.contains("partition")) a.partition = j.at("partition").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::config_error, e.what());
    }
  }
  const auto kind = parse_resampler(a.resampler);
  if (!kind) throw Error(Errc::config_error, "unknown resampler '" + a.resampler + "'");
  cfg.resampler = *kind;
  cfg.mode = default_partition_mode(*kind);
  if (!a.partition.empty()) {
    const auto mode = parse_partition_mode(a.partition);
    if (!mode) throw Error(Errc::config_error, "unknown partition mode '" + a.partition + "'");
    cfg.mode = *mode;
  }
  cfg.particle_count = a.particles.value_or(cfg.particle_count);
  cfg.seed = a.seed.value_or(cfg.seed);
  cfg.likelihood.lambda = a.lambda.value_or(cfg.likelihood.lambda);
  cfg.weighted_scale = a.g_scale.value_or(cfg.weighted_scale);
  cfg.proposal = {a.sigma_xy.value_or(cfg.proposal.sigma_xy), a.sigma_theta.value_or(cfg.proposal.sigma_theta)};

  const Sequence seq = load_sequence(a.frames, a.model, a.truth);
  const auto truth = seq.has_full_truth() ? std::span<const ObjectState>(seq.truth) : std::span<const ObjectState>();
  const TrackResult r = track_sequence(seq.frames, seq.truth.front(), seq.model, cfg, truth);
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  if (!a.out.empty()) write_truth_csv(a.out, r.estimates);
  std::printf("resampler=%s partition=%s particles=%zu seed=%llu frames=%zu\n", std::string(to_string(cfg.resampler)).c_str(),
              std::string(to_string(cfg.mode)).c_str(), cfg.particle_count,
              static_cast<unsigned long long>(cfg.seed), seq.frame_count());
  if (!r.errors.empty()) std::printf("mean_error_px=%.6f\n", r.mean_error());
  else std::printf("mean_error_px=n/a (truth covers only the initial pose)\n");
  std::printf("resample_calls=%zu resample_seconds=%.6f total_seconds=%.6f\n", r.resample_calls, r.resample_seconds,
              r.total_seconds);
  return 0;
}

int run_bench(const BenchArgs& a) {
  const auto j = read_json_file(a.config);
  const ScaleDefaults scale = a.paper_scale ? ScaleDefaults::paper() : ScaleDefaults::desk();
  nlohmann::json doc = j;
  if (a.paper_scale) {
    // Paper scale replaces the desk-scale geometry in the file.
    doc.erase("canvas");
    doc.erase("frames");
    doc.erase("runs");
    for (auto& o : doc.at("objects")) {
      o.erase("canvas");
      o.erase("frames");
      o.erase("part_length");
      o.erase("part_width");
    }
  }
  BenchmarkConfig cfg = benchmark_config_from_json(doc, scale, a.config.parent_path());
  if (a.workers) cfg.workers = *a.workers;
  const std::size_t workers = effective_workers(cfg.workers);
  const BenchmarkReport report = run_benchmark(cfg, workers);
  write_results_csv(a.out, report);
  std::printf("wrote %zu rows to %s (workers=%zu)\n", report.rows.size(), a.out.string().c_str(), workers);
  const auto summary = summarize(report);
  std::FILE* sink = stdout;
  std::FILE* file = nullptr;
  if (!a.summary.empty()) {
    file = std::fopen(a.summary.string().c_str(), "w");
    if (!file) throw Error(Errc::io_error, "cannot open " + a.summary.string());
    sink = file;
  }
  std::fprintf(sink, "%-12s %-16s %6s %5s %12s %10s %14s %12s\n", "object", "resampler", "N", "runs", "mean_err_px",
               "std", "resample_s/run", "calls/run");
  for (const auto& s : summary)
    std::fprintf(sink, "%-12s %-16s %6zu %5zu %12.3f %10.3f %14.4f %12.0f\n", s.object.c_str(), s.resampler.c_str(),
                 s.particles, s.runs, s.mean_error, s.std_error, s.mean_resample_seconds, s.resample_calls_per_run);
  if (file) std::fclose(file);
  return 0;
}

int run_plot(const PlotArgs& a) {
  const BenchmarkReport report = read_results_csv(a.in);
  PlotOptions opt;
  opt.object = a.object;
  if (!a.title.empty()) opt.title = a.title;
  emit_convergence_plot(report, a.out, opt);
  std::printf("wrote %s\n", a.out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Articulated-object particle filter with combinatorial resampling"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic star-object sequence");
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--config", gen.config, "JSON file with any of the options below");
  g->add_option("--arms", gen.arms, "Number of arms (default 4)");
  g->add_option("--arm-length", gen.arm_length, "Parts per arm (default 3)");
  g->add_option("--frames", gen.frames, "Frame count (default 60)");
  g->add_option("--width", gen.width, "Canvas width (default 160)");
  g->add_option("--height", gen.height, "Canvas height (default 128)");
  g->add_option("--seed", gen.seed, "Sequence seed (default 1)");
  g->add_option("--sigma-xy", gen.sigma_xy, "Root position noise per frame (default 1)");
  g->add_option("--sigma-theta", gen.sigma_theta, "Angle noise per frame (default 0.025)");
  g->add_option("--part-length", gen.part_length, "Part length in px (default 12)");
  g->add_option("--part-width", gen.part_width, "Part width in px (default 5)");

  TrackArgs tr;
  auto* t = app.add_subcommand("track", "Track one sequence");
  t->add_option("--frames", tr.frames, "Directory of PGM/PPM frames")->required()->check(CLI::ExistingDirectory);
  t->add_option("--truth", tr.truth, "Ground-truth CSV (default FRAMES/truth.csv); row 1 is the initial pose");
  t->add_option("--model", tr.model, "Object description JSON (default FRAMES/object.json)");
  t->add_option("--resampler", tr.resampler,
                "multinomial|stratified|systematic|residual|weighted|combinatorial (default combinatorial)");
  t->add_option("--partition", tr.partition, "singleton|parallel (default depends on the resampler)");
  t->add_option("--particles", tr.particles, "Particle count (default 100)");
  t->add_option("--seed", tr.seed, "Tracker seed (default 1)");
  t->add_option("--config", tr.config, "JSON file with particles, seed, lambda, g_scale, proposal, partition");
  t->add_option("--sigma-xy", tr.sigma_xy, "Proposal position noise (default 1)");
  t->add_option("--sigma-theta", tr.sigma_theta, "Proposal angle noise (default 0.025)");
  t->add_option("--lambda", tr.lambda, "Likelihood sharpness (default 50)");
  t->add_option("--g-scale", tr.g_scale, "Weighted resampling exponent (default 20)");
  t->add_option("--out", tr.out, "Write per-frame estimates as CSV (truth.csv layout)");

  BenchArgs be;
  auto* b = app.add_subcommand("bench", "Run a benchmark matrix");
  b->add_option("--config", be.config, "Benchmark JSON")->required()->check(CLI::ExistingFile);
  b->add_option("--out", be.out, "Results CSV (default results.csv)");
  b->add_option("--summary", be.summary, "Write the per-cell summary table here instead of stdout");
  b->add_flag("--paper-scale", be.paper_scale, "800x640 canvas, 300 frames, 30 runs, 30x12 parts");
  b->add_option("--workers", be.workers, "Worker threads (CRTRACK_WORKERS overrides)");

  PlotArgs pl;
  auto* p = app.add_subcommand("plot", "Plot mean error vs. N from a results CSV");
  p->add_option("--in", pl.in, "Results CSV")->required()->check(CLI::ExistingFile);
  p->add_option("--out", pl.out, "SVG output (default fig.svg)");
  p->add_option("--object", pl.object, "Only rows of this object");
  p->add_option("--title", pl.title, "Plot title");

  CLI11_PARSE(app, argc, argv);

  try {
    if (g->parsed()) return run_generate(gen);
    if (t->parsed()) return run_track(tr);
    if (b->parsed()) return run_bench(be);
    if (p->parsed()) return run_plot(pl);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}

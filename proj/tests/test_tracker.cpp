#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "crtrack/sequence.hpp"
#include "crtrack/tracker.hpp"
#include "support.hpp"

using namespace crtrack;
using Catch::Approx;

namespace {

const ResamplerKind kAll[] = {ResamplerKind::multinomial, ResamplerKind::stratified, ResamplerKind::systematic,
                              ResamplerKind::residual,    ResamplerKind::weighted,   ResamplerKind::combinatorial};

ArticulatedModel torso_arms_head_model() { return ArticulatedModel(testing::torso_arms_head_dbn(), std::vector<PartShape>(6, {12, 5})); }

ObjectState pose_for(const ArticulatedModel& m, Point center) {
  ObjectState s(m.part_count());
  s[0] = {center.x, center.y, -std::numbers::pi / 2};
  const double angles[6] = {0, -2.4, -2.6, 2.4, 2.6, -1.57};
  for (PartIndex k = 1; k < m.part_count(); ++k)
    s[k] = attach_to_parent(m, k, angles[k], s[*m.dbn().parent(k)]);
  return s;
}

}  // namespace

TEST_CASE("names round trip") {
  for (auto k : kAll) CHECK(parse_resampler(to_string(k)) == k);
  CHECK(parse_resampler("cr") == ResamplerKind::combinatorial);
  CHECK_FALSE(parse_resampler("bogus"));
  CHECK(parse_partition_mode("parallel") == PartitionMode::parallel);
  CHECK_FALSE(parse_partition_mode("x"));
}

TEST_CASE("propagate_part") {
  const ObjectState init{{10, 20, 0.5}, {30, 40, -0.5}};
  SECTION("zero sigmas leave values and mark the part") {
    ParticleSet set(init, 5);
    set.begin_frame();
    Rng rng(1);
    propagate_part(set, 1, {0, 0}, rng);
    CHECK(set.processed == std::vector<bool>{false, true});
    for (const auto& p : set.particles) CHECK(p.parts == init);
    CHECK_THROWS_AS(propagate_part(set, 1, {0, 0}, rng), Error);
  }
  SECTION("fixed seed is bit-identical") {
    ParticleSet a(init, 50), b(init, 50);
    a.begin_frame();
    b.begin_frame();
    Rng ra(9), rb(9);
    propagate_part(a, 0, {1, 0.1}, ra);
    propagate_part(b, 0, {1, 0.1}, rb);
    for (std::size_t i = 0; i < 50; ++i) CHECK(a.particles[i].parts == b.particles[i].parts);
  }
  SECTION("step variance matches sigma squared") {
    const std::size_t n = 100000;
    ParticleSet set(init, n);
    set.begin_frame();
    Rng rng(2);
    propagate_part(set, 0, {2.0, 0.1}, rng);
    double sx = 0, sxx = 0, st = 0, stt = 0;
    for (const auto& p : set.particles) {
      const double dx = p.parts[0].x - 10, dt = p.parts[0].theta - 0.5;
      sx += dx;
      sxx += dx * dx;
      st += dt;
      stt += dt * dt;
    }
    const double vx = sxx / n - (sx / n) * (sx / n), vt = stt / n - (st / n) * (st / n);
    // Sample variance of a normal has sd sigma^2 sqrt(2/n).
    CHECK(std::abs(vx - 4.0) < 3 * 4.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(vt - 0.01) < 3 * 0.01 * std::sqrt(2.0 / n));
  }
}

TEST_CASE("correct_part") {
  const ArticulatedModel m(DbnSpec({std::nullopt}), {{12, 6}});
  const ObjectState truth{{30, 30, 0}};
  const Image frame = render_frame(m, truth, 64, 64);
  const References refs = init_references(frame, m, truth);

  SECTION("identical particles keep equal weights") {
    ParticleSet set(truth, 4);
    CHECK(correct_part(set, 0, frame, refs, m, {}));
    for (const auto& p : set.particles) CHECK(p.weight == 0.25);
  }
  SECTION("the one particle on the part takes all the mass") {
    ParticleSet set(truth, 3);
    set.particles[1].parts[0] = {-100, -100, 0};
    set.particles[2].parts[0] = {5, 5, 0};  // over black background
    CHECK(correct_part(set, 0, frame, refs, m, {}));
    CHECK(set.particles[0].weight == Approx(1.0).margin(1e-12));
    CHECK(set.particles[0].part_weights[0] == 1.0);
  }
  SECTION("lambda 0 keeps weights") {
    ParticleSet set(truth, 3);
    set.particles[1].parts[0] = {5, 5, 0};
    CHECK(correct_part(set, 0, frame, refs, m, {0.0}));
    for (const auto& p : set.particles) CHECK(p.weight == Approx(1.0 / 3));
  }
  SECTION("underflow resets to uniform") {
    ParticleSet set(truth, 2);
    for (auto& p : set.particles) p.parts[0] = {5, 5, 0};
    CHECK_FALSE(correct_part(set, 0, frame, refs, m, {1e6}));
    for (const auto& p : set.particles) CHECK(p.weight == 0.5);
  }
}

TEST_CASE("estimate") {
  SECTION("identical particles") {
    const ObjectState s{{1.5, 2.5, 0.3}};
    CHECK(estimate(ParticleSet(s, 7)) == s);
  }
  SECTION("circular mean across the cut") {
    ParticleSet set(ObjectState{{0, 0, 3.0}}, 2);
    set.particles[1].parts[0].theta = -3.0;
    CHECK(std::abs(std::abs(estimate(set)[0].theta) - std::numbers::pi) < 1e-12);
  }
  SECTION("point mass") {
    ParticleSet set(ObjectState{{0, 0, 0}}, 3);
    set.particles[0].parts[0] = {4, 5, 1};
    set.particles[0].weight = 1;
    set.particles[1].weight = set.particles[2].weight = 0;
    CHECK(estimate(set)[0] == PartState{4, 5, 1});
  }
  SECTION("lagged parts are refused") {
    ParticleSet set(ObjectState{{0, 0, 0}}, 3);
    set.begin_frame();
    CHECK_THROWS_AS(estimate(set), Error);
  }
}

TEST_CASE("resample invocations per frame") {
  const auto m = torso_arms_head_model();
  const ObjectState init = pose_for(m, {60, 60});
  const Image frame = render_frame(m, init, 120, 120);
  for (auto kind : kAll) {
    for (auto mode : {PartitionMode::singleton, PartitionMode::parallel}) {
      TrackerConfig cfg;
      cfg.resampler = kind;
      cfg.mode = mode;
      cfg.particle_count = 20;
      PartitionedTracker t(m, cfg);
      t.initialize(frame, init);
      const auto stats = t.step(frame);
      CHECK(stats.resample_calls == (mode == PartitionMode::parallel ? 3u : 6u));
    }
  }
}

TEST_CASE("weights stay proportional to the product of part factors") {
  // Drive the tracker by hand: after every correction the particle weight
  // divided by the product of its part factors is the same for all particles.
  const auto m = torso_arms_head_model();
  const ObjectState init = pose_for(m, {60, 60});
  const Image frame = render_frame(m, init, 120, 120);
  const References refs = init_references(frame, m, init);
  const Partition part = compute_partition(m.dbn());
  ParticleSet set(init, 30);
  for (int f = 1; f <= 3; ++f) {
    set.begin_frame();
    for (std::size_t s = 0; s < part.step_count(); ++s) {
      for (PartIndex k : part.step(s)) {
        Rng rng = make_stream(5, {static_cast<std::uint64_t>(f), 1, k});
        propagate_part(set, k, {1.5, 0.05}, rng);
        correct_part(set, k, frame, refs, m, {});
        double ratio0 = -1;
        for (const auto& p : set.particles) {
          double prod = 1;
          for (double w : p.part_weights) prod *= w;
          if (prod == 0) continue;
          const double ratio = p.weight / prod;
          if (ratio0 < 0) ratio0 = ratio;
          CHECK(ratio == Approx(ratio0).epsilon(1e-9));
        }
        double total = 0;
        for (const auto& p : set.particles) total += p.weight;
        CHECK(total == Approx(1.0).epsilon(1e-12));
      }
      Rng rr = make_stream(5, {static_cast<std::uint64_t>(f), 2, s});
      set = combinatorial_resample(set, m.dbn(), part, s, rr);
    }
  }
}

TEST_CASE("single particle: estimate is that particle") {
  const auto m = torso_arms_head_model();
  const ObjectState init = pose_for(m, {60, 60});
  const Image frame = render_frame(m, init, 120, 120);
  for (auto kind : kAll) {
    TrackerConfig cfg;
    cfg.resampler = kind;
    cfg.mode = default_partition_mode(kind);
    cfg.particle_count = 1;
    PartitionedTracker t(m, cfg);
    t.initialize(frame, init);
    t.step(frame);
    CHECK(t.current_estimate() == t.particles().particles[0].parts);
  }
}

TEST_CASE("frozen sequence with zero proposal noise tracks exactly") {
  SequenceSpec spec;
  spec.frame_count = 8;
  spec.motion = {0, 0};
  const Sequence seq = generate_sequence(spec);
  for (auto kind : kAll) {
    TrackerConfig cfg;
    cfg.resampler = kind;
    cfg.mode = default_partition_mode(kind);
    cfg.particle_count = 20;
    cfg.proposal = {0, 0};
    const auto r = track_sequence([&](std::size_t f) { return seq.frame(f); }, seq.frame_count(), seq.truth[0],
                                  seq.model, cfg, seq.truth);
    CHECK(r.mean_error() == 0.0);
  }
}

TEST_CASE("track_sequence is deterministic") {
  SequenceSpec spec;
  spec.frame_count = 6;
  const Sequence seq = generate_sequence(spec);
  for (auto kind : kAll) {
    TrackerConfig cfg;
    cfg.resampler = kind;
    cfg.mode = default_partition_mode(kind);
    cfg.particle_count = 25;
    cfg.seed = 77;
    auto run = [&] {
      return track_sequence([&](std::size_t f) { return seq.frame(f); }, seq.frame_count(), seq.truth[0], seq.model,
                            cfg, seq.truth);
    };
    const auto a = run(), b = run();
    CHECK(a.errors == b.errors);
    CHECK(a.estimates == b.estimates);
    // Four arms of three: 4 parallel steps or 13 singleton steps, 5 tracked frames.
    CHECK(a.resample_calls == (cfg.mode == PartitionMode::parallel ? 4u : 13u) * 5);
  }
}

TEST_CASE("tracker configuration errors") {
  const auto m = torso_arms_head_model();
  TrackerConfig cfg;
  cfg.particle_count = 0;
  CHECK_THROWS_AS(PartitionedTracker(m, cfg), Error);
  cfg.particle_count = 5;
  cfg.proposal.sigma_xy = -1;
  CHECK_THROWS_AS(PartitionedTracker(m, cfg), Error);
  CHECK_THROWS_AS(track_sequence(std::span<const Image>(), pose_for(m, {0, 0}), m, TrackerConfig{}), Error);
}

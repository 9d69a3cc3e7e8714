#include <catch2/catch_amalgamated.hpp>

#include "crtrack/dbn.hpp"
#include "support.hpp"

using namespace crtrack;
using crtrack::testing::torso_arms_head_dbn;

namespace {

std::vector<std::vector<PartIndex>> steps_of(const Partition& p) { return p.steps(); }

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no crtrack::Error thrown");
  return Errc::io_error;
}

}  // namespace

TEST_CASE("validate_structure accepts chains and the articulated torso") {
  CHECK_NOTHROW(validate_structure(DbnSpec({std::nullopt, PartIndex{0}, PartIndex{1}})));
  CHECK_NOTHROW(validate_structure(torso_arms_head_dbn()));
}

TEST_CASE("validate_structure rejects bad graphs") {
  CHECK(code_of([] { validate_structure(DbnSpec({PartIndex{0}})); }) == Errc::cycle_detected);
  CHECK(code_of([] { validate_structure(DbnSpec({PartIndex{1}, PartIndex{0}})); }) == Errc::cycle_detected);
  CHECK(code_of([] { validate_structure(DbnSpec({std::nullopt, PartIndex{7}})); }) == Errc::bad_index);
  CHECK(code_of([] { validate_structure(DbnSpec(std::vector<std::optional<PartIndex>>{})); }) == Errc::empty_model);
}

TEST_CASE("compute_partition") {
  SECTION("torso, head and two two-segment arms") {
    CHECK(steps_of(compute_partition(torso_arms_head_dbn())) == std::vector<std::vector<PartIndex>>{{0}, {1, 3, 5}, {2, 4}});
  }
  SECTION("chain gives singletons") {
    CHECK(steps_of(compute_partition(DbnSpec({std::nullopt, PartIndex{0}, PartIndex{1}}))) ==
          std::vector<std::vector<PartIndex>>{{0}, {1}, {2}});
  }
  SECTION("star of leaves") {
    CHECK(steps_of(compute_partition(DbnSpec({std::nullopt, PartIndex{0}, PartIndex{0}, PartIndex{0}, PartIndex{0}}))) ==
          std::vector<std::vector<PartIndex>>{{0}, {1, 2, 3, 4}});
  }
  SECTION("forest: roots share the first step") {
    CHECK(steps_of(compute_partition(DbnSpec({std::nullopt, PartIndex{0}, std::nullopt, PartIndex{2}}))) ==
          std::vector<std::vector<PartIndex>>{{0, 2}, {1, 3}});
  }
}

TEST_CASE("partitions respect the structure and are complete") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<std::optional<PartIndex>> parents(n);
    for (PartIndex k = 1; k < n; ++k)
      if (rng() % 4) parents[k] = rng() % k;
    // Relabel randomly so parents are not always lower-numbered.
    std::vector<PartIndex> perm(n);
    std::iota(perm.begin(), perm.end(), PartIndex{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::optional<PartIndex>> relabelled(n);
    for (PartIndex k = 0; k < n; ++k)
      if (parents[k]) relabelled[perm[k]] = perm[*parents[k]];
    const DbnSpec dbn(relabelled);
    for (const Partition& p : {compute_partition(dbn), singleton_partition(dbn)}) {
      CHECK(respects_structure(p, dbn));
      std::vector<int> seen(n, 0);
      for (const auto& step : p.steps())
        for (PartIndex k : step) ++seen[k];
      CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
      CHECK(p.processed_before(0).empty());
      CHECK(p.pending_after(p.step_count() - 1).empty());
    }
    CHECK(singleton_partition(dbn).step_count() == n);
  }
}

TEST_CASE("Partition rejects overlaps and gaps") {
  CHECK_THROWS_AS(Partition({{0, 1}, {1}}, 2), Error);
  CHECK_THROWS_AS(Partition({{0}}, 2), Error);
  CHECK_THROWS_AS(Partition({{0}, {5}}, 2), Error);
}

TEST_CASE("respects_structure detects a child placed before its parent") {
  const DbnSpec dbn({std::nullopt, PartIndex{0}});
  CHECK(respects_structure(Partition({{0}, {1}}, 2), dbn));
  CHECK_FALSE(respects_structure(Partition({{1}, {0}}, 2), dbn));
  CHECK_FALSE(respects_structure(Partition({{0, 1}}, 2), dbn));
}

TEST_CASE("processed and pending sets") {
  const Partition p = compute_partition(torso_arms_head_dbn());
  CHECK(p.processed_before(1) == std::vector<PartIndex>{0});
  CHECK(p.processed_through(1) == std::vector<PartIndex>{0, 1, 3, 5});
  CHECK(p.pending_after(1) == std::vector<PartIndex>{2, 4});
  CHECK(p.stage_of(4) == 2);
}

TEST_CASE("descendants_within_slice") {
  const DbnSpec dbn = torso_arms_head_dbn();
  CHECK(descendants_within_slice(dbn, 1) == std::vector<PartIndex>{2});
  CHECK(descendants_within_slice(dbn, 2).empty());
  CHECK(descendants_within_slice(dbn, 0) == std::vector<PartIndex>{1, 2, 3, 4, 5});
  CHECK_THROWS_AS(descendants_within_slice(dbn, 6), Error);
}

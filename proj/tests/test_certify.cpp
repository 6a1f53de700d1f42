#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "json.hpp"
#include "oracles.hpp"
#include "randcert/certify.hpp"
#include "randcert/error.hpp"

using namespace randcert;
using namespace randcert::certify;

namespace {

const inflation::LevelVector kLevel11 = inflation::parse_level("1,1");

}  // namespace

TEST_CASE("first level leaves fritz predictable") {
  const auto b = worst_guess_bound(fritz_bilocality(), Network::bilocality(), {"A"}, kLevel11, false);
  CHECK(b.status == lp::Status::Optimal);
  CHECK(std::abs(b.bound - 1.0) <= 1e-8);
  CHECK(b.per_setting.size() == 2);
}

TEST_CASE("pinned and unpinned eavesdropper settings agree at the first level") {
  std::mt19937_64 rng(3);
  std::vector<ProbTable> tables = {fritz_bilocality(), entanglement_swapping()};
  for (int i = 0; i < 3; ++i) tables.push_back(oracle::random_bilocality_table(rng));
  BoundOptions unpinned;
  unpinned.pin_eve_setting = false;
  for (const auto& t : tables)
    for (const char* target : {"A", "B", "C"})
      for (int x = 0; x < 2; ++x) {
        const std::vector<int> s = {x, 0, 1 - x};
        const auto p = guessing_bound(t, Network::bilocality(), {target}, s, kLevel11, false);
        const auto q = guessing_bound(t, Network::bilocality(), {target}, s, kLevel11, false, unpinned);
        REQUIRE(p.status == lp::Status::Optimal);
        REQUIRE(q.status == lp::Status::Optimal);
        CHECK(std::abs(p.bound - q.bound) <= 1e-7);
      }
}

TEST_CASE("bounds sit between the modal probability and one") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const ProbTable t = oracle::random_bilocality_table(rng);
    for (std::size_t target = 0; target < 3; ++target) {
      const std::vector<int> s = {trial % 2, 0, (trial / 2) % 2};
      const auto b = guessing_bound(t, Network::bilocality(), {std::string(1, char('A' + target))}, s, kLevel11, false);
      REQUIRE(b.status == lp::Status::Optimal);
      const double modal = oracle::modal_probability(t, {target}, s);
      CHECK(std::abs(modal_probability(t, {target}, s) - modal) <= 1e-12);
      CHECK(b.bound >= modal - 1e-8);
      CHECK(b.bound <= 1.0 + 1e-8);
    }
  }
}

TEST_CASE("joint guessing bound is at most each single bound") {
  const ProbTable t = entanglement_swapping();
  const std::vector<int> s = {0, 0, 0};
  const auto joint = guessing_bound(t, Network::bilocality(), {"A", "C"}, s, kLevel11, true);
  const auto a = guessing_bound(t, Network::bilocality(), {"A"}, s, kLevel11, false);
  REQUIRE(joint.status == lp::Status::Optimal);
  CHECK(joint.bound <= a.bound + 1e-8);
  CHECK(joint.bound >= oracle::modal_probability(t, {0, 2}, s) - 1e-8);
}

TEST_CASE("guessing input errors") {
  const Network bi = Network::bilocality();
  CHECK_THROWS_AS(guessing_bound(fritz_triangle(), bi, {"A"}, {0, 0, 0}, kLevel11, false), Error);
  CHECK_THROWS_AS(guessing_bound(fritz_bilocality(), bi, {"A"}, {0, 0}, kLevel11, false), Error);
  CHECK_THROWS_AS(guessing_bound(fritz_bilocality(), bi, {"A"}, {2, 0, 0}, kLevel11, false), Error);
  CHECK_THROWS_AS(guessing_bound(fritz_bilocality(), bi, {"Q"}, {0, 0, 0}, kLevel11, false), Error);
}

TEST_CASE("charlie has classical parents in fritz") {
  const auto c = no_randomness_biloc_charlie(fritz_bilocality());
  CHECK(c.verdict == Verdict::Feasible);
  CHECK(c.max_residual <= 1e-8);
  const auto rep = lp::verify_assignment(biloc_charlie_program(fritz_bilocality()), c.assignment);
  CHECK(rep.max_violation <= 1e-8);
  CHECK(c.parties == std::vector<std::string>{"C"});
}

TEST_CASE("entanglement swapping has no classical-parents model for charlie") {
  const auto c = no_randomness_biloc_charlie(entanglement_swapping());
  CHECK(c.verdict == Verdict::DisprovenByLP);
  CHECK(c.farkas_verified);
  CHECK(lp::verify_farkas_exact(biloc_charlie_program(entanglement_swapping()), c.farkas));
}

TEST_CASE("planted triangle models are recovered") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 4; ++trial) {
    const ProbTable t = oracle::planted_triangle(rng, 2);
    const auto c = no_randomness_triangle_classical_parents(t, 2);
    CAPTURE(trial);
    CHECK(c.verdict == Verdict::Feasible);
    CHECK(c.max_residual <= 1e-8);
    CHECK(c.recovery_error <= 1e-7);
  }
}

TEST_CASE("embedded programs accept predictable tables") {
  const auto det = no_randomness_biloc_bob_embedded(deterministic_table({2, 2, 2}, {2, 1, 2}, {0, 1, 0}));
  CHECK(det.verdict == Verdict::Feasible);
  CHECK(det.max_residual <= 1e-8);
  const auto tri = no_randomness_triangle_bob_embedded(uniform_table({2, 2, 2}, {1, 1, 1}), 1);
  CHECK(tri.verdict == Verdict::Feasible);
  CHECK(tri.max_residual <= 1e-8);
  CHECK_THROWS_AS(multiparty_extension(ProgramKind::BilocEmbeddedBell, fritz_bilocality(), {"Q"}), Error);
  CHECK_THROWS_AS(multiparty_extension(ProgramKind::BilocClassicalParents, fritz_bilocality(), {"B"}), Error);
}

TEST_CASE("programs reject tables of the wrong shape") {
  CHECK_THROWS_AS(no_randomness_triangle_classical_parents(fritz_bilocality(), 2), Error);
  CHECK_THROWS_AS(no_randomness_biloc_charlie(uniform_table({2, 2}, {2, 2})), Error);
}

TEST_CASE("reports are deterministic apart from wall time") {
  auto run = [] {
    const auto b = guessing_bound(entanglement_swapping(), Network::bilocality(), {"A"}, {1, 0, 0}, kLevel11, false);
    ReportMeta meta;
    meta.fingerprint = fingerprint(entanglement_swapping());
    meta.seed = 9;
    meta.wall_seconds = 0.0;
    return bound_report(b, meta);
  };
  const std::string first = run();
  CHECK(first == run());
  const auto j = nlohmann::json::parse(first);
  for (const char* key : {"program", "distribution", "level", "status", "bound", "backend", "seed", "wall_time"})
    CHECK(j.contains(key));

  NoRandomnessOptions opts;
  opts.bilinear.seed = 4;
  auto cert = [&] {
    ReportMeta meta;
    meta.seed = 4;
    return certificate_report(no_randomness_triangle_bob_embedded(uniform_table({2, 2, 2}, {1, 1, 1}), 1, opts), meta);
  };
  CHECK(cert() == cert());
}

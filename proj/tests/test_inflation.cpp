#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "randcert/error.hpp"
#include "randcert/inflation.hpp"
#include "randcert/network.hpp"

using namespace randcert;
using namespace randcert::inflation;

namespace {

ScenarioGraph interrupted(const Network& n, const std::vector<std::string>& targets) {
  return scenario_graph(interrupt(attach_eavesdropper(n, targets, targets.size() > 1)), true);
}

std::vector<std::vector<std::vector<int>>> wiring_of(const Inflation& inf) {
  std::vector<std::vector<std::vector<int>>> w(inf.graph.num_nodes());
  for (const auto& n : inf.nodes) w[n.party].push_back(n.source_copies);
  return w;
}

std::set<std::string> set_names(const Inflation& inf) {
  std::set<std::string> out;
  for (const auto& s : injectable_sets(inf)) out.insert(describe_set(inf, s.party_copies));
  return out;
}

}  // namespace

TEST_CASE("level parsing") {
  CHECK(parse_level("2,2").copies == std::vector<int>{2, 2});
  CHECK(parse_level("(2, 3)").copies == std::vector<int>{2, 3});
  CHECK(parse_level("1 2 2").copies == std::vector<int>{1, 2, 2});
  CHECK(level_leq(parse_level("1,2"), parse_level("2,2")));
  CHECK_FALSE(level_leq(parse_level("3,1"), parse_level("2,2")));
  CHECK_THROWS_AS(parse_level("2,x"), Error);
  CHECK_THROWS_AS(parse_level("0,2"), Error);
}

TEST_CASE("bilocality alone has only the trivial inflation") {
  const auto infl = enumerate_inflations(scenario_graph(Network::bilocality()), parse_level("2,2"));
  REQUIRE(infl.size() == 1);
  CHECK(infl[0].is_trivial());
}

TEST_CASE("bilocality with eavesdropper at level (2,2)") {
  const auto infl = enumerate_inflations(interrupted(Network::bilocality(), {"A"}), parse_level("2,2"));
  REQUIRE(infl.size() == 2);
  CHECK(infl[0].is_trivial());
  CHECK_FALSE(infl[1].is_trivial());
  const Inflation& ring = infl[1];
  // A_i B_i C_i and A_i E_i C_j with i != j.
  const std::set<std::string> want = {"{A1,B1,C1}", "{A2,B2,C2}", "{A1,C2,E1}", "{A2,C1,E2}"};
  CHECK(set_names(ring) == want);
  for (const auto& inf : infl) CHECK(check_wiring(inf).empty());
}

TEST_CASE("golden listing for bilocality with eavesdropper") {
  std::ifstream in(std::string(RANDCERT_TEST_DATA) + "/bilocality_e_level22.txt");
  REQUIRE(in);
  std::vector<std::string> golden;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) golden.push_back(line);
  const auto infl = enumerate_inflations(interrupted(Network::bilocality(), {"A"}), parse_level("2,2"));
  REQUIRE(golden.size() == infl.size());
  for (std::size_t i = 0; i < infl.size(); ++i) {
    std::string line = infl[i].signature() + " ; injectable";
    for (const auto& s : injectable_sets(infl[i])) line += " " + describe_set(infl[i], s.party_copies);
    CHECK(line == golden[i]);
  }
}

TEST_CASE("isomorphism classes match exhaustive relabeling") {
  struct Case {
    Network network;
    std::vector<std::string> targets;
    std::string level;
  };
  const std::vector<Case> cases = {
      {Network::bilocality(), {"A"}, "2,2"}, {Network::bilocality(), {"B"}, "2,3"},
      {Network::bilocality(), {"C"}, "3,2"}, {Network::triangle(), {"A"}, "2,2,2"},
      {Network::triangle(), {"A"}, "1,2,2"}, {Network::triangle(), {"A"}, "2,2,3"},
      {Network::bell(), {"A"}, "3"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.level);
    const ScenarioGraph g = interrupted(c.network, c.targets);
    const LevelVector level = parse_level(c.level);
    const auto infl = enumerate_inflations(g, level);
    const auto classes = oracle::brute_force_inflation_classes(g, level.copies);
    CHECK(infl.size() == classes.size());
    std::set<std::string> seen;
    for (const auto& inf : infl) {
      CHECK(check_wiring(inf).empty());
      seen.insert(oracle::min_relabeled(g, level.copies, wiring_of(inf)));
    }
    CHECK(seen == classes);
  }
}

TEST_CASE("canonical form ignores source relabeling") {
  const ScenarioGraph g = interrupted(Network::triangle(), {"A"});
  const auto infl = enumerate_inflations(g, parse_level("2,2,2"));
  for (const auto& inf : infl) {
    auto swapped = inf.nodes;
    for (auto& n : swapped)
      for (std::size_t j = 0; j < n.source_copies.size(); ++j)
        if (g.parents[n.party][j] == 1) n.source_copies[j] = 1 - n.source_copies[j];
    CHECK(canonical_form(g, swapped).certificate == canonical_form(g, inf.nodes).certificate);
  }
}

TEST_CASE("fanout wiring is rejected") {
  auto infl = enumerate_inflations(interrupted(Network::bilocality(), {"A"}), parse_level("2,2"));
  Inflation bad = infl[0];
  // Both copies of A read the same copy of their source.
  for (auto& n : bad.nodes)
    if (bad.graph.node_names[n.party] == "A") n.source_copies[0] = 0;
  CHECK_FALSE(check_wiring(bad).empty());
}

TEST_CASE("enumeration limits") {
  EnumerateOptions tight;
  tight.max_configurations = 2;
  try {
    enumerate_inflations(interrupted(Network::triangle(), {"A"}), parse_level("3,3,3"), tight);
    FAIL("expected LevelTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LevelTooLarge);
  }
  CHECK_THROWS_AS(enumerate_inflations(attach_eavesdropper(Network::bilocality(), {"A"}, false), parse_level("2,2")),
                  Error);
  CHECK_THROWS_AS(enumerate_inflations(interrupted(Network::bilocality(), {"A"}), parse_level("2,2,2")), Error);
}

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "randcert/distributions.hpp"
#include "randcert/lp.hpp"
#include "randcert/network.hpp"

namespace randcert::inflation {

// Copies per source, aligned with the scenario's source order.
struct LevelVector {
  std::vector<int> copies;
  bool operator==(const LevelVector&) const = default;
};

// Accepts "2,2", "(2, 2)" or "2 2".
LevelVector parse_level(std::string_view text);
std::string level_to_text(const LevelVector& level);
// Componentwise comparison: every entry of `a` is at most the matching entry of `b`.
bool level_leq(const LevelVector& a, const LevelVector& b);

// A causal structure ready for inflation: observed nodes fed by sources.
// Built from an interrupted eavesdropper scenario the nodes are the base
// parties followed by "E", which reads every source.
struct ScenarioGraph {
  std::vector<std::string> node_names;
  std::vector<int> outcome_cards;
  std::vector<int> setting_cards;
  // Source indices feeding each node, ascending.
  std::vector<std::vector<std::size_t>> parents;
  std::vector<std::string> source_names;
  // Index of the eavesdropper node, or npos when there is none.
  std::size_t eve = npos;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t num_nodes() const { return node_names.size(); }
  std::size_t num_sources() const { return source_names.size(); }
  bool has_eve() const { return eve != npos; }
};

// With `pin_eve_setting` Eve's interrupted setting copies collapse to a
// single value (her measurement is chosen for one fixed target setting).
ScenarioGraph scenario_graph(const EveScenario& scenario, bool pin_eve_setting = false);
ScenarioGraph scenario_graph(const Network& network);

struct InflatedNode {
  std::size_t party = 0;
  // 1-based copy number among the copies of `party`.
  int copy = 1;
  // Copy index read from each parent source, aligned with graph.parents[party].
  std::vector<int> source_copies;
};

struct Inflation {
  ScenarioGraph graph;
  LevelVector level;
  // Sorted by party, then by source-copy tuple.
  std::vector<InflatedNode> nodes;

  std::string node_name(std::size_t i) const;
  // Canonical wiring signature, e.g. "A{0|1} B{00|11} C{0|1} E{01|10}":
  // per party, its copies' source-copy tuples (parent sources in order).
  std::string signature() const;
  // Every party copy k reads copy k of all its sources.
  bool is_trivial() const;
};

// Nonfanout and completeness checks; returns a description of the first
// violation, or an empty string.
std::string check_wiring(const Inflation& inflation);

struct EnumerateOptions {
  // Cap on candidate wirings examined before LevelTooLarge is raised.
  std::size_t max_configurations = 200000;
};

// Non-isomorphic nonfanout inflations in which every party has as many
// copies as its scarcest parent source allows, sorted by signature (the
// disjoint-copies inflation first).
std::vector<Inflation> enumerate_inflations(const ScenarioGraph& graph, const LevelVector& level,
                                            const EnumerateOptions& options = {});
// Requires an interrupted scenario.
std::vector<Inflation> enumerate_inflations(const EveScenario& scenario, const LevelVector& level,
                                            const EnumerateOptions& options = {});

// Canonical form of a set of party copies under relabeling of source copies.
struct CanonicalForm {
  std::string certificate;
  // relabel[s][k]: canonical index of copy k of source s (-1 if unused).
  std::vector<std::vector<int>> relabel;
};
CanonicalForm canonical_form(const ScenarioGraph& graph, const std::vector<InflatedNode>& nodes);

struct InjectableSet {
  std::vector<std::size_t> party_copies;  // indices into Inflation::nodes
  std::vector<std::size_t> embedding;     // original node of each party copy
  bool operator==(const InjectableSet&) const = default;
};

// Maximal injectable sets, each as an ascending node list, sorted.
std::vector<InjectableSet> injectable_sets(const Inflation& inflation);
bool is_injectable(const Inflation& inflation, const std::vector<std::size_t>& subset);
std::string describe_set(const Inflation& inflation, const std::vector<std::size_t>& subset);

struct MatchedSets {
  std::vector<std::size_t> first;   // node indices in inflation a
  std::vector<std::size_t> second;  // images in inflation b, aligned with `first`
};

// Maximal pairs of isomorphic node sets between two inflations, leaving out
// pairs where both sides are injectable.
std::vector<MatchedSets> cross_inflation_sets(const Inflation& a, const Inflation& b);

// One block of no-signalling marginal coordinates. Coordinate (T, o, s)
// is the probability that every node of T outputs o_v at setting s_v, with
// o_v below the node's last outcome. Per node the digit 0 means "not in T"
// and 1 + s (d - 1) + o encodes membership.
struct CoordinateBlock {
  std::string name;
  std::vector<std::size_t> node_of;  // original node per position
  std::vector<int> outcome_cards, setting_cards;
  std::vector<std::size_t> stride;
  std::size_t offset = 0;
  std::size_t size = 1;

  std::size_t radix(std::size_t v) const {
    return 1 + static_cast<std::size_t>(setting_cards[v]) * static_cast<std::size_t>(outcome_cards[v] - 1);
  }
  std::size_t coordinate(const std::vector<std::size_t>& digits) const;
};

struct ConstraintCounts {
  std::size_t positivity = 0;
  std::size_t compatibility = 0;
  std::size_t cross_inflation = 0;
  std::size_t symmetry = 0;
  std::size_t observed = 0;
  std::size_t factorization = 0;
};

struct ConstraintSystem {
  ScenarioGraph graph;
  LevelVector level;
  std::vector<Inflation> inflations;
  // blocks[0] is the extended distribution over the scenario's own nodes;
  // blocks[1 + i] belongs to inflations[i].
  std::vector<CoordinateBlock> blocks;
  lp::LinearProgram program;
  ConstraintCounts counts;
  // One representative per isomorphism class of node subsets: (inflation
  // index, bit mask over its nodes).
  std::vector<std::pair<std::size_t, std::uint64_t>> subset_classes;

  // Linear form of the probability that `members` (block positions) output
  // `outcomes` at `settings`.
  std::vector<lp::Term> event(std::size_t block, const std::vector<std::size_t>& members,
                              const std::vector<int>& outcomes, const std::vector<int>& settings) const;
};

ConstraintSystem build_constraints(const std::vector<Inflation>& inflations);

// Ties every eavesdropper-free marginal of the extended distribution to the
// observed table and adds the independence factorizations this makes linear.
void add_observed_pin(ConstraintSystem& system, const ProbTable& observed);

}  // namespace randcert::inflation

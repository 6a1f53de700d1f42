#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace randcert {

struct Party {
  std::string name;
  int outcome_card = 2;
  int setting_card = 1;
};

struct Source {
  std::string name;
  std::vector<std::string> children;
};

// Parties, sources and each source's children are kept sorted by name so
// that every index derived from a Network is reproducible.
class Network {
 public:
  Network() = default;
  Network(std::vector<Party> parties, std::vector<Source> sources);

  const std::vector<Party>& parties() const { return parties_; }
  const std::vector<Source>& sources() const { return sources_; }
  std::size_t num_parties() const { return parties_.size(); }
  std::size_t num_sources() const { return sources_.size(); }

  std::optional<std::size_t> party_index(std::string_view name) const;
  std::size_t require_party(std::string_view name) const;

  // Indices of the sources feeding party p, ascending.
  std::vector<std::size_t> parents_of(std::size_t p) const;
  // Party indices of source s's children, ascending (unresolved names skipped).
  std::vector<std::size_t> children_of(std::size_t s) const;

  std::vector<int> outcome_cards() const;
  std::vector<int> setting_cards() const;

  static Network bell(int outcomes = 2, int settings = 2);
  // A - L_AB - B - L_BC - C with settings on the two ends.
  static Network bilocality(int outcomes = 2, int end_settings = 2);
  static Network triangle(int outcomes = 2);

  bool operator==(const Network&) const;

 private:
  std::vector<Party> parties_;
  std::vector<Source> sources_;
};

std::vector<std::string> validate(const Network& network);

Network parse_network(std::string_view text);
Network load_network(const std::string& path);
std::string network_to_text(const Network& network);

struct EveScenario {
  Network base;
  std::vector<std::size_t> targets;
  bool joint = false;
  int eve_outcome_card = 1;
  bool interrupted = false;
  // Cardinality of Eve's copy of each base party's setting, aligned with the
  // base party order (1 for settingless parties).
  std::vector<int> eve_setting_cards;

  // Setting variables with nonunit cardinality, e.g. "X[A]" and, once
  // interrupted, Eve's duplicates "~X[A]".
  std::vector<std::string> setting_variables() const;
  // Number of joint values Eve's composite setting can take.
  int eve_composite_setting_card() const;
};

// Name reserved for the eavesdropper node.
inline constexpr std::string_view kEveName = "E";

EveScenario attach_eavesdropper(const Network& network, const std::vector<std::string>& targets, bool joint);
EveScenario interrupt(const EveScenario& scenario);

}  // namespace randcert

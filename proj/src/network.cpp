#include "randcert/network.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "randcert/error.hpp"

namespace randcert {

using nlohmann::json;

Network::Network(std::vector<Party> parties, std::vector<Source> sources)
    : parties_(std::move(parties)), sources_(std::move(sources)) {
  std::stable_sort(parties_.begin(), parties_.end(),
                   [](const Party& a, const Party& b) { return a.name < b.name; });
  for (auto& s : sources_) std::sort(s.children.begin(), s.children.end());
  std::stable_sort(sources_.begin(), sources_.end(), [](const Source& a, const Source& b) {
    if (a.name != b.name) return a.name < b.name;
    return a.children < b.children;
  });
}

std::optional<std::size_t> Network::party_index(std::string_view name) const {
  for (std::size_t i = 0; i < parties_.size(); ++i)
    if (parties_[i].name == name) return i;
  return std::nullopt;
}

std::size_t Network::require_party(std::string_view name) const {
  auto idx = party_index(name);
  if (!idx) fail(ErrorCode::UnknownParty, "unknown party '" + std::string(name) + "'");
  return *idx;
}

std::vector<std::size_t> Network::parents_of(std::size_t p) const {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < sources_.size(); ++s) {
    const auto& ch = sources_[s].children;
    if (std::find(ch.begin(), ch.end(), parties_[p].name) != ch.end()) out.push_back(s);
  }
  return out;
}

std::vector<std::size_t> Network::children_of(std::size_t s) const {
  std::vector<std::size_t> out;
  for (const auto& name : sources_[s].children)
    if (auto idx = party_index(name)) out.push_back(*idx);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> Network::outcome_cards() const {
  std::vector<int> out;
  for (const auto& p : parties_) out.push_back(p.outcome_card);
  return out;
}

std::vector<int> Network::setting_cards() const {
  std::vector<int> out;
  for (const auto& p : parties_) out.push_back(p.setting_card);
  return out;
}

Network Network::bell(int outcomes, int settings) {
  return Network({{"A", outcomes, settings}, {"B", outcomes, settings}}, {{"AB", {"A", "B"}}});
}

Network Network::bilocality(int outcomes, int end_settings) {
  return Network({{"A", outcomes, end_settings}, {"B", outcomes, 1}, {"C", outcomes, end_settings}},
                 {{"AB", {"A", "B"}}, {"BC", {"B", "C"}}});
}

Network Network::triangle(int outcomes) {
  return Network({{"A", outcomes, 1}, {"B", outcomes, 1}, {"C", outcomes, 1}},
                 {{"AB", {"A", "B"}}, {"AC", {"A", "C"}}, {"BC", {"B", "C"}}});
}

bool Network::operator==(const Network& o) const {
  if (parties_.size() != o.parties_.size() || sources_.size() != o.sources_.size()) return false;
  for (std::size_t i = 0; i < parties_.size(); ++i) {
    const auto &a = parties_[i], &b = o.parties_[i];
    if (a.name != b.name || a.outcome_card != b.outcome_card || a.setting_card != b.setting_card)
      return false;
  }
  for (std::size_t i = 0; i < sources_.size(); ++i)
    if (sources_[i].name != o.sources_[i].name || sources_[i].children != o.sources_[i].children)
      return false;
  return true;
}

std::vector<std::string> validate(const Network& network) {
  std::vector<std::string> problems;
  std::set<std::string> names;
  for (const auto& p : network.parties()) {
    if (p.name.empty()) problems.push_back("party with empty name");
    if (!names.insert(p.name).second) problems.push_back("duplicate party name " + p.name);
    if (p.name == kEveName)
      problems.push_back("party name " + p.name + " is reserved for the eavesdropper");
    if (p.outcome_card < 1) problems.push_back("party " + p.name + " has outcome cardinality < 1");
    if (p.setting_card < 1) problems.push_back("party " + p.name + " has setting cardinality < 1");
  }
  std::set<std::string> source_names;
  for (const auto& s : network.sources()) {
    if (!source_names.insert(s.name).second) problems.push_back("duplicate source name " + s.name);
    std::set<std::string> kids(s.children.begin(), s.children.end());
    if (kids.size() != s.children.size()) problems.push_back("source " + s.name + " lists a child twice");
    if (kids.size() < 2) problems.push_back("source " + s.name + " has fewer than two children");
    for (const auto& c : kids)
      if (!names.count(c)) problems.push_back("source " + s.name + " feeds undeclared party " + c);
  }
  for (std::size_t p = 0; p < network.num_parties(); ++p)
    if (network.parents_of(p).empty())
      problems.push_back("party " + network.parties()[p].name + " has no source");
  return problems;
}

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) fail(ErrorCode::ParseError, "unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace

Network parse_network(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, std::string("network file: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::ParseError, "network file must be an object");
  reject_unknown_keys(doc, {"parties", "sources"}, "network");
  if (!doc.contains("parties") || !doc.contains("sources"))
    fail(ErrorCode::ParseError, "network file needs 'parties' and 'sources'");
  std::vector<Party> parties;
  std::vector<Source> sources;
  try {
    for (const auto& p : doc.at("parties")) {
      reject_unknown_keys(p, {"name", "outcomes", "settings"}, "party");
      Party party;
      party.name = p.at("name").get<std::string>();
      party.outcome_card = p.at("outcomes").get<int>();
      party.setting_card = p.value("settings", 1);
      parties.push_back(party);
    }
    for (const auto& s : doc.at("sources")) {
      reject_unknown_keys(s, {"name", "children"}, "source");
      Source source;
      source.name = s.at("name").get<std::string>();
      source.children = s.at("children").get<std::vector<std::string>>();
      sources.push_back(source);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("network file: ") + e.what());
  }
  return Network(std::move(parties), std::move(sources));
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str());
}

std::string network_to_text(const Network& network) {
  json doc;
  doc["parties"] = json::array();
  for (const auto& p : network.parties())
    doc["parties"].push_back({{"name", p.name}, {"outcomes", p.outcome_card}, {"settings", p.setting_card}});
  doc["sources"] = json::array();
  for (const auto& s : network.sources())
    doc["sources"].push_back({{"name", s.name}, {"children", s.children}});
  return doc.dump(2) + "\n";
}

std::vector<std::string> EveScenario::setting_variables() const {
  std::vector<std::string> out;
  for (const auto& p : base.parties())
    if (p.setting_card > 1) out.push_back("X[" + p.name + "]");
  if (interrupted)
    for (std::size_t i = 0; i < base.num_parties(); ++i)
      if (eve_setting_cards[i] > 1) out.push_back("~X[" + base.parties()[i].name + "]");
  return out;
}

int EveScenario::eve_composite_setting_card() const {
  int card = 1;
  for (int k : eve_setting_cards) card *= k;
  return card;
}

EveScenario attach_eavesdropper(const Network& network, const std::vector<std::string>& targets,
                                bool joint) {
  if (targets.empty()) fail(ErrorCode::InvalidArgument, "at least one target party is required");
  EveScenario sc;
  sc.base = network;
  for (const auto& t : targets) {
    std::size_t idx = network.require_party(t);
    if (std::find(sc.targets.begin(), sc.targets.end(), idx) == sc.targets.end())
      sc.targets.push_back(idx);
  }
  std::sort(sc.targets.begin(), sc.targets.end());
  if (!joint && sc.targets.size() != 1)
    fail(ErrorCode::InvalidArgument, "per-party guessing takes a single target; use joint mode");
  sc.joint = joint;
  sc.eve_outcome_card = 1;
  for (std::size_t t : sc.targets) sc.eve_outcome_card *= network.parties()[t].outcome_card;
  sc.eve_setting_cards = network.setting_cards();
  return sc;
}

EveScenario interrupt(const EveScenario& scenario) {
  if (scenario.interrupted) fail(ErrorCode::AlreadyInterrupted, "scenario is already interrupted");
  EveScenario out = scenario;
  out.interrupted = true;
  return out;
}

}  // namespace randcert

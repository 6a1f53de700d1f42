#include "randcert/inflation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>

#include "randcert/error.hpp"

namespace randcert::inflation {

LevelVector parse_level(std::string_view text) {
  LevelVector level;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    int v = 0;
    for (char c : token) {
      if (!std::isdigit(static_cast<unsigned char>(c)) || v > 1000)
        fail(ErrorCode::ParseError, "bad inflation level '" + std::string(text) + "'");
      v = v * 10 + (c - '0');
    }
    if (v < 1) fail(ErrorCode::InvalidArgument, "inflation level entries must be >= 1");
    level.copies.push_back(v);
    token.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '(' || c == ')' || c == '\t')
      flush();
    else
      token += c;
  }
  flush();
  if (level.copies.empty()) fail(ErrorCode::ParseError, "empty inflation level");
  return level;
}

std::string level_to_text(const LevelVector& level) {
  std::string out = "(";
  for (std::size_t i = 0; i < level.copies.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(level.copies[i]);
  }
  return out + ")";
}

bool level_leq(const LevelVector& a, const LevelVector& b) {
  if (a.copies.size() != b.copies.size()) return false;
  for (std::size_t i = 0; i < a.copies.size(); ++i)
    if (a.copies[i] > b.copies[i]) return false;
  return true;
}

ScenarioGraph scenario_graph(const Network& network) {
  ScenarioGraph g;
  for (std::size_t p = 0; p < network.num_parties(); ++p) {
    const auto& party = network.parties()[p];
    g.node_names.push_back(party.name);
    g.outcome_cards.push_back(party.outcome_card);
    g.setting_cards.push_back(party.setting_card);
    g.parents.push_back(network.parents_of(p));
  }
  for (const auto& s : network.sources()) g.source_names.push_back(s.name);
  return g;
}

ScenarioGraph scenario_graph(const EveScenario& scenario, bool pin_eve_setting) {
  ScenarioGraph g = scenario_graph(scenario.base);
  g.eve = g.node_names.size();
  g.node_names.emplace_back(kEveName);
  g.outcome_cards.push_back(scenario.eve_outcome_card);
  g.setting_cards.push_back(pin_eve_setting || !scenario.interrupted ? 1 : scenario.eve_composite_setting_card());
  std::vector<std::size_t> all(g.num_sources());
  std::iota(all.begin(), all.end(), 0);
  g.parents.push_back(all);
  return g;
}

namespace {

bool same_graph(const ScenarioGraph& a, const ScenarioGraph& b) {
  return a.node_names == b.node_names && a.outcome_cards == b.outcome_cards && a.setting_cards == b.setting_cards &&
         a.parents == b.parents && a.source_names == b.source_names && a.eve == b.eve;
}

char copy_char(int k) { return k < 10 ? static_cast<char>('0' + k) : static_cast<char>('a' + k - 10); }

std::string certificate_of(const ScenarioGraph& g, const std::vector<InflatedNode>& nodes) {
  std::vector<std::vector<std::string>> per_party(g.num_nodes());
  for (const auto& n : nodes) {
    std::string t;
    for (int k : n.source_copies) t += copy_char(k);
    per_party[n.party].push_back(t);
  }
  std::string out;
  for (std::size_t p = 0; p < per_party.size(); ++p) {
    if (per_party[p].empty()) continue;
    std::sort(per_party[p].begin(), per_party[p].end());
    if (!out.empty()) out += ' ';
    out += g.node_names[p] + "{";
    for (std::size_t i = 0; i < per_party[p].size(); ++i) {
      if (i) out += '|';
      out += per_party[p][i];
    }
    out += '}';
  }
  return out;
}

// Color refinement on the bipartite graph of party copies and source copies,
// with individualization of source copies to break ties.
class Canonizer {
 public:
  Canonizer(const ScenarioGraph& g, const std::vector<InflatedNode>& nodes) : g_(g), nodes_(nodes) {
    std::map<std::pair<std::size_t, int>, std::size_t> index;
    for (const auto& n : nodes)
      for (std::size_t j = 0; j < n.source_copies.size(); ++j) {
        auto key = std::make_pair(g.parents[n.party][j], n.source_copies[j]);
        if (!index.count(key)) {
          index[key] = copies_.size();
          copies_.push_back(key);
        }
      }
    const std::size_t nv = nodes.size() + copies_.size();
    adj_.resize(nv);
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = 0; j < nodes[i].source_copies.size(); ++j) {
        std::size_t c = nodes.size() + index[{g.parents[nodes[i].party][j], nodes[i].source_copies[j]}];
        adj_[i].push_back(c);
        adj_[c].push_back(i);
      }
    std::vector<std::int64_t> keys(nv);
    for (std::size_t i = 0; i < nodes.size(); ++i) keys[i] = static_cast<std::int64_t>(nodes[i].party);
    for (std::size_t c = 0; c < copies_.size(); ++c)
      keys[nodes.size() + c] = static_cast<std::int64_t>(g.num_nodes() + copies_[c].first);
    colors_ = rank(keys);
  }

  CanonicalForm run() {
    search(refine(colors_));
    return best_;
  }

 private:
  static std::vector<int> rank(const std::vector<std::int64_t>& keys) {
    std::vector<std::int64_t> sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<int> out(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i)
      out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), keys[i]) - sorted.begin());
    return out;
  }

  std::vector<int> refine(std::vector<int> colors) const {
    std::size_t classes = 0;
    for (;;) {
      std::vector<std::vector<int>> sig(colors.size());
      for (std::size_t v = 0; v < colors.size(); ++v) {
        sig[v].push_back(colors[v]);
        std::vector<int> nb;
        for (std::size_t u : adj_[v]) nb.push_back(colors[u]);
        std::sort(nb.begin(), nb.end());
        sig[v].insert(sig[v].end(), nb.begin(), nb.end());
      }
      std::vector<std::vector<int>> sorted = sig;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      for (std::size_t v = 0; v < colors.size(); ++v)
        colors[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), sig[v]) - sorted.begin());
      if (sorted.size() == classes) return colors;
      classes = sorted.size();
    }
  }

  void search(const std::vector<int>& colors) {
    const std::size_t base = nodes_.size();
    // First non-singleton cell among source copies.
    int target = -1;
    std::map<int, int> count;
    for (std::size_t c = 0; c < copies_.size(); ++c) count[colors[base + c]]++;
    for (const auto& [color, n] : count)
      if (n > 1) {
        target = color;
        break;
      }
    if (target < 0) {
      leaf(colors);
      return;
    }
    for (std::size_t c = 0; c < copies_.size(); ++c) {
      if (colors[base + c] != target) continue;
      std::vector<std::int64_t> keys(colors.size());
      for (std::size_t v = 0; v < colors.size(); ++v) keys[v] = 2 * static_cast<std::int64_t>(colors[v]) + 1;
      keys[base + c] -= 1;
      search(refine(rank(keys)));
    }
  }

  void leaf(const std::vector<int>& colors) {
    const std::size_t base = nodes_.size();
    CanonicalForm form;
    form.relabel.assign(g_.num_sources(), {});
    std::vector<std::vector<std::pair<int, int>>> by_source(g_.num_sources());
    for (std::size_t c = 0; c < copies_.size(); ++c)
      by_source[copies_[c].first].push_back({colors[base + c], copies_[c].second});
    for (std::size_t s = 0; s < by_source.size(); ++s) {
      std::sort(by_source[s].begin(), by_source[s].end());
      int max_copy = -1;
      for (const auto& [_, k] : by_source[s]) max_copy = std::max(max_copy, k);
      form.relabel[s].assign(static_cast<std::size_t>(max_copy + 1), -1);
      for (std::size_t r = 0; r < by_source[s].size(); ++r) form.relabel[s][by_source[s][r].second] = static_cast<int>(r);
    }
    std::vector<InflatedNode> mapped = nodes_;
    for (auto& n : mapped)
      for (std::size_t j = 0; j < n.source_copies.size(); ++j)
        n.source_copies[j] = form.relabel[g_.parents[n.party][j]][n.source_copies[j]];
    form.certificate = certificate_of(g_, mapped);
    if (!have_ || form.certificate < best_.certificate) {
      best_ = std::move(form);
      have_ = true;
    }
  }

  const ScenarioGraph& g_;
  const std::vector<InflatedNode>& nodes_;
  std::vector<std::pair<std::size_t, int>> copies_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> colors_;
  CanonicalForm best_;
  bool have_ = false;
};

// Sorts nodes by party and tuple and renumbers copies.
void normalize(std::vector<InflatedNode>& nodes) {
  std::sort(nodes.begin(), nodes.end(), [](const InflatedNode& a, const InflatedNode& b) {
    if (a.party != b.party) return a.party < b.party;
    return a.source_copies < b.source_copies;
  });
  for (std::size_t i = 0; i < nodes.size(); ++i)
    nodes[i].copy = (i > 0 && nodes[i - 1].party == nodes[i].party) ? nodes[i - 1].copy + 1 : 1;
}

std::vector<InflatedNode> relabeled(const ScenarioGraph& g, std::vector<InflatedNode> nodes, const CanonicalForm& form) {
  for (auto& n : nodes)
    for (std::size_t j = 0; j < n.source_copies.size(); ++j)
      n.source_copies[j] = form.relabel[g.parents[n.party][j]][n.source_copies[j]];
  normalize(nodes);
  return nodes;
}

// All maximal sets of tuples, pairwise distinct in every coordinate, with
// coordinate j ranging over [0, sizes[j]).
std::vector<std::vector<std::vector<int>>> disjoint_tuple_sets(const std::vector<int>& sizes) {
  if (sizes.empty()) return {{{}}};
  const int m = *std::min_element(sizes.begin(), sizes.end());
  // Ordered injective sequences of length m per coordinate; the first
  // coordinate increasing so that each set is produced once.
  std::vector<std::vector<std::vector<int>>> seqs(sizes.size());
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    std::vector<int> pick(static_cast<std::size_t>(m));
    std::vector<bool> used(static_cast<std::size_t>(sizes[j]), false);
    auto rec = [&](auto&& self, int pos) -> void {
      if (pos == m) {
        seqs[j].push_back(pick);
        return;
      }
      for (int v = 0; v < sizes[j]; ++v) {
        if (used[v]) continue;
        if (j == 0 && pos > 0 && v < pick[pos - 1]) continue;
        used[v] = true;
        pick[pos] = v;
        self(self, pos + 1);
        used[v] = false;
      }
    };
    rec(rec, 0);
  }
  std::vector<std::vector<std::vector<int>>> out;
  std::vector<std::size_t> idx(sizes.size(), 0);
  for (;;) {
    std::vector<std::vector<int>> set(static_cast<std::size_t>(m), std::vector<int>(sizes.size()));
    for (std::size_t j = 0; j < sizes.size(); ++j)
      for (int i = 0; i < m; ++i) set[i][j] = seqs[j][idx[j]][i];
    out.push_back(set);
    std::size_t j = 0;
    while (j < idx.size() && ++idx[j] == seqs[j].size()) idx[j++] = 0;
    if (j == idx.size()) break;
  }
  return out;
}

std::vector<InflatedNode> subset_nodes(const Inflation& inf, std::uint64_t mask) {
  std::vector<InflatedNode> out;
  for (std::size_t i = 0; i < inf.nodes.size(); ++i)
    if (mask >> i & 1) out.push_back(inf.nodes[i]);
  return out;
}

std::vector<std::size_t> mask_members(std::uint64_t mask, std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (mask >> i & 1) out.push_back(i);
  return out;
}

bool injectable_nodes(const ScenarioGraph& g, const std::vector<InflatedNode>& nodes) {
  std::vector<int> party_seen(g.num_nodes(), 0);
  std::vector<int> source_copy(g.num_sources(), -1);
  for (const auto& n : nodes) {
    if (party_seen[n.party]++) return false;
    for (std::size_t j = 0; j < n.source_copies.size(); ++j) {
      int& c = source_copy[g.parents[n.party][j]];
      if (c >= 0 && c != n.source_copies[j]) return false;
      c = n.source_copies[j];
    }
  }
  return true;
}

// Every node bijection between equally sized node lists induced by
// relabeling source copies. Each map sends position i of `u` to a position
// of `v`.
std::vector<std::vector<std::size_t>> isomorphisms(const ScenarioGraph& g, const std::vector<InflatedNode>& u,
                                                   const std::vector<InflatedNode>& v) {
  std::vector<std::vector<std::size_t>> out;
  if (u.size() != v.size()) return out;
  const std::size_t ns = g.num_sources();
  std::vector<std::vector<int>> cu(ns), cv(ns);
  auto collect = [&](const std::vector<InflatedNode>& nodes, std::vector<std::vector<int>>& c) {
    for (const auto& n : nodes)
      for (std::size_t j = 0; j < n.source_copies.size(); ++j) c[g.parents[n.party][j]].push_back(n.source_copies[j]);
    for (auto& list : c) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
  };
  collect(u, cu);
  collect(v, cv);
  for (std::size_t s = 0; s < ns; ++s)
    if (cu[s].size() != cv[s].size()) return out;
  std::map<std::pair<std::size_t, std::vector<int>>, std::size_t> where;
  for (std::size_t i = 0; i < v.size(); ++i) where[{v[i].party, v[i].source_copies}] = i;
  std::vector<std::vector<int>> perm = cv;
  // Odometer over the permutations of each source's image list.
  for (;;) {
    std::vector<std::size_t> map(u.size());
    bool ok = true;
    for (std::size_t i = 0; i < u.size() && ok; ++i) {
      std::vector<int> t(u[i].source_copies.size());
      for (std::size_t j = 0; j < t.size(); ++j) {
        std::size_t s = g.parents[u[i].party][j];
        std::size_t pos = static_cast<std::size_t>(
            std::lower_bound(cu[s].begin(), cu[s].end(), u[i].source_copies[j]) - cu[s].begin());
        t[j] = perm[s][pos];
      }
      auto it = where.find({u[i].party, t});
      if (it == where.end())
        ok = false;
      else
        map[i] = it->second;
    }
    if (ok) out.push_back(map);
    std::size_t s = 0;
    while (s < ns && !std::next_permutation(perm[s].begin(), perm[s].end())) ++s;
    if (s == ns) break;
  }
  return out;
}

constexpr std::size_t kMaxSubsetNodes = 24;

void require_subset_scale(const Inflation& inf) {
  if (inf.nodes.size() > kMaxSubsetNodes)
    fail(ErrorCode::LevelTooLarge, "inflation has " + std::to_string(inf.nodes.size()) + " party copies; subset analysis is limited to " +
                                       std::to_string(kMaxSubsetNodes));
}

}  // namespace

std::string Inflation::node_name(std::size_t i) const { return graph.node_names[nodes[i].party] + std::to_string(nodes[i].copy); }

std::string Inflation::signature() const { return certificate_of(graph, nodes); }

bool Inflation::is_trivial() const {
  for (const auto& n : nodes)
    for (int k : n.source_copies)
      if (k != n.copy - 1) return false;
  return true;
}

std::string check_wiring(const Inflation& inf) {
  const auto& g = inf.graph;
  if (inf.level.copies.size() != g.num_sources()) return "level has " + std::to_string(inf.level.copies.size()) + " entries for " + std::to_string(g.num_sources()) + " sources";
  std::map<std::pair<std::size_t, std::size_t>, std::vector<int>> reads;
  std::vector<int> count(g.num_nodes(), 0);
  for (std::size_t i = 0; i < inf.nodes.size(); ++i) {
    const auto& n = inf.nodes[i];
    if (n.party >= g.num_nodes()) return "node " + std::to_string(i) + " has an unknown party";
    if (n.source_copies.size() != g.parents[n.party].size())
      return inf.node_name(i) + " does not read exactly one copy of each parent source";
    ++count[n.party];
    for (std::size_t j = 0; j < n.source_copies.size(); ++j) {
      const std::size_t s = g.parents[n.party][j];
      if (n.source_copies[j] < 0 || n.source_copies[j] >= inf.level.copies[s])
        return inf.node_name(i) + " reads a copy of " + g.source_names[s] + " beyond the level";
      auto& list = reads[{n.party, s}];
      if (std::find(list.begin(), list.end(), n.source_copies[j]) != list.end())
        return "copy " + std::to_string(n.source_copies[j]) + " of " + g.source_names[s] + " feeds two copies of " +
               g.node_names[n.party];
      list.push_back(n.source_copies[j]);
    }
  }
  for (std::size_t p = 0; p < g.num_nodes(); ++p)
    if (count[p] == 0) return "party " + g.node_names[p] + " has no copy";
  return {};
}

CanonicalForm canonical_form(const ScenarioGraph& graph, const std::vector<InflatedNode>& nodes) {
  return Canonizer(graph, nodes).run();
}

std::vector<Inflation> enumerate_inflations(const ScenarioGraph& g, const LevelVector& level,
                                            const EnumerateOptions& options) {
  if (level.copies.size() != g.num_sources())
    fail(ErrorCode::InvalidArgument, "level " + level_to_text(level) + " has " + std::to_string(level.copies.size()) +
                                         " entries but the scenario has " + std::to_string(g.num_sources()) + " sources");
  for (int c : level.copies)
    if (c < 1) fail(ErrorCode::InvalidArgument, "inflation level entries must be >= 1");
  std::vector<std::vector<std::vector<std::vector<int>>>> options_per_node;
  double total = 1.0;
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    std::vector<int> sizes;
    for (std::size_t s : g.parents[p]) sizes.push_back(level.copies[s]);
    options_per_node.push_back(disjoint_tuple_sets(sizes));
    total *= static_cast<double>(options_per_node.back().size());
  }
  if (total > static_cast<double>(options.max_configurations))
    fail(ErrorCode::LevelTooLarge, "level " + level_to_text(level) + " has " + std::to_string(static_cast<long long>(total)) +
                                       " candidate wirings (cap " + std::to_string(options.max_configurations) + ")");

  std::map<std::string, Inflation> classes;
  std::vector<std::size_t> idx(g.num_nodes(), 0);
  for (;;) {
    std::vector<InflatedNode> nodes;
    for (std::size_t p = 0; p < g.num_nodes(); ++p)
      for (const auto& t : options_per_node[p][idx[p]]) nodes.push_back({p, 1, t});
    CanonicalForm form = canonical_form(g, nodes);
    if (!classes.count(form.certificate)) {
      Inflation inf{g, level, relabeled(g, nodes, form)};
      classes.emplace(form.certificate, std::move(inf));
    }
    std::size_t p = 0;
    while (p < idx.size() && ++idx[p] == options_per_node[p].size()) idx[p++] = 0;
    if (p == idx.size()) break;
  }
  std::vector<Inflation> out;
  for (auto& [_, inf] : classes) out.push_back(std::move(inf));
  std::stable_sort(out.begin(), out.end(), [](const Inflation& a, const Inflation& b) { return a.is_trivial() && !b.is_trivial(); });
  return out;
}

std::vector<Inflation> enumerate_inflations(const EveScenario& scenario, const LevelVector& level,
                                            const EnumerateOptions& options) {
  if (!scenario.interrupted)
    fail(ErrorCode::InvalidArgument, "inflation requires the interrupted scenario; interrupt it first");
  return enumerate_inflations(scenario_graph(scenario), level, options);
}

bool is_injectable(const Inflation& inf, const std::vector<std::size_t>& subset) {
  std::vector<InflatedNode> nodes;
  for (std::size_t i : subset) nodes.push_back(inf.nodes.at(i));
  return injectable_nodes(inf.graph, nodes);
}

std::string describe_set(const Inflation& inf, const std::vector<std::size_t>& subset) {
  std::string out = "{";
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if (k) out += ',';
    out += inf.node_name(subset[k]);
  }
  return out + "}";
}

std::vector<InjectableSet> injectable_sets(const Inflation& inf) {
  const auto& g = inf.graph;
  std::vector<std::vector<std::size_t>> by_party(g.num_nodes());
  for (std::size_t i = 0; i < inf.nodes.size(); ++i) by_party[inf.nodes[i].party].push_back(i);
  std::vector<std::vector<std::size_t>> found;
  std::vector<std::size_t> current;
  std::vector<int> source_copy(g.num_sources(), -1);
  auto rec = [&](auto&& self, std::size_t p) -> void {
    if (p == g.num_nodes()) {
      if (!current.empty()) found.push_back(current);
      return;
    }
    self(self, p + 1);
    for (std::size_t i : by_party[p]) {
      const auto& n = inf.nodes[i];
      std::vector<int> saved = source_copy;
      bool ok = true;
      for (std::size_t j = 0; j < n.source_copies.size() && ok; ++j) {
        int& c = source_copy[g.parents[p][j]];
        if (c >= 0 && c != n.source_copies[j]) ok = false;
        c = n.source_copies[j];
      }
      if (ok) {
        current.push_back(i);
        self(self, p + 1);
        current.pop_back();
      }
      source_copy = saved;
    }
  };
  rec(rec, 0);
  std::vector<InjectableSet> out;
  for (const auto& s : found) {
    bool maximal = true;
    for (const auto& t : found) {
      if (t.size() <= s.size()) continue;
      std::vector<std::size_t> a = s, b = t;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (std::includes(b.begin(), b.end(), a.begin(), a.end())) {
        maximal = false;
        break;
      }
    }
    if (!maximal) continue;
    InjectableSet set;
    set.party_copies = s;
    std::sort(set.party_copies.begin(), set.party_copies.end());
    for (std::size_t i : set.party_copies) set.embedding.push_back(inf.nodes[i].party);
    out.push_back(std::move(set));
  }
  std::sort(out.begin(), out.end(),
            [](const InjectableSet& a, const InjectableSet& b) { return a.party_copies < b.party_copies; });
  return out;
}

std::vector<MatchedSets> cross_inflation_sets(const Inflation& a, const Inflation& b) {
  if (!same_graph(a.graph, b.graph) || !(a.level == b.level))
    fail(ErrorCode::IncompatibleInflations, "inflations belong to different scenarios or levels");
  require_subset_scale(a);
  require_subset_scale(b);
  const bool same = a.signature() == b.signature();
  const std::uint64_t na = 1ULL << a.nodes.size(), nb = 1ULL << b.nodes.size();
  std::map<std::string, std::vector<std::uint64_t>> cert_b;
  for (std::uint64_t m = 1; m < nb; ++m) cert_b[canonical_form(b.graph, subset_nodes(b, m)).certificate].push_back(m);
  std::vector<std::string> cert_a(na);
  for (std::uint64_t m = 1; m < na; ++m) cert_a[m] = canonical_form(a.graph, subset_nodes(a, m)).certificate;
  auto cert_of_b = [&](std::uint64_t m) { return canonical_form(b.graph, subset_nodes(b, m)).certificate; };

  // A pair (S, S') is dominated when some S + v and S' + w are isomorphic
  // through a map sending S onto S'.
  auto extends = [&](std::uint64_t s, std::uint64_t t) {
    for (std::size_t v = 0; v < a.nodes.size(); ++v) {
      if (s >> v & 1) continue;
      const std::uint64_t sv = s | (1ULL << v);
      for (std::size_t w = 0; w < b.nodes.size(); ++w) {
        if ((t >> w & 1) || b.nodes[w].party != a.nodes[v].party) continue;
        const std::uint64_t tw = t | (1ULL << w);
        if (cert_a[sv] != cert_of_b(tw)) continue;
        auto members_s = mask_members(sv, a.nodes.size());
        auto members_t = mask_members(tw, b.nodes.size());
        for (const auto& map : isomorphisms(a.graph, subset_nodes(a, sv), subset_nodes(b, tw))) {
          std::size_t pos_v = static_cast<std::size_t>(std::find(members_s.begin(), members_s.end(), v) - members_s.begin());
          if (members_t[map[pos_v]] == w) return true;
        }
      }
    }
    return false;
  };

  std::vector<MatchedSets> out;
  for (std::uint64_t s = 1; s < na; ++s) {
    auto it = cert_b.find(cert_a[s]);
    if (it == cert_b.end()) continue;
    auto members_s = mask_members(s, a.nodes.size());
    const bool inj_s = is_injectable(a, members_s);
    for (std::uint64_t t : it->second) {
      if (same && t < s) continue;
      auto members_t = mask_members(t, b.nodes.size());
      if (inj_s && is_injectable(b, members_t)) continue;
      auto maps = isomorphisms(a.graph, subset_nodes(a, s), subset_nodes(b, t));
      if (maps.empty()) continue;
      std::size_t pick = 0;
      if (same && s == t) {
        // Skip the identity; keep the first nontrivial automorphism.
        pick = maps.size();
        for (std::size_t k = 0; k < maps.size(); ++k) {
          bool identity = true;
          for (std::size_t i = 0; i < maps[k].size(); ++i) identity = identity && maps[k][i] == i;
          if (!identity) {
            pick = k;
            break;
          }
        }
        if (pick == maps.size()) continue;
      }
      if (extends(s, t)) continue;
      MatchedSets m;
      m.first = members_s;
      for (std::size_t i = 0; i < members_s.size(); ++i) m.second.push_back(members_t[maps[pick][i]]);
      out.push_back(std::move(m));
    }
  }
  return out;
}

std::size_t CoordinateBlock::coordinate(const std::vector<std::size_t>& digits) const {
  std::size_t c = 0;
  for (std::size_t v = 0; v < digits.size(); ++v) c += digits[v] * stride[v];
  return offset + c;
}

namespace {

CoordinateBlock make_block(std::string name, const ScenarioGraph& g, const std::vector<std::size_t>& node_of,
                           std::size_t offset) {
  CoordinateBlock b;
  b.name = std::move(name);
  b.node_of = node_of;
  for (std::size_t v : node_of) {
    b.outcome_cards.push_back(g.outcome_cards[v]);
    b.setting_cards.push_back(g.setting_cards[v]);
  }
  b.offset = offset;
  b.size = 1;
  b.stride.assign(node_of.size(), 0);
  for (std::size_t v = node_of.size(); v-- > 0;) {
    b.stride[v] = b.size;
    b.size *= b.radix(v);
  }
  return b;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Calls f(digits) for every digit vector in which exactly the positions in
// `members` are present.
template <typename F>
void for_each_present(const CoordinateBlock& block, const std::vector<std::size_t>& members, F&& f) {
  std::vector<std::size_t> digits(block.node_of.size(), 0);
  for (std::size_t v : members) {
    if (block.radix(v) < 2) return;
    digits[v] = 1;
  }
  for (;;) {
    f(digits);
    std::size_t k = 0;
    while (k < members.size()) {
      std::size_t v = members[k];
      if (++digits[v] < block.radix(v)) break;
      digits[v] = 1;
      ++k;
    }
    if (k == members.size()) return;
  }
}

// Decodes a present digit into (setting, outcome).
std::pair<int, int> decode_digit(const CoordinateBlock& block, std::size_t v, std::size_t digit) {
  const int d1 = block.outcome_cards[v] - 1;
  const int code = static_cast<int>(digit) - 1;
  return {code / d1, code % d1};
}

}  // namespace

std::vector<lp::Term> ConstraintSystem::event(std::size_t b, const std::vector<std::size_t>& members,
                                              const std::vector<int>& outcomes,
                                              const std::vector<int>& settings) const {
  const CoordinateBlock& block = blocks.at(b);
  struct Option {
    std::size_t digit;
    double coef;
  };
  std::vector<std::vector<Option>> options;
  for (std::size_t k = 0; k < members.size(); ++k) {
    const std::size_t v = members[k];
    const int d = block.outcome_cards[v];
    if (outcomes[k] < 0 || outcomes[k] >= d || settings[k] < 0 || settings[k] >= block.setting_cards[v])
      fail(ErrorCode::InvalidArgument, "event outside the block's alphabet");
    const std::size_t base = 1 + static_cast<std::size_t>(settings[k]) * static_cast<std::size_t>(d - 1);
    if (outcomes[k] < d - 1) {
      options.push_back({{base + static_cast<std::size_t>(outcomes[k]), 1.0}});
    } else {
      std::vector<Option> opts{{0, 1.0}};
      for (int o = 0; o < d - 1; ++o) opts.push_back({base + static_cast<std::size_t>(o), -1.0});
      options.push_back(opts);
    }
  }
  std::vector<lp::Term> terms;
  std::vector<std::size_t> pick(members.size(), 0);
  std::vector<std::size_t> digits(block.node_of.size(), 0);
  for (;;) {
    double coef = 1.0;
    for (std::size_t k = 0; k < members.size(); ++k) {
      digits[members[k]] = options[k][pick[k]].digit;
      coef *= options[k][pick[k]].coef;
    }
    terms.push_back({block.coordinate(digits), coef});
    std::size_t k = 0;
    while (k < members.size() && ++pick[k] == options[k].size()) pick[k++] = 0;
    if (k == members.size()) break;
  }
  std::sort(terms.begin(), terms.end(), [](const lp::Term& x, const lp::Term& y) { return x.var < y.var; });
  return terms;
}

ConstraintSystem build_constraints(const std::vector<Inflation>& inflations) {
  if (inflations.empty()) fail(ErrorCode::InvalidArgument, "no inflations to build constraints from");
  for (const auto& inf : inflations) {
    if (!same_graph(inf.graph, inflations[0].graph) || !(inf.level == inflations[0].level))
      fail(ErrorCode::IncompatibleInflations, "inflation " + inf.signature() + " belongs to a different scenario or level");
    if (auto err = check_wiring(inf); !err.empty()) fail(ErrorCode::IncompatibleInflations, err);
    require_subset_scale(inf);
  }
  ConstraintSystem sys;
  sys.graph = inflations[0].graph;
  sys.level = inflations[0].level;
  sys.inflations = inflations;
  const auto& g = sys.graph;

  std::vector<std::size_t> identity(g.num_nodes());
  std::iota(identity.begin(), identity.end(), 0);
  sys.blocks.push_back(make_block("ext", g, identity, 0));
  for (const auto& inf : inflations) {
    std::vector<std::size_t> node_of;
    for (const auto& n : inf.nodes) node_of.push_back(n.party);
    sys.blocks.push_back(make_block(inf.signature(), g, node_of, sys.blocks.back().offset + sys.blocks.back().size));
  }
  auto& lp = sys.program;
  for (const auto& b : sys.blocks)
    for (std::size_t c = 0; c < b.size; ++c) lp.add_variable(c == 0 ? 1.0 : 0.0, 1.0);
  lp.sense = lp::Sense::Feasibility;

  // Nonnegativity of every full joint event of every block.
  for (std::size_t bi = 0; bi < sys.blocks.size(); ++bi) {
    const auto& b = sys.blocks[bi];
    const std::size_t n = b.node_of.size();
    std::vector<std::size_t> members(n);
    std::iota(members.begin(), members.end(), 0);
    std::vector<int> outs(n, 0), sets(n, 0);
    for (;;) {
      lp.add_row(sys.event(bi, members, outs, sets), lp::Relation::GreaterEqual, 0.0);
      ++sys.counts.positivity;
      std::size_t v = 0;
      for (; v < n; ++v) {
        if (++outs[v] < b.outcome_cards[v]) break;
        outs[v] = 0;
        if (++sets[v] < b.setting_cards[v]) break;
        sets[v] = 0;
      }
      if (v == n) break;
    }
  }

  UnionFind uf(lp.num_vars);
  auto identify = [&](std::size_t x, std::size_t y, std::size_t& counter) {
    if (!uf.unite(x, y)) return;
    lp.add_row({{std::min(x, y), 1.0}, {std::max(x, y), -1.0}}, lp::Relation::Equal, 0.0);
    ++counter;
  };

  // Compatibility: injectable sets equal the extended distribution.
  const CoordinateBlock& ext = sys.blocks[0];
  for (std::size_t i = 0; i < inflations.size(); ++i) {
    const auto& inf = inflations[i];
    const CoordinateBlock& blk = sys.blocks[i + 1];
    for (const auto& set : injectable_sets(inf)) {
      const std::size_t k = set.party_copies.size();
      for (std::uint64_t m = 1; m < (1ULL << k); ++m) {
        std::vector<std::size_t> members;
        for (std::size_t j = 0; j < k; ++j)
          if (m >> j & 1) members.push_back(set.party_copies[j]);
        for_each_present(blk, members, [&](const std::vector<std::size_t>& digits) {
          std::vector<std::size_t> ed(g.num_nodes(), 0);
          for (std::size_t v : members) ed[inf.nodes[v].party] = digits[v];
          identify(blk.coordinate(digits), ext.coordinate(ed), sys.counts.compatibility);
        });
      }
    }
  }

  // Isomorphic node sets inside and across inflations have equal marginals.
  struct Member {
    std::size_t inflation;
    std::uint64_t mask;
  };
  std::map<std::string, std::vector<Member>> classes;
  for (std::size_t i = 0; i < inflations.size(); ++i)
    for (std::uint64_t m = 1; m < (1ULL << inflations[i].nodes.size()); ++m)
      classes[canonical_form(g, subset_nodes(inflations[i], m)).certificate].push_back({i, m});
  for (const auto& [cert, members] : classes) {
    const Member rep = members.front();
    const auto& rinf = inflations[rep.inflation];
    const auto rnodes = subset_nodes(rinf, rep.mask);
    const auto rmem = mask_members(rep.mask, rinf.nodes.size());
    const bool rep_injectable = injectable_nodes(g, rnodes);
    sys.subset_classes.push_back({rep.inflation, rep.mask});
    for (const auto& mem : members) {
      const auto& inf = inflations[mem.inflation];
      const auto nodes = subset_nodes(inf, mem.mask);
      const auto mm = mask_members(mem.mask, inf.nodes.size());
      const bool self = mem.inflation == rep.inflation && mem.mask == rep.mask;
      if (!self && rep_injectable && injectable_nodes(g, nodes)) continue;
      auto maps = isomorphisms(g, nodes, rnodes);
      if (!self && !maps.empty()) maps.resize(1);
      const CoordinateBlock& from = sys.blocks[mem.inflation + 1];
      const CoordinateBlock& to = sys.blocks[rep.inflation + 1];
      for (const auto& map : maps) {
        for_each_present(from, mm, [&](const std::vector<std::size_t>& digits) {
          std::vector<std::size_t> td(to.node_of.size(), 0);
          for (std::size_t k = 0; k < mm.size(); ++k) td[rmem[map[k]]] = digits[mm[k]];
          identify(from.coordinate(digits), to.coordinate(td), self ? sys.counts.symmetry : sys.counts.cross_inflation);
        });
      }
    }
  }
  return sys;
}

void add_observed_pin(ConstraintSystem& sys, const ProbTable& observed) {
  const auto& g = sys.graph;
  std::vector<std::size_t> parties;
  for (std::size_t v = 0; v < g.num_nodes(); ++v)
    if (v != g.eve) parties.push_back(v);
  std::vector<int> oc, sc;
  for (std::size_t v : parties) {
    oc.push_back(g.outcome_cards[v]);
    sc.push_back(g.setting_cards[v]);
  }
  if (observed.outcome_cards() != oc || observed.setting_cards() != sc)
    fail(ErrorCode::ShapeMismatch, "observed table does not match the scenario's cardinalities");
  auto& lp = sys.program;
  const CoordinateBlock& ext = sys.blocks[0];

  // Value of the marginal coordinate over original nodes `members` with the
  // given digits, read from the observed table.
  auto observed_value = [&](const CoordinateBlock& block, const std::vector<std::size_t>& positions,
                            const std::vector<std::size_t>& digits) {
    std::vector<std::size_t> who;
    std::vector<int> outs, sets;
    for (std::size_t v : positions) {
      auto [s, o] = decode_digit(block, v, digits[v]);
      who.push_back(block.node_of[v]);
      outs.push_back(o);
      sets.push_back(s);
    }
    return observed.marginal(who, outs, sets);
  };

  for (std::uint64_t m = 1; m < (1ULL << parties.size()); ++m) {
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < parties.size(); ++k)
      if (m >> k & 1) members.push_back(parties[k]);
    for_each_present(ext, members, [&](const std::vector<std::size_t>& digits) {
      lp.add_row({{ext.coordinate(digits), 1.0}}, lp::Relation::Equal, observed_value(ext, members, digits));
      ++sys.counts.observed;
    });
  }

  // Independence: components of a node set that read disjoint source copies
  // multiply. Linear when every component but at most one is a known
  // eavesdropper-free injectable marginal.
  for (const auto& [inf_index, mask] : sys.subset_classes) {
    const auto& inf = sys.inflations[inf_index];
    const CoordinateBlock& blk = sys.blocks[inf_index + 1];
    const auto members = mask_members(mask, inf.nodes.size());
    const auto nodes = subset_nodes(inf, mask);
    if (injectable_nodes(g, nodes)) {
      bool has_eve = false;
      for (const auto& n : nodes) has_eve = has_eve || n.party == g.eve;
      if (!has_eve) continue;
    }
    std::vector<std::size_t> comp(members.size());
    std::iota(comp.begin(), comp.end(), 0);
    auto root = [&](std::size_t x) {
      while (comp[x] != x) x = comp[x];
      return x;
    };
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        bool share = false;
        const auto& a = nodes[i];
        const auto& b = nodes[j];
        for (std::size_t x = 0; x < a.source_copies.size() && !share; ++x)
          for (std::size_t y = 0; y < b.source_copies.size() && !share; ++y)
            share = g.parents[a.party][x] == g.parents[b.party][y] && a.source_copies[x] == b.source_copies[y];
        if (share) comp[root(j)] = root(i);
      }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < members.size(); ++i) groups[root(i)].push_back(i);
    if (groups.size() < 2) continue;
    std::vector<std::vector<std::size_t>> known;
    std::vector<std::size_t> unknown;
    int unknown_count = 0;
    for (const auto& [_, idx] : groups) {
      std::vector<InflatedNode> cn;
      std::vector<std::size_t> pos;
      bool eve = false;
      for (std::size_t i : idx) {
        cn.push_back(nodes[i]);
        pos.push_back(members[i]);
        eve = eve || nodes[i].party == g.eve;
      }
      if (!eve && injectable_nodes(g, cn)) {
        known.push_back(pos);
      } else {
        unknown = pos;
        ++unknown_count;
      }
    }
    if (unknown_count > 1) continue;
    for_each_present(blk, members, [&](const std::vector<std::size_t>& digits) {
      double c = 1.0;
      for (const auto& pos : known) c *= observed_value(blk, pos, digits);
      std::vector<lp::Term> terms{{blk.coordinate(digits), 1.0}};
      if (unknown_count == 1 && c != 0.0) {
        std::vector<std::size_t> ud(digits.size(), 0);
        for (std::size_t v : unknown) ud[v] = digits[v];
        terms.push_back({blk.coordinate(ud), -c});
        lp.add_row(std::move(terms), lp::Relation::Equal, 0.0);
      } else {
        lp.add_row(std::move(terms), lp::Relation::Equal, unknown_count == 1 ? 0.0 : c);
      }
      ++sys.counts.factorization;
    });
  }
}

}  // namespace randcert::inflation

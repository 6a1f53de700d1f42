#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "randcert/distributions.hpp"
#include "randcert/inflation.hpp"
#include "randcert/lp.hpp"

namespace oracle {

// Solves the square system A x = b by Gaussian elimination; nullopt when
// singular.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (std::abs(a[p][c]) < 1e-10) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

struct VertexAnswer {
  bool feasible = false;
  double best = 0.0;
};

// Optimum over all basic feasible solutions: every choice of n linearly
// independent active hyperplanes among the rows and finite bounds, with all
// equality rows forced active. Assumes a bounded, pointed feasible region.
inline VertexAnswer vertex_enumeration(const randcert::lp::LinearProgram& lp) {
  using namespace randcert::lp;
  const std::size_t n = lp.num_vars;
  struct Plane {
    std::vector<double> a;
    double b;
  };
  std::vector<Plane> eq, ineq;
  for (const auto& r : lp.rows) {
    Plane p{std::vector<double>(n, 0.0), r.rhs};
    for (const auto& t : r.terms) p.a[t.var] += t.coef;
    (r.relation == Relation::Equal ? eq : ineq).push_back(p);
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    if (std::isfinite(lp.lower[j])) ineq.push_back({e, lp.lower[j]});
    if (std::isfinite(lp.upper[j])) ineq.push_back({e, lp.upper[j]});
  }
  VertexAnswer ans;
  if (eq.size() > n) return ans;
  const std::size_t k = n - eq.size();
  if (k > ineq.size()) return ans;
  std::vector<int> pick(ineq.size(), 0);
  std::fill(pick.end() - static_cast<long>(k), pick.end(), 1);
  std::vector<double> c(n, 0.0);
  for (const auto& t : lp.objective) c[t.var] += t.coef;
  const double sign = lp.sense == Sense::Maximize ? 1.0 : -1.0;
  do {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    for (const auto& p : eq) {
      a.push_back(p.a);
      b.push_back(p.b);
    }
    for (std::size_t i = 0; i < ineq.size(); ++i)
      if (pick[i]) {
        a.push_back(ineq[i].a);
        b.push_back(ineq[i].b);
      }
    auto x = solve_square(a, b);
    if (!x) continue;
    auto rep = verify_assignment(lp, *x);
    if (rep.max_violation > 1e-9) continue;
    double v = lp.objective_offset;
    for (std::size_t j = 0; j < n; ++j) v += c[j] * (*x)[j];
    if (!ans.feasible || sign * v > sign * ans.best) ans.best = v;
    ans.feasible = true;
  } while (std::next_permutation(pick.begin(), pick.end()));
  return ans;
}

// Random bounded LP with at most `max_vars` variables and `max_rows` rows.
inline randcert::lp::LinearProgram random_small_lp(std::mt19937_64& rng, std::size_t max_vars, std::size_t max_rows) {
  using namespace randcert::lp;
  std::uniform_int_distribution<std::size_t> nv(1, max_vars), nr(1, max_rows - 1);
  std::uniform_int_distribution<int> coef(-5, 5), kind(0, 9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LinearProgram lp;
  const std::size_t n = nv(rng);
  for (std::size_t j = 0; j < n; ++j) {
    int b = kind(rng);
    if (b < 6)
      lp.add_variable(0.0, kInf);
    else if (b < 8)
      lp.add_variable(-2.0, 3.0);
    else
      lp.add_variable(0.0, 1.5);
  }
  const std::size_t m = nr(rng);
  for (std::size_t r = 0; r < m; ++r) {
    std::vector<Term> terms;
    for (std::size_t j = 0; j < n; ++j) {
      int c = coef(rng);
      if (c != 0 && u(rng) < 0.7) terms.push_back({j, static_cast<double>(c)});
    }
    int k = kind(rng);
    Relation rel = k < 5 ? Relation::LessEqual : (k < 8 ? Relation::GreaterEqual : Relation::Equal);
    lp.add_row(std::move(terms), rel, std::round(10.0 * (u(rng) * 8.0 - 2.0)) / 10.0);
  }
  // Keep the region bounded.
  std::vector<Term> all;
  for (std::size_t j = 0; j < n; ++j) all.push_back({j, 1.0});
  lp.add_row(all, Relation::LessEqual, 10.0);
  std::vector<Term> obj;
  for (std::size_t j = 0; j < n; ++j) obj.push_back({j, static_cast<double>(coef(rng))});
  lp.objective = obj;
  lp.sense = kind(rng) < 5 ? Sense::Maximize : Sense::Minimize;
  return lp;
}

}  // namespace oracle

namespace oracle {

struct Planted {
  randcert::lp::BilinearProgram program;
  std::vector<double> a, b;
};

// Bilinear system built around a known point: rows are random, right-hand
// sides are evaluated at the planted (a, b), and inequality rows get a
// random margin.
inline Planted planted_bilinear(std::uint64_t seed, std::size_t na = 8, std::size_t nb = 4, std::size_t rows = 6) {
  using namespace randcert::lp;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> coef(-3, 3);
  Planted p;
  for (std::size_t j = 0; j < na; ++j) {
    p.program.add_a(0.0, 1.0);
    p.a.push_back(u(rng));
  }
  for (std::size_t j = 0; j < nb; ++j) {
    p.program.add_b(0.0, 1.0);
    p.b.push_back(u(rng));
  }
  for (std::size_t r = 0; r < rows; ++r) {
    BilinearRow row;
    double lhs = 0.0;
    for (std::size_t j = 0; j < na; ++j)
      if (int c = coef(rng); c != 0 && u(rng) < 0.5) {
        row.lin_a.push_back({j, double(c)});
        lhs += c * p.a[j];
      }
    for (std::size_t j = 0; j < nb; ++j)
      if (int c = coef(rng); c != 0 && u(rng) < 0.3) {
        row.lin_b.push_back({j, double(c)});
        lhs += c * p.b[j];
      }
    for (std::size_t i = 0; i < na; ++i)
      for (std::size_t j = 0; j < nb; ++j)
        if (int c = coef(rng); c != 0 && u(rng) < 0.25) {
          row.bilinear.push_back({i, j, double(c)});
          lhs += c * p.a[i] * p.b[j];
        }
    if (r % 3 == 2) {
      row.relation = Relation::LessEqual;
      row.rhs = lhs + 0.1 * u(rng);
    } else {
      row.relation = Relation::Equal;
      row.rhs = lhs;
    }
    p.program.add_row(std::move(row));
  }
  return p;
}

// Bilocality table P(a,b,c|x,z) from a random network model. The A-B
// source is a nonsignalling box Q(a,b1|x,y), a random mixture of the PR box,
// the optimal CHSH quantum box, a local hidden-variable box and white noise.
// The B-C source is a classical m: B feeds y = g(m) to its half of the box
// and keeps or flips b1 depending on m; C answers from (z, m). Each source is
// used once, so the table is compatible with the network.
inline randcert::ProbTable random_bilocality_table(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> bit(0, 1);
  auto stochastic = [&](int n) {
    std::vector<double> p(static_cast<std::size_t>(n));
    double s = 0.0;
    for (auto& v : p) s += v = -std::log(1.0 - u(rng));
    for (auto& v : p) v /= s;
    return p;
  };
  auto sharp = [&] {
    double v = u(rng);
    return u(rng) < 0.5 ? std::round(v) : v;
  };
  const int nl = 2 + static_cast<int>(u(rng) * 2), nm = 2 + static_cast<int>(u(rng) * 2);
  const auto pl = stochastic(nl), pm = stochastic(nm), w = stochastic(4);
  // Probability of outcome 0 per (input, hidden value).
  std::vector<double> la(2 * nl), lb(2 * nl), keep(nm), rc(2 * nm);
  for (auto& v : la) v = sharp();
  for (auto& v : lb) v = sharp();
  for (auto& v : keep) v = sharp();
  for (auto& v : rc) v = sharp();
  std::vector<int> g(nm);
  for (auto& v : g) v = bit(rng);
  const double hi = (2 + std::sqrt(2.0)) / 8, lo = (2 - std::sqrt(2.0)) / 8;
  auto box = [&](int a, int b, int x, int y) {
    const bool win = (a ^ b) == (x & y);
    double local = 0.0;
    for (int l = 0; l < nl; ++l) {
      const double qa = la[x * nl + l], qb = lb[y * nl + l];
      local += pl[l] * (a ? 1 - qa : qa) * (b ? 1 - qb : qb);
    }
    return w[0] * (win ? 0.5 : 0.0) + w[1] * (win ? hi : lo) + w[2] * local + w[3] * 0.25;
  };
  randcert::ProbTable t({2, 2, 2}, {2, 1, 2});
  for (int x = 0; x < 2; ++x)
    for (int z = 0; z < 2; ++z)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < 2; ++c) {
            double v = 0.0;
            for (int m = 0; m < nm; ++m) {
              const double qc = rc[z * nm + m];
              const double pc = c ? 1 - qc : qc;
              const double same = box(a, b, x, g[m]), flipped = box(a, 1 - b, x, g[m]);
              v += pm[m] * pc * (keep[m] * same + (1 - keep[m]) * flipped);
            }
            t.at({x, 0, z}, {a, b, c}) = v;
          }
  t.labels = {"A", "B", "C"};
  return t;
}

// Triangle table from an explicit model in which C reads two classical
// sources: z (cardinality d, shared with A) and l (shared with B). A and B
// share a PR box with inputs z mod 2 and g(l); C outputs h(z, l).
inline randcert::ProbTable planted_triangle(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> bit(0, 1);
  const int nl = 2;
  std::vector<double> pz(d), pl(nl);
  double sz = 0.0, sl = 0.0;
  for (auto& v : pz) sz += v = 0.2 + u(rng);
  for (auto& v : pl) sl += v = 0.2 + u(rng);
  std::vector<int> g(nl), h(d * nl);
  for (auto& v : g) v = bit(rng);
  for (auto& v : h) v = bit(rng);
  randcert::ProbTable t({2, 2, 2}, {1, 1, 1});
  for (int z = 0; z < d; ++z)
    for (int l = 0; l < nl; ++l)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const int x = z % 2, y = g[l];
          const double pr = ((a ^ b) == (x & y)) ? 0.5 : 0.0;
          t.at({0, 0, 0}, {a, b, h[z * nl + l]}) += pz[z] / sz * pl[l] / sl * pr;
        }
  t.labels = {"A", "B", "C"};
  return t;
}

// max over outcome tuples of the targets' marginal, summed by hand over the
// remaining parties' outcomes at the given full setting tuple.
inline double modal_probability(const randcert::ProbTable& t, const std::vector<std::size_t>& targets,
                                const std::vector<int>& settings) {
  std::map<std::vector<int>, double> marginal;
  for (std::size_t o = 0; o < t.num_outcome_tuples(); ++o) {
    const auto outs = t.decode_outcomes(o);
    std::vector<int> key;
    for (std::size_t p : targets) key.push_back(outs[p]);
    marginal[key] += t(settings, outs);
  }
  double best = 0.0;
  for (const auto& [k, v] : marginal) best = std::max(best, v);
  return best;
}

// Wiring string minimized over every relabeling of source copies.
// wiring[p] lists, per copy of party p, the copy read from each parent.
inline std::string min_relabeled(const randcert::inflation::ScenarioGraph& g, const std::vector<int>& copies,
                                 const std::vector<std::vector<std::vector<int>>>& wiring) {
  auto digit = [](int k) { return static_cast<char>('0' + k); };
  std::vector<std::vector<std::vector<int>>> perms(copies.size());
  for (std::size_t s = 0; s < copies.size(); ++s) {
    std::vector<int> id(static_cast<std::size_t>(copies[s]));
    for (int k = 0; k < copies[s]; ++k) id[k] = k;
    do perms[s].push_back(id);
    while (std::next_permutation(id.begin(), id.end()));
  }
  std::string best;
  std::vector<std::size_t> idx(copies.size(), 0);
  while (true) {
    std::string out;
    for (std::size_t p = 0; p < g.num_nodes(); ++p) {
      std::vector<std::string> parts;
      for (const auto& t : wiring[p]) {
        std::string w;
        for (std::size_t j = 0; j < t.size(); ++j) w += digit(perms[g.parents[p][j]][idx[g.parents[p][j]]][t[j]]);
        parts.push_back(w);
      }
      std::sort(parts.begin(), parts.end());
      if (!out.empty()) out += ' ';
      out += g.node_names[p] + "{";
      for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "|" : "") + parts[i];
      out += "}";
    }
    if (best.empty() || out < best) best = out;
    std::size_t s = 0;
    while (s < idx.size() && ++idx[s] == perms[s].size()) idx[s++] = 0;
    if (s == idx.size()) break;
  }
  return best;
}

// Isomorphism classes of nonfanout inflations of `graph` in which every
// party has as many copies as its scarcest parent source, by exhaustive
// wiring enumeration and minimization of the wiring string over all
// relabelings of source copies. Strings follow the form "A{01|10} B{...}".
inline std::set<std::string> brute_force_inflation_classes(const randcert::inflation::ScenarioGraph& g,
                                                           const std::vector<int>& copies) {
  const std::size_t np = g.num_nodes();
  std::vector<int> count(np);
  for (std::size_t p = 0; p < np; ++p) {
    int c = 1 << 20;
    for (std::size_t s : g.parents[p]) c = std::min(c, copies[s]);
    count[p] = g.parents[p].empty() ? 1 : c;
  }
  // Every option for one party: a sorted list of tuples, one per copy, with
  // distinct copies of each parent source across the party's copies.
  std::vector<std::vector<std::vector<std::vector<int>>>> options(np);
  for (std::size_t p = 0; p < np; ++p) {
    std::vector<std::vector<int>> tuples;
    std::vector<int> t(g.parents[p].size(), 0);
    std::function<void(std::size_t)> all = [&](std::size_t j) {
      if (j == t.size()) {
        tuples.push_back(t);
        return;
      }
      for (int k = 0; k < copies[g.parents[p][j]]; ++k) {
        t[j] = k;
        all(j + 1);
      }
    };
    all(0);
    std::vector<std::vector<int>> pick;
    std::function<void(std::size_t)> choose = [&](std::size_t from) {
      if (static_cast<int>(pick.size()) == count[p]) {
        options[p].push_back(pick);
        return;
      }
      for (std::size_t i = from; i < tuples.size(); ++i) {
        bool clash = false;
        for (const auto& q : pick)
          for (std::size_t j = 0; j < q.size(); ++j) clash = clash || q[j] == tuples[i][j];
        if (clash) continue;
        pick.push_back(tuples[i]);
        choose(i + 1);
        pick.pop_back();
      }
    };
    choose(0);
  }
  std::set<std::string> classes;
  std::vector<std::size_t> choice(np, 0);
  while (true) {
    std::vector<std::vector<std::vector<int>>> wiring(np);
    for (std::size_t p = 0; p < np; ++p) wiring[p] = options[p][choice[p]];
    classes.insert(min_relabeled(g, copies, wiring));
    std::size_t p = 0;
    while (p < np && ++choice[p] == options[p].size()) choice[p++] = 0;
    if (p == np) break;
  }
  return classes;
}

}  // namespace oracle

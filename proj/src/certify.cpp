#include "randcert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include "json.hpp"
#include "randcert/error.hpp"

namespace randcert::certify {

using nlohmann::json;
using lp::Relation;
using lp::Term;

namespace {

// Mixed radix with the last digit fastest.
std::size_t encode(const std::vector<int>& digits, const std::vector<int>& radix) {
  std::size_t v = 0;
  for (std::size_t k = 0; k < digits.size(); ++k) v = v * static_cast<std::size_t>(radix[k]) + digits[k];
  return v;
}

std::vector<int> decode(std::size_t v, const std::vector<int>& radix) {
  std::vector<int> digits(radix.size(), 0);
  for (std::size_t k = radix.size(); k-- > 0;) {
    digits[k] = static_cast<int>(v % static_cast<std::size_t>(radix[k]));
    v /= static_cast<std::size_t>(radix[k]);
  }
  return digits;
}

std::size_t product(const std::vector<int>& radix) {
  std::size_t n = 1;
  for (int r : radix) n *= static_cast<std::size_t>(r);
  return n;
}

int ipow(int base, int exp) {
  int v = 1;
  for (int i = 0; i < exp; ++i) v *= base;
  return v;
}

void merge_terms(std::vector<Term>& terms) {
  std::map<std::size_t, double> acc;
  for (const auto& t : terms) acc[t.var] += t.coef;
  terms.clear();
  for (const auto& [v, c] : acc)
    if (c != 0.0) terms.push_back({v, c});
}

void check_input(const ProbTable& dist, const Network& network) {
  if (dist.outcome_cards() != network.outcome_cards() || dist.setting_cards() != network.setting_cards())
    fail(ErrorCode::ShapeMismatch, "distribution cardinalities do not match the network");
  check_table(dist);
}

struct Prepared {
  EveScenario scenario;
  inflation::ScenarioGraph graph;
  inflation::ConstraintSystem system;
};

Prepared prepare(const ProbTable& dist, const Network& network, const std::vector<std::string>& targets,
                 const inflation::LevelVector& level, bool joint, const BoundOptions& options) {
  const auto problems = validate(network);
  if (!problems.empty()) fail(ErrorCode::InvalidArgument, "invalid network: " + problems.front());
  check_input(dist, network);
  Prepared p;
  p.scenario = interrupt(attach_eavesdropper(network, targets, joint));
  p.graph = inflation::scenario_graph(p.scenario, options.pin_eve_setting);
  p.system = inflation::build_constraints(inflation::enumerate_inflations(p.graph, level, options.enumerate));
  inflation::add_observed_pin(p.system, dist);
  return p;
}

std::vector<Term> guess_objective(const Prepared& p, const std::vector<int>& settings) {
  const auto& sc = p.scenario;
  if (settings.size() != sc.base.num_parties())
    fail(ErrorCode::ShapeMismatch, "setting tuple must list one setting per party");
  const auto cards = sc.base.setting_cards();
  for (std::size_t k = 0; k < settings.size(); ++k)
    if (settings[k] < 0 || settings[k] >= cards[k]) fail(ErrorCode::InvalidArgument, "setting out of range");
  int eve_setting = 0;
  if (p.graph.setting_cards[p.graph.eve] > 1) eve_setting = static_cast<int>(encode(settings, sc.eve_setting_cards));

  std::vector<int> radix;
  for (std::size_t t : sc.targets) radix.push_back(sc.base.parties()[t].outcome_card);
  std::vector<std::size_t> members(sc.targets.begin(), sc.targets.end());
  members.push_back(p.graph.eve);
  std::vector<int> event_settings;
  for (std::size_t t : sc.targets) event_settings.push_back(settings[t]);
  event_settings.push_back(eve_setting);

  std::vector<Term> objective;
  for (std::size_t v = 0; v < product(radix); ++v) {
    std::vector<int> outs = decode(v, radix);
    outs.push_back(static_cast<int>(v));
    const auto terms = p.system.event(0, members, outs, event_settings);
    objective.insert(objective.end(), terms.begin(), terms.end());
  }
  merge_terms(objective);
  return objective;
}

RandomnessBound make_bound(const Prepared& p, const lp::LinearProgram& program, const lp::SolveResult& r,
                           const std::vector<std::string>& targets, bool joint, const std::vector<int>& settings,
                           const inflation::LevelVector& level) {
  RandomnessBound b;
  b.targets = targets;
  b.joint = joint;
  b.settings = settings;
  b.level = level;
  b.status = r.status;
  b.bound = r.status == lp::Status::Optimal ? r.optimum : 1.0;
  b.inflations_used = p.system.inflations.size();
  b.lp_variables = program.num_vars;
  b.lp_rows = program.rows.size();
  b.pivots = r.iterations;
  b.max_residual = r.max_residual;
  return b;
}

RandomnessBound solve_bound(const Prepared& p, const std::vector<std::string>& targets, bool joint,
                            const std::vector<int>& settings, const inflation::LevelVector& level,
                            const BoundOptions& options) {
  lp::LinearProgram program = p.system.program;
  program.objective = guess_objective(p, settings);
  program.sense = lp::Sense::Maximize;
  return make_bound(p, program, lp::solve_lp(program, options.solver), targets, joint, settings, level);
}

}  // namespace

double modal_probability(const ProbTable& dist, const std::vector<std::size_t>& targets,
                         const std::vector<int>& settings) {
  std::vector<int> radix, sets;
  for (std::size_t t : targets) {
    radix.push_back(dist.outcome_cards().at(t));
    sets.push_back(settings.at(t));
  }
  double best = 0.0;
  for (std::size_t v = 0; v < product(radix); ++v) best = std::max(best, dist.marginal(targets, decode(v, radix), sets));
  return best;
}

lp::LinearProgram guessing_program(const ProbTable& dist, const Network& network,
                                   const std::vector<std::string>& targets, const std::vector<int>& settings,
                                   const inflation::LevelVector& level, bool joint, const BoundOptions& options) {
  const Prepared p = prepare(dist, network, targets, level, joint, options);
  lp::LinearProgram program = p.system.program;
  program.objective = guess_objective(p, settings);
  program.sense = lp::Sense::Maximize;
  return program;
}

RandomnessBound guessing_bound(const ProbTable& dist, const Network& network, const std::vector<std::string>& targets,
                               const std::vector<int>& settings, const inflation::LevelVector& level, bool joint,
                               const BoundOptions& options) {
  const Prepared p = prepare(dist, network, targets, level, joint, options);
  return solve_bound(p, targets, joint, settings, level, options);
}

RandomnessBound imported_bound(const ProbTable& dist, const Network& network, const std::vector<std::string>& targets,
                               const std::vector<int>& settings, const inflation::LevelVector& level, bool joint,
                               const std::string& solution_path, double tol, const BoundOptions& options) {
  const Prepared p = prepare(dist, network, targets, level, joint, options);
  lp::LinearProgram program = p.system.program;
  program.objective = guess_objective(p, settings);
  program.sense = lp::Sense::Maximize;
  return make_bound(p, program, lp::import_solution(program, solution_path, tol), targets, joint, settings, level);
}

RandomnessBound worst_guess_bound(const ProbTable& dist, const Network& network,
                                  const std::vector<std::string>& targets, const inflation::LevelVector& level,
                                  bool joint, const BoundOptions& options) {
  const Prepared p = prepare(dist, network, targets, level, joint, options);
  const auto cards = network.setting_cards();
  std::vector<int> radix;
  for (std::size_t t : p.scenario.targets) radix.push_back(cards[t]);
  RandomnessBound best;
  bool have = false;
  std::size_t pivots = 0;
  std::vector<double> values;
  for (std::size_t v = 0; v < product(radix); ++v) {
    const auto digits = decode(v, radix);
    std::vector<int> settings(cards.size(), 0);
    for (std::size_t k = 0; k < digits.size(); ++k) settings[p.scenario.targets[k]] = digits[k];
    RandomnessBound b = solve_bound(p, targets, joint, settings, level, options);
    values.push_back(b.bound);
    pivots += b.pivots;
    if (!have || (b.status == lp::Status::Optimal &&
                  (best.status != lp::Status::Optimal || b.bound < best.bound))) {
      best = std::move(b);
      have = true;
    }
  }
  best.pivots = pivots;
  best.worst = true;
  best.per_setting = std::move(values);
  return best;
}

const char* program_kind_name(ProgramKind kind) {
  switch (kind) {
    case ProgramKind::BilocClassicalParents: return "biloc-classical-parents";
    case ProgramKind::TriangleClassicalParents: return "triangle-classical-parents";
    case ProgramKind::BilocEmbeddedBell: return "biloc-embedded-bell";
    case ProgramKind::TriangleEmbeddedBell: return "triangle-embedded-bell";
  }
  return "unknown";
}

const char* verdict_name(Verdict verdict) {
  switch (verdict) {
    case Verdict::Feasible: return "Feasible";
    case Verdict::Inconclusive: return "Inconclusive";
    case Verdict::DisprovenByLP: return "DisprovenByLP";
  }
  return "unknown";
}

namespace {

// Unpacked bilocality variables Q(a, b, c_0 .. c_{Z-1} | x).
struct BilocShape {
  int na, nb, nc, nx, nz, ncbar;

  explicit BilocShape(const ProbTable& dist) {
    if (dist.num_parties() != 3) fail(ErrorCode::ShapeMismatch, "bilocality programs need three parties");
    const auto& oc = dist.outcome_cards();
    const auto& sc = dist.setting_cards();
    if (sc[1] != 1) fail(ErrorCode::ShapeMismatch, "the middle party must be settingless");
    na = oc[0];
    nb = oc[1];
    nc = oc[2];
    nx = sc[0];
    nz = sc[2];
    ncbar = ipow(nc, nz);
  }
  std::size_t size() const { return static_cast<std::size_t>(nx * na * nb * ncbar); }
  std::size_t q(int x, int a, int b, int cbar) const {
    return static_cast<std::size_t>(((x * na + a) * nb + b) * ncbar + cbar);
  }
  // c_z of the response vector cbar (c_0 most significant).
  int digit(int cbar, int z) const { return cbar / ipow(nc, nz - 1 - z) % nc; }
};

// Unpacking constraints and recovery. `add` receives each row; recovery rows
// are flagged.
template <class Add>
void biloc_rows(const ProbTable& dist, const BilocShape& s, Add&& add) {
  for (int x = 1; x < s.nx; ++x)
    for (int b = 0; b < s.nb; ++b)
      for (int c = 0; c < s.ncbar; ++c) {
        std::vector<Term> t;
        for (int a = 0; a < s.na; ++a) {
          t.push_back({s.q(x, a, b, c), 1.0});
          t.push_back({s.q(0, a, b, c), -1.0});
        }
        add(std::move(t), 0.0, false);
      }
  for (int x = 0; x < s.nx; ++x)
    for (int a = 0; a < s.na; ++a) {
      const double pa = dist.marginal({0}, {a}, {x});
      for (int c = 0; c < s.ncbar; ++c) {
        std::vector<Term> t;
        for (int b = 0; b < s.nb; ++b) t.push_back({s.q(x, a, b, c), 1.0});
        for (int a2 = 0; a2 < s.na; ++a2)
          for (int b = 0; b < s.nb; ++b) t.push_back({s.q(x, a2, b, c), -pa});
        merge_terms(t);
        add(std::move(t), 0.0, false);
      }
    }
  for (int x = 0; x < s.nx; ++x)
    for (int z = 0; z < s.nz; ++z)
      for (int a = 0; a < s.na; ++a)
        for (int b = 0; b < s.nb; ++b)
          for (int cv = 0; cv < s.nc; ++cv) {
            std::vector<Term> t;
            for (int c = 0; c < s.ncbar; ++c)
              if (s.digit(c, z) == cv) t.push_back({s.q(x, a, b, c), 1.0});
            add(std::move(t), dist({x, 0, z}, {a, b, cv}), true);
          }
}

// Eve's product alphabet for the embedded-Bell programs.
struct EveAlphabet {
  bool guess_a = false, guess_b = false, guess_c = false;
  std::vector<int> radix;  // A part digits (one per A setting), then B, then C

  EveAlphabet(const std::vector<std::size_t>& cover, int na, int nx, int nb, int ncbar) {
    if (cover.empty()) fail(ErrorCode::InvalidArgument, "the cover must name at least one party");
    for (std::size_t p : cover) {
      if (p > 2) fail(ErrorCode::InvalidArgument, "cover parties are A, B and C");
      guess_a = guess_a || p == 0;
      guess_b = guess_b || p == 1;
      guess_c = guess_c || p == 2;
    }
    if (guess_a)
      for (int x = 0; x < nx; ++x) radix.push_back(na);
    if (guess_b) radix.push_back(nb);
    if (guess_c) radix.push_back(ncbar);
  }
  int size() const { return static_cast<int>(product(radix)); }
  // Whether guess e agrees with outcome a at setting x, outcome b and hidden
  // setting y.
  bool agrees(int e, int nx, int x, int a, int b, int y) const {
    const auto d = decode(static_cast<std::size_t>(e), radix);
    std::size_t k = 0;
    if (guess_a) {
      if (d[static_cast<std::size_t>(x)] != a) return false;
      k += static_cast<std::size_t>(nx);
    }
    if (guess_b && d[k++] != b) return false;
    if (guess_c && d[k] != y) return false;
    return true;
  }
};

// Embedded tripartite box Q'(a, b, e | x, y, s) laid out in block A from
// `offset`.
struct EmbeddedBox {
  int na, nb, ne, nx, ny;
  std::size_t offset;
  std::size_t size() const { return static_cast<std::size_t>(nx * ny * ny * na * nb * ne); }
  std::size_t v(int x, int y, int s, int a, int b, int e) const {
    return offset + static_cast<std::size_t>((((((x * ny + y) * ny + s) * na + a) * nb + b) * ne) + e);
  }
};

void add_box_rows(lp::BilinearProgram& bp, const EmbeddedBox& q, const EveAlphabet& eve) {
  auto row = [&](std::vector<Term> t, double rhs) {
    lp::BilinearRow r;
    r.lin_a = std::move(t);
    r.relation = Relation::Equal;
    r.rhs = rhs;
    bp.add_row(std::move(r));
  };
  for (int x = 0; x < q.nx; ++x)
    for (int y = 0; y < q.ny; ++y)
      for (int s = 0; s < q.ny; ++s) {
        std::vector<Term> t;
        for (int a = 0; a < q.na; ++a)
          for (int b = 0; b < q.nb; ++b)
            for (int e = 0; e < q.ne; ++e) t.push_back({q.v(x, y, s, a, b, e), 1.0});
        row(std::move(t), 1.0);
      }
  // Agreement when Eve's hidden setting equals Bob's.
  for (int x = 0; x < q.nx; ++x)
    for (int y = 0; y < q.ny; ++y)
      for (int a = 0; a < q.na; ++a)
        for (int b = 0; b < q.nb; ++b)
          for (int e = 0; e < q.ne; ++e)
            if (!eve.agrees(e, q.nx, x, a, b, y)) bp.upper_a[q.v(x, y, y, a, b, e)] = 0.0;
  // No-signalling of the tripartite box.
  for (int x = 1; x < q.nx; ++x)
    for (int y = 0; y < q.ny; ++y)
      for (int s = 0; s < q.ny; ++s)
        for (int b = 0; b < q.nb; ++b)
          for (int e = 0; e < q.ne; ++e) {
            std::vector<Term> t;
            for (int a = 0; a < q.na; ++a) {
              t.push_back({q.v(x, y, s, a, b, e), 1.0});
              t.push_back({q.v(0, y, s, a, b, e), -1.0});
            }
            row(std::move(t), 0.0);
          }
  for (int x = 0; x < q.nx; ++x)
    for (int y = 1; y < q.ny; ++y)
      for (int s = 0; s < q.ny; ++s)
        for (int a = 0; a < q.na; ++a)
          for (int e = 0; e < q.ne; ++e) {
            std::vector<Term> t;
            for (int b = 0; b < q.nb; ++b) {
              t.push_back({q.v(x, y, s, a, b, e), 1.0});
              t.push_back({q.v(x, 0, s, a, b, e), -1.0});
            }
            row(std::move(t), 0.0);
          }
  for (int x = 0; x < q.nx; ++x)
    for (int y = 0; y < q.ny; ++y)
      for (int s = 1; s < q.ny; ++s)
        for (int a = 0; a < q.na; ++a)
          for (int b = 0; b < q.nb; ++b) {
            std::vector<Term> t;
            for (int e = 0; e < q.ne; ++e) {
              t.push_back({q.v(x, y, s, a, b, e), 1.0});
              t.push_back({q.v(x, y, 0, a, b, e), -1.0});
            }
            row(std::move(t), 0.0);
          }
}

// Recovery rows are tracked by index so certificates can report how well the
// model reproduces the observed table.
struct TrackedBilinear {
  lp::BilinearProgram program;
  std::vector<std::size_t> recovery_rows;
};

// Settingless triangle with roles (A, B, C) = parties (0, 1, 2) of `dist`:
// Q(a, b, c_1..c_d | x) in block A from offset 0, Q_C(cbar) then Q'(z) in
// block B.
struct TriangleShape {
  int na, nb, nc, d, ncbar;
  explicit TriangleShape(const ProbTable& dist, int hidden) : d(hidden) {
    if (dist.num_parties() != 3) fail(ErrorCode::ShapeMismatch, "triangle programs need three parties");
    for (int s : dist.setting_cards())
      if (s != 1) fail(ErrorCode::ShapeMismatch, "triangle programs take settingless distributions");
    if (d < 1) fail(ErrorCode::InvalidArgument, "hidden cardinality must be at least 1");
    na = dist.outcome_cards()[0];
    nb = dist.outcome_cards()[1];
    nc = dist.outcome_cards()[2];
    ncbar = ipow(nc, d);
  }
  std::size_t q_size() const { return static_cast<std::size_t>(d * na * nb * ncbar); }
  std::size_t q(int x, int a, int b, int cbar) const {
    return static_cast<std::size_t>(((x * na + a) * nb + b) * ncbar + cbar);
  }
  std::size_t qc(int cbar) const { return static_cast<std::size_t>(cbar); }
  std::size_t qz(int z) const { return static_cast<std::size_t>(ncbar + z); }
  int digit(int cbar, int z) const { return cbar / ipow(nc, d - 1 - z) % nc; }
};

TrackedBilinear triangle_core(const ProbTable& dist, const TriangleShape& s, std::size_t extra_a) {
  TrackedBilinear out;
  auto& bp = out.program;
  for (std::size_t i = 0; i < s.q_size() + extra_a; ++i) bp.add_a(0.0, 1.0);
  for (int c = 0; c < s.ncbar; ++c) bp.add_b(0.0, 1.0);
  for (int z = 0; z < s.d; ++z) bp.add_b(0.0, 1.0);
  auto lin = [&](std::vector<Term> a, std::vector<Term> b, double rhs) {
    lp::BilinearRow r;
    r.lin_a = std::move(a);
    r.lin_b = std::move(b);
    r.rhs = rhs;
    bp.add_row(std::move(r));
  };
  {
    std::vector<Term> t, u;
    for (int c = 0; c < s.ncbar; ++c) t.push_back({s.qc(c), 1.0});
    for (int z = 0; z < s.d; ++z) u.push_back({s.qz(z), 1.0});
    lin({}, std::move(t), 1.0);
    lin({}, std::move(u), 1.0);
  }
  // Q_{B,C..|X} independent of X.
  for (int x = 1; x < s.d; ++x)
    for (int b = 0; b < s.nb; ++b)
      for (int c = 0; c < s.ncbar; ++c) {
        std::vector<Term> t;
        for (int a = 0; a < s.na; ++a) {
          t.push_back({s.q(x, a, b, c), 1.0});
          t.push_back({s.q(0, a, b, c), -1.0});
        }
        lin(std::move(t), {}, 0.0);
      }
  // Q_C is the C-vector marginal.
  for (int c = 0; c < s.ncbar; ++c) {
    std::vector<Term> t;
    for (int a = 0; a < s.na; ++a)
      for (int b = 0; b < s.nb; ++b) t.push_back({s.q(0, a, b, c), 1.0});
    lin(std::move(t), {{s.qc(c), -1.0}}, 0.0);
  }
  // Q_{A,C..|X} = Q_{A|X} Q_C.
  for (int x = 0; x < s.d; ++x)
    for (int a = 0; a < s.na; ++a)
      for (int c = 0; c < s.ncbar; ++c) {
        lp::BilinearRow r;
        for (int b = 0; b < s.nb; ++b) r.lin_a.push_back({s.q(x, a, b, c), 1.0});
        for (int b = 0; b < s.nb; ++b)
          for (int c2 = 0; c2 < s.ncbar; ++c2) r.bilinear.push_back({s.q(x, a, b, c2), s.qc(c), -1.0});
        bp.add_row(std::move(r));
      }
  // Mixture over the hidden setting reproduces the observed table.
  for (int a = 0; a < s.na; ++a)
    for (int b = 0; b < s.nb; ++b)
      for (int cv = 0; cv < s.nc; ++cv) {
        lp::BilinearRow r;
        for (int z = 0; z < s.d; ++z)
          for (int c = 0; c < s.ncbar; ++c)
            if (s.digit(c, z) == cv) r.bilinear.push_back({s.q(z, a, b, c), s.qz(z), 1.0});
        r.rhs = dist({0, 0, 0}, {a, b, cv});
        out.recovery_rows.push_back(bp.rows.size());
        bp.add_row(std::move(r));
      }
  return out;
}

TrackedBilinear biloc_embedded(const ProbTable& dist, const std::vector<std::size_t>& cover) {
  check_table(dist);
  const BilocShape s(dist);
  const EveAlphabet eve(cover, s.na, s.nx, s.nb, s.ncbar);
  const EmbeddedBox box{s.na, s.nb, eve.size(), s.nx, s.ncbar, 0};
  TrackedBilinear out;
  auto& bp = out.program;
  for (std::size_t i = 0; i < box.size(); ++i) bp.add_a(0.0, 1.0);
  for (std::size_t i = 0; i < s.size(); ++i) bp.add_b(0.0, 1.0);
  biloc_rows(dist, s, [&](std::vector<Term> t, double rhs, bool recovery) {
    lp::BilinearRow r;
    r.lin_b = std::move(t);
    r.rhs = rhs;
    if (recovery) out.recovery_rows.push_back(bp.rows.size());
    bp.add_row(std::move(r));
  });
  add_box_rows(bp, box, eve);
  // Q'(a, b | x, y = cbar) Q_C(cbar) = Q(a, b, cbar | x).
  for (int x = 0; x < s.nx; ++x)
    for (int c = 0; c < s.ncbar; ++c)
      for (int a = 0; a < s.na; ++a)
        for (int b = 0; b < s.nb; ++b) {
          lp::BilinearRow r;
          r.lin_b.push_back({s.q(x, a, b, c), -1.0});
          for (int e = 0; e < box.ne; ++e)
            for (int a2 = 0; a2 < s.na; ++a2)
              for (int b2 = 0; b2 < s.nb; ++b2) r.bilinear.push_back({box.v(x, c, 0, a, b, e), s.q(x, a2, b2, c), 1.0});
          bp.add_row(std::move(r));
        }
  return out;
}

TrackedBilinear triangle_embedded(const ProbTable& dist, int d, const std::vector<std::size_t>& cover) {
  check_table(dist);
  const TriangleShape s(dist, d);
  const EveAlphabet eve(cover, s.na, s.d, s.nb, s.ncbar);
  const EmbeddedBox box{s.na, s.nb, eve.size(), s.d, s.ncbar, s.q_size()};
  TrackedBilinear out = triangle_core(dist, s, box.size());
  auto& bp = out.program;
  add_box_rows(bp, box, eve);
  for (int x = 0; x < s.d; ++x)
    for (int c = 0; c < s.ncbar; ++c)
      for (int a = 0; a < s.na; ++a)
        for (int b = 0; b < s.nb; ++b) {
          lp::BilinearRow r;
          r.lin_a.push_back({s.q(x, a, b, c), -1.0});
          for (int e = 0; e < box.ne; ++e) r.bilinear.push_back({box.v(x, c, 0, a, b, e), s.qc(c), 1.0});
          bp.add_row(std::move(r));
        }
  return out;
}

NoRandomnessCertificate run_bilinear(const TrackedBilinear& tb, ProgramKind kind, std::vector<std::string> parties,
                                     int hidden_card, const NoRandomnessOptions& options) {
  NoRandomnessCertificate cert;
  cert.kind = kind;
  cert.parties = std::move(parties);
  cert.hidden_card = hidden_card;
  const lp::BilinearResult r = lp::solve_bilinear(tb.program, options.bilinear);
  cert.restarts_tried = r.restarts_tried;
  cert.restart = r.restart;
  cert.max_residual = r.residual;
  if (!r.feasible) return cert;
  const lp::ResidualReport rep = lp::verify_assignment(tb.program, r.a, r.b);
  cert.max_residual = std::max(rep.max_violation, rep.bound_violation);
  for (std::size_t row : tb.recovery_rows) cert.recovery_error = std::max(cert.recovery_error, rep.row_violation[row]);
  cert.assignment = r.a;
  cert.assignment.insert(cert.assignment.end(), r.b.begin(), r.b.end());
  cert.block_a_size = r.a.size();
  if (cert.max_residual <= options.bilinear.tol && cert.recovery_error <= options.bilinear.tol)
    cert.verdict = Verdict::Feasible;
  return cert;
}

std::vector<std::string> party_names(const ProbTable& dist, const std::vector<std::size_t>& parties) {
  static const char* defaults[] = {"A", "B", "C"};
  std::vector<std::string> out;
  for (std::size_t p : parties)
    out.push_back(p < dist.labels.size() ? dist.labels[p] : std::string(defaults[std::min<std::size_t>(p, 2)]));
  return out;
}

}  // namespace

lp::LinearProgram biloc_charlie_program(const ProbTable& dist) {
  const BilocShape s(dist);
  lp::LinearProgram program;
  for (int x = 0; x < s.nx; ++x)
    for (int a = 0; a < s.na; ++a)
      for (int b = 0; b < s.nb; ++b)
        for (int c = 0; c < s.ncbar; ++c) {
          std::string name = "Q_" + std::to_string(a) + "_" + std::to_string(b) + "_";
          for (int z = 0; z < s.nz; ++z) name += std::to_string(s.digit(c, z));
          program.add_variable(0.0, 1.0, name + "_" + std::to_string(x));
        }
  biloc_rows(dist, s, [&](std::vector<Term> t, double rhs, bool) {
    program.add_row(std::move(t), Relation::Equal, rhs);
  });
  program.sense = lp::Sense::Feasibility;
  return program;
}

NoRandomnessCertificate no_randomness_biloc_charlie(const ProbTable& dist, const NoRandomnessOptions& options) {
  check_table(dist);
  const BilocShape s(dist);
  const lp::LinearProgram program = biloc_charlie_program(dist);
  lp::SolverOptions so = options.solver;
  so.farkas = true;
  const lp::SolveResult r = lp::solve_lp(program, so);
  NoRandomnessCertificate cert;
  cert.kind = ProgramKind::BilocClassicalParents;
  cert.parties = party_names(dist, {2});
  if (r.status == lp::Status::Optimal) {
    std::vector<double> x = r.assignment;
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = std::clamp(x[j], program.lower[j], program.upper[j]) + 0.0;
    const lp::ResidualReport rep = lp::verify_assignment(program, x);
    cert.max_residual = std::max(rep.max_violation, rep.bound_violation);
    // Recovery rows come last: one per (x, z, a, b, c).
    const std::size_t recovery = static_cast<std::size_t>(s.nx * s.nz * s.na * s.nb * s.nc);
    for (std::size_t k = program.rows.size() - recovery; k < program.rows.size(); ++k)
      cert.recovery_error = std::max(cert.recovery_error, rep.row_violation[k]);
    cert.assignment = std::move(x);
    cert.block_a_size = cert.assignment.size();
    if (cert.max_residual <= so.feasibility_tol) cert.verdict = Verdict::Feasible;
  } else if (r.status == lp::Status::Infeasible) {
    cert.farkas = r.farkas;
    cert.farkas_verified = !r.farkas.empty() && lp::verify_farkas_exact(program, r.farkas);
    cert.verdict = Verdict::DisprovenByLP;
  }
  return cert;
}

lp::BilinearProgram triangle_classical_program(const ProbTable& dist, int d, std::size_t party) {
  if (dist.num_parties() != 3 || party > 2) fail(ErrorCode::ShapeMismatch, "triangle programs need three parties");
  std::vector<std::size_t> order;
  for (std::size_t p = 0; p < 3; ++p)
    if (p != party) order.push_back(p);
  order.push_back(party);
  const ProbTable roles = dist.marginal_table(order);
  return triangle_core(roles, TriangleShape(roles, d), 0).program;
}

NoRandomnessCertificate no_randomness_triangle_classical_parents(const ProbTable& dist, int d, std::size_t party,
                                                                 const NoRandomnessOptions& options) {
  check_table(dist);
  if (dist.num_parties() != 3 || party > 2) fail(ErrorCode::ShapeMismatch, "triangle programs need three parties");
  std::vector<std::size_t> order;
  for (std::size_t p = 0; p < 3; ++p)
    if (p != party) order.push_back(p);
  order.push_back(party);
  const ProbTable roles = dist.marginal_table(order);
  const TrackedBilinear tb = triangle_core(roles, TriangleShape(roles, d), 0);
  return run_bilinear(tb, ProgramKind::TriangleClassicalParents, party_names(dist, {party}), d, options);
}

lp::BilinearProgram biloc_embedded_program(const ProbTable& dist, const std::vector<std::size_t>& cover) {
  return biloc_embedded(dist, cover).program;
}

NoRandomnessCertificate no_randomness_biloc_bob_embedded(const ProbTable& dist, const NoRandomnessOptions& options) {
  const BilocShape s(dist);
  return run_bilinear(biloc_embedded(dist, {1}), ProgramKind::BilocEmbeddedBell, party_names(dist, {1}), s.ncbar,
                      options);
}

lp::BilinearProgram triangle_embedded_program(const ProbTable& dist, int d, const std::vector<std::size_t>& cover) {
  return triangle_embedded(dist, d, cover).program;
}

NoRandomnessCertificate no_randomness_triangle_bob_embedded(const ProbTable& dist, int d,
                                                            const NoRandomnessOptions& options) {
  return run_bilinear(triangle_embedded(dist, d, {1}), ProgramKind::TriangleEmbeddedBell, party_names(dist, {1}), d,
                      options);
}

NoRandomnessCertificate multiparty_extension(ProgramKind kind, const ProbTable& dist,
                                             const std::vector<std::string>& cover, int d,
                                             const NoRandomnessOptions& options) {
  std::vector<std::size_t> idx;
  for (const auto& name : cover) {
    std::size_t p = 3;
    for (std::size_t k = 0; k < 3; ++k)
      if (party_names(dist, {k}).front() == name) p = k;
    if (p == 3) fail(ErrorCode::UnknownParty, "unknown party in cover: " + name);
    if (std::find(idx.begin(), idx.end(), p) == idx.end()) idx.push_back(p);
  }
  std::sort(idx.begin(), idx.end());
  switch (kind) {
    case ProgramKind::BilocEmbeddedBell:
      return run_bilinear(biloc_embedded(dist, idx), kind, party_names(dist, idx), BilocShape(dist).ncbar, options);
    case ProgramKind::TriangleEmbeddedBell:
      return run_bilinear(triangle_embedded(dist, d, idx), kind, party_names(dist, idx), d, options);
    default: fail(ErrorCode::InvalidArgument, "multiparty covers apply to embedded-Bell programs");
  }
}

namespace {

double round6(double v) { return std::round(v * 1e6) / 1e6; }

json level_json(const inflation::LevelVector& level) { return inflation::level_to_text(level); }

}  // namespace

std::string bound_report(const RandomnessBound& b, const ReportMeta& meta) {
  json j;
  j["program"] = meta.program.empty() ? "guessing-bound" : meta.program;
  j["distribution"] = meta.fingerprint;
  j["targets"] = b.targets;
  j["joint"] = b.joint;
  j["settings"] = b.worst ? json("worst") : json(b.settings);
  if (b.worst) j["minimizing_settings"] = b.settings;
  j["level"] = level_json(b.level);
  j["status"] = lp::status_name(b.status);
  j["bound"] = round6(b.bound);
  if (b.worst) {
    json per = json::array();
    for (double v : b.per_setting) per.push_back(round6(v));
    j["per_setting"] = per;
  }
  j["certifies_randomness"] = b.status == lp::Status::Optimal && b.bound < 1.0 - 1e-6;
  j["inflations"] = b.inflations_used;
  j["lp_variables"] = b.lp_variables;
  j["lp_rows"] = b.lp_rows;
  j["pivots"] = b.pivots;
  j["max_residual"] = b.max_residual;
  j["backend"] = meta.backend;
  j["seed"] = meta.seed;
  j["wall_time"] = meta.wall_seconds;
  return j.dump(2) + "\n";
}

std::string certificate_report(const NoRandomnessCertificate& c, const ReportMeta& meta) {
  json j;
  j["program"] = meta.program.empty() ? program_kind_name(c.kind) : meta.program;
  j["distribution"] = meta.fingerprint;
  j["parties"] = c.parties;
  j["d"] = c.hidden_card;
  j["status"] = verdict_name(c.verdict);
  j["residual"] = c.max_residual;
  j["recovery_error"] = c.recovery_error;
  if (c.kind != ProgramKind::BilocClassicalParents) {
    j["restarts_tried"] = c.restarts_tried;
    if (c.verdict == Verdict::Feasible) j["restart"] = c.restart;
  }
  if (c.verdict == Verdict::DisprovenByLP) j["farkas_verified"] = c.farkas_verified;
  if (c.verdict == Verdict::Feasible) j["assignment"] = c.assignment;
  j["backend"] = meta.backend;
  j["seed"] = meta.seed;
  j["wall_time"] = meta.wall_seconds;
  return j.dump(2) + "\n";
}

void write_atomically(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::IoError, "cannot rename into " + path);
  }
}

}  // namespace randcert::certify

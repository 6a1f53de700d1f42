#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <random>
#include <thread>

#include "randcert/error.hpp"
#include "randcert/lp.hpp"

namespace randcert::lp {

std::size_t BilinearProgram::add_a(double lo, double hi) {
  lower_a.push_back(lo);
  upper_a.push_back(hi);
  return lower_a.size() - 1;
}

std::size_t BilinearProgram::add_b(double lo, double hi) {
  lower_b.push_back(lo);
  upper_b.push_back(hi);
  return lower_b.size() - 1;
}

void BilinearProgram::add_row(BilinearRow row) { rows.push_back(std::move(row)); }

void BilinearProgram::validate() const {
  if (upper_a.size() != lower_a.size() || upper_b.size() != lower_b.size())
    fail(ErrorCode::InvalidArgument, "bilinear program: bound vectors differ in length");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (!std::isfinite(row.rhs)) fail(ErrorCode::InvalidArgument, "bilinear row " + std::to_string(r) + ": rhs not finite");
    for (const auto& t : row.lin_a)
      if (t.var >= num_a() || !std::isfinite(t.coef))
        fail(ErrorCode::InvalidArgument, "bilinear row " + std::to_string(r) + ": bad block-a term");
    for (const auto& t : row.lin_b)
      if (t.var >= num_b() || !std::isfinite(t.coef))
        fail(ErrorCode::InvalidArgument, "bilinear row " + std::to_string(r) + ": bad block-b term");
    for (const auto& t : row.bilinear)
      if (t.a >= num_a() || t.b >= num_b() || !std::isfinite(t.coef))
        fail(ErrorCode::InvalidArgument, "bilinear row " + std::to_string(r) + ": bad product term");
  }
}

ResidualReport verify_assignment(const BilinearProgram& bp, const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != bp.num_a() || b.size() != bp.num_b())
    fail(ErrorCode::SolutionShapeMismatch, "assignment has " + std::to_string(a.size()) + "+" + std::to_string(b.size()) +
                                               " values, program has " + std::to_string(bp.num_a()) + "+" +
                                               std::to_string(bp.num_b()));
  ResidualReport rep;
  rep.row_violation.resize(bp.rows.size(), 0.0);
  for (std::size_t r = 0; r < bp.rows.size(); ++r) {
    const auto& row = bp.rows[r];
    double lhs = 0.0;
    for (const auto& t : row.lin_a) lhs += t.coef * a[t.var];
    for (const auto& t : row.lin_b) lhs += t.coef * b[t.var];
    for (const auto& t : row.bilinear) lhs += t.coef * a[t.a] * b[t.b];
    double v = 0.0;
    switch (row.relation) {
      case Relation::Equal: v = std::abs(lhs - row.rhs); break;
      case Relation::LessEqual: v = std::max(0.0, lhs - row.rhs); break;
      case Relation::GreaterEqual: v = std::max(0.0, row.rhs - lhs); break;
    }
    rep.row_violation[r] = v;
    if (v > rep.max_violation) {
      rep.max_violation = v;
      rep.worst_row = r;
    }
  }
  auto bounds = [&](const std::vector<double>& x, const std::vector<double>& lo, const std::vector<double>& hi) {
    for (std::size_t j = 0; j < x.size(); ++j)
      rep.bound_violation = std::max({rep.bound_violation, lo[j] - x[j], x[j] - hi[j]});
  };
  bounds(a, bp.lower_a, bp.upper_a);
  bounds(b, bp.lower_b, bp.upper_b);
  rep.max_violation = std::max(rep.max_violation, rep.bound_violation);
  return rep;
}

namespace {

// Linear program in one block with the other block held at `fixed`.
// With `slacks` each row gets elastic variables and the objective is their
// sum; otherwise it is a pure feasibility problem.
LinearProgram restrict_to_block(const BilinearProgram& bp, bool block_a, const std::vector<double>& fixed, bool slacks) {
  LinearProgram lp;
  const auto& lo = block_a ? bp.lower_a : bp.lower_b;
  const auto& hi = block_a ? bp.upper_a : bp.upper_b;
  for (std::size_t j = 0; j < lo.size(); ++j) lp.add_variable(lo[j], hi[j]);
  lp.sense = slacks ? Sense::Minimize : Sense::Feasibility;
  std::vector<double> dense(lo.size(), 0.0);
  std::vector<std::size_t> touched;
  for (const auto& row : bp.rows) {
    double rhs = row.rhs;
    auto add = [&](std::size_t v, double c) {
      if (dense[v] == 0.0) touched.push_back(v);
      dense[v] += c;
      if (dense[v] == 0.0) dense[v] = 1e-300;
    };
    for (const auto& t : (block_a ? row.lin_a : row.lin_b)) add(t.var, t.coef);
    for (const auto& t : (block_a ? row.lin_b : row.lin_a)) rhs -= t.coef * fixed[t.var];
    for (const auto& t : row.bilinear) {
      if (block_a)
        add(t.a, t.coef * fixed[t.b]);
      else
        add(t.b, t.coef * fixed[t.a]);
    }
    std::sort(touched.begin(), touched.end());
    std::vector<Term> terms;
    for (std::size_t v : touched) {
      if (std::abs(dense[v]) > 1e-14) terms.push_back({v, dense[v]});
      dense[v] = 0.0;
    }
    touched.clear();
    if (slacks) {
      if (row.relation != Relation::LessEqual) {
        std::size_t s = lp.add_variable(0.0, kInf);
        terms.push_back({s, 1.0});
        lp.objective.push_back({s, 1.0});
      }
      if (row.relation != Relation::GreaterEqual) {
        std::size_t s = lp.add_variable(0.0, kInf);
        terms.push_back({s, -1.0});
        lp.objective.push_back({s, 1.0});
      }
    }
    lp.add_row(std::move(terms), row.relation, rhs);
  }
  return lp;
}

std::vector<double> take_block(const std::vector<double>& x, std::size_t n) {
  return std::vector<double>(x.begin(), x.begin() + static_cast<long>(n));
}

struct Attempt {
  bool feasible = false;
  std::vector<double> a, b;
  double residual = kInf;
};

double merit(const BilinearProgram& bp, const std::vector<double>& a, const std::vector<double>& b) {
  auto rep = verify_assignment(bp, a, b);
  double total = 0.0;
  for (double v : rep.row_violation) total += v;
  return total;
}

// One trust-region step: products are linearized around (a, b) and the L1
// row violation is minimized jointly over both blocks within radius rho.
SolveResult linearized_step(const BilinearProgram& bp, const std::vector<double>& a, const std::vector<double>& b,
                            double rho) {
  LinearProgram lp;
  const std::size_t na = bp.num_a(), nb = bp.num_b();
  for (std::size_t j = 0; j < na; ++j)
    lp.add_variable(std::max(bp.lower_a[j], a[j] - rho), std::min(bp.upper_a[j], a[j] + rho));
  for (std::size_t j = 0; j < nb; ++j)
    lp.add_variable(std::max(bp.lower_b[j], b[j] - rho), std::min(bp.upper_b[j], b[j] + rho));
  lp.sense = Sense::Minimize;
  std::vector<double> dense(na + nb, 0.0);
  std::vector<std::size_t> touched;
  auto add = [&](std::size_t v, double c) {
    if (dense[v] == 0.0) touched.push_back(v);
    dense[v] += c;
    if (dense[v] == 0.0) dense[v] = 1e-300;
  };
  for (const auto& row : bp.rows) {
    double rhs = row.rhs;
    for (const auto& t : row.lin_a) add(t.var, t.coef);
    for (const auto& t : row.lin_b) add(na + t.var, t.coef);
    for (const auto& t : row.bilinear) {
      add(t.a, t.coef * b[t.b]);
      add(na + t.b, t.coef * a[t.a]);
      rhs += t.coef * a[t.a] * b[t.b];
    }
    std::sort(touched.begin(), touched.end());
    std::vector<Term> terms;
    for (std::size_t v : touched) {
      if (std::abs(dense[v]) > 1e-14) terms.push_back({v, dense[v]});
      dense[v] = 0.0;
    }
    touched.clear();
    if (row.relation != Relation::LessEqual) {
      std::size_t s = lp.add_variable(0.0, kInf);
      terms.push_back({s, 1.0});
      lp.objective.push_back({s, 1.0});
    }
    if (row.relation != Relation::GreaterEqual) {
      std::size_t s = lp.add_variable(0.0, kInf);
      terms.push_back({s, -1.0});
      lp.objective.push_back({s, 1.0});
    }
    lp.add_row(std::move(terms), row.relation, rhs);
  }
  return solve_lp(lp);
}

// Closest point in L1 to `b0` satisfying the rows that involve block B
// only. Returns `b0` unchanged when there are no such rows or the LP fails.
std::vector<double> project_b(const BilinearProgram& bp, const std::vector<double>& b0) {
  LinearProgram lp;
  const std::size_t nb = bp.num_b();
  for (std::size_t j = 0; j < nb; ++j) lp.add_variable(bp.lower_b[j], bp.upper_b[j]);
  lp.sense = Sense::Minimize;
  bool any = false;
  for (const auto& row : bp.rows) {
    if (!row.lin_a.empty() || !row.bilinear.empty() || row.lin_b.empty()) continue;
    lp.add_row(row.lin_b, row.relation, row.rhs);
    any = true;
  }
  if (!any) return b0;
  for (std::size_t j = 0; j < nb; ++j) {
    const std::size_t up = lp.add_variable(0.0, kInf);
    const std::size_t down = lp.add_variable(0.0, kInf);
    lp.add_row({{j, 1.0}, {up, -1.0}, {down, 1.0}}, Relation::Equal, b0[j]);
    lp.objective.push_back({up, 1.0});
    lp.objective.push_back({down, 1.0});
  }
  auto r = solve_lp(lp);
  if (r.status != Status::Optimal) return b0;
  return take_block(r.assignment, nb);
}

Attempt run_restart(const BilinearProgram& bp, const BilinearOptions& options, std::size_t index) {
  std::mt19937_64 rng(options.seed * 1000003ULL + index);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> b(bp.num_b());
  const bool corner = index % 2 == 1;
  for (std::size_t j = 0; j < b.size(); ++j) {
    double lo = bp.lower_b[j], hi = bp.upper_b[j];
    if (!std::isfinite(lo)) lo = std::isfinite(hi) ? hi - 1.0 : 0.0;
    if (!std::isfinite(hi)) hi = lo + 1.0;
    b[j] = corner ? (u(rng) < 0.5 ? lo : hi) : lo + (hi - lo) * u(rng);
  }
  b = project_b(bp, b);
  std::vector<double> a(bp.num_a(), 0.0);
  auto ra = solve_lp(restrict_to_block(bp, true, b, true));
  if (ra.status == Status::Optimal) a = take_block(ra.assignment, bp.num_a());

  auto accept = [&](const std::vector<double>& ca, const std::vector<double>& cb) -> std::optional<Attempt> {
    auto rep = verify_assignment(bp, ca, cb);
    if (rep.max_violation <= options.tol) return Attempt{true, ca, cb, rep.max_violation};
    return std::nullopt;
  };
  auto polish = [&]() -> std::optional<Attempt> {
    if (auto done = accept(a, b)) return done;
    auto pa = solve_lp(restrict_to_block(bp, true, b, false));
    if (pa.status == Status::Optimal)
      if (auto done = accept(pa.assignment, b)) return done;
    auto pb = solve_lp(restrict_to_block(bp, false, a, false));
    if (pb.status == Status::Optimal)
      if (auto done = accept(a, pb.assignment)) return done;
    return std::nullopt;
  };

  double current = merit(bp, a, b);
  // Alternating phase: each block in turn minimizes the violation with the
  // other held fixed.
  for (std::size_t round = 0; round < options.alternating_rounds; ++round) {
    if (current <= 1e-6)
      if (auto done = polish()) return *done;
    auto rb = solve_lp(restrict_to_block(bp, false, a, true));
    if (rb.status != Status::Optimal) break;
    b = take_block(rb.assignment, bp.num_b());
    ra = solve_lp(restrict_to_block(bp, true, b, true));
    if (ra.status != Status::Optimal) break;
    a = take_block(ra.assignment, bp.num_a());
    const double next = merit(bp, a, b);
    const bool stalled = next > current * 0.99;
    current = std::min(current, next);
    if (stalled) break;
  }
  current = merit(bp, a, b);
  double rho = 0.5;
  for (std::size_t round = 0; round < options.max_rounds && rho > 1e-12; ++round) {
    if (current <= 1e-6)
      if (auto done = polish()) return *done;
    auto step = linearized_step(bp, a, b, rho);
    if (step.status != Status::Optimal) break;
    std::vector<double> na = take_block(step.assignment, bp.num_a());
    std::vector<double> nb(step.assignment.begin() + static_cast<long>(bp.num_a()),
                           step.assignment.begin() + static_cast<long>(bp.num_a() + bp.num_b()));
    const double predicted = current - step.optimum;
    const double trial = merit(bp, na, nb);
    if (predicted <= 1e-14 * std::max(1.0, current)) {
      // Linearization is stationary: a local minimum of the violation.
      if (current > 1e-6) break;
      rho *= 0.25;
      continue;
    }
    const double ratio = (current - trial) / predicted;
    if (ratio > 0.1) {
      a = std::move(na);
      b = std::move(nb);
      current = trial;
      if (ratio > 0.75) rho = std::min(1e3, 2.0 * rho);
    } else {
      rho *= 0.25;
    }
  }
  if (auto done = polish()) return *done;
  Attempt out;
  out.a = a;
  out.b = b;
  out.residual = verify_assignment(bp, a, b).max_violation;
  return out;
}

}  // namespace

BilinearResult solve_bilinear(const BilinearProgram& bp, const BilinearOptions& options) {
  bp.validate();
  BilinearResult result;

  // Rows without products, over both blocks jointly.
  LinearProgram linear;
  for (std::size_t j = 0; j < bp.num_a(); ++j) linear.add_variable(bp.lower_a[j], bp.upper_a[j]);
  for (std::size_t j = 0; j < bp.num_b(); ++j) linear.add_variable(bp.lower_b[j], bp.upper_b[j]);
  for (const auto& row : bp.rows) {
    if (!row.bilinear.empty()) continue;
    std::vector<Term> terms = row.lin_a;
    for (const auto& t : row.lin_b) terms.push_back({bp.num_a() + t.var, t.coef});
    linear.add_row(std::move(terms), row.relation, row.rhs);
  }
  result.linear_precheck = solve_lp(linear).status;
  if (result.linear_precheck == Status::Infeasible) return result;

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  std::size_t next = 0;
  while (next < options.restarts) {
    std::size_t batch = std::min<std::size_t>(threads, options.restarts - next);
    std::vector<Attempt> attempts(batch);
    if (batch == 1) {
      attempts[0] = run_restart(bp, options, next);
    } else {
      std::vector<std::future<Attempt>> jobs;
      for (std::size_t k = 0; k < batch; ++k)
        jobs.push_back(std::async(std::launch::async, run_restart, std::cref(bp), std::cref(options), next + k));
      for (std::size_t k = 0; k < batch; ++k) attempts[k] = jobs[k].get();
    }
    for (std::size_t k = 0; k < batch; ++k) {
      auto& at = attempts[k];
      result.restarts_tried = next + k + 1;
      if (at.residual < result.residual || at.feasible) {
        result.residual = at.residual;
        result.a = at.a;
        result.b = at.b;
        result.restart = next + k;
      }
      if (at.feasible) {
        result.feasible = true;
        return result;
      }
    }
    next += batch;
  }
  return result;
}

}  // namespace randcert::lp

#include "randcert/lp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <gmpxx.h>

#include "presolve.hpp"
#include "randcert/error.hpp"
#include "simplex.hpp"

namespace randcert::lp {

std::size_t LinearProgram::add_variable(double lo, double hi, std::string name) {
  lower.push_back(lo);
  upper.push_back(hi);
  if (!name.empty() || !names.empty()) {
    names.resize(num_vars);
    names.push_back(std::move(name));
  }
  return num_vars++;
}

void LinearProgram::add_row(std::vector<Term> terms, Relation relation, double rhs) {
  rows.push_back({std::move(terms), relation, rhs});
}

void LinearProgram::validate() const {
  if (lower.size() != num_vars || upper.size() != num_vars)
    fail(ErrorCode::InvalidArgument, "bound vectors must have one entry per variable");
  for (std::size_t j = 0; j < num_vars; ++j)
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] == kInf || upper[j] == -kInf)
      fail(ErrorCode::InvalidArgument, "invalid bounds on variable " + std::to_string(j));
  auto check_terms = [&](const std::vector<Term>& terms, const char* where) {
    for (const auto& t : terms) {
      if (t.var >= num_vars) fail(ErrorCode::InvalidArgument, std::string("variable index out of range in ") + where);
      if (!std::isfinite(t.coef)) fail(ErrorCode::InvalidArgument, std::string("non-finite coefficient in ") + where);
    }
  };
  check_terms(objective, "objective");
  for (const auto& r : rows) {
    check_terms(r.terms, "constraint");
    if (!std::isfinite(r.rhs)) fail(ErrorCode::InvalidArgument, "non-finite right-hand side");
  }
  if (!std::isfinite(objective_offset)) fail(ErrorCode::InvalidArgument, "non-finite objective offset");
}

double LinearProgram::objective_value(const std::vector<double>& x) const {
  double s = objective_offset;
  for (const auto& t : objective) s += t.coef * x[t.var];
  return s;
}

std::string LinearProgram::var_name(std::size_t j) const {
  if (j < names.size() && !names[j].empty()) return names[j];
  return "x" + std::to_string(j);
}

const char* status_name(Status status) {
  switch (status) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::IterationLimit: return "IterationLimit";
    case Status::Numerical: return "Numerical";
  }
  return "Unknown";
}

ResidualReport verify_assignment(const LinearProgram& lp, const std::vector<double>& x) {
  if (x.size() != lp.num_vars)
    fail(ErrorCode::SolutionShapeMismatch, "assignment has " + std::to_string(x.size()) + " entries, program has " +
                                               std::to_string(lp.num_vars) + " variables");
  ResidualReport rep;
  rep.row_violation.resize(lp.rows.size());
  for (std::size_t r = 0; r < lp.rows.size(); ++r) {
    const Row& row = lp.rows[r];
    double s = 0.0;
    for (const auto& t : row.terms) s += t.coef * x[t.var];
    double v = 0.0;
    switch (row.relation) {
      case Relation::Equal: v = std::abs(s - row.rhs); break;
      case Relation::LessEqual: v = std::max(0.0, s - row.rhs); break;
      case Relation::GreaterEqual: v = std::max(0.0, row.rhs - s); break;
    }
    if (std::isnan(v)) v = kInf;
    rep.row_violation[r] = v;
    if (v > rep.max_violation) {
      rep.max_violation = v;
      rep.worst_row = r;
    }
  }
  for (std::size_t j = 0; j < lp.num_vars; ++j) {
    double v = std::max({0.0, lp.lower[j] - x[j], x[j] - lp.upper[j]});
    if (std::isnan(x[j])) v = kInf;
    rep.bound_violation = std::max(rep.bound_violation, v);
  }
  rep.max_violation = std::max(rep.max_violation, rep.bound_violation);
  return rep;
}

namespace {

using detail::CoreOptions;
using detail::CoreResult;
using detail::CoreStatus;
using detail::StandardForm;

struct RawResult {
  Status status = Status::Numerical;
  std::vector<double> x;
  std::vector<double> farkas;
  std::size_t pivots = 0;
};

// Column-wise view of the constraint rows.
std::vector<std::vector<std::pair<std::size_t, double>>> columns_of(const LinearProgram& lp) {
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(lp.num_vars);
  for (std::size_t r = 0; r < lp.rows.size(); ++r)
    for (const auto& t : lp.rows[r].terms) cols[t.var].push_back({r, t.coef});
  for (auto& c : cols) {
    std::sort(c.begin(), c.end());
    std::vector<std::pair<std::size_t, double>> merged;
    for (const auto& e : c) {
      if (!merged.empty() && merged.back().first == e.first)
        merged.back().second += e.second;
      else
        merged.push_back(e);
    }
    c = std::move(merged);
  }
  return cols;
}

CoreOptions core_options(const SolverOptions& opt) {
  CoreOptions co;
  co.max_pivots = opt.max_pivots;
  co.degenerate_before_bland = opt.degenerate_before_bland;
  co.primal_tol = std::min(1e-9, opt.feasibility_tol * 0.1);
  co.dual_tol = 1e-9;
  return co;
}

Status map_failure(CoreStatus s) {
  return s == CoreStatus::IterationLimit ? Status::IterationLimit : Status::Numerical;
}

// Minimization problem solved directly: rows get slack columns.
RawResult solve_primal(const LinearProgram& lp, const SolverOptions& opt) {
  StandardForm sf;
  sf.m = lp.rows.size();
  sf.rhs.resize(sf.m);
  for (std::size_t r = 0; r < sf.m; ++r) sf.rhs[r] = lp.rows[r].rhs;
  std::vector<double> cost(lp.num_vars, 0.0);
  for (const auto& t : lp.objective) cost[t.var] += t.coef;
  auto cols = columns_of(lp);
  std::vector<std::size_t> ri;
  std::vector<double> rv;
  for (std::size_t j = 0; j < lp.num_vars; ++j) {
    ri.clear();
    rv.clear();
    for (const auto& [r, v] : cols[j]) {
      ri.push_back(r);
      rv.push_back(v);
    }
    sf.add_column(ri, rv, cost[j], lp.lower[j], lp.upper[j]);
  }
  for (std::size_t r = 0; r < sf.m; ++r) {
    if (lp.rows[r].relation == Relation::Equal) continue;
    if (lp.rows[r].relation == Relation::LessEqual)
      sf.add_column({r}, {1.0}, 0.0, 0.0, kInf);
    else
      sf.add_column({r}, {1.0}, 0.0, -kInf, 0.0);
  }
  CoreResult cr = detail::solve_standard(sf, core_options(opt));
  RawResult out;
  out.pivots = cr.pivots;
  switch (cr.status) {
    case CoreStatus::Optimal:
      out.status = Status::Optimal;
      out.x.assign(cr.v.begin(), cr.v.begin() + lp.num_vars);
      break;
    case CoreStatus::Infeasible:
      out.status = Status::Infeasible;
      out.farkas = cr.pi;
      break;
    case CoreStatus::Unbounded: out.status = Status::Unbounded; break;
    default: out.status = map_failure(cr.status);
  }
  return out;
}

// Minimization problem solved through its dual; the primal point is read
// off the dual's simplex multipliers.
RawResult solve_dual(const LinearProgram& lp, const SolverOptions& opt, bool zero_objective = false) {
  const std::size_t n = lp.num_vars;
  StandardForm sf;
  sf.m = n;
  sf.rhs.assign(n, 0.0);
  if (!zero_objective)
    for (const auto& t : lp.objective) sf.rhs[t.var] += t.coef;
  std::vector<std::size_t> ri;
  std::vector<double> rv;
  for (const auto& row : lp.rows) {
    ri.clear();
    rv.clear();
    std::vector<std::pair<std::size_t, double>> entries;
    for (const auto& t : row.terms) entries.push_back({t.var, t.coef});
    std::sort(entries.begin(), entries.end());
    for (const auto& [v, c] : entries) {
      if (!ri.empty() && ri.back() == v)
        rv.back() += c;
      else {
        ri.push_back(v);
        rv.push_back(c);
      }
    }
    double l = 0.0, h = kInf;
    if (row.relation == Relation::LessEqual) {
      l = -kInf;
      h = 0.0;
    } else if (row.relation == Relation::Equal) {
      l = -kInf;
    }
    sf.add_column(ri, rv, -row.rhs, l, h);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isfinite(lp.lower[j])) sf.add_column({j}, {1.0}, -lp.lower[j], 0.0, kInf);
    if (std::isfinite(lp.upper[j])) sf.add_column({j}, {-1.0}, lp.upper[j], 0.0, kInf);
  }
  CoreResult cr = detail::solve_standard(sf, core_options(opt));
  RawResult out;
  out.pivots = cr.pivots;
  switch (cr.status) {
    case CoreStatus::Optimal:
      out.status = Status::Optimal;
      out.x.resize(n);
      for (std::size_t j = 0; j < n; ++j) out.x[j] = -cr.pi[j];
      break;
    case CoreStatus::Unbounded:
      out.status = Status::Infeasible;
      out.farkas.assign(cr.ray.begin(), cr.ray.begin() + lp.rows.size());
      break;
    case CoreStatus::Infeasible: {
      if (zero_objective) {
        out.status = Status::Numerical;
        break;
      }
      RawResult feas = solve_dual(lp, opt, true);
      out.pivots += feas.pivots;
      out.status = feas.status == Status::Optimal ? Status::Unbounded : feas.status;
      out.farkas = std::move(feas.farkas);
      break;
    }
    default: out.status = map_failure(cr.status);
  }
  return out;
}

LinearProgram as_minimization(const LinearProgram& lp) {
  LinearProgram m = lp;
  if (lp.sense == Sense::Maximize) {
    for (auto& t : m.objective) t.coef = -t.coef;
    m.objective_offset = -m.objective_offset;
  } else if (lp.sense == Sense::Feasibility) {
    m.objective.clear();
    m.objective_offset = 0.0;
  }
  m.sense = Sense::Minimize;
  return m;
}

RawResult solve_raw(const LinearProgram& minlp, const SolverOptions& opt) {
  Route route = opt.route;
  if (route == Route::Automatic) route = minlp.num_vars < minlp.rows.size() ? Route::Dual : Route::Primal;
  if (minlp.rows.empty() && minlp.num_vars == 0) {
    RawResult r;
    r.status = Status::Optimal;
    return r;
  }
  return route == Route::Dual ? solve_dual(minlp, opt) : solve_primal(minlp, opt);
}

}  // namespace

SolveResult solve_lp(const LinearProgram& lp, const SolverOptions& options) {
  lp.validate();
  SolveResult res;
  const LinearProgram minlp = as_minimization(lp);
  RawResult raw;
  std::vector<double> x;
  if (options.presolve) {
    detail::Presolved pre = detail::presolve(minlp, options.feasibility_tol * 0.1);
    if (pre.infeasible) {
      raw.status = Status::Infeasible;
    } else {
      raw = solve_raw(pre.reduced, options);
      if (raw.status == Status::Optimal) {
        x = pre.postsolve(raw.x);
        if (pre.unbounded_column) raw.status = Status::Unbounded;
      }
      raw.farkas.clear();
    }
    if (raw.status == Status::Infeasible && options.farkas) {
      SolverOptions again = options;
      again.presolve = false;
      again.route = Route::Primal;
      RawResult full = solve_raw(minlp, again);
      if (full.status == Status::Infeasible) raw.farkas = std::move(full.farkas);
      raw.pivots += full.pivots;
    }
  } else {
    raw = solve_raw(minlp, options);
    x = raw.x;
  }
  res.iterations = raw.pivots;
  res.status = raw.status;
  if (raw.status == Status::Infeasible) res.farkas = std::move(raw.farkas);
  if (raw.status != Status::Optimal) return res;
  res.assignment = std::move(x);
  ResidualReport rep = verify_assignment(lp, res.assignment);
  res.max_residual = rep.max_violation;
  res.optimum = lp.sense == Sense::Feasibility ? 0.0 : lp.objective_value(res.assignment);
  if (res.max_residual > options.feasibility_tol) res.status = Status::Numerical;
  return res;
}

bool verify_farkas_exact(const LinearProgram& lp, const std::vector<double>& y) {
  if (y.size() != lp.rows.size()) return false;
  std::vector<mpq_class> g(lp.num_vars, 0);
  mpq_class yb = 0;
  for (std::size_t r = 0; r < lp.rows.size(); ++r) {
    double yr = y[r];
    if (!std::isfinite(yr)) return false;
    if (lp.rows[r].relation == Relation::GreaterEqual && yr < 0.0) yr = 0.0;
    if (lp.rows[r].relation == Relation::LessEqual && yr > 0.0) yr = 0.0;
    if (yr == 0.0) continue;
    const mpq_class q(yr);
    yb += q * mpq_class(lp.rows[r].rhs);
    for (const auto& t : lp.rows[r].terms) g[t.var] += q * mpq_class(t.coef);
  }
  mpq_class box_max = 0;
  for (std::size_t j = 0; j < lp.num_vars; ++j) {
    const int s = sgn(g[j]);
    if (s == 0) continue;
    const double bound = s > 0 ? lp.upper[j] : lp.lower[j];
    if (!std::isfinite(bound)) return false;
    box_max += g[j] * mpq_class(bound);
  }
  return box_max < yb;
}

SolveResult evaluate_solution(const LinearProgram& lp, std::vector<double> x, double tol) {
  SolveResult res;
  ResidualReport rep = verify_assignment(lp, x);
  res.assignment = std::move(x);
  res.max_residual = rep.max_violation;
  res.optimum = lp.sense == Sense::Feasibility ? 0.0 : lp.objective_value(res.assignment);
  res.status = res.max_residual <= tol ? Status::Optimal : Status::Numerical;
  return res;
}

SolveResult import_solution(const LinearProgram& lp, const std::string& path, double tol) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::vector<double> x;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    try {
      std::size_t used = 0;
      x.push_back(std::stod(line.substr(first), &used));
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "solution file line is not a number: " + line);
    }
  }
  if (x.size() != lp.num_vars)
    fail(ErrorCode::SolutionShapeMismatch, "solution has " + std::to_string(x.size()) + " values, program has " +
                                               std::to_string(lp.num_vars) + " variables");
  return evaluate_solution(lp, std::move(x), tol);
}

}  // namespace randcert::lp

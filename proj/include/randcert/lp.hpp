#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace randcert::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize, Feasibility };
enum class Relation { Equal, LessEqual, GreaterEqual };

struct Term {
  std::size_t var;
  double coef;
};

struct Row {
  std::vector<Term> terms;
  Relation relation = Relation::Equal;
  double rhs = 0.0;
};

struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<double> lower, upper;
  std::vector<std::string> names;
  Sense sense = Sense::Feasibility;
  std::vector<Term> objective;
  double objective_offset = 0.0;
  std::vector<Row> rows;

  std::size_t add_variable(double lo = 0.0, double hi = kInf, std::string name = {});
  void add_row(std::vector<Term> terms, Relation relation, double rhs);
  // Throws InvalidArgument on out-of-range indices, non-finite data or
  // inconsistent bound vectors.
  void validate() const;
  double objective_value(const std::vector<double>& x) const;
  std::string var_name(std::size_t j) const;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit, Numerical };
const char* status_name(Status status);

struct SolveResult {
  Status status = Status::Numerical;
  double optimum = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> assignment;
  double max_residual = 0.0;
  std::size_t iterations = 0;
  // Row multipliers proving infeasibility, one per row (>= 0 on >= rows,
  // <= 0 on <= rows); filled when status is Infeasible and
  // SolverOptions::farkas is set.
  std::vector<double> farkas;
};

enum class Route { Automatic, Primal, Dual };

struct SolverOptions {
  double feasibility_tol = 1e-8;
  std::size_t max_pivots = 1000000;
  bool presolve = true;
  Route route = Route::Automatic;
  bool farkas = false;
  // Consecutive degenerate pivots before pricing falls back to Bland's rule.
  std::size_t degenerate_before_bland = 50;
};

SolveResult solve_lp(const LinearProgram& lp, const SolverOptions& options = {});

struct ResidualReport {
  double max_violation = 0.0;
  std::size_t worst_row = 0;
  std::vector<double> row_violation;
  double bound_violation = 0.0;
};

ResidualReport verify_assignment(const LinearProgram& lp, const std::vector<double>& x);

// Checks in exact rational arithmetic that the row multipliers y prove the
// system infeasible: every feasible x has (sum_r y_r a_r) x >= y'b, yet the
// maximum of the left side over the variable box is below y'b.
bool verify_farkas_exact(const LinearProgram& lp, const std::vector<double>& y);

std::string to_mps(const LinearProgram& lp, const std::string& name = "RANDCERT");
void export_mps(const LinearProgram& lp, const std::string& path, const std::string& name = "RANDCERT");
// Reads one decimal per line in variable order, then re-verifies.
SolveResult import_solution(const LinearProgram& lp, const std::string& path, double tol = 1e-8);
SolveResult evaluate_solution(const LinearProgram& lp, std::vector<double> x, double tol = 1e-8);

// Bilinear feasibility programs over two variable blocks.
struct BilinearTerm {
  std::size_t a;
  std::size_t b;
  double coef;
};

struct BilinearRow {
  std::vector<Term> lin_a, lin_b;
  std::vector<BilinearTerm> bilinear;
  Relation relation = Relation::Equal;
  double rhs = 0.0;
};

struct BilinearProgram {
  std::vector<double> lower_a, upper_a, lower_b, upper_b;
  std::vector<BilinearRow> rows;

  std::size_t num_a() const { return lower_a.size(); }
  std::size_t num_b() const { return lower_b.size(); }
  std::size_t add_a(double lo = 0.0, double hi = kInf);
  std::size_t add_b(double lo = 0.0, double hi = kInf);
  void add_row(BilinearRow row);
  void validate() const;
};

struct BilinearOptions {
  std::size_t restarts = 50;
  std::uint64_t seed = 0;
  // Rounds of alternating block LPs before the joint trust-region phase.
  std::size_t alternating_rounds = 10;
  std::size_t max_rounds = 200;
  double tol = 1e-8;
  // Worker threads for restarts (0 = hardware concurrency).
  unsigned threads = 1;
};

struct BilinearResult {
  bool feasible = false;
  std::vector<double> a, b;
  double residual = kInf;
  std::size_t restart = 0;
  std::size_t restarts_tried = 0;
  // Status of the LP made of the rows without products.
  Status linear_precheck = Status::Optimal;
};

BilinearResult solve_bilinear(const BilinearProgram& bp, const BilinearOptions& options = {});
ResidualReport verify_assignment(const BilinearProgram& bp, const std::vector<double>& a,
                                 const std::vector<double>& b);

}  // namespace randcert::lp

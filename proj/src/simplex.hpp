#pragma once

#include <cstddef>
#include <vector>

namespace randcert::lp::detail {

// min d'v  s.t.  M v = r,  lo <= v <= hi  (infinite bounds allowed).
struct StandardForm {
  std::size_t m = 0;
  std::vector<std::size_t> col_start{0};
  std::vector<std::size_t> row_index;
  std::vector<double> value;
  std::vector<double> cost, lo, hi;
  std::vector<double> rhs;

  std::size_t num_cols() const { return cost.size(); }
  void add_column(const std::vector<std::size_t>& rows, const std::vector<double>& vals, double c, double l,
                  double h);
};

enum class CoreStatus { Optimal, Infeasible, Unbounded, IterationLimit, Singular };

struct CoreResult {
  CoreStatus status = CoreStatus::Singular;
  std::vector<double> v;
  // Simplex multipliers: phase-2 duals when Optimal, phase-1 duals when
  // Infeasible.
  std::vector<double> pi;
  // Improving ray when Unbounded.
  std::vector<double> ray;
  double objective = 0.0;
  std::size_t pivots = 0;
};

struct CoreOptions {
  std::size_t max_pivots = 1000000;
  std::size_t degenerate_before_bland = 50;
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  // Relative size of the random right-hand-side shift used to break
  // degeneracy; the shift is removed before the result is reported. Zero
  // disables it.
  double perturbation = 1e-6;
};

CoreResult solve_standard(const StandardForm& sf, const CoreOptions& options);

}  // namespace randcert::lp::detail

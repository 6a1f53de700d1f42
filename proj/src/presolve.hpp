#pragma once

#include <cstddef>
#include <vector>

#include "randcert/lp.hpp"

namespace randcert::lp::detail {

// Removes fixed variables, singleton rows and two-variable equalities by
// substitution. Works on a minimization problem.
struct Presolved {
  LinearProgram reduced;
  std::vector<std::size_t> kept;  // reduced index -> original index
  bool infeasible = false;
  bool unbounded_column = false;

  struct Step {
    std::size_t i;
    bool has_j;
    std::size_t j;
    double alpha, beta;  // x_i = alpha * x_j + beta
  };
  std::vector<Step> steps;
  std::size_t original_vars = 0;

  std::vector<double> postsolve(const std::vector<double>& reduced_x) const;
};

Presolved presolve(const LinearProgram& lp, double tol);

}  // namespace randcert::lp::detail

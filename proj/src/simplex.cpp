#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include <Eigen/Dense>

namespace randcert::lp::detail {

void StandardForm::add_column(const std::vector<std::size_t>& rows, const std::vector<double>& vals, double c,
                              double l, double h) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (vals[k] == 0.0) continue;
    row_index.push_back(rows[k]);
    value.push_back(vals[k]);
  }
  col_start.push_back(row_index.size());
  cost.push_back(c);
  lo.push_back(l);
  hi.push_back(h);
}

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class At : std::uint8_t { Lower, Upper, Zero, Basic };

class Solver {
 public:
  Solver(const StandardForm& sf, const CoreOptions& opt)
      : sf_(sf), opt_(opt), m_(sf.m), n_(sf.num_cols()), total_(n_ + m_) {}

  CoreResult run();

 private:
  CoreResult solve(bool perturbed);
  bool dual_cleanup();
  enum class Outcome { Optimal, Unbounded, IterationLimit, Singular };

  template <class F>
  void for_column(std::size_t j, F&& f) const {
    if (j < n_) {
      for (std::size_t k = sf_.col_start[j]; k < sf_.col_start[j + 1]; ++k) f(sf_.row_index[k], sf_.value[k]);
    } else {
      f(j - n_, art_sign_[j - n_]);
    }
  }

  void init();
  bool refactor();
  void recompute_basic_values();
  void btran(const std::vector<double>& costs, std::vector<double>& y) const;
  void ftran(std::size_t j, std::vector<double>& alpha) const;
  void pivot_update(std::size_t p, const std::vector<double>& alpha);
  Outcome iterate(const std::vector<double>& costs);
  void price_all(const std::vector<double>& costs);
  void drive_out_artificials();
  double objective(const std::vector<double>& costs) const;

  const StandardForm& sf_;
  CoreOptions opt_;
  std::vector<double> rhs_;
  std::size_t m_, n_, total_;
  std::vector<double> lo_, hi_, x_, art_sign_;
  std::vector<At> state_;
  std::vector<std::size_t> basis_;
  std::vector<double> binv_;  // column-major m x m
  std::size_t pivots_ = 0, since_refactor_ = 0;
  std::vector<double> ray_;
  std::vector<double> d_, weight_;  // reduced costs and devex weights
};

void Solver::init() {
  lo_.assign(total_, 0.0);
  hi_.assign(total_, kInfinity);
  x_.assign(total_, 0.0);
  state_.assign(total_, At::Lower);
  for (std::size_t j = 0; j < n_; ++j) {
    lo_[j] = sf_.lo[j];
    hi_[j] = sf_.hi[j];
    if (std::isfinite(lo_[j])) {
      x_[j] = lo_[j];
      state_[j] = At::Lower;
    } else if (std::isfinite(hi_[j])) {
      x_[j] = hi_[j];
      state_[j] = At::Upper;
    } else {
      x_[j] = 0.0;
      state_[j] = At::Zero;
    }
  }
  std::vector<double> resid = rhs_;
  for (std::size_t j = 0; j < n_; ++j) {
    if (x_[j] == 0.0) continue;
    for (std::size_t k = sf_.col_start[j]; k < sf_.col_start[j + 1]; ++k)
      resid[sf_.row_index[k]] -= sf_.value[k] * x_[j];
  }
  art_sign_.assign(m_, 1.0);
  basis_.resize(m_);
  binv_.assign(m_ * m_, 0.0);
  for (std::size_t i = 0; i < m_; ++i) {
    art_sign_[i] = resid[i] >= 0.0 ? 1.0 : -1.0;
    basis_[i] = n_ + i;
    state_[n_ + i] = At::Basic;
    x_[n_ + i] = std::abs(resid[i]);
    binv_[i * m_ + i] = art_sign_[i];
  }
  // Crash: a column whose only entry sits in row i replaces that row's
  // artificial when it can absorb the residual within its bounds.
  std::vector<bool> crashed(m_, false);
  for (std::size_t j = 0; j < n_; ++j) {
    if (sf_.col_start[j + 1] - sf_.col_start[j] != 1) continue;
    const std::size_t i = sf_.row_index[sf_.col_start[j]];
    const double v = sf_.value[sf_.col_start[j]];
    if (crashed[i]) continue;
    const double target = x_[j] + resid[i] / v;
    if (target < lo_[j] - 1e-12 || target > hi_[j] + 1e-12) continue;
    crashed[i] = true;
    x_[j] = target;
    state_[j] = At::Basic;
    basis_[i] = j;
    x_[n_ + i] = 0.0;
    state_[n_ + i] = At::Lower;
    binv_[i * m_ + i] = 1.0 / v;
  }
}

bool Solver::refactor() {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
  for (std::size_t c = 0; c < m_; ++c)
    for_column(basis_[c], [&](std::size_t r, double v) {
      b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    });
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
  const auto diag = lu.matrixLU().diagonal().cwiseAbs();
  if (m_ > 0 && diag.minCoeff() < 1e-11 * std::max(1.0, diag.maxCoeff())) return false;
  // binv_ is column-major with binv_[k * m + i] = (B^-1)(i, k).
  Eigen::Map<Eigen::MatrixXd>(binv_.data(), static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_)) =
      lu.inverse();
  since_refactor_ = 0;
  recompute_basic_values();
  return true;
}

void Solver::recompute_basic_values() {
  std::vector<double> resid = rhs_;
  for (std::size_t j = 0; j < total_; ++j) {
    if (state_[j] == At::Basic || x_[j] == 0.0) continue;
    for_column(j, [&](std::size_t r, double v) { resid[r] -= v * x_[j]; });
  }
  std::vector<double> xb(m_, 0.0);
  for (std::size_t k = 0; k < m_; ++k) {
    const double rk = resid[k];
    if (rk == 0.0) continue;
    const double* col = &binv_[k * m_];
    for (std::size_t i = 0; i < m_; ++i) xb[i] += col[i] * rk;
  }
  for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] = xb[i];
}

void Solver::btran(const std::vector<double>& costs, std::vector<double>& y) const {
  y.assign(m_, 0.0);
  std::vector<double> cb(m_);
  bool any = false;
  for (std::size_t i = 0; i < m_; ++i) {
    cb[i] = costs[basis_[i]];
    any = any || cb[i] != 0.0;
  }
  if (!any) return;
  for (std::size_t k = 0; k < m_; ++k) {
    const double* col = &binv_[k * m_];
    double s = 0.0;
    for (std::size_t i = 0; i < m_; ++i) s += cb[i] * col[i];
    y[k] = s;
  }
}

void Solver::ftran(std::size_t j, std::vector<double>& alpha) const {
  alpha.assign(m_, 0.0);
  for_column(j, [&](std::size_t k, double v) {
    const double* col = &binv_[k * m_];
    for (std::size_t i = 0; i < m_; ++i) alpha[i] += col[i] * v;
  });
}

void Solver::pivot_update(std::size_t p, const std::vector<double>& alpha) {
  const double ap = alpha[p];
  for (std::size_t k = 0; k < m_; ++k) {
    double* col = &binv_[k * m_];
    const double piv = col[p] / ap;
    if (piv == 0.0) continue;
    for (std::size_t i = 0; i < m_; ++i) col[i] -= alpha[i] * piv;
    col[p] = piv;
  }
  ++since_refactor_;
}

double Solver::objective(const std::vector<double>& costs) const {
  double s = 0.0;
  for (std::size_t j = 0; j < total_; ++j) s += costs[j] * x_[j];
  return s;
}

void Solver::price_all(const std::vector<double>& costs) {
  std::vector<double> y;
  btran(costs, y);
  d_.assign(total_, 0.0);
  for (std::size_t j = 0; j < total_; ++j) {
    if (state_[j] == At::Basic) continue;
    double d = costs[j];
    for_column(j, [&](std::size_t r, double v) { d -= y[r] * v; });
    d_[j] = d;
  }
}

Solver::Outcome Solver::iterate(const std::vector<double>& costs) {
  const std::size_t refactor_interval = std::max<std::size_t>(100, m_);
  std::vector<double> alpha, rho(m_), alpha_row(total_);
  std::size_t degenerate_run = 0;
  bool bland = false;
  bool reset_weights = false;
  weight_.assign(total_, 1.0);
  price_all(costs);
  for (;;) {
    if (pivots_ >= opt_.max_pivots) return Outcome::IterationLimit;
    if (since_refactor_ >= refactor_interval) {
      if (!refactor()) return Outcome::Singular;
      price_all(costs);
    }

    // Devex pricing; Bland's rule (first eligible index) after a run of
    // degenerate pivots.
    std::size_t q = total_;
    double best = -1.0, dir = 0.0;
    for (std::size_t j = 0; j < total_; ++j) {
      const At s = state_[j];
      if (s == At::Basic) continue;
      if (lo_[j] == hi_[j]) continue;
      const double d = d_[j];
      double want = 0.0;
      if (d < -opt_.dual_tol && (s == At::Lower || s == At::Zero))
        want = 1.0;
      else if (d > opt_.dual_tol && (s == At::Upper || s == At::Zero))
        want = -1.0;
      if (want == 0.0) continue;
      if (bland) {
        q = j;
        dir = want;
        break;
      }
      const double score = d * d / weight_[j];
      if (score > best) {
        best = score;
        q = j;
        dir = want;
      }
    }
    if (q == total_) {
      if (since_refactor_ == 0) return Outcome::Optimal;
      // Confirm optimality with fresh reduced costs.
      if (!refactor()) return Outcome::Singular;
      price_all(costs);
      continue;
    }

    ftran(q, alpha);
    double amax = 0.0;
    for (double a : alpha) amax = std::max(amax, std::abs(a));
    const double piv_tol = std::max(1e-7, 1e-9 * amax);

    // Harris two-pass ratio test (plain minimum ratio in Bland mode).
    const double tol = opt_.primal_tol;
    double theta_max = kInfinity;
    for (std::size_t i = 0; i < m_; ++i) {
      const double delta = -dir * alpha[i];
      if (std::abs(alpha[i]) <= piv_tol) continue;
      const std::size_t b = basis_[i];
      double lim;
      if (delta < 0.0) {
        if (!std::isfinite(lo_[b])) continue;
        lim = (x_[b] - lo_[b] + (bland ? 0.0 : tol)) / -delta;
      } else {
        if (!std::isfinite(hi_[b])) continue;
        lim = (hi_[b] - x_[b] + (bland ? 0.0 : tol)) / delta;
      }
      theta_max = std::min(theta_max, std::max(lim, 0.0));
    }
    const double flip = hi_[q] - lo_[q];
    std::size_t p = m_;
    double theta = kInfinity;
    if (std::isfinite(theta_max)) {
      double best_a = -1.0;
      std::size_t best_idx = total_;
      for (std::size_t i = 0; i < m_; ++i) {
        const double delta = -dir * alpha[i];
        if (std::abs(alpha[i]) <= piv_tol) continue;
        const std::size_t b = basis_[i];
        double dist;
        if (delta < 0.0) {
          if (!std::isfinite(lo_[b])) continue;
          dist = x_[b] - lo_[b];
        } else {
          if (!std::isfinite(hi_[b])) continue;
          dist = hi_[b] - x_[b];
        }
        const double lim = std::max(dist, 0.0) / std::abs(delta);
        if (lim > theta_max + (bland ? 1e-12 : 0.0)) continue;
        if (bland) {
          if (b < best_idx) {
            best_idx = b;
            p = i;
            theta = lim;
          }
        } else if (std::abs(alpha[i]) > best_a) {
          best_a = std::abs(alpha[i]);
          p = i;
          theta = lim;
        }
      }
    }
    if (std::isfinite(flip) && (p == m_ || flip <= theta)) {
      // Entering variable reaches its opposite bound first.
      theta = flip;
      for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] -= dir * theta * alpha[i];
      if (dir > 0) {
        x_[q] = hi_[q];
        state_[q] = At::Upper;
      } else {
        x_[q] = lo_[q];
        state_[q] = At::Lower;
      }
      ++pivots_;
      degenerate_run = 0;
      bland = false;
      continue;
    }
    if (p == m_) {
      ray_.assign(total_, 0.0);
      ray_[q] = dir;
      for (std::size_t i = 0; i < m_; ++i) ray_[basis_[i]] -= dir * alpha[i];
      return Outcome::Unbounded;
    }

    // Pivot row of B^-1 A for the reduced-cost and weight updates.
    for (std::size_t k = 0; k < m_; ++k) rho[k] = binv_[k * m_ + p];
    const double apq = alpha[p];
    const double theta_d = d_[q] / apq;
    const double wq = weight_[q];
    for (std::size_t j = 0; j < total_; ++j) {
      if (state_[j] == At::Basic || j == q) continue;
      double a = 0.0;
      for_column(j, [&](std::size_t r, double v) { a += rho[r] * v; });
      if (a == 0.0) continue;
      d_[j] -= theta_d * a;
      const double ratio = a / apq;
      weight_[j] = std::max(weight_[j], ratio * ratio * wq);
      if (weight_[j] > 1e8) reset_weights = true;
    }

    for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] -= dir * theta * alpha[i];
    x_[q] += dir * theta;
    const std::size_t leaving = basis_[p];
    if (-dir * alpha[p] < 0.0) {
      x_[leaving] = lo_[leaving];
      state_[leaving] = At::Lower;
    } else {
      x_[leaving] = hi_[leaving];
      state_[leaving] = At::Upper;
    }
    if (!std::isfinite(x_[leaving])) {
      x_[leaving] = 0.0;
      state_[leaving] = At::Zero;
    }
    d_[leaving] = -theta_d;
    d_[q] = 0.0;
    weight_[leaving] = std::max(wq / (apq * apq), 1.0);
    if (reset_weights || weight_[leaving] > 1e8) {
      weight_.assign(total_, 1.0);
      reset_weights = false;
    }
    basis_[p] = q;
    state_[q] = At::Basic;
    pivot_update(p, alpha);
    ++pivots_;

    if (theta <= 1e-12) {
      if (++degenerate_run >= opt_.degenerate_before_bland) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
  }
}

void Solver::drive_out_artificials() {
  std::vector<double> alpha;
  for (std::size_t p = 0; p < m_; ++p) {
    if (basis_[p] < n_) continue;
    std::size_t best_j = n_;
    double best = 1e-7;
    for (std::size_t j = 0; j < n_; ++j) {
      if (state_[j] == At::Basic) continue;
      double t = 0.0;
      for (std::size_t k = sf_.col_start[j]; k < sf_.col_start[j + 1]; ++k)
        t += binv_[sf_.row_index[k] * m_ + p] * sf_.value[k];
      if (std::abs(t) > best) {
        best = std::abs(t);
        best_j = j;
      }
    }
    if (best_j == n_) continue;
    ftran(best_j, alpha);
    const std::size_t art = basis_[p];
    x_[art] = 0.0;
    state_[art] = At::Lower;
    basis_[p] = best_j;
    state_[best_j] = At::Basic;
    pivot_update(p, alpha);
  }
}

CoreResult Solver::run() {
  if (opt_.perturbation > 0.0 && m_ > 0) {
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> u(0.5, 1.0);
    rhs_ = sf_.rhs;
    for (double& r : rhs_) r += opt_.perturbation * (1.0 + std::abs(r)) * u(rng);
    CoreResult res = solve(true);
    if (res.status == CoreStatus::Optimal) return res;
  }
  rhs_ = sf_.rhs;
  return solve(false);
}

// Dual simplex from a dual feasible basis until the basic values respect
// their bounds. Returns false when no entering column exists (the restored
// problem is infeasible) or the basis degrades.
bool Solver::dual_cleanup() {
  const std::size_t refactor_interval = std::max<std::size_t>(100, m_);
  std::vector<double> alpha, rho(m_), arow(total_, 0.0);
  for (std::size_t iter = 0; iter < 10 * m_ + 100; ++iter) {
    if (since_refactor_ >= refactor_interval && !refactor()) return false;
    std::size_t p = m_;
    double worst = opt_.primal_tol;
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t b = basis_[i];
      const double v = std::max(lo_[b] - x_[b], x_[b] - hi_[b]);
      if (v > worst) {
        worst = v;
        p = i;
      }
    }
    if (p == m_) return true;
    const std::size_t leaving = basis_[p];
    const bool to_lower = x_[leaving] < lo_[leaving];
    const double target = to_lower ? lo_[leaving] : hi_[leaving];
    const double sign = to_lower ? 1.0 : -1.0;
    for (std::size_t k = 0; k < m_; ++k) rho[k] = binv_[k * m_ + p];
    std::size_t q = total_;
    double best_ratio = kInfinity, best_a = 0.0;
    for (std::size_t j = 0; j < total_; ++j) {
      arow[j] = 0.0;
      if (state_[j] == At::Basic) continue;
      double a = 0.0;
      for_column(j, [&](std::size_t r, double v) { a += rho[r] * v; });
      arow[j] = a;
      if (lo_[j] == hi_[j] || std::abs(a) <= 1e-9) continue;
      const double as = a * sign;
      bool ok = false;
      if (state_[j] == At::Lower)
        ok = as < 0.0;
      else if (state_[j] == At::Upper)
        ok = as > 0.0;
      else
        ok = true;
      if (!ok) continue;
      const double ratio = std::abs(d_[j]) / std::abs(a);
      if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && std::abs(a) > best_a)) {
        best_ratio = std::min(ratio, best_ratio);
        best_a = std::abs(a);
        q = j;
      }
    }
    if (q == total_) return false;
    ftran(q, alpha);
    const double apq = alpha[p];
    if (std::abs(apq) <= 1e-11) return false;
    const double t = (x_[leaving] - target) / apq;
    for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] -= alpha[i] * t;
    x_[q] += t;
    const double theta_d = d_[q] / apq;
    for (std::size_t j = 0; j < total_; ++j)
      if (arow[j] != 0.0 && state_[j] != At::Basic) d_[j] -= theta_d * arow[j];
    x_[leaving] = target;
    state_[leaving] = to_lower ? At::Lower : At::Upper;
    d_[leaving] = -theta_d;
    d_[q] = 0.0;
    basis_[p] = q;
    state_[q] = At::Basic;
    pivot_update(p, alpha);
    ++pivots_;
  }
  return false;
}

CoreResult Solver::solve(bool perturbed) {
  CoreResult res;
  init();
  std::vector<double> phase1(total_, 0.0);
  for (std::size_t i = 0; i < m_; ++i) phase1[n_ + i] = 1.0;

  double rnorm = 1.0;
  for (double r : rhs_) rnorm = std::max(rnorm, std::abs(r));

  Outcome o = iterate(phase1);
  res.pivots = pivots_;
  if (o == Outcome::IterationLimit) {
    res.status = CoreStatus::IterationLimit;
    return res;
  }
  if (o == Outcome::Singular || !refactor()) {
    res.status = CoreStatus::Singular;
    return res;
  }
  const double infeas = objective(phase1);
  if (infeas > 1e-9 * rnorm) {
    if (perturbed) return res;
    res.status = CoreStatus::Infeasible;
    btran(phase1, res.pi);
    res.objective = infeas;
    return res;
  }
  drive_out_artificials();
  for (std::size_t i = 0; i < m_; ++i) {
    lo_[n_ + i] = hi_[n_ + i] = 0.0;
    if (state_[n_ + i] != At::Basic) x_[n_ + i] = 0.0;
  }
  if (!refactor()) {
    res.status = CoreStatus::Singular;
    return res;
  }

  std::vector<double> costs(total_, 0.0);
  std::copy(sf_.cost.begin(), sf_.cost.end(), costs.begin());
  o = iterate(costs);
  res.pivots = pivots_;
  if (o == Outcome::IterationLimit) {
    res.status = CoreStatus::IterationLimit;
    return res;
  }
  if (o == Outcome::Singular) {
    res.status = CoreStatus::Singular;
    return res;
  }
  if (o == Outcome::Unbounded) {
    if (perturbed) return res;
    res.status = CoreStatus::Unbounded;
    res.ray.assign(ray_.begin(), ray_.begin() + n_);
    return res;
  }
  if (perturbed) {
    rhs_ = sf_.rhs;
    if (!refactor()) return res;
    price_all(costs);
    if (!dual_cleanup()) return res;
    if (!refactor()) return res;
    o = iterate(costs);
    res.pivots = pivots_;
    if (o != Outcome::Optimal) return res;
  }
  if (!refactor()) {
    res.status = CoreStatus::Singular;
    return res;
  }
  res.status = CoreStatus::Optimal;
  res.v.assign(x_.begin(), x_.begin() + n_);
  btran(costs, res.pi);
  res.objective = 0.0;
  for (std::size_t j = 0; j < n_; ++j) res.objective += sf_.cost[j] * res.v[j];
  return res;
}

}  // namespace

CoreResult solve_standard(const StandardForm& sf, const CoreOptions& options) {
  Solver s(sf, options);
  return s.run();
}

}  // namespace randcert::lp::detail

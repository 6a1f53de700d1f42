#include "presolve.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <unordered_map>

namespace randcert::lp::detail {

namespace {

struct TermsLess {
  bool operator()(const std::vector<Term>& a, const std::vector<Term>& b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [](const Term& x, const Term& y) {
      return x.var != y.var ? x.var < y.var : x.coef < y.coef;
    });
  }
};

struct WorkRow {
  std::unordered_map<std::size_t, double> terms;
  Relation relation;
  double rhs;
  bool alive = true;
};

class Presolver {
 public:
  Presolver(const LinearProgram& lp, double tol) : tol_(tol) {
    n_ = lp.num_vars;
    lo_ = lp.lower;
    hi_ = lp.upper;
    cost_.assign(n_, 0.0);
    for (const auto& t : lp.objective) cost_[t.var] += t.coef;
    offset_ = lp.objective_offset;
    col_rows_.resize(n_);
    alive_.assign(n_, true);
    rows_.reserve(lp.rows.size());
    for (const auto& r : lp.rows) {
      WorkRow w;
      w.relation = r.relation;
      w.rhs = r.rhs;
      for (const auto& t : r.terms) w.terms[t.var] += t.coef;
      for (auto it = w.terms.begin(); it != w.terms.end();) {
        if (it->second == 0.0)
          it = w.terms.erase(it);
        else
          ++it;
      }
      for (const auto& [v, c] : w.terms) col_rows_[v].push_back(rows_.size());
      rows_.push_back(std::move(w));
    }
  }

  Presolved run() {
    Presolved out;
    out.original_vars = n_;
    for (std::size_t j = 0; j < n_; ++j) {
      if (lo_[j] > hi_[j] + tol_) return infeasible(out);
      if (lo_[j] == hi_[j]) fix(j, lo_[j]);
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) queue_.push_back(r);
    while (!queue_.empty() && !infeasible_) {
      std::size_t r = queue_.front();
      queue_.pop_front();
      process(r);
    }
    if (infeasible_) return infeasible(out);
    for (std::size_t j = 0; j < n_; ++j) {
      if (!alive_[j]) continue;
      bool used = false;
      for (std::size_t r : col_rows_[j])
        if (rows_[r].alive && rows_[r].terms.count(j)) {
          used = true;
          break;
        }
      if (used) continue;
      double c = cost_[j];
      double v;
      if (c > 0.0) {
        v = lo_[j];
      } else if (c < 0.0) {
        v = hi_[j];
      } else {
        v = std::clamp(0.0, lo_[j], hi_[j]);
      }
      if (!std::isfinite(v)) {
        out.unbounded_column = true;
        v = std::isfinite(lo_[j]) ? lo_[j] : (std::isfinite(hi_[j]) ? hi_[j] : 0.0);
      }
      fix(j, v);
    }
    std::vector<long> newidx(n_, -1);
    for (std::size_t j = 0; j < n_; ++j)
      if (alive_[j]) {
        newidx[j] = static_cast<long>(out.kept.size());
        out.kept.push_back(j);
        out.reduced.add_variable(lo_[j], hi_[j]);
      }
    out.reduced.sense = Sense::Minimize;
    out.reduced.objective_offset = offset_;
    for (std::size_t j = 0; j < n_; ++j)
      if (alive_[j] && cost_[j] != 0.0) out.reduced.objective.push_back({static_cast<std::size_t>(newidx[j]), cost_[j]});
    // Parallel rows collapse to the tightest one: each row is scaled to
    // unit largest coefficient, inequalities turned into "<=".
    std::map<std::vector<Term>, std::size_t, TermsLess> seen;
    for (const auto& w : rows_) {
      if (!w.alive) continue;
      std::vector<Term> terms;
      for (const auto& [v, c] : w.terms) terms.push_back({static_cast<std::size_t>(newidx[v]), c});
      std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
      if (terms.empty()) {
        out.reduced.add_row(std::move(terms), w.relation, w.rhs);
        continue;
      }
      double scale = 0.0;
      for (const auto& t : terms) scale = std::max(scale, std::abs(t.coef));
      if (w.relation == Relation::GreaterEqual) scale = -scale;
      Relation rel = w.relation == Relation::Equal ? Relation::Equal : Relation::LessEqual;
      double rhs = w.rhs / scale;
      for (auto& t : terms) t.coef /= scale;
      if (rel == Relation::Equal && terms.front().coef < 0.0) {
        for (auto& t : terms) t.coef = -t.coef;
        rhs = -rhs;
      }
      if (rel == Relation::LessEqual) {
        auto [it, fresh] = seen.emplace(terms, out.reduced.rows.size());
        if (!fresh) {
          auto& kept = out.reduced.rows[it->second];
          kept.rhs = std::min(kept.rhs, rhs);
          continue;
        }
      }
      out.reduced.add_row(std::move(terms), rel, rhs);
    }
    out.steps = std::move(steps_);
    return out;
  }

 private:
  Presolved infeasible(Presolved& out) {
    out.infeasible = true;
    return out;
  }

  void kill(std::size_t r) { rows_[r].alive = false; }

  void fix(std::size_t j, double v) { substitute(j, false, 0, 0.0, v); }

  // x_i := alpha * x_j + beta everywhere.
  void substitute(std::size_t i, bool has_j, std::size_t j, double alpha, double beta) {
    alive_[i] = false;
    steps_.push_back({i, has_j, j, alpha, beta});
    for (std::size_t r : col_rows_[i]) {
      WorkRow& w = rows_[r];
      if (!w.alive) continue;
      auto it = w.terms.find(i);
      if (it == w.terms.end()) continue;
      const double c = it->second;
      w.terms.erase(it);
      w.rhs -= c * beta;
      if (has_j && alpha != 0.0) {
        double& cj = w.terms[j];
        const double before = cj;
        cj += c * alpha;
        if (std::abs(cj) <= 1e-12 * std::max(std::abs(before), std::abs(c * alpha))) {
          w.terms.erase(j);
        } else if (before == 0.0) {
          col_rows_[j].push_back(r);
        }
      }
      if (w.terms.size() <= 2) queue_.push_back(r);
    }
    col_rows_[i].clear();
    if (cost_[i] != 0.0) {
      if (has_j) cost_[j] += cost_[i] * alpha;
      offset_ += cost_[i] * beta;
      cost_[i] = 0.0;
    }
  }

  void tighten(std::size_t j, double l, double h) {
    lo_[j] = std::max(lo_[j], l);
    hi_[j] = std::min(hi_[j], h);
    if (lo_[j] > hi_[j] + tol_) {
      infeasible_ = true;
      return;
    }
    if (lo_[j] > hi_[j]) lo_[j] = hi_[j];
    if (lo_[j] == hi_[j] && alive_[j]) fix(j, lo_[j]);
  }

  void process(std::size_t r) {
    WorkRow& w = rows_[r];
    if (!w.alive) return;
    const std::size_t nnz = w.terms.size();
    if (nnz == 0) {
      const double s = w.rhs;
      bool ok = w.relation == Relation::Equal          ? std::abs(s) <= tol_
                : w.relation == Relation::LessEqual ? s >= -tol_
                                                       : s <= tol_;
      if (!ok) infeasible_ = true;
      kill(r);
      return;
    }
    if (nnz == 1) {
      auto [v, a] = *w.terms.begin();
      const double bound = w.rhs / a;
      kill(r);
      if (w.relation == Relation::Equal) {
        if (bound < lo_[v] - tol_ || bound > hi_[v] + tol_) {
          infeasible_ = true;
          return;
        }
        fix(v, std::clamp(bound, lo_[v], hi_[v]));
        return;
      }
      const bool upper = (w.relation == Relation::LessEqual) == (a > 0.0);
      if (upper)
        tighten(v, -kInf, bound);
      else
        tighten(v, bound, kInf);
      return;
    }
    if (nnz == 2 && w.relation == Relation::Equal) {
      auto it = w.terms.begin();
      auto [v1, a1] = *it++;
      auto [v2, a2] = *it;
      // Eliminate the variable with the larger coefficient unless the two
      // are comparable, then the one appearing in fewer rows.
      std::size_t i = v1, j = v2;
      double ai = a1, aj = a2;
      const double ratio = std::abs(a1) / std::abs(a2);
      bool pick_first;
      if (ratio > 10.0)
        pick_first = true;
      else if (ratio < 0.1)
        pick_first = false;
      else
        pick_first = col_rows_[v1].size() <= col_rows_[v2].size();
      if (!pick_first) {
        std::swap(i, j);
        std::swap(ai, aj);
      }
      const double alpha = -aj / ai, beta = w.rhs / ai;
      kill(r);
      // Bounds of x_i become bounds on x_j.
      double l = -kInf, h = kInf;
      if (alpha > 0.0) {
        if (std::isfinite(lo_[i])) l = (lo_[i] - beta) / alpha;
        if (std::isfinite(hi_[i])) h = (hi_[i] - beta) / alpha;
      } else {
        if (std::isfinite(hi_[i])) l = (hi_[i] - beta) / alpha;
        if (std::isfinite(lo_[i])) h = (lo_[i] - beta) / alpha;
      }
      substitute(i, true, j, alpha, beta);
      if (alive_[j]) tighten(j, l, h);
    }
  }

  double tol_;
  std::size_t n_;
  std::vector<double> lo_, hi_, cost_;
  double offset_ = 0.0;
  std::vector<WorkRow> rows_;
  std::vector<std::vector<std::size_t>> col_rows_;
  std::vector<bool> alive_;
  std::vector<Presolved::Step> steps_;
  std::deque<std::size_t> queue_;
  bool infeasible_ = false;
};

}  // namespace

std::vector<double> Presolved::postsolve(const std::vector<double>& reduced_x) const {
  std::vector<double> x(original_vars, 0.0);
  for (std::size_t k = 0; k < kept.size(); ++k) x[kept[k]] = reduced_x[k];
  for (auto it = steps.rbegin(); it != steps.rend(); ++it)
    x[it->i] = it->has_j ? it->alpha * x[it->j] + it->beta : it->beta;
  return x;
}

Presolved presolve(const LinearProgram& lp, double tol) {
  Presolver p(lp, tol);
  return p.run();
}

}  // namespace randcert::lp::detail

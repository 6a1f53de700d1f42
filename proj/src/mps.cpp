#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "randcert/error.hpp"
#include "randcert/lp.hpp"

namespace randcert::lp {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_mps(const LinearProgram& lp, const std::string& name) {
  lp.validate();
  const bool negate = lp.sense == Sense::Maximize;
  std::string out;
  out += "* free MPS; objective is minimized";
  if (negate) out += " (maximization written with negated objective)";
  if (lp.sense == Sense::Feasibility) out += " (feasibility problem, zero objective)";
  out += "\nNAME " + name + "\nROWS\n N obj\n";
  for (std::size_t r = 0; r < lp.rows.size(); ++r) {
    const char* t = lp.rows[r].relation == Relation::Equal ? "E" : lp.rows[r].relation == Relation::LessEqual ? "L" : "G";
    out += std::string(" ") + t + " r" + std::to_string(r) + "\n";
  }
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(lp.num_vars);
  for (std::size_t r = 0; r < lp.rows.size(); ++r)
    for (const auto& t : lp.rows[r].terms) cols[t.var].push_back({r, t.coef});
  std::vector<double> obj(lp.num_vars, 0.0);
  if (lp.sense != Sense::Feasibility)
    for (const auto& t : lp.objective) obj[t.var] += negate ? -t.coef : t.coef;
  out += "COLUMNS\n";
  for (std::size_t j = 0; j < lp.num_vars; ++j) {
    auto& c = cols[j];
    std::stable_sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<std::size_t, double>> merged;
    for (const auto& e : c) {
      if (!merged.empty() && merged.back().first == e.first)
        merged.back().second += e.second;
      else
        merged.push_back(e);
    }
    const std::string vn = lp.var_name(j);
    const bool listed = std::any_of(merged.begin(), merged.end(), [](const auto& e) { return e.second != 0.0; });
    if (obj[j] != 0.0 || !listed) out += " " + vn + " obj " + num(obj[j]) + "\n";
    for (const auto& [r, v] : merged)
      if (v != 0.0) out += " " + vn + " r" + std::to_string(r) + " " + num(v) + "\n";
  }
  out += "RHS\n";
  if (lp.sense != Sense::Feasibility && lp.objective_offset != 0.0)
    out += " RHS obj " + num(negate ? lp.objective_offset : -lp.objective_offset) + "\n";
  for (std::size_t r = 0; r < lp.rows.size(); ++r)
    if (lp.rows[r].rhs != 0.0) out += " RHS r" + std::to_string(r) + " " + num(lp.rows[r].rhs) + "\n";
  out += "BOUNDS\n";
  for (std::size_t j = 0; j < lp.num_vars; ++j) {
    const double l = lp.lower[j], u = lp.upper[j];
    const std::string vn = lp.var_name(j);
    if (l == 0.0 && u == kInf) continue;
    if (l == u) {
      out += " FX BND " + vn + " " + num(l) + "\n";
      continue;
    }
    if (l == -kInf && u == kInf) {
      out += " FR BND " + vn + "\n";
      continue;
    }
    if (l == -kInf)
      out += " MI BND " + vn + "\n";
    else if (l != 0.0)
      out += " LO BND " + vn + " " + num(l) + "\n";
    if (u != kInf) out += " UP BND " + vn + " " + num(u) + "\n";
  }
  out += "ENDATA\n";
  return out;
}

void export_mps(const LinearProgram& lp, const std::string& path, const std::string& name) {
  const std::string text = to_mps(lp, name);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace randcert::lp

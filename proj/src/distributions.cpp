#include "randcert/distributions.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "randcert/error.hpp"

namespace randcert {

using nlohmann::json;
using quantum::Matrix;

namespace {

std::size_t product(const std::vector<int>& cards) {
  std::size_t n = 1;
  for (int c : cards) n *= static_cast<std::size_t>(c);
  return n;
}

std::vector<int> decode(std::size_t idx, const std::vector<int>& cards) {
  std::vector<int> digits(cards.size());
  for (std::size_t i = cards.size(); i-- > 0;) {
    digits[i] = static_cast<int>(idx % cards[i]);
    idx /= cards[i];
  }
  return digits;
}

std::size_t encode(const std::vector<int>& digits, const std::vector<int>& cards) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < cards.size(); ++i) {
    if (digits[i] < 0 || digits[i] >= cards[i]) fail(ErrorCode::InvalidArgument, "index out of range");
    idx = idx * cards[i] + digits[i];
  }
  return idx;
}

std::string party_label(const ProbTable& t, std::size_t p) {
  if (p < t.labels.size()) return t.labels[p];
  return "party " + std::to_string(p);
}

}  // namespace

ProbTable::ProbTable(std::vector<int> outcome_cards, std::vector<int> setting_cards)
    : outcome_cards_(std::move(outcome_cards)), setting_cards_(std::move(setting_cards)) {
  if (outcome_cards_.size() != setting_cards_.size())
    fail(ErrorCode::ShapeMismatch, "outcome and setting cardinality lists differ in length");
  for (std::size_t i = 0; i < outcome_cards_.size(); ++i)
    if (outcome_cards_[i] < 1 || setting_cards_[i] < 1)
      fail(ErrorCode::ShapeMismatch, "cardinalities must be positive");
  num_settings_ = product(setting_cards_);
  num_outcomes_ = product(outcome_cards_);
  values_.assign(num_settings_ * num_outcomes_, 0.0);
}

ProbTable::ProbTable(std::vector<int> outcome_cards, std::vector<int> setting_cards, std::vector<double> values)
    : ProbTable(std::move(outcome_cards), std::move(setting_cards)) {
  if (values.size() != values_.size())
    fail(ErrorCode::ShapeMismatch, "expected " + std::to_string(values_.size()) + " values, got " +
                                       std::to_string(values.size()));
  values_ = std::move(values);
}

std::size_t ProbTable::index(const std::vector<int>& settings, const std::vector<int>& outcomes) const {
  return encode(settings, setting_cards_) * num_outcomes_ + encode(outcomes, outcome_cards_);
}

std::vector<int> ProbTable::decode_settings(std::size_t tuple) const { return decode(tuple, setting_cards_); }
std::vector<int> ProbTable::decode_outcomes(std::size_t tuple) const { return decode(tuple, outcome_cards_); }

double ProbTable::marginal(const std::vector<std::size_t>& members, const std::vector<int>& outcomes,
                           const std::vector<int>& settings) const {
  std::vector<int> x(num_parties(), 0);
  for (std::size_t i = 0; i < members.size(); ++i) x[members[i]] = settings[i];
  const std::size_t base = encode(x, setting_cards_) * num_outcomes_;
  double sum = 0.0;
  for (std::size_t o = 0; o < num_outcomes_; ++o) {
    auto a = decode(o, outcome_cards_);
    bool match = true;
    for (std::size_t i = 0; i < members.size() && match; ++i) match = a[members[i]] == outcomes[i];
    if (match) sum += values_[base + o];
  }
  return sum;
}

ProbTable ProbTable::marginal_table(const std::vector<std::size_t>& keep) const {
  std::vector<int> oc, sc;
  for (std::size_t p : keep) {
    oc.push_back(outcome_cards_[p]);
    sc.push_back(setting_cards_[p]);
  }
  ProbTable out(oc, sc);
  for (std::size_t s = 0; s < out.num_settings_; ++s) {
    auto xs = out.decode_settings(s);
    for (std::size_t o = 0; o < out.num_outcomes_; ++o)
      out.values_[s * out.num_outcomes_ + o] = marginal(keep, out.decode_outcomes(o), xs);
  }
  for (std::size_t p : keep) out.labels.push_back(party_label(*this, p));
  return out;
}

ProbTable ProbTable::conditioned(std::size_t party, int outcome) const {
  if (setting_cards_[party] != 1) fail(ErrorCode::ShapeMismatch, "conditioning party must be settingless");
  std::vector<std::size_t> rest;
  for (std::size_t p = 0; p < num_parties(); ++p)
    if (p != party) rest.push_back(p);
  std::vector<int> oc, sc;
  for (std::size_t p : rest) {
    oc.push_back(outcome_cards_[p]);
    sc.push_back(setting_cards_[p]);
  }
  ProbTable out(oc, sc);
  for (std::size_t s = 0; s < out.num_settings_; ++s) {
    auto xr = out.decode_settings(s);
    std::vector<int> x(num_parties(), 0);
    for (std::size_t i = 0; i < rest.size(); ++i) x[rest[i]] = xr[i];
    double norm = marginal({party}, {outcome}, {0});
    if (norm <= 0.0) fail(ErrorCode::InvalidArgument, "conditioning on a zero-probability outcome");
    for (std::size_t o = 0; o < out.num_outcomes_; ++o) {
      auto ar = out.decode_outcomes(o);
      std::vector<int> a(num_parties(), 0);
      for (std::size_t i = 0; i < rest.size(); ++i) a[rest[i]] = ar[i];
      a[party] = outcome;
      out.values_[s * out.num_outcomes_ + o] = (*this)(x, a) / norm;
    }
  }
  for (std::size_t p : rest) out.labels.push_back(party_label(*this, p));
  return out;
}

ProbTable ProbTable::outcome_as_setting(std::size_t party, std::size_t receiver) const {
  if (party == receiver || setting_cards_[receiver] != 1)
    fail(ErrorCode::ShapeMismatch, "receiver must be a different, settingless party");
  std::vector<std::size_t> rest;
  for (std::size_t p = 0; p < num_parties(); ++p)
    if (p != party) rest.push_back(p);
  std::vector<int> oc, sc;
  for (std::size_t p : rest) {
    oc.push_back(outcome_cards_[p]);
    sc.push_back(p == receiver ? outcome_cards_[party] : setting_cards_[p]);
  }
  ProbTable out(oc, sc);
  for (std::size_t s = 0; s < out.num_settings_; ++s) {
    auto xr = out.decode_settings(s);
    std::vector<int> x(num_parties(), 0);
    int c = 0;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (rest[i] == receiver)
        c = xr[i];
      else
        x[rest[i]] = xr[i];
    }
    double norm = marginal({party}, {c}, {0});
    if (norm <= 0.0) fail(ErrorCode::InvalidArgument, "outcome used as setting has zero probability");
    for (std::size_t o = 0; o < out.num_outcomes_; ++o) {
      auto ar = out.decode_outcomes(o);
      std::vector<int> a(num_parties(), 0);
      for (std::size_t i = 0; i < rest.size(); ++i) a[rest[i]] = ar[i];
      a[party] = c;
      out.values_[s * out.num_outcomes_ + o] = (*this)(x, a) / norm;
    }
  }
  for (std::size_t p : rest) out.labels.push_back(party_label(*this, p));
  return out;
}

bool same_shape(const ProbTable& a, const ProbTable& b) {
  return a.outcome_cards() == b.outcome_cards() && a.setting_cards() == b.setting_cards();
}

double normalization_error(const ProbTable& table) {
  double worst = 0.0;
  const auto& v = table.values();
  for (std::size_t s = 0; s < table.num_setting_tuples(); ++s) {
    double sum = 0.0;
    for (std::size_t o = 0; o < table.num_outcome_tuples(); ++o) sum += v[s * table.num_outcome_tuples() + o];
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

std::optional<std::string> signaling_violation(const ProbTable& table, double tol) {
  const std::size_t n = table.num_parties();
  const auto& oc = table.outcome_cards();
  const auto& sc = table.setting_cards();
  for (std::size_t p = 0; p < n; ++p) {
    if (sc[p] == 1) continue;
    // Marginal of everyone except p must not depend on x_p.
    std::vector<int> rest_oc, rest_sc;
    for (std::size_t q = 0; q < n; ++q)
      if (q != p) {
        rest_oc.push_back(oc[q]);
        rest_sc.push_back(sc[q]);
      }
    const std::size_t n_rest_s = product(rest_sc), n_rest_o = product(rest_oc);
    for (std::size_t rs = 0; rs < n_rest_s; ++rs) {
      auto xr = decode(rs, rest_sc);
      for (std::size_t ro = 0; ro < n_rest_o; ++ro) {
        auto ar = decode(ro, rest_oc);
        double ref = 0.0;
        for (int xp = 0; xp < sc[p]; ++xp) {
          std::vector<int> x, a;
          for (std::size_t q = 0, i = 0; q < n; ++q) {
            if (q == p) {
              x.push_back(xp);
              a.push_back(0);
            } else {
              x.push_back(xr[i]);
              a.push_back(ar[i]);
              ++i;
            }
          }
          double m = 0.0;
          for (int ap = 0; ap < oc[p]; ++ap) {
            a[p] = ap;
            m += table(x, a);
          }
          if (xp == 0) {
            ref = m;
          } else if (std::abs(m - ref) > tol) {
            std::ostringstream msg;
            msg << "marginal of all parties except " << party_label(table, p) << " depends on "
                << party_label(table, p) << "'s setting (settings of the others";
            for (int v : xr) msg << ' ' << v;
            msg << ", outcomes";
            for (int v : ar) msg << ' ' << v;
            msg << ": " << ref << " at setting 0 vs " << m << " at setting " << xp << ")";
            return msg.str();
          }
        }
      }
    }
  }
  return std::nullopt;
}

void check_table(const ProbTable& table, double norm_tol, double ns_tol) {
  for (double v : table.values()) {
    if (!std::isfinite(v)) fail(ErrorCode::NormalizationError, "non-finite probability entry");
    if (v < 0.0) fail(ErrorCode::NormalizationError, "negative probability entry " + std::to_string(v));
  }
  double err = normalization_error(table);
  if (err > norm_tol) {
    std::ostringstream msg;
    msg << "probabilities do not sum to 1 for some setting tuple (off by " << err << ")";
    fail(ErrorCode::NormalizationError, msg.str());
  }
  if (auto why = signaling_violation(table, ns_tol)) fail(ErrorCode::SignalingError, *why);
}

std::vector<double> born_probability(const Matrix& rho, const std::vector<std::vector<Matrix>>& projectors) {
  std::size_t dim = 1;
  for (const auto& party : projectors) {
    if (party.empty()) fail(ErrorCode::IncompleteProjectorSet, "party with no projectors");
    Matrix sum(party[0].rows(), party[0].cols());
    for (const auto& pr : party) {
      if (pr.rows() != party[0].rows() || pr.cols() != party[0].cols() || pr.rows() != pr.cols())
        fail(ErrorCode::DimensionMismatch, "projectors of one party differ in shape");
      if (quantum::max_abs_diff(pr * pr, pr) > 1e-12 || quantum::max_abs_diff(quantum::adjoint(pr), pr) > 1e-12)
        fail(ErrorCode::IncompleteProjectorSet, "operator is not an orthogonal projector");
      sum = sum + pr;
    }
    if (quantum::max_abs_diff(sum, Matrix::identity(sum.rows())) > 1e-12)
      fail(ErrorCode::IncompleteProjectorSet, "projectors do not sum to the identity");
    dim *= party[0].rows();
  }
  if (rho.rows() != dim || rho.cols() != dim)
    fail(ErrorCode::DimensionMismatch, "state dimension does not match the measured systems");
  std::vector<int> cards;
  for (const auto& party : projectors) cards.push_back(static_cast<int>(party.size()));
  std::vector<double> out(product(cards));
  for (std::size_t o = 0; o < out.size(); ++o) {
    auto a = decode(o, cards);
    Matrix op = projectors[0][a[0]];
    for (std::size_t p = 1; p < projectors.size(); ++p) op = quantum::kron(op, projectors[p][a[p]]);
    double v = quantum::trace(op * rho).real();
    out[o] = std::abs(v) < 1e-15 ? 0.0 : v;
  }
  return out;
}

std::vector<double> born_probability(const quantum::Vector& state, const std::vector<std::vector<Matrix>>& projectors) {
  return born_probability(quantum::density(state), projectors);
}

ProbTable born_table(const Matrix& rho, const std::vector<std::vector<std::vector<Matrix>>>& measurements) {
  std::vector<int> oc, sc;
  for (const auto& party : measurements) {
    if (party.empty()) fail(ErrorCode::IncompleteProjectorSet, "party with no measurement");
    sc.push_back(static_cast<int>(party.size()));
    oc.push_back(static_cast<int>(party[0].size()));
    for (const auto& m : party)
      if (m.size() != party[0].size())
        fail(ErrorCode::DimensionMismatch, "measurements of one party differ in outcome count");
  }
  ProbTable t(oc, sc);
  for (std::size_t s = 0; s < t.num_setting_tuples(); ++s) {
    auto x = t.decode_settings(s);
    std::vector<std::vector<Matrix>> proj;
    for (std::size_t p = 0; p < measurements.size(); ++p) proj.push_back(measurements[p][x[p]]);
    auto slice = born_probability(rho, proj);
    std::copy(slice.begin(), slice.end(), t.values().begin() + s * t.num_outcome_tuples());
  }
  return t;
}

ProbTable fritz_bilocality() {
  ProbTable t({2, 2, 2}, {2, 1, 2});
  const double hi = (2.0 + std::sqrt(2.0)) / 8.0, lo = (2.0 - std::sqrt(2.0)) / 8.0;
  for (int x = 0; x < 2; ++x)
    for (int z = 0; z < 2; ++z)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < 2; ++c) t.at({x, 0, z}, {a, b, c}) = 0.5 * (((a ^ b) == (x & c)) ? hi : lo);
  t.labels = {"A", "B", "C"};
  return t;
}

namespace {

std::vector<std::vector<Matrix>> chsh_alice() {
  return {quantum::eigenprojectors(quantum::pauli_z()), quantum::eigenprojectors(quantum::pauli_x())};
}

std::vector<std::vector<Matrix>> chsh_bob() {
  const double s = 1.0 / std::sqrt(2.0);
  return {quantum::eigenprojectors((quantum::pauli_z() + quantum::pauli_x()) * s),
          quantum::eigenprojectors((quantum::pauli_z() - quantum::pauli_x()) * s)};
}

}  // namespace

ProbTable entanglement_swapping() {
  Matrix rho = quantum::density(quantum::kron(quantum::phi_plus(), quantum::phi_plus()));
  Matrix bell = quantum::density(quantum::psi_plus());
  std::vector<std::vector<Matrix>> bob = {{bell, Matrix::identity(4) - bell}};
  ProbTable t = born_table(rho, {chsh_alice(), bob, chsh_bob()});
  t.labels = {"A", "B", "C"};
  return t;
}

ProbTable fritz_triangle() {
  ProbTable box = born_table(quantum::density(quantum::phi_plus()), {chsh_alice(), chsh_bob()});
  ProbTable t({4, 4, 4}, {1, 1, 1});
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int lac = 0; lac < 2; ++lac)
        for (int lbc = 0; lbc < 2; ++lbc)
          t.at({0, 0, 0}, {2 * a + lac, 2 * b + lbc, 2 * lac + lbc}) = 0.25 * box({lac, lbc}, {a, b});
  t.labels = {"A", "B", "C"};
  return t;
}

ProbTable pr_triangle(double e1, double e2, double e3) {
  ProbTable t({2, 2, 2}, {1, 1, 1});
  for (int ia = 0; ia < 2; ++ia)
    for (int ib = 0; ib < 2; ++ib)
      for (int ic = 0; ic < 2; ++ic) {
        const double a = 1 - 2 * ia, b = 1 - 2 * ib, c = 1 - 2 * ic;
        double v = (1.0 + (a + b + c) * e1 + (a * b + a * c + b * c) * e2 + a * b * c * e3) / 8.0;
        if (v < 0.0) fail(ErrorCode::InvalidCorrelators, "correlators give a negative probability");
        t.at({0, 0, 0}, {ia, ib, ic}) = v;
      }
  t.labels = {"A", "B", "C"};
  return t;
}

ProbTable uniform_table(const std::vector<int>& outcome_cards, const std::vector<int>& setting_cards) {
  ProbTable t(outcome_cards, setting_cards);
  const double v = 1.0 / static_cast<double>(t.num_outcome_tuples());
  std::fill(t.values().begin(), t.values().end(), v);
  return t;
}

ProbTable deterministic_table(const std::vector<int>& outcome_cards, const std::vector<int>& setting_cards,
                              const std::vector<int>& outcomes) {
  ProbTable t(outcome_cards, setting_cards);
  for (std::size_t s = 0; s < t.num_setting_tuples(); ++s) t.at(t.decode_settings(s), outcomes) = 1.0;
  return t;
}

std::vector<std::string> distribution_names() {
  return {"fritz-bilocality", "entanglement-swapping", "fritz-triangle", "pr-triangle"};
}

ProbTable generate_distribution(std::string_view name, const std::vector<double>& params) {
  auto no_params = [&] {
    if (!params.empty()) fail(ErrorCode::InvalidParams, std::string(name) + " takes no parameters");
  };
  if (name == "fritz-bilocality") {
    no_params();
    return fritz_bilocality();
  }
  if (name == "entanglement-swapping") {
    no_params();
    return entanglement_swapping();
  }
  if (name == "fritz-triangle") {
    no_params();
    return fritz_triangle();
  }
  if (name == "pr-triangle") {
    if (params.empty()) return pr_triangle();
    if (params.size() != 3) fail(ErrorCode::InvalidParams, "pr-triangle takes three correlators e1,e2,e3");
    try {
      return pr_triangle(params[0], params[1], params[2]);
    } catch (const Error& e) {
      fail(ErrorCode::InvalidParams, e.what());
    }
  }
  fail(ErrorCode::UnknownDistribution, "unknown distribution '" + std::string(name) + "'");
}

namespace {

double correlator(const ProbTable& t, int x, int y) {
  double e = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) e += ((a + b) % 2 ? -1.0 : 1.0) * t({x, y}, {a, b});
  return e;
}

void require_chsh_shape(const ProbTable& t) {
  if (t.num_parties() != 2 || t.outcome_cards() != std::vector<int>{2, 2} ||
      t.setting_cards() != std::vector<int>{2, 2})
    fail(ErrorCode::ShapeMismatch, "CHSH needs two parties with binary settings and outcomes");
}

}  // namespace

double chsh_value(const ProbTable& t) {
  require_chsh_shape(t);
  return correlator(t, 0, 0) + correlator(t, 0, 1) + correlator(t, 1, 0) - correlator(t, 1, 1);
}

double max_chsh_value(const ProbTable& t) {
  require_chsh_shape(t);
  const double e[4] = {correlator(t, 0, 0), correlator(t, 0, 1), correlator(t, 1, 0), correlator(t, 1, 1)};
  double best = 0.0;
  for (int neg = 0; neg < 4; ++neg) {
    double v = 0.0;
    for (int k = 0; k < 4; ++k) v += k == neg ? -e[k] : e[k];
    best = std::max(best, std::abs(v));
  }
  return best;
}

std::string distribution_to_text(const ProbTable& table) {
  auto list = [](const std::vector<int>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    return s + "]";
  };
  std::string out = "{\n";
  out += "  \"outcome_cards\": " + list(table.outcome_cards()) + ",\n";
  out += "  \"setting_cards\": " + list(table.setting_cards()) + ",\n";
  if (!table.labels.empty()) {
    out += "  \"labels\": [";
    for (std::size_t i = 0; i < table.labels.size(); ++i) out += (i ? ", " : "") + json(table.labels[i]).dump();
    out += "],\n";
  }
  out += "  \"values\": [\n";
  char buf[64];
  const auto& v = table.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    out += "    ";
    out += buf;
    out += i + 1 < v.size() ? ",\n" : "\n";
  }
  out += "  ]\n}\n";
  return out;
}

ProbTable parse_distribution(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, std::string("distribution file: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::ParseError, "distribution file must be an object");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (it.key() != "outcome_cards" && it.key() != "setting_cards" && it.key() != "values" && it.key() != "labels")
      fail(ErrorCode::ParseError, "unknown key '" + it.key() + "' in distribution file");
  ProbTable table;
  try {
    auto oc = doc.at("outcome_cards").get<std::vector<int>>();
    auto sc = doc.at("setting_cards").get<std::vector<int>>();
    auto values = doc.at("values").get<std::vector<double>>();
    ProbTable shape(oc, sc);
    if (values.size() != shape.values().size())
      fail(ErrorCode::ParseError, "declared cardinalities need " + std::to_string(shape.values().size()) +
                                      " values, file has " + std::to_string(values.size()));
    table = ProbTable(oc, sc, values);
    if (doc.contains("labels")) {
      table.labels = doc.at("labels").get<std::vector<std::string>>();
      if (table.labels.size() != oc.size()) fail(ErrorCode::ParseError, "one label per party expected");
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("distribution file: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ShapeMismatch) fail(ErrorCode::ParseError, e.what());
    throw;
  }
  check_table(table);
  return table;
}

ProbTable load_distribution(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_distribution(buf.str());
}

void save_distribution(const ProbTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << distribution_to_text(table);
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

std::string fingerprint(const ProbTable& table) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : distribution_to_text(table)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace randcert

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "randcert/quantum.hpp"

namespace randcert {

// Dense conditional distribution P(a_1..a_n | x_1..x_n). Storage is mixed
// radix over (settings; outcomes): settings outermost, last party's outcome
// fastest.
class ProbTable {
 public:
  ProbTable() = default;
  ProbTable(std::vector<int> outcome_cards, std::vector<int> setting_cards);
  ProbTable(std::vector<int> outcome_cards, std::vector<int> setting_cards, std::vector<double> values);

  std::size_t num_parties() const { return outcome_cards_.size(); }
  const std::vector<int>& outcome_cards() const { return outcome_cards_; }
  const std::vector<int>& setting_cards() const { return setting_cards_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  std::size_t num_setting_tuples() const { return num_settings_; }
  std::size_t num_outcome_tuples() const { return num_outcomes_; }

  std::size_t index(const std::vector<int>& settings, const std::vector<int>& outcomes) const;
  double operator()(const std::vector<int>& settings, const std::vector<int>& outcomes) const {
    return values_[index(settings, outcomes)];
  }
  double& at(const std::vector<int>& settings, const std::vector<int>& outcomes) {
    return values_[index(settings, outcomes)];
  }

  std::vector<int> decode_settings(std::size_t tuple) const;
  std::vector<int> decode_outcomes(std::size_t tuple) const;

  // Probability that each party in `members` outputs the matching entry of
  // `outcomes` when it uses the matching entry of `settings`. Parties outside
  // `members` are summed over at setting 0, which is exact for
  // no-signalling tables.
  double marginal(const std::vector<std::size_t>& members, const std::vector<int>& outcomes,
                  const std::vector<int>& settings) const;

  // Table restricted to the listed parties (in the given order).
  ProbTable marginal_table(const std::vector<std::size_t>& keep) const;
  // Remaining parties conditioned on `party` producing `outcome`. The
  // conditioning party must be settingless.
  ProbTable conditioned(std::size_t party, int outcome) const;
  // Drop `party` (evaluated at its setting 0) and feed its outcome to the
  // settingless `receiver` as that receiver's setting:
  // P(rest | x, y = c) = P(rest, c | x, 0) / P(c | 0).
  ProbTable outcome_as_setting(std::size_t party, std::size_t receiver) const;

  std::vector<std::string> labels;

 private:
  std::vector<int> outcome_cards_, setting_cards_;
  std::size_t num_settings_ = 1, num_outcomes_ = 1;
  std::vector<double> values_;
};

bool same_shape(const ProbTable& a, const ProbTable& b);

// Largest |sum_a P(a|x) - 1| over setting tuples.
double normalization_error(const ProbTable& table);
// First no-signalling violation above tol, described in words.
std::optional<std::string> signaling_violation(const ProbTable& table, double tol = 1e-10);
// Throws NormalizationError / SignalingError, or on negative entries.
void check_table(const ProbTable& table, double norm_tol = 1e-12, double ns_tol = 1e-10);

// Born rule for one setting tuple: entries Tr[(P_1 (x) ... (x) P_n) rho] with
// the last party's outcome fastest. `projectors[p]` is party p's complete
// projector list.
std::vector<double> born_probability(const quantum::Matrix& rho,
                                     const std::vector<std::vector<quantum::Matrix>>& projectors);
std::vector<double> born_probability(const quantum::Vector& state,
                                     const std::vector<std::vector<quantum::Matrix>>& projectors);
// Full table; measurements[p][x] is party p's projector list for setting x.
ProbTable born_table(const quantum::Matrix& rho,
                     const std::vector<std::vector<std::vector<quantum::Matrix>>>& measurements);

ProbTable fritz_bilocality();
ProbTable entanglement_swapping();
ProbTable fritz_triangle();
ProbTable pr_triangle(double e1 = 0.0, double e2 = 1.4142135623730951 - 1.0, double e3 = 0.0);
ProbTable uniform_table(const std::vector<int>& outcome_cards, const std::vector<int>& setting_cards);
ProbTable deterministic_table(const std::vector<int>& outcome_cards, const std::vector<int>& setting_cards,
                              const std::vector<int>& outcomes);

// Generator lookup by CLI name ("fritz-bilocality", ...).
ProbTable generate_distribution(std::string_view name, const std::vector<double>& params);
std::vector<std::string> distribution_names();

// E00 + E01 + E10 - E11 for a two-party binary-input binary-output table.
double chsh_value(const ProbTable& table);
// Largest |value| over the eight CHSH forms (one minus sign, any position).
double max_chsh_value(const ProbTable& table);

std::string distribution_to_text(const ProbTable& table);
ProbTable parse_distribution(std::string_view text);
ProbTable load_distribution(const std::string& path);
void save_distribution(const ProbTable& table, const std::string& path);

// Content hash of the canonical text form ("fnv1a64:<hex>").
std::string fingerprint(const ProbTable& table);

}  // namespace randcert

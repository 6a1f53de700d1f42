#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "randcert/distributions.hpp"
#include "randcert/inflation.hpp"
#include "randcert/lp.hpp"
#include "randcert/network.hpp"

namespace randcert::certify {

struct BoundOptions {
  lp::SolverOptions solver;
  inflation::EnumerateOptions enumerate;
  // Eve's interrupted setting collapses to the single value she uses against
  // the fixed target setting. Off keeps her full composite setting in the
  // program and reads the objective at the matching value.
  bool pin_eve_setting = true;
};

struct RandomnessBound {
  std::vector<std::string> targets;
  bool joint = false;
  // Full setting tuple the bound refers to; for worst-case bounds, the
  // minimizing tuple.
  std::vector<int> settings;
  bool worst = false;
  inflation::LevelVector level;
  double bound = 1.0;
  lp::Status status = lp::Status::Numerical;
  std::size_t inflations_used = 0;
  std::size_t lp_variables = 0;
  std::size_t lp_rows = 0;
  std::size_t pivots = 0;
  double max_residual = 0.0;
  // Worst-case runs: the bound at every target setting tuple, in mixed-radix
  // order of the targets' settings.
  std::vector<double> per_setting;
};

// Program maximizing the probability that Eve's outcome equals the targets'
// outcomes at `settings`, over the inflation relaxation at `level` with the
// observed table pinned.
lp::LinearProgram guessing_program(const ProbTable& dist, const Network& network,
                                   const std::vector<std::string>& targets, const std::vector<int>& settings,
                                   const inflation::LevelVector& level, bool joint,
                                   const BoundOptions& options = {});

RandomnessBound guessing_bound(const ProbTable& dist, const Network& network, const std::vector<std::string>& targets,
                               const std::vector<int>& settings, const inflation::LevelVector& level, bool joint,
                               const BoundOptions& options = {});

// Bound read from an external solver's solution of guessing_program (one
// decimal per line), re-verified against the program at `tol`. A solution
// that fails verification yields status Numerical and bound 1.
RandomnessBound imported_bound(const ProbTable& dist, const Network& network, const std::vector<std::string>& targets,
                               const std::vector<int>& settings, const inflation::LevelVector& level, bool joint,
                               const std::string& solution_path, double tol = 1e-8, const BoundOptions& options = {});

// Minimum of guessing_bound over the targets' setting tuples.
RandomnessBound worst_guess_bound(const ProbTable& dist, const Network& network,
                                  const std::vector<std::string>& targets, const inflation::LevelVector& level,
                                  bool joint, const BoundOptions& options = {});

// max over outcome tuples of P(a_targets | settings).
double modal_probability(const ProbTable& dist, const std::vector<std::size_t>& targets,
                         const std::vector<int>& settings);

enum class ProgramKind { BilocClassicalParents, TriangleClassicalParents, BilocEmbeddedBell, TriangleEmbeddedBell };
const char* program_kind_name(ProgramKind kind);

enum class Verdict { Feasible, Inconclusive, DisprovenByLP };
const char* verdict_name(Verdict verdict);

struct NoRandomnessCertificate {
  ProgramKind kind = ProgramKind::BilocClassicalParents;
  Verdict verdict = Verdict::Inconclusive;
  // Parties whose outcomes the model shows to be predictable.
  std::vector<std::string> parties;
  int hidden_card = 0;
  // Feasible point; for bilinear programs block A then block B.
  std::vector<double> assignment;
  std::size_t block_a_size = 0;
  double max_residual = 0.0;
  // Largest gap between the model's prediction and the observed table.
  double recovery_error = 0.0;
  // Bilinear runs: restarts tried and the successful restart index.
  std::size_t restarts_tried = 0;
  std::size_t restart = 0;
  // DisprovenByLP: infeasibility multipliers and their exact check.
  std::vector<double> farkas;
  bool farkas_verified = false;
};

struct NoRandomnessOptions {
  lp::SolverOptions solver;
  lp::BilinearOptions bilinear;
};

// Bilocality model with classical source between B and C (Charlie's outcomes
// unpacked over Z). Parties are A (setting X), settingless B, C (setting Z).
lp::LinearProgram biloc_charlie_program(const ProbTable& dist);
NoRandomnessCertificate no_randomness_biloc_charlie(const ProbTable& dist, const NoRandomnessOptions& options = {});

// Settingless triangle. `party` is the one certified: it receives two
// classical sources while the other two share the nonclassical one. The
// classical source between `party` and the first remaining party has
// cardinality d.
lp::BilinearProgram triangle_classical_program(const ProbTable& dist, int d, std::size_t party = 2);
NoRandomnessCertificate no_randomness_triangle_classical_parents(const ProbTable& dist, int d, std::size_t party = 2,
                                                                 const NoRandomnessOptions& options = {});

// Embedded-Bell programs. `cover` lists the parties Eve must predict (by
// index among A, B, C); Eve's alphabet is the product of one guess per
// covered party: B's outcome, C's response vector, A's outcome per setting.
lp::BilinearProgram biloc_embedded_program(const ProbTable& dist, const std::vector<std::size_t>& cover = {1});
NoRandomnessCertificate no_randomness_biloc_bob_embedded(const ProbTable& dist, const NoRandomnessOptions& options = {});

lp::BilinearProgram triangle_embedded_program(const ProbTable& dist, int d, const std::vector<std::size_t>& cover = {1});
NoRandomnessCertificate no_randomness_triangle_bob_embedded(const ProbTable& dist, int d,
                                                            const NoRandomnessOptions& options = {});

// Embedded-Bell certificate covering several parties at once.
NoRandomnessCertificate multiparty_extension(ProgramKind kind, const ProbTable& dist,
                                             const std::vector<std::string>& cover, int d = 1,
                                             const NoRandomnessOptions& options = {});

// Reports.
struct ReportMeta {
  std::string program;
  std::string fingerprint;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  std::string backend = "reference";
};

std::string bound_report(const RandomnessBound& bound, const ReportMeta& meta);
std::string certificate_report(const NoRandomnessCertificate& cert, const ReportMeta& meta);
// Writes through a temporary file in the same directory, then renames.
void write_atomically(const std::string& path, const std::string& content);

}  // namespace randcert::certify

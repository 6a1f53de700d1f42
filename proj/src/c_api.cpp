#include "randcert/randcert.h"

#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "randcert/certify.hpp"
#include "randcert/distributions.hpp"
#include "randcert/error.hpp"
#include "randcert/inflation.hpp"
#include "randcert/lp.hpp"
#include "randcert/network.hpp"

struct rc_network {
  randcert::Network value;
};

struct rc_table {
  randcert::ProbTable value;
};

struct rc_bound {
  randcert::certify::RandomnessBound value;
};

struct rc_certificate {
  randcert::certify::NoRandomnessCertificate value;
};

struct rc_program {
  randcert::lp::LinearProgram value;
};

namespace {

using namespace randcert;

thread_local std::string last_error;

rc_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return RC_ERR_INVALID_ARGUMENT;
    case ErrorCode::ParseError: return RC_ERR_PARSE;
    case ErrorCode::IoError: return RC_ERR_IO;
    case ErrorCode::UnknownParty: return RC_ERR_UNKNOWN_PARTY;
    case ErrorCode::AlreadyInterrupted: return RC_ERR_ALREADY_INTERRUPTED;
    case ErrorCode::ShapeMismatch: return RC_ERR_SHAPE_MISMATCH;
    case ErrorCode::NormalizationError: return RC_ERR_NORMALIZATION;
    case ErrorCode::SignalingError: return RC_ERR_SIGNALING;
    case ErrorCode::InvalidCorrelators: return RC_ERR_INVALID_CORRELATORS;
    case ErrorCode::DimensionMismatch: return RC_ERR_DIMENSION_MISMATCH;
    case ErrorCode::IncompleteProjectorSet: return RC_ERR_INCOMPLETE_PROJECTORS;
    case ErrorCode::LevelTooLarge: return RC_ERR_LEVEL_TOO_LARGE;
    case ErrorCode::IncompatibleInflations: return RC_ERR_INCOMPATIBLE_INFLATIONS;
    case ErrorCode::SolutionShapeMismatch: return RC_ERR_SOLUTION_SHAPE;
    case ErrorCode::UnknownDistribution: return RC_ERR_UNKNOWN_DISTRIBUTION;
    case ErrorCode::InvalidParams: return RC_ERR_INVALID_PARAMS;
    case ErrorCode::SolverFailure: return RC_ERR_SOLVER;
  }
  return RC_ERR_INTERNAL;
}

template <class F>
rc_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return RC_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return RC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return RC_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::string> split_names(const char* text) {
  std::vector<std::string> out;
  std::string current;
  for (const char* c = text; *c; ++c) {
    if (*c == ',' || *c == ' ') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else {
      current += *c;
    }
  }
  if (!current.empty()) out.push_back(current);
  if (out.empty()) fail(ErrorCode::InvalidArgument, "no party names given");
  return out;
}

std::vector<int> settings_vector(const Network& network, const int* settings) {
  return std::vector<int>(settings, settings + network.num_parties());
}

rc_lp_status to_lp(lp::Status s) {
  switch (s) {
    case lp::Status::Optimal: return RC_LP_OPTIMAL;
    case lp::Status::Infeasible: return RC_LP_INFEASIBLE;
    case lp::Status::Unbounded: return RC_LP_UNBOUNDED;
    case lp::Status::IterationLimit: return RC_LP_ITERATION_LIMIT;
    case lp::Status::Numerical: return RC_LP_NUMERICAL;
  }
  return RC_LP_NUMERICAL;
}

certify::ProgramKind to_kind(rc_program_kind kind) {
  switch (kind) {
    case RC_PROGRAM_BILOC_CLASSICAL_PARENTS: return certify::ProgramKind::BilocClassicalParents;
    case RC_PROGRAM_TRIANGLE_CLASSICAL_PARENTS: return certify::ProgramKind::TriangleClassicalParents;
    case RC_PROGRAM_BILOC_EMBEDDED_BELL: return certify::ProgramKind::BilocEmbeddedBell;
    case RC_PROGRAM_TRIANGLE_EMBEDDED_BELL: return certify::ProgramKind::TriangleEmbeddedBell;
  }
  fail(ErrorCode::InvalidArgument, "unknown program kind");
}

}  // namespace

extern "C" {

const char* rc_version(void) { return "1.0.0"; }

const char* rc_status_name(rc_status status) {
  switch (status) {
    case RC_OK: return "ok";
    case RC_ERR_INVALID_ARGUMENT: return error_code_name(ErrorCode::InvalidArgument);
    case RC_ERR_PARSE: return error_code_name(ErrorCode::ParseError);
    case RC_ERR_IO: return error_code_name(ErrorCode::IoError);
    case RC_ERR_UNKNOWN_PARTY: return error_code_name(ErrorCode::UnknownParty);
    case RC_ERR_ALREADY_INTERRUPTED: return error_code_name(ErrorCode::AlreadyInterrupted);
    case RC_ERR_SHAPE_MISMATCH: return error_code_name(ErrorCode::ShapeMismatch);
    case RC_ERR_NORMALIZATION: return error_code_name(ErrorCode::NormalizationError);
    case RC_ERR_SIGNALING: return error_code_name(ErrorCode::SignalingError);
    case RC_ERR_INVALID_CORRELATORS: return error_code_name(ErrorCode::InvalidCorrelators);
    case RC_ERR_DIMENSION_MISMATCH: return error_code_name(ErrorCode::DimensionMismatch);
    case RC_ERR_INCOMPLETE_PROJECTORS: return error_code_name(ErrorCode::IncompleteProjectorSet);
    case RC_ERR_LEVEL_TOO_LARGE: return error_code_name(ErrorCode::LevelTooLarge);
    case RC_ERR_INCOMPATIBLE_INFLATIONS: return error_code_name(ErrorCode::IncompatibleInflations);
    case RC_ERR_SOLUTION_SHAPE: return error_code_name(ErrorCode::SolutionShapeMismatch);
    case RC_ERR_UNKNOWN_DISTRIBUTION: return error_code_name(ErrorCode::UnknownDistribution);
    case RC_ERR_INVALID_PARAMS: return error_code_name(ErrorCode::InvalidParams);
    case RC_ERR_SOLVER: return error_code_name(ErrorCode::SolverFailure);
    case RC_ERR_NULL_HANDLE: return "NullHandle";
    case RC_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* rc_last_error(void) { return last_error.c_str(); }

void rc_string_free(char* text) { delete[] text; }

rc_status rc_network_builtin(const char* name, int outcomes, rc_network** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    const std::string n(name);
    Network net;
    if (n == "bell") net = Network::bell(outcomes);
    else if (n == "bilocality") net = Network::bilocality(outcomes);
    else if (n == "triangle") net = Network::triangle(outcomes);
    else fail(ErrorCode::InvalidArgument, "unknown built-in network: " + n);
    *out = new rc_network{std::move(net)};
  });
}

rc_status rc_network_parse(const char* text, rc_network** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new rc_network{parse_network(text)};
  });
}

rc_status rc_network_load(const char* path, rc_network** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new rc_network{load_network(path)};
  });
}

rc_status rc_network_to_text(const rc_network* network, char** out_text) {
  if (!network) return RC_ERR_NULL_HANDLE;
  return guarded([&] {
    require(out_text, "out_text");
    *out_text = copy_string(network_to_text(network->value));
  });
}

rc_status rc_network_validate(const rc_network* network, char** out_text) {
  if (!network) return RC_ERR_NULL_HANDLE;
  return guarded([&] {
    require(out_text, "out_text");
    std::string text;
    for (const auto& v : validate(network->value)) text += v + "\n";
    *out_text = copy_string(text);
  });
}

size_t rc_network_num_parties(const rc_network* network) { return network ? network->value.num_parties() : 0; }

void rc_network_free(rc_network* network) { delete network; }

rc_status rc_table_generate(const char* name, const double* params, size_t num_params, rc_table** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    if (num_params > 0) require(params, "params");
    std::vector<double> p(params, params + num_params);
    *out = new rc_table{generate_distribution(name, p)};
  });
}

rc_status rc_table_create(size_t num_parties, const int* outcome_cards, const int* setting_cards,
                          const double* values, size_t num_values, rc_table** out) {
  return guarded([&] {
    require(outcome_cards, "outcome_cards");
    require(setting_cards, "setting_cards");
    require(values, "values");
    require(out, "out");
    ProbTable t(std::vector<int>(outcome_cards, outcome_cards + num_parties),
                std::vector<int>(setting_cards, setting_cards + num_parties),
                std::vector<double>(values, values + num_values));
    *out = new rc_table{std::move(t)};
  });
}

rc_status rc_table_load(const char* path, rc_table** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new rc_table{load_distribution(path)};
  });
}

rc_status rc_table_save(const rc_table* table, const char* path) {
  if (!table) return RC_ERR_NULL_HANDLE;
  return guarded([&] {
    require(path, "path");
    certify::write_atomically(path, distribution_to_text(table->value));
  });
}

size_t rc_table_num_parties(const rc_table* table) { return table ? table->value.num_parties() : 0; }

int rc_table_outcome_card(const rc_table* table, size_t party) {
  return table && party < table->value.num_parties() ? table->value.outcome_cards()[party] : 0;
}

int rc_table_setting_card(const rc_table* table, size_t party) {
  return table && party < table->value.num_parties() ? table->value.setting_cards()[party] : 0;
}

size_t rc_table_num_values(const rc_table* table) { return table ? table->value.values().size() : 0; }

const double* rc_table_values(const rc_table* table) { return table ? table->value.values().data() : nullptr; }

rc_status rc_table_fingerprint(const rc_table* table, char* buffer, size_t size) {
  if (!table) return RC_ERR_NULL_HANDLE;
  return guarded([&] {
    require(buffer, "buffer");
    const std::string fp = fingerprint(table->value);
    if (size < fp.size() + 1) fail(ErrorCode::InvalidArgument, "fingerprint buffer too small");
    std::memcpy(buffer, fp.c_str(), fp.size() + 1);
  });
}

rc_status rc_distribution_names(char** out_text) {
  return guarded([&] {
    require(out_text, "out_text");
    std::string text;
    for (const auto& n : distribution_names()) text += n + "\n";
    *out_text = copy_string(text);
  });
}

void rc_table_free(rc_table* table) { delete table; }

rc_status rc_list_inflations(const rc_network* network, const char* targets, const char* level, int joint,
                             char** out_text) {
  if (!network) return RC_ERR_NULL_HANDLE;
  return guarded([&] {
    require(targets, "targets");
    require(level, "level");
    require(out_text, "out_text");
    const EveScenario sc = interrupt(attach_eavesdropper(network->value, split_names(targets), joint != 0));
    const auto graph = inflation::scenario_graph(sc, true);
    const auto infl = inflation::enumerate_inflations(graph, inflation::parse_level(level));
    std::ostringstream os;
    for (const auto& inf : infl) {
      os << inf.signature() << " ; injectable";
      for (const auto& set : inflation::injectable_sets(inf)) os << ' ' << inflation::describe_set(inf, set.party_copies);
      os << "\n";
    }
    *out_text = copy_string(os.str());
  });
}

rc_status rc_guessing_bound(const rc_table* table, const rc_network* network, const char* targets,
                            const int* settings, const char* level, int joint, rc_bound** out) {
  if (!table || !network) return RC_ERR_NULL_HANDLE;
  return guarded([&] {
    require(targets, "targets");
    require(level, "level");
    require(out, "out");
    const auto names = split_names(targets);
    const auto lv = inflation::parse_level(level);
    certify::RandomnessBound b =
        settings ? certify::guessing_bound(table->value, network->value, names,
                                           settings_vector(network->value, settings), lv, joint != 0)
                 : certify::worst_guess_bound(table->value, network->value, names, lv, joint != 0);
    *out = new rc_bound{std::move(b)};
  });
}

rc_status rc_guessing_bound_import(const rc_table* table, const rc_network* network, const char* targets,
                                   const int* settings, const char* level, int joint, const char* solution_path,
                                   double tol, rc_bound** out) {
  if (!table || !network) return RC_ERR_NULL_HANDLE;
  return guarded([&] {
    require(targets, "targets");
    require(settings, "settings");
    require(level, "level");
    require(solution_path, "solution_path");
    require(out, "out");
    *out = new rc_bound{certify::imported_bound(table->value, network->value, split_names(targets),
                                                settings_vector(network->value, settings),
                                                inflation::parse_level(level), joint != 0, solution_path, tol)};
  });
}

double rc_bound_value(const rc_bound* bound) { return bound ? bound->value.bound : 1.0; }

rc_lp_status rc_bound_lp_status(const rc_bound* bound) {
  return bound ? to_lp(bound->value.status) : RC_LP_NUMERICAL;
}

size_t rc_bound_inflations(const rc_bound* bound) { return bound ? bound->value.inflations_used : 0; }

rc_status rc_bound_report(const rc_bound* bound, const char* fingerprint, uint64_t seed, double wall_seconds,
                          const char* backend, char** out_json) {
  if (!bound) return RC_ERR_NULL_HANDLE;
  return guarded([&] {
    require(out_json, "out_json");
    certify::ReportMeta meta;
    meta.fingerprint = fingerprint ? fingerprint : "";
    meta.seed = seed;
    meta.wall_seconds = wall_seconds;
    if (backend) meta.backend = backend;
    *out_json = copy_string(certify::bound_report(bound->value, meta));
  });
}

void rc_bound_free(rc_bound* bound) { delete bound; }

rc_status rc_certify_no_randomness(const rc_table* table, rc_program_kind kind, int hidden_card, int party,
                                   const char* cover, size_t restarts, uint64_t seed, rc_certificate** out) {
  if (!table) return RC_ERR_NULL_HANDLE;
  return guarded([&] {
    require(out, "out");
    certify::NoRandomnessOptions opts;
    if (restarts > 0) opts.bilinear.restarts = restarts;
    opts.bilinear.seed = seed;
    const auto k = to_kind(kind);
    if (party < 0 || party > 2) fail(ErrorCode::InvalidArgument, "party must be 0, 1 or 2");
    certify::NoRandomnessCertificate c;
    if (cover) {
      c = certify::multiparty_extension(k, table->value, split_names(cover), hidden_card, opts);
    } else {
      switch (k) {
        case certify::ProgramKind::BilocClassicalParents:
          c = certify::no_randomness_biloc_charlie(table->value, opts);
          break;
        case certify::ProgramKind::TriangleClassicalParents:
          c = certify::no_randomness_triangle_classical_parents(table->value, hidden_card,
                                                                static_cast<std::size_t>(party), opts);
          break;
        case certify::ProgramKind::BilocEmbeddedBell:
          c = certify::no_randomness_biloc_bob_embedded(table->value, opts);
          break;
        case certify::ProgramKind::TriangleEmbeddedBell:
          c = certify::no_randomness_triangle_bob_embedded(table->value, hidden_card, opts);
          break;
      }
    }
    *out = new rc_certificate{std::move(c)};
  });
}

rc_verdict rc_certificate_verdict(const rc_certificate* cert) {
  if (!cert) return RC_INCONCLUSIVE;
  switch (cert->value.verdict) {
    case certify::Verdict::Feasible: return RC_FEASIBLE;
    case certify::Verdict::DisprovenByLP: return RC_DISPROVEN_BY_LP;
    case certify::Verdict::Inconclusive: break;
  }
  return RC_INCONCLUSIVE;
}

double rc_certificate_residual(const rc_certificate* cert) { return cert ? cert->value.max_residual : 0.0; }

double rc_certificate_recovery_error(const rc_certificate* cert) { return cert ? cert->value.recovery_error : 0.0; }

rc_status rc_certificate_report(const rc_certificate* cert, const char* fingerprint, uint64_t seed,
                                double wall_seconds, char** out_json) {
  if (!cert) return RC_ERR_NULL_HANDLE;
  return guarded([&] {
    require(out_json, "out_json");
    certify::ReportMeta meta;
    meta.fingerprint = fingerprint ? fingerprint : "";
    meta.seed = seed;
    meta.wall_seconds = wall_seconds;
    *out_json = copy_string(certify::certificate_report(cert->value, meta));
  });
}

void rc_certificate_free(rc_certificate* cert) { delete cert; }

rc_status rc_program_guessing(const rc_table* table, const rc_network* network, const char* targets,
                              const int* settings, const char* level, int joint, rc_program** out) {
  if (!table || !network) return RC_ERR_NULL_HANDLE;
  return guarded([&] {
    require(targets, "targets");
    require(settings, "settings");
    require(level, "level");
    require(out, "out");
    *out = new rc_program{certify::guessing_program(table->value, network->value, split_names(targets),
                                                    settings_vector(network->value, settings),
                                                    inflation::parse_level(level), joint != 0)};
  });
}

rc_status rc_program_biloc_charlie(const rc_table* table, rc_program** out) {
  if (!table) return RC_ERR_NULL_HANDLE;
  return guarded([&] {
    require(out, "out");
    *out = new rc_program{certify::biloc_charlie_program(table->value)};
  });
}

size_t rc_program_num_vars(const rc_program* program) { return program ? program->value.num_vars : 0; }

size_t rc_program_num_rows(const rc_program* program) { return program ? program->value.rows.size() : 0; }

rc_status rc_program_export_mps(const rc_program* program, const char* path) {
  if (!program) return RC_ERR_NULL_HANDLE;
  return guarded([&] {
    require(path, "path");
    certify::write_atomically(path, lp::to_mps(program->value));
  });
}

rc_status rc_program_solve(const rc_program* program, rc_lp_status* status, double* objective, double* residual) {
  if (!program) return RC_ERR_NULL_HANDLE;
  return guarded([&] {
    const lp::SolveResult r = lp::solve_lp(program->value);
    if (status) *status = to_lp(r.status);
    if (objective) *objective = r.optimum;
    if (residual) *residual = r.max_residual;
  });
}

rc_status rc_program_import_solution(const rc_program* program, const char* path, double tol, rc_lp_status* status,
                                     double* objective, double* residual) {
  if (!program) return RC_ERR_NULL_HANDLE;
  return guarded([&] {
    require(path, "path");
    const lp::SolveResult r = lp::import_solution(program->value, path, tol);
    if (status) *status = to_lp(r.status);
    if (objective) *objective = r.optimum;
    if (residual) *residual = r.max_residual;
  });
}

void rc_program_free(rc_program* program) { delete program; }

rc_status rc_write_file_atomically(const char* path, const char* content) {
  return guarded([&] {
    require(path, "path");
    require(content, "content");
    certify::write_atomically(path, content);
  });
}

}  // extern "C"

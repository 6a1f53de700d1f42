#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "randcert/randcert.h"

namespace {

using json = nlohmann::json;

enum Exit { kOk = 0, kUsage = 2, kInput = 3, kIo = 4, kSolver = 5 };

struct Failure {
  rc_status status;
  std::string message;
};

int exit_code(rc_status s) {
  switch (s) {
    case RC_OK: return kOk;
    case RC_ERR_IO: return kIo;
    case RC_ERR_SOLVER:
    case RC_ERR_INTERNAL: return kSolver;
    default: return kInput;
  }
}

void check(rc_status s) {
  if (s != RC_OK) throw Failure{s, rc_last_error()};
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
};

using NetworkHandle = Handle<rc_network, rc_network_free>;
using TableHandle = Handle<rc_table, rc_table_free>;
using BoundHandle = Handle<rc_bound, rc_bound_free>;
using CertHandle = Handle<rc_certificate, rc_certificate_free>;
using ProgramHandle = Handle<rc_program, rc_program_free>;

std::string take(char* text) {
  std::string out = text ? text : "";
  rc_string_free(text);
  return out;
}

struct Config {
  std::string network;
  std::string dist;
  // Empty: A for guessing programs, the program's own party otherwise.
  std::string target;
  std::string level = "2,2";
  int hidden_card = 2;
  bool joint = false;
  std::uint64_t seed = 0;
  std::string backend = "reference";
  std::string out;
  double tol = 1e-8;
  std::string program;
  std::vector<int> settings;
  std::string solution;
  std::size_t restarts = 0;
  std::string name;
  std::vector<double> params;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void emit(const Config& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    check(rc_write_file_atomically(cfg.out.c_str(), text.c_str()));
  }
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Built-in networks take their outcome cardinality from the table when one
// is loaded.
void load_network(const Config& cfg, NetworkHandle& net, const rc_table* table = nullptr) {
  if (cfg.network.empty()) throw Failure{RC_ERR_INVALID_ARGUMENT, "--network is required"};
  if (std::filesystem::exists(cfg.network)) {
    check(rc_network_load(cfg.network.c_str(), &net.ptr));
  } else {
    const int outcomes = table && rc_table_num_parties(table) > 0 ? rc_table_outcome_card(table, 0) : 2;
    check(rc_network_builtin(cfg.network.c_str(), outcomes, &net.ptr));
  }
}

void load_table(const Config& cfg, TableHandle& table) {
  if (cfg.dist.empty()) throw Failure{RC_ERR_INVALID_ARGUMENT, "--dist is required"};
  if (std::filesystem::exists(cfg.dist))
    check(rc_table_load(cfg.dist.c_str(), &table.ptr));
  else
    check(rc_table_generate(cfg.dist.c_str(), nullptr, 0, &table.ptr));
}

std::string table_fingerprint(const rc_table* table) {
  char buf[64];
  check(rc_table_fingerprint(table, buf, sizeof buf));
  return buf;
}

std::string guess_targets(const Config& cfg) { return cfg.target.empty() ? "A" : cfg.target; }

const int* settings_or_null(const Config& cfg, const rc_network* net) {
  if (cfg.settings.empty()) return nullptr;
  if (cfg.settings.size() != rc_network_num_parties(net))
    throw Failure{RC_ERR_SHAPE_MISMATCH, "--settings must list one setting per party"};
  return cfg.settings.data();
}

int cmd_gen_dist(const Config& cfg) {
  TableHandle table;
  check(rc_table_generate(cfg.name.c_str(), cfg.params.data(), cfg.params.size(), &table.ptr));
  if (cfg.out.empty()) throw Failure{RC_ERR_INVALID_ARGUMENT, "--out is required"};
  check(rc_table_save(table.ptr, cfg.out.c_str()));
  return kOk;
}

int cmd_certify_randomness(const Config& cfg) {
  const auto start = std::chrono::steady_clock::now();
  NetworkHandle net;
  TableHandle table;
  load_table(cfg, table);
  load_network(cfg, net, table.ptr);
  const std::string fp = table_fingerprint(table.ptr);
  const int* settings = settings_or_null(cfg, net.ptr);

  std::vector<std::string> groups;
  const std::string target = guess_targets(cfg);
  if (cfg.joint) groups.push_back(target);
  else groups = split(target);
  if (groups.empty()) throw Failure{RC_ERR_INVALID_ARGUMENT, "--target names no party"};

  std::vector<json> reports;
  bool solved = true;
  for (const auto& targets : groups) {
    const auto t0 = std::chrono::steady_clock::now();
    BoundHandle bound;
    if (cfg.backend == "reference") {
      check(rc_guessing_bound(table.ptr, net.ptr, targets.c_str(), settings, cfg.level.c_str(), cfg.joint,
                              &bound.ptr));
    } else {
      if (!settings) throw Failure{RC_ERR_INVALID_ARGUMENT, "the export backend needs --settings"};
      if (cfg.solution.empty())
        throw Failure{RC_ERR_INVALID_ARGUMENT,
                      "the export backend reads --solution (solve the program written by export-lp)"};
      check(rc_guessing_bound_import(table.ptr, net.ptr, targets.c_str(), settings, cfg.level.c_str(), cfg.joint,
                                     cfg.solution.c_str(), cfg.tol, &bound.ptr));
    }
    solved = solved && rc_bound_lp_status(bound.ptr) == RC_LP_OPTIMAL;
    char* text = nullptr;
    check(rc_bound_report(bound.ptr, fp.c_str(), cfg.seed, seconds_since(t0), cfg.backend.c_str(), &text));
    reports.push_back(json::parse(take(text)));
  }
  if (reports.size() == 1) {
    emit(cfg, reports.front().dump(2) + "\n");
  } else {
    json j;
    j["program"] = "guessing-bound";
    j["distribution"] = fp;
    j["reports"] = reports;
    j["wall_time"] = seconds_since(start);
    emit(cfg, j.dump(2) + "\n");
  }
  if (!solved) {
    std::cerr << "error: the guessing program was not solved to optimality\n";
    return kSolver;
  }
  return kOk;
}

std::optional<rc_program_kind> program_kind(const std::string& name) {
  if (name == "biloc-classical-parents") return RC_PROGRAM_BILOC_CLASSICAL_PARENTS;
  if (name == "triangle-classical-parents") return RC_PROGRAM_TRIANGLE_CLASSICAL_PARENTS;
  if (name == "biloc-embedded-bell") return RC_PROGRAM_BILOC_EMBEDDED_BELL;
  if (name == "triangle-embedded-bell") return RC_PROGRAM_TRIANGLE_EMBEDDED_BELL;
  return std::nullopt;
}

int cmd_certify_no_randomness(const Config& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const auto kind = program_kind(cfg.program);
  if (!kind) throw Failure{RC_ERR_INVALID_ARGUMENT, "unknown --program '" + cfg.program + "'"};
  TableHandle table;
  load_table(cfg, table);
  const std::string fp = table_fingerprint(table.ptr);

  const auto names = split(cfg.target);
  int party = 2;
  const char* cover = nullptr;
  if (*kind == RC_PROGRAM_TRIANGLE_CLASSICAL_PARENTS && !names.empty()) {
    if (names.size() != 1 || names[0].size() != 1 || names[0][0] < 'A' || names[0][0] > 'C')
      throw Failure{RC_ERR_UNKNOWN_PARTY, "triangle-classical-parents certifies one party among A, B, C"};
    party = names[0][0] - 'A';
  } else if (*kind == RC_PROGRAM_BILOC_CLASSICAL_PARENTS && !names.empty()) {
    if (names != std::vector<std::string>{"C"})
      throw Failure{RC_ERR_UNKNOWN_PARTY, "biloc-classical-parents certifies party C"};
  } else if (!names.empty() && names != std::vector<std::string>{"B"}) {
    cover = cfg.target.c_str();
  }

  CertHandle cert;
  check(rc_certify_no_randomness(table.ptr, *kind, cfg.hidden_card, party, cover, cfg.restarts, cfg.seed,
                                 &cert.ptr));
  char* text = nullptr;
  check(rc_certificate_report(cert.ptr, fp.c_str(), cfg.seed, seconds_since(start), &text));
  emit(cfg, take(text));
  return kOk;
}

int cmd_list_inflations(const Config& cfg) {
  NetworkHandle net;
  load_network(cfg, net);
  char* text = nullptr;
  check(rc_list_inflations(net.ptr, guess_targets(cfg).c_str(), cfg.level.c_str(), cfg.joint, &text));
  emit(cfg, take(text));
  return kOk;
}

int cmd_export_lp(const Config& cfg) {
  if (cfg.out.empty()) throw Failure{RC_ERR_INVALID_ARGUMENT, "--out is required"};
  TableHandle table;
  load_table(cfg, table);
  ProgramHandle program;
  if (cfg.program.empty() || cfg.program == "guessing") {
    NetworkHandle net;
    load_network(cfg, net, table.ptr);
    const int* settings = settings_or_null(cfg, net.ptr);
    if (!settings) throw Failure{RC_ERR_INVALID_ARGUMENT, "exporting a guessing program needs --settings"};
    check(rc_program_guessing(table.ptr, net.ptr, guess_targets(cfg).c_str(), settings, cfg.level.c_str(), cfg.joint,
                              &program.ptr));
  } else if (cfg.program == "biloc-classical-parents") {
    check(rc_program_biloc_charlie(table.ptr, &program.ptr));
  } else {
    throw Failure{RC_ERR_INVALID_ARGUMENT, "only linear programs export; got --program '" + cfg.program + "'"};
  }
  check(rc_program_export_mps(program.ptr, cfg.out.c_str()));
  std::cerr << "wrote " << cfg.out << ": " << rc_program_num_vars(program.ptr) << " variables, "
            << rc_program_num_rows(program.ptr) << " rows\n";
  return kOk;
}

void write_error_report(const Config& cfg, const std::string& command, const Failure& f) {
  if (cfg.out.empty() || command == "gen-dist" || command == "export-lp") return;
  json j;
  j["program"] = command;
  j["status"] = "error";
  j["error"] = rc_status_name(f.status);
  j["message"] = f.message;
  j["seed"] = cfg.seed;
  rc_write_file_atomically(cfg.out.c_str(), (j.dump(2) + "\n").c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomness certification in network causal scenarios"};
  app.require_subcommand(1);
  Config cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Output path (stdout when omitted)");
    sub->add_option("--seed", cfg.seed, "Seed recorded in reports and used by randomized searches");
  };
  auto certify_flags = [&](CLI::App* sub) {
    sub->add_option("--dist", cfg.dist, "Distribution file or built-in generator name");
    sub->add_option("--target", cfg.target, "Target parties, comma separated");
    sub->add_option("--tol", cfg.tol, "Verification tolerance");
  };

  auto* gen = app.add_subcommand("gen-dist", "Write a built-in distribution");
  gen->add_option("name", cfg.name, "Generator name")->required();
  gen->add_option("--params", cfg.params, "Generator parameters")->delimiter(',');
  common(gen);

  auto* rand = app.add_subcommand("certify-randomness", "Upper-bound the guessing probability");
  common(rand);
  certify_flags(rand);
  rand->add_option("--network", cfg.network, "Network file or built-in name (bell, bilocality, triangle)");
  rand->add_option("--level", cfg.level, "Inflation level, e.g. 2,2");
  rand->add_flag("--joint", cfg.joint, "Bound the joint guess of all targets");
  rand->add_option("--settings", cfg.settings, "One setting per party (worst case when omitted)")->delimiter(',');
  rand->add_option("--backend", cfg.backend, "reference or export")->check(CLI::IsMember({"reference", "export"}));
  rand->add_option("--solution", cfg.solution, "External solution file for the export backend");

  auto* norand = app.add_subcommand("certify-no-randomness", "Search for a model that predicts a party");
  common(norand);
  certify_flags(norand);
  norand->add_option("--program", cfg.program,
                     "biloc-classical-parents, triangle-classical-parents, biloc-embedded-bell or "
                     "triangle-embedded-bell")
      ->required();
  norand->add_option("--hidden-card", cfg.hidden_card, "Cardinality d of the hidden classical source");
  norand->add_option("--restarts", cfg.restarts, "Restarts of the bilinear search");
  norand->add_option("--backend", cfg.backend, "reference")->check(CLI::IsMember({"reference"}));

  auto* list = app.add_subcommand("list-inflations", "List inflations of the interrupted scenario");
  common(list);
  list->add_option("--network", cfg.network, "Network file or built-in name")->required();
  list->add_option("--target", cfg.target, "Target parties, comma separated");
  list->add_option("--level", cfg.level, "Inflation level, e.g. 2,2");
  list->add_flag("--joint", cfg.joint, "Joint guessing scenario");

  auto* exp = app.add_subcommand("export-lp", "Write a linear program in MPS format");
  common(exp);
  certify_flags(exp);
  exp->add_option("--network", cfg.network, "Network file or built-in name");
  exp->add_option("--level", cfg.level, "Inflation level, e.g. 2,2");
  exp->add_flag("--joint", cfg.joint, "Joint guessing program");
  exp->add_option("--settings", cfg.settings, "One setting per party")->delimiter(',');
  exp->add_option("--program", cfg.program, "guessing (default) or biloc-classical-parents");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }

  std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "gen-dist") return cmd_gen_dist(cfg);
    if (command == "certify-randomness") return cmd_certify_randomness(cfg);
    if (command == "certify-no-randomness") return cmd_certify_no_randomness(cfg);
    if (command == "list-inflations") return cmd_list_inflations(cfg);
    return cmd_export_lp(cfg);
  } catch (const Failure& f) {
    std::cerr << "error: " << rc_status_name(f.status) << ": " << f.message << "\n";
    write_error_report(cfg, command, f);
    return exit_code(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolver;
  }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "randcert/randcert.h"

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("randcert_capi_" + name)).string();
}

}  // namespace

TEST_CASE("c api status names and errors") {
  CHECK(std::string(rc_status_name(RC_OK)) == "ok");
  CHECK(std::string(rc_status_name(RC_ERR_UNKNOWN_DISTRIBUTION)) == "UnknownDistribution");
  rc_table* t = nullptr;
  CHECK(rc_table_generate("nope", nullptr, 0, &t) == RC_ERR_UNKNOWN_DISTRIBUTION);
  CHECK(t == nullptr);
  CHECK(std::strlen(rc_last_error()) > 0);
  CHECK(rc_table_generate("fritz-bilocality", nullptr, 0, nullptr) == RC_ERR_INVALID_ARGUMENT);
  CHECK(rc_table_save(nullptr, "x") == RC_ERR_NULL_HANDLE);
  rc_network* n = nullptr;
  CHECK(rc_network_builtin("square", 2, &n) == RC_ERR_INVALID_ARGUMENT);
  CHECK(rc_network_load("/nonexistent/net.json", &n) == RC_ERR_IO);
  CHECK(rc_network_parse("{", &n) == RC_ERR_PARSE);
}

TEST_CASE("c api tables") {
  rc_table* t = nullptr;
  REQUIRE(rc_table_generate("fritz-bilocality", nullptr, 0, &t) == RC_OK);
  CHECK(std::string(rc_last_error()).empty());
  CHECK(rc_table_num_values(t) == 32);
  CHECK(rc_table_num_parties(t) == 3);
  CHECK(rc_table_setting_card(t, 1) == 1);
  CHECK(std::abs(rc_table_values(t)[0] - (2 + std::sqrt(2.0)) / 16) <= 1e-12);

  char fp[32];
  REQUIRE(rc_table_fingerprint(t, fp, sizeof fp) == RC_OK);
  char small[4];
  CHECK(rc_table_fingerprint(t, small, sizeof small) == RC_ERR_INVALID_ARGUMENT);

  const std::string path = temp_path("fritz.json");
  REQUIRE(rc_table_save(t, path.c_str()) == RC_OK);
  rc_table* back = nullptr;
  REQUIRE(rc_table_load(path.c_str(), &back) == RC_OK);
  char fp2[32];
  REQUIRE(rc_table_fingerprint(back, fp2, sizeof fp2) == RC_OK);
  CHECK(std::string(fp) == std::string(fp2));
  std::filesystem::remove(path);

  const int oc[2] = {2, 2}, sc[2] = {1, 1};
  const double bad[4] = {0.5, 0.5, 0.5, 0.5};
  rc_table* made = nullptr;
  REQUIRE(rc_table_create(2, oc, sc, bad, 4, &made) == RC_OK);
  rc_network* bell = nullptr;
  REQUIRE(rc_network_builtin("bell", 2, &bell) == RC_OK);
  rc_bound* b = nullptr;
  CHECK(rc_guessing_bound(made, bell, "A", nullptr, "1", 0, &b) != RC_OK);
  CHECK(b == nullptr);
  rc_network_free(bell);
  rc_table_free(made);

  double pr[3] = {0.9, 0.9, -0.9};
  rc_table* neg = nullptr;
  CHECK(rc_table_generate("pr-triangle", pr, 3, &neg) == RC_ERR_INVALID_PARAMS);

  rc_table_free(back);
  rc_table_free(t);
}

TEST_CASE("c api bounds, inflations and programs") {
  rc_table* t = nullptr;
  rc_network* n = nullptr;
  REQUIRE(rc_table_generate("entanglement-swapping", nullptr, 0, &t) == RC_OK);
  REQUIRE(rc_network_builtin("bilocality", 2, &n) == RC_OK);

  rc_bound* b = nullptr;
  REQUIRE(rc_guessing_bound(t, n, "A", nullptr, "1,1", 0, &b) == RC_OK);
  CHECK(rc_bound_lp_status(b) == RC_LP_OPTIMAL);
  CHECK(rc_bound_value(b) <= 1.0 + 1e-8);
  CHECK(rc_bound_inflations(b) == 1);
  char* json = nullptr;
  REQUIRE(rc_bound_report(b, "fp", 1, 0.0, nullptr, &json) == RC_OK);
  CHECK(std::string(json).find("\"backend\": \"reference\"") != std::string::npos);
  rc_string_free(json);
  rc_bound_free(b);

  char* listing = nullptr;
  REQUIRE(rc_list_inflations(n, "A", "2,2", 0, &listing) == RC_OK);
  const std::string text = listing;
  rc_string_free(listing);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);

  const int settings[3] = {0, 0, 0};
  rc_program* p = nullptr;
  REQUIRE(rc_program_guessing(t, n, "A", settings, "1,1", 0, &p) == RC_OK);
  CHECK(rc_program_num_vars(p) > 0);
  rc_lp_status st;
  double obj = 0.0, res = 1.0;
  REQUIRE(rc_program_solve(p, &st, &obj, &res) == RC_OK);
  CHECK(st == RC_LP_OPTIMAL);
  const std::string mps = temp_path("es.mps");
  REQUIRE(rc_program_export_mps(p, mps.c_str()) == RC_OK);
  CHECK(std::filesystem::file_size(mps) > 0);
  std::filesystem::remove(mps);
  CHECK(rc_program_import_solution(p, "/nonexistent/x.sol", 1e-8, &st, &obj, &res) == RC_ERR_IO);
  rc_program_free(p);

  rc_certificate* c = nullptr;
  REQUIRE(rc_certify_no_randomness(t, RC_PROGRAM_BILOC_CLASSICAL_PARENTS, 1, 2, nullptr, 0, 0, &c) == RC_OK);
  CHECK(rc_certificate_verdict(c) == RC_DISPROVEN_BY_LP);
  rc_certificate_free(c);
  CHECK(rc_certify_no_randomness(t, RC_PROGRAM_TRIANGLE_CLASSICAL_PARENTS, 2, 2, nullptr, 0, 0, &c) ==
        RC_ERR_SHAPE_MISMATCH);

  rc_network_free(n);
  rc_table_free(t);
}

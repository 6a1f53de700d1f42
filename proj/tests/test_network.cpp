#include <doctest.h>

#include <functional>

#include "randcert/error.hpp"
#include "randcert/network.hpp"

using namespace randcert;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("built-in networks") {
  const Network bi = Network::bilocality();
  CHECK(bi.num_parties() == 3);
  CHECK(bi.num_sources() == 2);
  CHECK(bi.parents_of(bi.require_party("B")).size() == 2);
  CHECK(bi.setting_cards() == std::vector<int>{2, 1, 2});
  CHECK(validate(bi).empty());

  const Network tri = Network::triangle(4);
  CHECK(tri.num_sources() == 3);
  CHECK(tri.outcome_cards() == std::vector<int>{4, 4, 4});
  for (std::size_t p = 0; p < 3; ++p) CHECK(tri.parents_of(p).size() == 2);
  CHECK(validate(tri).empty());

  CHECK(validate(Network::bell()).empty());
}

TEST_CASE("text round trip") {
  for (const Network& n : {Network::bell(), Network::bilocality(), Network::triangle(3)}) {
    const Network back = parse_network(network_to_text(n));
    CHECK(back == n);
  }
  CHECK(code_of([] { parse_network("[1, 2"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { load_network("/nonexistent/network.json"); }) == ErrorCode::IoError);
}

TEST_CASE("validation reports broken structures") {
  const Network orphan({{"A", 2, 1}, {"B", 2, 1}}, {{"S", {"A"}}});
  CHECK_FALSE(validate(orphan).empty());
  const Network dangling({{"A", 2, 1}}, {{"S", {"A", "Z"}}});
  CHECK_FALSE(validate(dangling).empty());
}

TEST_CASE("eavesdropper attachment") {
  const Network bi = Network::bilocality();
  const EveScenario sc = attach_eavesdropper(bi, {"C", "A"}, true);
  CHECK(sc.targets == std::vector<std::size_t>{0, 2});
  CHECK(sc.eve_outcome_card == 4);
  CHECK_FALSE(sc.interrupted);

  const EveScenario single = attach_eavesdropper(bi, {"B"}, false);
  CHECK(single.eve_outcome_card == 2);
  CHECK(single.eve_composite_setting_card() == 4);
  const EveScenario cut = interrupt(single);
  CHECK(cut.interrupted);
  CHECK(cut.setting_variables().size() > single.setting_variables().size());

  CHECK(code_of([&] { interrupt(cut); }) == ErrorCode::AlreadyInterrupted);
  CHECK(code_of([&] { attach_eavesdropper(bi, {"Q"}, false); }) == ErrorCode::UnknownParty);
  CHECK(code_of([&] { attach_eavesdropper(bi, {"A", "C"}, false); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { attach_eavesdropper(bi, {}, false); }) == ErrorCode::InvalidArgument);
}

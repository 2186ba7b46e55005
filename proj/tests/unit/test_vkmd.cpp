#include <random>
#include <sstream>

#include "doctest.h"
#include "vkn/vkmd.hpp"

using namespace vkn;

namespace {

// Random valid descriptions for round-trip checks.
ModelDescription random_description(std::mt19937& rng) {
  static const std::vector<std::string> type_pool = {
      "Road.Traffic",       "Road.Visibility", "TwoWheelers.Concentration",
      "Road.ComfortLevel",  "Vehicle.Speed",   "Weather.Forecast.Rain",
      "Parking.Occupancy",  "Route.TravelTime"};
  std::uniform_int_distribution<int> n_inputs(1, 5), n_outputs(1, 3), n_pre(0, 3);
  std::uniform_int_distribution<std::size_t> type_at(0, type_pool.size() - 1);
  std::uniform_int_distribution<int> seg_count(1, 3), ident_len(1, 8);
  std::uniform_int_distribution<int> threshold(1, 1000000);
  auto ident = [&](int salt) {
    static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz";
    std::string s(1, alphabet[static_cast<std::size_t>(salt) % 26]);
    int len = ident_len(rng);
    for (int i = 0; i < len; ++i)
      s += alphabet[static_cast<std::size_t>(rng()) % alphabet.size()];
    return s;
  };
  ModelDescription d;
  d.model_id = ident(0);
  int extra_segments = seg_count(rng) - 1;
  for (int i = 0; i < extra_segments; ++i) d.model_id += "." + ident(i + 1);
  int ni = n_inputs(rng), no = n_outputs(rng);
  for (int i = 0; i < ni; ++i)
    d.inputs.push_back({"in" + std::to_string(i) + ident(i), parse_semantic_name(type_pool[type_at(rng)])});
  for (int i = 0; i < no; ++i)
    d.outputs.push_back({"out" + std::to_string(i) + ident(i), parse_semantic_name(type_pool[type_at(rng)])});
  int np = n_pre(rng);
  for (int i = 0; i < np; ++i) {
    std::uniform_int_distribution<std::size_t> input_at(0, d.inputs.size() - 1);
    d.preconditions.push_back(
        {PreconditionKind::max_age, d.inputs[input_at(rng)].param_id, threshold(rng)});
  }
  return d;
}

}  // namespace

TEST_CASE("comfort model file parses to the expected description") {
  ModelDescription desc = load_vkmd_file(std::string(VKN_DATA_DIR) + "/models/env_comfort.vkmd");
  CHECK(desc.model_id == "model.env_comfort");
  REQUIRE(desc.inputs.size() == 3);
  CHECK(desc.inputs[0] == ParamBinding{"traffic", parse_semantic_name("Road.Traffic")});
  CHECK(desc.inputs[1] == ParamBinding{"visibility", parse_semantic_name("Road.Visibility")});
  CHECK(desc.inputs[2] ==
        ParamBinding{"twoWheelers", parse_semantic_name("TwoWheelers.Concentration")});
  REQUIRE(desc.outputs.size() == 1);
  CHECK(desc.outputs[0] == ParamBinding{"comfort", parse_semantic_name("Road.ComfortLevel")});
  CHECK(desc.preconditions.empty());
}

TEST_CASE("minimal description and its canonical text") {
  ModelDescription desc = parse_vkmd("model m\ninput x: Road.Traffic\noutput y: Road.ComfortLevel\n");
  CHECK(desc.inputs.size() == 1);
  CHECK(desc.outputs.size() == 1);

  std::string canonical = serialize_vkmd(desc);
  CHECK(canonical == "model m\ninput x : Road.Traffic\noutput y : Road.ComfortLevel\n");
  // trailing newline: splitting on '\n' yields 4 parts, the last empty
  int parts = 1;
  for (char c : canonical) parts += c == '\n';
  CHECK(parts == 4);
  CHECK(canonical.back() == '\n');
  CHECK(parse_vkmd(canonical) == desc);
}

TEST_CASE("token spacing and comments are tolerated") {
  ModelDescription a = parse_vkmd("model m\ninput x : Road.Traffic\noutput y : Road.ComfortLevel\n");
  ModelDescription b = parse_vkmd(
      "# heading\n"
      "model   m\n"
      "\n"
      "input x:Road.Traffic   # inline\n"
      "output   y  :  Road.ComfortLevel\n");
  CHECK(a == b);
}

TEST_CASE("parse errors carry a useful location") {
  // dangling precondition
  CHECK_THROWS_AS(parse_vkmd("model m\n"
                             "input x : Road.Traffic\n"
                             "output y : Road.ComfortLevel\n"
                             "precondition max_age z 100\n"),
                  DanglingPrecondition);
  try {
    parse_vkmd("model m\ninput x : Road.Traffic\noutput y : Road.ComfortLevel\n"
               "precondition max_age z 100\n");
  } catch (const DanglingPrecondition& e) {
    CHECK(e.param_id == "z");
    CHECK(e.line == 4);
  }

  CHECK_THROWS_AS(parse_vkmd("model m\ninput x : Road.Traffic\ninput x : Road.Visibility\n"
                             "output y : Road.ComfortLevel\n"),
                  DuplicateParam);
  CHECK_THROWS_AS(parse_vkmd("model m\ninput x : Road.Traffic\noutput x : Road.ComfortLevel\n"),
                  DuplicateParam);
  CHECK_THROWS_AS(parse_vkmd("model m\noutput y : Road.ComfortLevel\n"), MissingSection);
  CHECK_THROWS_AS(parse_vkmd("model m\ninput x : Road.Traffic\n"), MissingSection);
  CHECK_THROWS_AS(parse_vkmd(""), VkmdSyntaxError);
  CHECK_THROWS_AS(parse_vkmd("input x : Road.Traffic\n"), VkmdSyntaxError);
  CHECK_THROWS_AS(parse_vkmd("model m\nfrobnicate\n"), VkmdSyntaxError);
  CHECK_THROWS_AS(parse_vkmd("model m\ninput x : Road.Traffic\n"
                             "output y : Road.ComfortLevel\ninput z : Road.Visibility\n"),
                  VkmdSyntaxError);
  CHECK_THROWS_AS(parse_vkmd("model m\ninput x : Road..Traffic\noutput y : Road.ComfortLevel\n"),
                  VkmdSyntaxError);
  CHECK_THROWS_AS(parse_vkmd("model m\ninput x : Road.Traffic\n"
                             "output y : Road.ComfortLevel\nprecondition max_age x -5\n"),
                  VkmdSyntaxError);
}

TEST_CASE("syntax error line is the line that breaks the parse") {
  std::string good = "model m\ninput x : Road.Traffic\noutput y : Road.ComfortLevel\n";
  std::string bad = "model m\ninput x : Road.Traffic\nbogus line here\noutput y : Road.ComfortLevel\n";
  try {
    parse_vkmd(bad);
    FAIL("expected a syntax error");
  } catch (const VkmdSyntaxError& e) {
    CHECK(e.line == 3);
    CHECK(e.column == 1);
  }
  // removing the offending line makes the text parse
  CHECK_NOTHROW(parse_vkmd(good));
}

TEST_CASE("error locality: a bogus line is reported at its own position") {
  std::mt19937 rng(7101);
  for (int round = 0; round < 100; ++round) {
    ModelDescription d = random_description(rng);
    std::string text = serialize_vkmd(d);
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);

    // splice an unparseable line at a random position after the model line
    std::size_t at = 1 + rng() % lines.size();
    std::vector<std::string> corrupted = lines;
    corrupted.insert(corrupted.begin() + static_cast<long>(at), "!! not a declaration");
    std::string joined;
    for (const auto& l : corrupted) joined += l + "\n";

    try {
      parse_vkmd(joined);
      FAIL("expected a syntax error");
    } catch (const VkmdSyntaxError& e) {
      CHECK(e.line == static_cast<int>(at) + 1);  // 1-based
    }
    // removing it restores the original parse
    CHECK(parse_vkmd(text) == d);
  }
}

TEST_CASE("precondition serialization") {
  ModelDescription desc = parse_vkmd(
      "model m\ninput traffic : Road.Traffic\noutput y : Road.ComfortLevel\n"
      "precondition max_age traffic 60000\n");
  REQUIRE(desc.preconditions.size() == 1);
  CHECK(desc.preconditions[0] == Precondition{PreconditionKind::max_age, "traffic", 60000});
  std::string text = serialize_vkmd(desc);
  CHECK(text.find("precondition max_age traffic 60000\n") != std::string::npos);
}

TEST_CASE("parse determinism and round-trip on random descriptions") {
  std::mt19937 rng(7100);
  for (int i = 0; i < 300; ++i) {
    ModelDescription d = random_description(rng);
    std::string text = serialize_vkmd(d);
    ModelDescription once = parse_vkmd(text);
    ModelDescription twice = parse_vkmd(text);
    CHECK(once == d);
    CHECK(once == twice);
  }
}

TEST_CASE("validate_description reports unknown type names in input order") {
  SemanticRegistry reg = default_registry();
  ModelDescription good = load_vkmd_file(std::string(VKN_DATA_DIR) + "/models/env_comfort.vkmd");
  CHECK(validate_description(good, reg).empty());

  ModelDescription one_bad = parse_vkmd("model m\ninput a : Foo.Bar\noutput y : Road.ComfortLevel\n");
  auto issues = validate_description(one_bad, reg);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].param_id == "a");
  CHECK(issues[0].type_name.str() == "Foo.Bar");
  CHECK(issues[0].reason == "UnknownTypeName");

  // both bad bindings reported, declaration order (manual enumeration: a then out)
  ModelDescription two_bad = parse_vkmd("model m\ninput a : Foo.Bar\ninput b : Road.Traffic\n"
                                        "output out : Baz.Qux\n");
  issues = validate_description(two_bad, reg);
  REQUIRE(issues.size() == 2);
  CHECK(issues[0].param_id == "a");
  CHECK(issues[1].param_id == "out");
}

#include <random>

#include "doctest.h"
#include "vkn/semantic.hpp"

using namespace vkn;

TEST_CASE("semantic name parsing") {
  CHECK(parse_semantic_name("Road.Traffic").segments == std::vector<std::string>{"Road", "Traffic"});
  CHECK(parse_semantic_name("A").segments == std::vector<std::string>{"A"});
  CHECK(parse_semantic_name("a_1.b2.C3").str() == "a_1.b2.C3");
  CHECK_THROWS_AS(parse_semantic_name("Road..Traffic"), MalformedName);
  CHECK_THROWS_AS(parse_semantic_name(""), MalformedName);
  CHECK_THROWS_AS(parse_semantic_name(".Road"), MalformedName);
  CHECK_THROWS_AS(parse_semantic_name("Road."), MalformedName);
  CHECK_THROWS_AS(parse_semantic_name("Road.Tra ffic"), MalformedName);
  CHECK_THROWS_AS(parse_semantic_name("9Road"), MalformedName);
  CHECK_THROWS_AS(parse_semantic_name("Road.-x"), MalformedName);
}

TEST_CASE("semantic name round-trip on random valid names") {
  std::mt19937 rng(7001);
  std::uniform_int_distribution<int> seg_count(1, 4), seg_len(1, 10), pick(0, 61);
  auto rand_segment = [&] {
    static const std::string first = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
    static const std::string rest = first + "0123456789_";
    std::string s(1, first[static_cast<std::size_t>(pick(rng)) % first.size()]);
    int len = seg_len(rng);
    for (int i = 1; i < len; ++i) s += rest[static_cast<std::size_t>(pick(rng)) % rest.size()];
    return s;
  };
  for (int i = 0; i < 500; ++i) {
    std::string text = rand_segment();
    int extra = seg_count(rng) - 1;
    for (int s = 0; s < extra; ++s) text += "." + rand_segment();
    CHECK(parse_semantic_name(text).str() == text);
  }
}

TEST_CASE("value domains") {
  ValueDomain traffic = symbolic_domain({"FLUID", "CONGESTED"});
  CHECK(traffic.contains(Value{std::string("FLUID")}));
  CHECK_FALSE(traffic.contains(Value{std::string("GOOD")}));
  CHECK_FALSE(traffic.contains(Value{3.0}));

  ValueDomain speed = numeric_domain("kph");
  CHECK(speed.contains(Value{30.0}));
  CHECK_FALSE(speed.contains(Value{std::string("FAST")}));

  CHECK_THROWS_AS(symbolic_domain({"ONLY"}), VknError);
  CHECK_THROWS_AS(symbolic_domain({"A", "A"}), VknError);
  CHECK_THROWS_AS(symbolic_domain({"ok", "BAD"}), VknError);
}

TEST_CASE("registry lookup and validation") {
  SemanticRegistry reg = default_registry();
  CHECK(reg.size() == 4);
  CHECK(reg.lookup(parse_semantic_name("Road.Traffic")).symbols ==
        std::vector<std::string>{"FLUID", "CONGESTED"});
  CHECK(reg.lookup(parse_semantic_name("Road.Visibility")).symbols ==
        std::vector<std::string>{"CLEAR", "OBSTRUCTED"});
  CHECK(reg.lookup(parse_semantic_name("TwoWheelers.Concentration")).symbols ==
        std::vector<std::string>{"HIGH", "MEDIUM", "LOW"});
  CHECK(reg.lookup(parse_semantic_name("Road.ComfortLevel")).symbols ==
        std::vector<std::string>{"GOOD", "FAIR", "POOR"});

  CHECK(validate_value(reg, parse_semantic_name("Road.Traffic"), std::string("FLUID")));
  CHECK_FALSE(validate_value(reg, parse_semantic_name("Road.Traffic"), std::string("GOOD")));
  CHECK_THROWS_AS(validate_value(reg, parse_semantic_name("Unknown.Name"), std::string("FLUID")),
                  UnknownName);
  CHECK_THROWS_AS(reg.register_name(parse_semantic_name("Road.Traffic"),
                                    symbolic_domain({"A", "B"})),
                  DuplicateName);
}

TEST_CASE("registry file format") {
  SemanticRegistry reg = parse_registry(
      "# comment\n"
      "Road.Traffic = FLUID|CONGESTED\n"
      "\n"
      "Vehicle.Speed : kph  # trailing comment\n");
  CHECK(reg.size() == 2);
  CHECK(reg.lookup(parse_semantic_name("Road.Traffic")).kind == DomainKind::symbolic);
  CHECK(reg.lookup(parse_semantic_name("Vehicle.Speed")).kind == DomainKind::numeric);
  CHECK(reg.lookup(parse_semantic_name("Vehicle.Speed")).unit == "kph");

  CHECK_THROWS_AS(parse_registry("Road.Traffic = A|B\nRoad.Traffic = C|D\n"), RegistryFormatError);
  CHECK_THROWS_AS(parse_registry("Road.Traffic\n"), RegistryFormatError);
  CHECK_THROWS_AS(parse_registry("Bad..Name = A|B\n"), RegistryFormatError);
}

TEST_CASE("checked-in default registry matches the built-in") {
  SemanticRegistry file = load_registry_file(std::string(VKN_DATA_DIR) + "/registry/default.reg");
  CHECK(file.entries() == default_registry().entries());
}

TEST_CASE("time intervals") {
  TimeInterval i{0, 10};
  CHECK(i.contains(0));
  CHECK(i.contains(10));
  CHECK_FALSE(i.contains(11));
  CHECK_FALSE(i.contains(-1));

  CHECK(intersect({0, 10}, {10, 20}) == TimeInterval{10, 10});
  CHECK(intersect({0, 30}, {10, 20}) == TimeInterval{10, 20});
  CHECK_FALSE(intersect({0, 10}, {20, 30}).has_value());

  std::mt19937 rng(7002);
  std::uniform_int_distribution<std::int64_t> t(-100, 100);
  for (int k = 0; k < 300; ++k) {
    std::int64_t a1 = t(rng), a2 = t(rng), b1 = t(rng), b2 = t(rng);
    TimeInterval a{std::min(a1, a2), std::max(a1, a2)};
    TimeInterval b{std::min(b1, b2), std::max(b1, b2)};
    auto both = intersect(a, b);
    for (std::int64_t x = -100; x <= 100; ++x) {
      bool expect = a.contains(x) && b.contains(x);
      bool got = both && both->contains(x);
      CHECK(expect == got);
    }
  }
}

TEST_CASE("content item construction enforces the domain") {
  SemanticRegistry reg = default_registry();
  SemanticName traffic = parse_semantic_name("Road.Traffic");
  RegionId region{"A"};

  ContentItem ok = make_information(reg, "i1", traffic, std::string("FLUID"), region, {0, 1000}, 3,
                                    2048);
  CHECK(validate_value(reg, ok.name, ok.value));
  CHECK(ok.kind == ContentKind::information);

  CHECK_THROWS_AS(
      make_information(reg, "i2", traffic, std::string("GOOD"), region, {0, 1000}, 3, 2048),
      InvalidItem);
  CHECK_THROWS_AS(
      make_information(reg, "i3", traffic, std::string("FLUID"), region, {0, 1000}, 5, 2048),
      InvalidItem);
  CHECK_THROWS_AS(
      make_information(reg, "i4", traffic, std::string("FLUID"), region, {0, 1000}, 0, 2048),
      InvalidItem);
  CHECK_THROWS_AS(
      make_information(reg, "i5", traffic, std::string("FLUID"), region, {0, 1000}, 3, 0),
      InvalidItem);
  CHECK_THROWS_AS(
      make_information(reg, "i6", traffic, std::string("FLUID"), region, {1000, 0}, 3, 2048),
      InvalidItem);
  CHECK_THROWS_AS(make_information(reg, "i7", parse_semantic_name("Not.There"),
                                   std::string("FLUID"), region, {0, 1000}, 3, 2048),
                  UnknownName);

  // knowledge <-> provenance pairing
  Provenance prov{"model.env_comfort", {"i1"}};
  ContentItem sample = make_knowledge(reg, "k1", parse_semantic_name("Road.ComfortLevel"),
                                      std::string("GOOD"), region, {0, 1000}, 3, 128, prov);
  CHECK(sample.kind == ContentKind::knowledge);
  CHECK_THROWS_AS(make_knowledge(reg, "k2", parse_semantic_name("Road.ComfortLevel"),
                                 std::string("GOOD"), region, {0, 1000}, 3, 128, Provenance{}),
                  InvalidItem);
}

TEST_CASE("random valid constructions always satisfy validate_value") {
  SemanticRegistry reg = default_registry();
  std::mt19937 rng(7003);
  std::vector<std::pair<SemanticName, std::vector<std::string>>> domains;
  for (const auto& [name, domain] : reg.entries()) domains.emplace_back(name, domain.symbols);
  std::uniform_int_distribution<std::size_t> which(0, domains.size() - 1);
  for (int i = 0; i < 200; ++i) {
    const auto& [name, symbols] = domains[which(rng)];
    std::uniform_int_distribution<std::size_t> sym(0, symbols.size() - 1);
    ContentItem item = make_information(reg, "r" + std::to_string(i), name, symbols[sym(rng)],
                                        RegionId{"A"}, {0, 50}, 1 + static_cast<int>(i % 4), 1 + i);
    CHECK(validate_value(reg, item.name, item.value));
  }
}

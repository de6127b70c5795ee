#include <string>

#include "doctest.h"
#include "trimarket/case_gen.hpp"
#include "trimarket/case_io.hpp"
#include "trimarket/types.hpp"

using namespace trimarket;

namespace {

const char* kMinimalCase = R"({
  "network": {"buses": 1, "slack_bus": 1, "lines": []},
  "gens": [{"bus": 1, "energy_price": 10.0, "reserve_price": 2.0,
            "p_min": 0.0, "p_max": 100.0, "r_max": 0.0}],
  "bids": [{"bus": 1, "energy_price": 20.0, "reserve_price": 0.0,
            "p_min": 0.0, "p_max": 50.0, "r_max": 0.0, "strategic": false}],
  "areas": [],
  "caps": {"alpha_min": 0.0, "alpha_max": 100.0, "beta_min": 0.0, "beta_max": 50.0},
  "reserve_req": 0.0
})";

}  // namespace

TEST_CASE("minimal one-bus case loads") {
  Case c = load_case(kMinimalCase);
  CHECK(c.n_buses() == 1);
  CHECK(c.n_lines() == 0);
  CHECK(c.n_gens() == 1);
  CHECK(c.n_bids() == 1);
  CHECK(validate_case(c).empty());
}

TEST_CASE("gen with p_min above p_max is rejected naming the offer") {
  std::string text = kMinimalCase;
  auto pos = text.find("\"p_min\": 0.0, \"p_max\": 100.0");
  text.replace(pos, std::string("\"p_min\": 0.0, \"p_max\": 100.0").size(),
               "\"p_min\": 120.0, \"p_max\": 100.0");
  CHECK_THROWS_WITH_AS(load_case(text), doctest::Contains("gens[0]"), CaseFormatError);
}

TEST_CASE("unknown keys are rejected with their path") {
  std::string text = kMinimalCase;
  text.insert(text.rfind('}'), ", \"extra\": 1");
  CHECK_THROWS_WITH_AS(load_case(text), doctest::Contains("unknown key"), CaseFormatError);
}

TEST_CASE("parse errors carry context") {
  CHECK_THROWS_WITH_AS(load_case("{ not json"), doctest::Contains("parse error"),
                       CaseFormatError);
}

TEST_CASE("validate flags a strategic bid without an area") {
  Case c = load_case(kMinimalCase);
  c.lse_bids[0].strategic = true;
  auto diags = validate_case(c);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].find("bids[0]") != std::string::npos);
}

TEST_CASE("validate flags loss factor out of range") {
  Case c = load_case(kMinimalCase);
  c.loss_factors = {1.0};
  auto diags = validate_case(c);
  REQUIRE(!diags.empty());
  CHECK(diags[0].find("loss factor out of range") != std::string::npos);
}

TEST_CASE("serialize then load round-trips field for field") {
  GenSpec spec = GenSpec::ieee9_smallsys();
  Case c = generate_case(spec, 42u);
  std::string text = serialize_case(c);
  Case c2 = load_case(text);
  CHECK(c2.n_buses() == c.n_buses());
  REQUIRE(c2.n_lines() == c.n_lines());
  for (int l = 0; l < c.n_lines(); ++l) {
    CHECK(c2.lines[static_cast<std::size_t>(l)].reactance ==
          c.lines[static_cast<std::size_t>(l)].reactance);
    CHECK(c2.lines[static_cast<std::size_t>(l)].flow_limit ==
          c.lines[static_cast<std::size_t>(l)].flow_limit);
  }
  REQUIRE(c2.n_gens() == c.n_gens());
  for (int g = 0; g < c.n_gens(); ++g) {
    CHECK(c2.gen_offers[static_cast<std::size_t>(g)].energy_price ==
          c.gen_offers[static_cast<std::size_t>(g)].energy_price);
    CHECK(c2.gen_offers[static_cast<std::size_t>(g)].reserve_price ==
          c.gen_offers[static_cast<std::size_t>(g)].reserve_price);
  }
  REQUIRE(c2.n_areas() == c.n_areas());
  for (int k = 0; k < c.n_areas(); ++k) {
    const auto& a = c.areas[static_cast<std::size_t>(k)];
    const auto& a2 = c2.areas[static_cast<std::size_t>(k)];
    REQUIRE(a2.blocks.size() == a.blocks.size());
    for (std::size_t b = 0; b < a.blocks.size(); ++b) {
      CHECK(a2.blocks[b].benefit_price == a.blocks[b].benefit_price);
      CHECK(a2.blocks[b].x_max == a.blocks[b].x_max);
      CHECK(a2.blocks[b].y_max == a.blocks[b].y_max);
    }
  }
  // And the serialized text itself is stable.
  CHECK(serialize_case(c2) == text);
}

TEST_CASE("generation is deterministic per seed") {
  GenSpec spec = GenSpec::ieee9_smallsys();
  Case a = generate_case(spec, 7u);
  Case b = generate_case(spec, 7u);
  CHECK(serialize_case(a) == serialize_case(b));
  Case c = generate_case(spec, 8u);
  CHECK(serialize_case(a) != serialize_case(c));
}

TEST_CASE("generated cases always validate") {
  GenSpec spec = GenSpec::ieee9_smallsys();
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    Case c = generate_case(spec, seed);
    CHECK(validate_case(c).empty());
  }
}

TEST_CASE("small-system spec matches its published shape") {
  GenSpec spec = GenSpec::ieee9_smallsys();
  Case c = generate_case(spec, 3u);
  CHECK(c.n_buses() == 9);
  CHECK(c.n_lines() == 9);
  CHECK(c.n_gens() == 3);
  CHECK(c.n_bids() == 6);
  REQUIRE(c.n_areas() == 3);
  // 3 areas x 10 customers x 3 blocks
  CHECK(c.total_blocks() == 90);
  for (const auto& blk : c.areas[0].blocks) {
    CHECK(blk.benefit_price >= 34.0);
    CHECK(blk.benefit_price <= 36.0);
    CHECK(blk.reserve_cost_price >= 4.0);
    CHECK(blk.reserve_cost_price <= 6.0);
  }
  for (const auto& blk : c.areas[1].blocks) {
    CHECK(blk.benefit_price >= 35.0);
    CHECK(blk.benefit_price <= 37.0);
  }
  for (const auto& blk : c.areas[2].blocks) {
    CHECK(blk.benefit_price >= 36.0);
    CHECK(blk.benefit_price <= 38.0);
  }
  CHECK(c.caps.alpha_max == 100.0);
  CHECK(c.caps.beta_max == 50.0);
  CHECK(c.caps.alpha_min == 0.0);
  CHECK(c.caps.beta_min == 0.0);
  // generators at buses 1-3, strategic areas at 6,7,8, rivals at 4,5,9
  CHECK(c.gen_offers[0].bus == 1);
  CHECK(c.gen_offers[1].bus == 2);
  CHECK(c.gen_offers[2].bus == 3);
  CHECK(c.areas[0].bus == 6);
  CHECK(c.areas[1].bus == 7);
  CHECK(c.areas[2].bus == 8);
}

TEST_CASE("generator rejects an empty range") {
  GenSpec spec = GenSpec::ieee9_smallsys();
  spec.areas[0].c_range = {36.0, 34.0};
  CHECK_THROWS_AS(generate_case(spec, 1u), std::runtime_error);
}

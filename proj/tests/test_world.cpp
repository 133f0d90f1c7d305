#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "tempofleet/world.hpp"

using namespace tempofleet::world;

TEST_CASE("entities") {
  Scenario s = fixture("micro3");
  CHECK(entities(s, {0}).size() == 3);
  const auto coupled = entities(s, {0b11});
  REQUIRE(coupled.size() == 1);
  CHECK(coupled[0].kind == EntityKind::Coupled);
  CHECK(coupled[0].radius == doctest::Approx(0.3 + 2 * 0.5));

  const Scenario c1 = fixture("case1");
  const auto es = entities(c1, {0, 0});
  CHECK(es.size() == 5);
  // every robot and object appears exactly once
  const auto part = entities(c1, {0b001, 0b110});
  int robots = 0, objects = 0;
  for (const auto& e : part) {
    robots += set_size(e.robots);
    objects += e.object >= 0 ? 1 : 0;
  }
  CHECK(robots == 3);
  CHECK(objects == 2);
}

TEST_CASE("coupled radius and power predicate") {
  const Scenario c1 = fixture("case1");
  CHECK(coupled_radius(c1, 0, 0b011) == doctest::Approx(1.7));
  CHECK(coupled_radius(c1, 0, 0b001) == doctest::Approx(1.7));
  CHECK_THROWS(coupled_radius(c1, 0, 0));
  // object 2 needs 6; robots 1 and 3 have 2 + 4
  CHECK(lambda_check(c1, 1, 0b101));
  CHECK_FALSE(lambda_check(c1, 0, 0b001));
  CHECK_FALSE(lambda_check(c1, 0, 0));
  // monotone in the coalition
  for (int j = 0; j < 2; ++j)
    for (RobotSet a = 0; a < 8; ++a)
      for (int i = 0; i < 3; ++i)
        if (lambda_check(c1, j, a)) CHECK(lambda_check(c1, j, a | robot_bit(i)));
}

TEST_CASE("pack_spheres examples") {
  const Disk d{{1, 2}, 4};
  auto empty = pack_spheres(d, {});
  REQUIRE(empty);
  CHECK(empty->empty());
  auto one = pack_spheres(d, {1.0});
  REQUIRE(one);
  CHECK(((*one)[0] - d.center).norm() == 0.0);
  CHECK_FALSE(pack_spheres(d, {4.5}));
  CHECK(pack_spheres(d, {4.0}));
  std::vector<double> many(30, 2.0);
  CHECK_FALSE(pack_spheres(d, many));
}

TEST_CASE("pack_spheres soundness on random inputs") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int successes = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const Disk d{{U(rng) * 10 - 5, U(rng) * 10 - 5}, 1 + 4 * U(rng)};
    std::vector<double> radii(1 + rng() % 7);
    for (auto& r : radii) r = U(rng) * 1.5;
    auto pos = pack_spheres(d, radii);
    if (!pos) continue;
    ++successes;
    for (std::size_t a = 0; a < radii.size(); ++a) {
      CHECK(((*pos)[a] - d.center).norm() + radii[a] <= d.radius);
      for (std::size_t b = 0; b < a; ++b) CHECK(((*pos)[a] - (*pos)[b]).norm() >= radii[a] + radii[b]);
    }
  }
  CHECK(successes > 100);
}

TEST_CASE("place_in_region keeps clearance") {
  const Disk d{{0, 0}, 4};
  auto p = place_in_region(d, {}, 1.0, 0.0);
  REQUIRE(p);
  CHECK(p->norm() < 1e-12);
  const std::vector<Disk> fixed{{{0, 0}, 1.0}};
  auto q = place_in_region(d, fixed, 0.75, 0.05);
  REQUIRE(q);
  CHECK((*q).norm() - 1.0 - 0.75 >= 0.05);
  CHECK(4 - (*q).norm() - 0.75 >= 0.05);
  CHECK_FALSE(place_in_region(d, {{{0, 0}, 3.5}}, 1.0, 0.0));
}

TEST_CASE("labels") {
  const Scenario c1 = fixture("case1");
  CHECK(label_regions(c1, {0}, {1}) == Letter{"1-π1", "O1-π2"});
  CHECK(label_regions(c1, {}, {}).empty());
  CHECK(label_regions(c1, {0, 2, 3}, {1, 0}) == Letter{"1-π1", "2-π3", "3-π4", "O1-π2", "O2-π1"});
  CHECK_THROWS(label_regions(c1, {7}, {}));
  CHECK(c1.atom_universe().size() == 20);
}

TEST_CASE("scenario io and validation") {
  const Scenario c1 = fixture("case1");
  CHECK(c1.regions.size() == 4);
  CHECK(c1.robots[1].init_region == 2);
  CHECK(c1.robots[0].friction.kind == FrictionKind::Sinusoidal);
  CHECK(c1.robots[0].friction.bound() == doctest::Approx(2.5));
  const auto warnings = validate_scenario(c1, 1.0);
  CHECK(warnings.size() == 3);  // k_phi = 1 is not above 2.5 / 2 for the robots
  CHECK(validate_scenario(c1, 1.3).empty());

  const Scenario again = scenario_from_json(scenario_to_json(c1));
  CHECK(scenario_to_json(again) == scenario_to_json(c1));

  auto j = scenario_to_json(c1);
  j["regions"][1]["center"] = {88, -281};
  CHECK_THROWS_AS(validate_scenario(scenario_from_json(j)), ScenarioError);
  j = scenario_to_json(c1);
  j["robots"][0]["init_region"] = "pi3";
  CHECK(scenario_from_json(j).robots[0].init_region == 2);
  j["robots"][0]["init_region"] = 9;
  CHECK_THROWS_AS(scenario_from_json(j), ScenarioError);
  j = scenario_to_json(c1);
  j["obstacles"].push_back({{"center", {88, -280}}, {"radius", 1}});
  CHECK_THROWS_AS(validate_scenario(scenario_from_json(j)), ScenarioError);
}

TEST_CASE("sinusoidal friction respects its bound") {
  FrictionModel f{FrictionKind::Sinusoidal, 1.25, 0.5};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 x(U(rng), U(rng)), v(U(rng), U(rng));
    CHECK(f.force(x, v).norm() <= f.bound() * v.norm() + 1e-12);
  }
  const Vec2 x(1.0, 2.0), v(0.3, -0.4);
  const double s = 1.25 * std::sin(0.5 * 3.0);
  CHECK(f.force(x, v).x() == doctest::Approx(s * (std::exp(-0.3) + 1) * 0.3));
  CHECK(f.force(x, v).y() == doctest::Approx(s * (std::exp(-0.4) + 1) * -0.4));
}
